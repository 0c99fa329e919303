#pragma once

#include "gkc/kernel.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gkc {

/// Even, 2-periodic fold of the real line onto [0, 1]: w = x mod 2, min(w, 2 - w).
/// Evaluating f at fold(x) gives the even periodic extension of f.
double fold(double x);
std::vector<double> fold(Point x);

/// Binomial combination of Gaussians
///
///   K(x) = sum_{j=1}^{s} C(s,j) (-1)^{1-j} j^{-d} (2/(sigma^2 pi))^{d/2} exp(-2|x|^2 / (j sigma)^2),
///
/// which has unit mass for every order s and may be negative for s >= 2.
struct ConvKernelSpec {
    int order = 1;
    double sigma = 1.0;

    void validate() const;
};

/// Binomial order covering smoothness r: ceil(r), at least 1.
int order_for_smoothness(double r);

double conv_kernel(const ConvKernelSpec& spec, Point x);

/// Tensor trapezoid rule over the box |x - x'|_inf <= radius_factor * s * sigma.
struct ConvQuadrature {
    double nodes_per_sigma = 20.0;
    double radius_factor = 6.0;
    std::size_t max_nodes = 20'000'000; // per evaluation, all dimensions
};

using FieldFn = std::function<double(Point)>;

/// f0 = K * F where F is the even periodic extension of f from [0,1]^d.
class SmoothApproximant {
public:
    SmoothApproximant(FieldFn f, int dim, ConvKernelSpec spec, ConvQuadrature quad = {});

    double operator()(Point x) const;

    int dim() const noexcept { return dim_; }
    const ConvKernelSpec& spec() const noexcept { return spec_; }
    std::size_t nodes_per_axis() const noexcept { return offsets_.size(); }

private:
    FieldFn f_;
    int dim_;
    ConvKernelSpec spec_;
    // 1-D node offsets and, per binomial term j, the trapezoid-weighted 1-D kernel factors.
    std::vector<double> offsets_;
    std::vector<std::vector<double>> factors_;
    std::vector<double> coeffs_;
};

/// Throws NumericalFailure when the tensor grid exceeds quad.max_nodes.
SmoothApproximant smooth_approximant(FieldFn f, int dim, const ConvKernelSpec& spec, const ConvQuadrature& quad = {});

/// Quadrature of K over the truncation box; 1 up to truncation and rule error.
double kernel_mass(const ConvKernelSpec& spec, int dim, const ConvQuadrature& quad = {});

/// Upper bound pi^{-d/4} (2^s - 1) sigma^{-d/2} f_sup on the RKHS norm of f0.
double rkhs_norm_bound(const ConvKernelSpec& spec, int dim, double f_sup);

/// max over grid points of |f - f0|.
double sup_error(const FieldFn& f, const FieldFn& f0, const PointSet& grid);

/// n points per axis on [0, 1]^d, endpoints included.
PointSet uniform_grid(int dim, std::size_t per_axis);

struct SweepRow {
    double sigma;
    double sup_error;
};

/// sup_error of the order-s approximant for each sigma.
std::vector<SweepRow> sigma_sweep(const FieldFn& f, int dim, int order, std::span<const double> sigmas,
                                  const PointSet& grid, const ConvQuadrature& quad = {});

} // namespace gkc
