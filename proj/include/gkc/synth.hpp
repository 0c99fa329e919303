#pragma once

#include "gkc/kernel.hpp"
#include "gkc/loss.hpp"
#include "gkc/quadrature.hpp"
#include "gkc/rng.hpp"
#include "gkc/solver.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gkc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Regression-function smoothness class Lip^(r, c0). c0 is empty when the
/// family does not pin a constant (e.g. r = infinity with a free transition).
struct Smoothness {
    double r;
    std::optional<double> c0;
};

/// Tsybakov noise condition rho_X{|2 eta - 1| <= c_hat t} <= t^q for all t > 0.
struct NoiseCondition {
    double q;
    double c_hat;
};

struct Interval {
    double lo;
    double hi;
};

using EtaFn = std::function<double(Point)>;
using Predictor = std::function<double(Point)>;

/// Binary-classification distribution with known conditional probability eta.
///
/// The marginal is uniform on [0,1]^d; for d = 1 it may be restricted to a
/// union of intervals (uniform on the union).
class Distribution {
public:
    Distribution(std::string family_tag, int dim, EtaFn eta, Smoothness smoothness,
                 NoiseCondition noise, std::vector<Interval> support = {{0.0, 1.0}},
                 std::vector<double> eta_breakpoints = {});

    const std::string& family_tag() const noexcept { return tag_; }
    int dim() const noexcept { return dim_; }
    const Smoothness& smoothness() const noexcept { return smoothness_; }
    const NoiseCondition& noise() const noexcept { return noise_; }

    double eta(Point x) const { return eta_(x); }
    double eta(double x) const { return eta_(Point(&x, 1)); }

    /// Support of the marginal along x (d = 1); [0, 1] otherwise.
    const std::vector<Interval>& support() const noexcept { return support_; }
    double support_length() const noexcept { return support_length_; }

    /// Points where eta is discontinuous or crosses 1/2 (d = 1).
    const std::vector<double>& eta_breakpoints() const noexcept { return breakpoints_; }

    void sample_point(Rng& rng, std::span<double> out) const;

private:
    std::string tag_;
    int dim_;
    EtaFn eta_;
    Smoothness smoothness_;
    NoiseCondition noise_;
    std::vector<Interval> support_;
    double support_length_;
    std::vector<double> breakpoints_;
};

using FamilyParams = std::map<std::string, double>;

/// Builtin families:
///   "affine"   eta = 1/2 + x/4 (d = 1)
///   "holder"   eta = 1/2 + a |x - 1/2|^r sign(x - 1/2), params a, r in (0, 1]
///   "margin"   eta = 1 - p left of 1/2, p right of it; the marginal is uniform on
///              [0,1] minus the central band of width `gap`; params p, gap
///   "product"  eta = 1/2 + a prod_j sign(x_j - 1/2) |2 x_j - 1|^r; params d >= 2, a, r
///   "constant" eta identically equal to param eta
/// Throws InvalidArgument for unknown names or parameters outside their domain.
Distribution builtin(std::string_view name, const FamilyParams& params = {});

/// Names accepted by builtin().
std::vector<std::string> builtin_names();

/// Draws m i.i.d. pairs: x from the marginal, y = +1 with probability eta(x).
Dataset sample(const Distribution& dist, std::size_t m, std::uint64_t seed);

/// R(f_c) = E[min(eta, 1 - eta)].
Estimate bayes_risk(const Distribution& dist, const QuadratureOptions& opts = {});

/// R(sign f) - R(f_c) = integral over {sign f != f_c} of |2 eta - 1|.
Estimate excess_misclass(const Distribution& dist, const Predictor& f, const QuadratureOptions& opts = {});
Estimate excess_misclass(const Distribution& dist, const TrainedModel& model, const QuadratureOptions& opts = {});

/// E^phi(f) - E^phi(f_rho^phi), evaluated on clip(f) when `clipped`.
Estimate excess_phi_risk(const Distribution& dist, Loss loss, const Predictor& f, bool clipped,
                         const QuadratureOptions& opts = {});
Estimate excess_phi_risk(const Distribution& dist, Loss loss, const TrainedModel& model, bool clipped,
                         const QuadratureOptions& opts = {});

/// rho_X{ x : |2 eta(x) - 1| <= level }.
double low_margin_measure(const Distribution& dist, double level, const QuadratureOptions& opts = {});

/// max over t of rho_X{|2 eta - 1| <= c_hat t} / t^q. The condition holds on the
/// grid iff the result is <= 1. q may be infinite.
double tsybakov_ratio(const Distribution& dist, double q, double c_hat, std::span<const double> t_grid,
                      const QuadratureOptions& opts = {});

/// Geometric grid of t values used when none is given.
std::vector<double> default_t_grid();

/// max over sampled pairs of |eta(x) - eta(x')| / ((c0/2) |x - x'|^r). Meaningful
/// for r <= 1 with a declared c0; the declaration holds iff the result is <= 1.
double holder_ratio(const Distribution& dist, std::size_t pairs, std::uint64_t seed);

} // namespace gkc
