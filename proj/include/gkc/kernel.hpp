#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace gkc {

/// Point sets are stored one point per row so that a row is a contiguous span.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point = std::span<const double>;

inline Point row_of(const PointSet& points, Eigen::Index i)
{
    return {points.data() + i * points.cols(), static_cast<std::size_t>(points.cols())};
}

/// G(x, x') = exp(-|x - x'|^2 / sigma^2).
class GaussianKernel {
public:
    explicit GaussianKernel(double sigma);

    double sigma() const noexcept { return sigma_; }

    double operator()(Point x, Point x2) const;

    /// Kernel value from a squared distance; skips the dimension check.
    double from_sq_dist(double sq) const noexcept { return std::exp(-sq * inv_sigma_sq_); }

private:
    double sigma_;
    double inv_sigma_sq_;
};

/// Dense m x m Gram matrix. Throws on an empty point set.
Matrix gram(const GaussianKernel& k, const PointSet& points);

/// alpha^T K alpha.
double rkhs_norm_sq(const Matrix& gram, const Vector& coeffs);

struct SolverDiagnostics {
    int iterations = 0;
    double final_objective = 0.0;
    // Gradient norm (smooth losses) or duality gap (hinge).
    double stationarity_residual = 0.0;
    double dual_gap = std::nan("");
    double rkhs_norm_sq = 0.0;
    bool converged = false;
    std::vector<double> objective_history;
};

/// Finite expansion f = sum_i coeffs_i G_sigma(., x_i) returned by the solver.
class TrainedModel {
public:
    TrainedModel(PointSet support_points, Vector coeffs, double sigma, double lambda,
                 SolverDiagnostics diagnostics = {});

    const PointSet& support_points() const noexcept { return support_; }
    const Vector& coeffs() const noexcept { return coeffs_; }
    double sigma() const noexcept { return kernel_.sigma(); }
    double lambda() const noexcept { return lambda_; }
    const SolverDiagnostics& diagnostics() const noexcept { return diagnostics_; }
    Eigen::Index dim() const noexcept { return support_.cols(); }
    Eigen::Index size() const noexcept { return support_.rows(); }

    double predict(Point x) const;
    double operator()(Point x) const { return predict(x); }

    /// sign(predict(x)) with sign(0) = +1.
    double classify(Point x) const;

    /// alpha^T K alpha over the support points.
    double rkhs_norm_sq() const;

private:
    PointSet support_;
    Vector coeffs_;
    GaussianKernel kernel_;
    double lambda_;
    SolverDiagnostics diagnostics_;
};

} // namespace gkc
