#pragma once

#include "gkc/kernel.hpp"
#include "gkc/loss.hpp"

#include <cstdint>
#include <string_view>

namespace gkc {

enum class HingeStrategy { DualCoordinateDescent };

struct SolverConfig {
    double lambda = 1.0;
    int max_iters = 200;
    double tol = 1e-8;
    HingeStrategy hinge_strategy = HingeStrategy::DualCoordinateDescent;

    /// Defaults for a sample of size m: gradient-norm tolerance 1e-8 * m for
    /// smooth losses, duality-gap tolerance 1e-7 for hinge.
    static SolverConfig defaults(std::size_t m, Loss loss, double lambda);

    void validate() const;
};

/// Labeled sample with x in [0,1]^d and y in {-1, +1}.
struct Dataset {
    PointSet points;
    Vector labels;
    std::uint64_t seed = 0;

    Eigen::Index size() const noexcept { return points.rows(); }
    Eigen::Index dim() const noexcept { return points.cols(); }

    /// Throws InvalidArgument when an invariant fails.
    void validate() const;
};

/// Regularized empirical phi-risk minimizer over the Gaussian RKHS,
///
///   min_f (1/m) sum_i phi(y_i f(x_i)) + lambda |f|_sigma^2,
///
/// reduced to the coefficient vector of f = sum_i alpha_i G_sigma(., x_i).
/// Smooth losses use damped semismooth Newton with Armijo backtracking and stop
/// on the coefficient-space gradient norm. Hinge uses dual coordinate descent
/// on the bias-free SVM dual with C = 1/(2 lambda m) and stops on the duality gap.
///
/// Non-convergence is reported through diagnostics().converged, never thrown.
TrainedModel train(const Dataset& data, Loss loss, double sigma, const SolverConfig& config);

/// Same, with a precomputed Gram matrix of data.points at width sigma.
TrainedModel train(const Dataset& data, Loss loss, double sigma, const SolverConfig& config,
                   const Matrix& gram);

/// (1/m) sum_i phi(y_i (K alpha)_i) + lambda alpha^T K alpha.
double objective(const Dataset& data, Loss loss, double sigma, double lambda, const Vector& coeffs);

enum class Regime { NoNoise, TsybakovSmooth, TsybakovHinge, InfinitelySmooth };

std::string_view regime_name(Regime r) noexcept;

struct Schedule {
    double lambda;
    double sigma;
};

/// Parameter schedules: lambda = 1/m, and sigma = m^(-1/(2r+d)) (NoNoise,
/// TsybakovSmooth), m^(-(q+1)/((q+2)r+(q+1)d)) (TsybakovHinge, hinge only),
/// or 1 (InfinitelySmooth). r and q may be +infinity.
Schedule schedule(std::size_t m, double r, int d, double q, Loss loss, Regime regime);

} // namespace gkc
