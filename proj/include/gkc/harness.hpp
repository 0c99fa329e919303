#pragma once

#include "gkc/loss.hpp"
#include "gkc/quadrature.hpp"
#include "gkc/solver.hpp"
#include "gkc/synth.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gkc {

enum class Theorem { T1, T2, T3, C5 };

std::string_view theorem_name(Theorem t) noexcept;

/// Parses "T1" | "T2" | "T3" | "C5".
Theorem theorem_from_name(std::string_view name);

/// Schedule regime used by each rate result.
Regime regime_for(Theorem t) noexcept;

/// Throws InvalidArgument when the loss is outside the theorem's scope:
/// T2 needs a smooth loss, T3 needs hinge.
void check_pairing(Loss loss, Theorem t);

/// Rate exponent e in m^{-e}:
///   T1  r/(2r+d)
///   T2  2r(q+1)/((2r+d)(q+2))
///   T3  (q+1)r/((q+2)r+(q+1)d)
///   C5  1
/// r and q may be infinite.
double theoretical_exponent(double r, int d, double q, Loss loss, Theorem t);

struct PowerFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares of log(excess) on log(m) over the points with
/// excess > 0. Throws InvalidArgument with fewer than 3 such points.
PowerFit fit_exponent(std::span<const std::pair<double, double>> points);

struct ComparisonReport {
    double excess_misclass = 0.0;
    // Excess phi-risk of the clipped model.
    double excess_phi = 0.0;
    double quadrature_error = 0.0;

    // excess_misclass <= sqrt(excess_phi); smooth losses only.
    std::optional<bool> smooth_bound_holds;
    double smooth_bound_slack = 0.0;
    // excess_misclass <= excess hinge risk; hinge only.
    std::optional<bool> hinge_bound_holds;
    double hinge_bound_slack = 0.0;

    // excess_misclass / excess_phi^((q+1)/(q+2)), exponent 1 for q = inf; NaN
    // when excess_phi is 0. Tracked only: the constant in front is not known.
    double margin_ratio = 0.0;
};

/// Slack is right side minus left side; a check holds when slack >= -tol.
ComparisonReport check_comparison(const Distribution& dist, Loss loss, const Predictor& f, double q, double c_hat,
                                  const QuadratureOptions& opts = {}, double tol = 1e-6);
ComparisonReport check_comparison(const Distribution& dist, Loss loss, const TrainedModel& model, double q,
                                  double c_hat, const QuadratureOptions& opts = {}, double tol = 1e-6);

struct ExperimentConfig {
    std::string family;
    FamilyParams params;
    Loss loss = Loss::quadratic();
    Theorem theorem = Theorem::T1;
    // Override the distribution's declared r and q in the schedule and the
    // theoretical exponent.
    std::optional<double> r;
    std::optional<double> q;
    std::vector<std::size_t> m_grid;
    int trials_per_m = 20;
    std::uint64_t seed = 0;

    // 0 keeps the solver default for the loss.
    int max_iters = 0;
    double tol_factor = 1e-8;
    double hinge_gap_tol = 1e-7;
    QuadratureOptions quadrature;
    double comparison_tol = 1e-6;

    // Worker threads; 0 uses the hardware concurrency.
    unsigned threads = 1;

    /// Every violated invariant, empty when valid.
    std::vector<std::string> problems() const;
    void validate() const;
};

struct TrialRecord {
    std::size_t m = 0;
    int trial = 0;
    double sigma = 0.0;
    double lambda = 0.0;
    double excess_misclass = 0.0;
    double excess_phi = 0.0;
    double objective = 0.0;
    double norm_sq = 0.0;
    int solver_iters = 0;
    double residual = 0.0;
    bool failed = false;
    std::string failure;
    std::optional<bool> smooth_bound_holds;
    std::optional<bool> hinge_bound_holds;
    double margin_ratio = 0.0;
};

struct RatePoint {
    std::size_t m = 0;
    double mean_excess = 0.0;
    double std_excess = 0.0;
    int trials = 0;
    int failed = 0;
};

struct RateFit {
    std::vector<RatePoint> points;
    // -slope; NaN when fewer than 3 grid points have positive mean excess.
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::string fit_note;
    double theoretical_exponent = 0.0;
    std::string theorem_tag;
};

struct CurveResult {
    RateFit fit;
    // Ordered by (m, trial).
    std::vector<TrialRecord> trials;
};

using ProgressFn = std::function<void(const TrialRecord&)>;

/// Runs trials_per_m seeded trials per grid size, measures the excess
/// misclassification of each trained model against the known distribution,
/// and fits the decay exponent. Failed trials are excluded from the means;
/// more than 10% failures throws NumericalFailure.
CurveResult learning_curve(const ExperimentConfig& config, const ProgressFn& progress = {});

/// Runs one trial; exposed for the CLI and tests.
TrialRecord run_trial(const ExperimentConfig& config, const Distribution& dist, std::size_t m, int trial);

/// Declared (r, q, c_hat) after applying the config overrides.
struct ResolvedNoise {
    double r;
    double q;
    double c_hat;
};
ResolvedNoise resolve(const ExperimentConfig& config, const Distribution& dist);

} // namespace gkc
