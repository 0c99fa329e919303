#include "gkc/harness.hpp"

#include "gkc/errors.hpp"
#include "gkc/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace gkc {

std::string_view theorem_name(Theorem t) noexcept
{
    switch (t) {
    case Theorem::T1: return "T1";
    case Theorem::T2: return "T2";
    case Theorem::T3: return "T3";
    case Theorem::C5: return "C5";
    }
    return "?";
}

Theorem theorem_from_name(std::string_view name)
{
    for (Theorem t : {Theorem::T1, Theorem::T2, Theorem::T3, Theorem::C5})
        if (theorem_name(t) == name) return t;
    throw InvalidArgument("unknown theorem '" + std::string(name) + "' (expected T1, T2, T3 or C5)");
}

Regime regime_for(Theorem t) noexcept
{
    switch (t) {
    case Theorem::T1: return Regime::NoNoise;
    case Theorem::T2: return Regime::TsybakovSmooth;
    case Theorem::T3: return Regime::TsybakovHinge;
    case Theorem::C5: return Regime::InfinitelySmooth;
    }
    return Regime::NoNoise;
}

void check_pairing(Loss loss, Theorem t)
{
    if (t == Theorem::T2 && !loss.is_smooth())
        throw InvalidArgument("theorem T2 needs a twice smooth loss, got " + std::string(loss.name()));
    if (t == Theorem::T3 && loss.is_smooth())
        throw InvalidArgument("theorem T3 needs the hinge loss, got " + std::string(loss.name()));
}

double theoretical_exponent(double r, int d, double q, Loss loss, Theorem t)
{
    check_pairing(loss, t);
    if (!(r > 0.0)) throw InvalidArgument("theoretical_exponent: r must be positive");
    if (d < 1) throw InvalidArgument("theoretical_exponent: d must be at least 1");
    if (!(q >= 0.0)) throw InvalidArgument("theoretical_exponent: q must be nonnegative");
    const double dd = d;
    const bool r_inf = std::isinf(r);
    const bool q_inf = std::isinf(q);
    switch (t) {
    case Theorem::T1:
        return r_inf ? 0.5 : r / (2.0 * r + dd);
    case Theorem::T2: {
        const double rf = r_inf ? 1.0 : 2.0 * r / (2.0 * r + dd);
        const double qf = q_inf ? 1.0 : (q + 1.0) / (q + 2.0);
        return rf * qf;
    }
    case Theorem::T3:
        if (r_inf) return q_inf ? 1.0 : (q + 1.0) / (q + 2.0);
        if (q_inf) return r / (r + dd);
        return (q + 1.0) * r / ((q + 2.0) * r + (q + 1.0) * dd);
    case Theorem::C5:
        return 1.0;
    }
    return std::nan("");
}

PowerFit fit_exponent(std::span<const std::pair<double, double>> points)
{
    std::vector<double> lx, ly;
    for (const auto& [m, e] : points) {
        if (!(m > 0.0)) throw InvalidArgument("fit_exponent: sample sizes must be positive");
        if (e > 0.0 && std::isfinite(e)) {
            lx.push_back(std::log(m));
            ly.push_back(std::log(e));
        }
    }
    if (lx.size() < 3)
        throw InvalidArgument("fit_exponent: need at least 3 points with positive excess, got " +
                              std::to_string(lx.size()));
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double dx = lx[i] - mx, dy = ly[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw InvalidArgument("fit_exponent: sample sizes must not all be equal");
    PowerFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    // A flat line through flat data is a perfect fit.
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

namespace {

ComparisonReport compare(Loss loss, const Estimate& mis, const Estimate& phi, double q, double tol)
{
    ComparisonReport rep;
    rep.excess_misclass = mis.value;
    rep.excess_phi = phi.value;
    rep.quadrature_error = mis.abs_error + phi.abs_error;
    if (loss.is_smooth()) {
        rep.smooth_bound_slack = std::sqrt(std::max(phi.value, 0.0)) - mis.value;
        rep.smooth_bound_holds = rep.smooth_bound_slack >= -tol;
    } else {
        rep.hinge_bound_slack = phi.value - mis.value;
        rep.hinge_bound_holds = rep.hinge_bound_slack >= -tol;
    }
    const double power = std::isinf(q) ? 1.0 : (q + 1.0) / (q + 2.0);
    rep.margin_ratio = phi.value > 0.0 ? mis.value / std::pow(phi.value, power) : std::nan("");
    return rep;
}

} // namespace

ComparisonReport check_comparison(const Distribution& dist, Loss loss, const Predictor& f, double q, double /*c_hat*/,
                                  const QuadratureOptions& opts, double tol)
{
    return compare(loss, excess_misclass(dist, f, opts), excess_phi_risk(dist, loss, f, true, opts), q, tol);
}

ComparisonReport check_comparison(const Distribution& dist, Loss loss, const TrainedModel& model, double q,
                                  double /*c_hat*/, const QuadratureOptions& opts, double tol)
{
    return compare(loss, excess_misclass(dist, model, opts), excess_phi_risk(dist, loss, model, true, opts), q,
                   tol);
}

std::vector<std::string> ExperimentConfig::problems() const
{
    std::vector<std::string> out;
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), family) == names.end())
        out.push_back("distribution.family: unknown family '" + family + "'");
    if (m_grid.size() < 4) out.push_back("m_grid: needs at least 4 entries, got " + std::to_string(m_grid.size()));
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        if (m_grid[i] < 1) out.push_back("m_grid: entries must be positive");
        if (i > 0 && m_grid[i] <= m_grid[i - 1]) {
            out.push_back("m_grid: must be strictly increasing");
            break;
        }
    }
    if (trials_per_m < 1) out.push_back("trials_per_m: must be at least 1");
    if (max_iters < 0) out.push_back("solver.max_iters: must be nonnegative");
    if (!(tol_factor > 0.0)) out.push_back("solver.tol_factor: must be positive");
    if (!(hinge_gap_tol > 0.0)) out.push_back("solver.hinge_gap_tol: must be positive");
    if (!(quadrature.abs_tol > 0.0)) out.push_back("quadrature.abs_tol: must be positive");
    if (quadrature.max_depth < 1) out.push_back("quadrature.max_depth: must be at least 1");
    if (quadrature.mc_points < 2) out.push_back("quadrature.mc_points: must be at least 2");
    if (r && !(*r > 0.0)) out.push_back("r: must be positive");
    if (q && !(*q >= 0.0)) out.push_back("q: must be nonnegative");
    if (!(comparison_tol >= 0.0)) out.push_back("comparison_tol: must be nonnegative");
    try {
        check_pairing(loss, theorem);
    } catch (const InvalidArgument& e) {
        out.push_back(std::string("regime: ") + e.what());
    }
    return out;
}

void ExperimentConfig::validate() const
{
    const auto p = problems();
    if (p.empty()) return;
    std::string msg = "invalid experiment config:";
    for (const auto& s : p) msg += "\n  " + s;
    throw InvalidArgument(msg);
}

ResolvedNoise resolve(const ExperimentConfig& config, const Distribution& dist)
{
    return {config.r.value_or(dist.smoothness().r), config.q.value_or(dist.noise().q), dist.noise().c_hat};
}

TrialRecord run_trial(const ExperimentConfig& config, const Distribution& dist, std::size_t m, int trial)
{
    TrialRecord rec;
    rec.m = m;
    rec.trial = trial;
    try {
        const auto rq = resolve(config, dist);
        const auto sched = schedule(m, rq.r, dist.dim(), rq.q, config.loss, regime_for(config.theorem));
        rec.sigma = sched.sigma;
        rec.lambda = sched.lambda;

        const auto data = sample(dist, m, derive_seed(config.seed, m, static_cast<std::uint64_t>(trial)));
        auto cfg = SolverConfig::defaults(m, config.loss, sched.lambda);
        if (config.max_iters > 0) cfg.max_iters = config.max_iters;
        cfg.tol = config.loss.is_smooth() ? config.tol_factor * static_cast<double>(m) : config.hinge_gap_tol;
        const auto model = train(data, config.loss, sched.sigma, cfg);
        const auto& diag = model.diagnostics();
        rec.objective = diag.final_objective;
        rec.norm_sq = diag.rkhs_norm_sq;
        rec.solver_iters = diag.iterations;
        rec.residual = diag.stationarity_residual;
        if (!diag.converged) {
            rec.failed = true;
            rec.failure = "solver did not converge";
        }
        const auto rep = check_comparison(dist, config.loss, model, rq.q, rq.c_hat, config.quadrature,
                                          config.comparison_tol);
        rec.excess_misclass = rep.excess_misclass;
        rec.excess_phi = rep.excess_phi;
        rec.smooth_bound_holds = rep.smooth_bound_holds;
        rec.hinge_bound_holds = rep.hinge_bound_holds;
        rec.margin_ratio = rep.margin_ratio;
        if (!std::isfinite(rec.excess_misclass) || !std::isfinite(rec.excess_phi)) {
            rec.failed = true;
            rec.failure = "non-finite risk estimate";
        }
    } catch (const NumericalFailure& e) {
        rec.failed = true;
        rec.failure = e.what();
    }
    return rec;
}

CurveResult learning_curve(const ExperimentConfig& config, const ProgressFn& progress)
{
    config.validate();
    const auto dist = builtin(config.family, config.params);
    const auto rq = resolve(config, dist);

    CurveResult out;
    out.fit.theorem_tag = std::string(theorem_name(config.theorem));
    out.fit.theoretical_exponent = theoretical_exponent(rq.r, dist.dim(), rq.q, config.loss, config.theorem);

    const std::size_t per_m = static_cast<std::size_t>(config.trials_per_m);
    const std::size_t total = config.m_grid.size() * per_m;
    out.trials.resize(total);

    // Each trial owns its slot, so results do not depend on scheduling.
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            auto rec = run_trial(config, dist, config.m_grid[k / per_m], static_cast<int>(k % per_m));
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(rec);
            }
            out.trials[k] = std::move(rec);
        }
    };
    unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    const auto failed = std::count_if(out.trials.begin(), out.trials.end(), [](const auto& t) { return t.failed; });
    if (static_cast<double>(failed) > 0.1 * static_cast<double>(total))
        throw NumericalFailure("learning curve: " + std::to_string(failed) + " of " + std::to_string(total) +
                               " trials failed");

    std::vector<std::pair<double, double>> means;
    for (std::size_t g = 0; g < config.m_grid.size(); ++g) {
        RatePoint pt;
        pt.m = config.m_grid[g];
        std::vector<double> xs;
        for (std::size_t t = 0; t < per_m; ++t) {
            const auto& rec = out.trials[g * per_m + t];
            if (rec.failed) {
                ++pt.failed;
                continue;
            }
            xs.push_back(rec.excess_misclass);
        }
        pt.trials = static_cast<int>(xs.size());
        if (!xs.empty()) {
            double s = 0.0;
            for (double v : xs) s += v;
            pt.mean_excess = s / static_cast<double>(xs.size());
            double ss = 0.0;
            for (double v : xs) ss += (v - pt.mean_excess) * (v - pt.mean_excess);
            pt.std_excess = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
        } else {
            pt.mean_excess = std::nan("");
        }
        means.emplace_back(static_cast<double>(pt.m), pt.mean_excess);
        out.fit.points.push_back(pt);
    }

    try {
        const auto f = fit_exponent(means);
        out.fit.exponent = -f.slope;
        out.fit.intercept = f.intercept;
        out.fit.r_squared = f.r_squared;
    } catch (const InvalidArgument& e) {
        out.fit.exponent = std::nan("");
        out.fit.intercept = std::nan("");
        out.fit.r_squared = std::nan("");
        out.fit.fit_note = e.what();
    }
    return out;
}

} // namespace gkc
