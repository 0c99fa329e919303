#include "gkc/synth.hpp"

#include "gkc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace gkc {

Distribution::Distribution(std::string family_tag, int dim, EtaFn eta, Smoothness smoothness,
                           NoiseCondition noise, std::vector<Interval> support,
                           std::vector<double> eta_breakpoints)
    : tag_(std::move(family_tag))
    , dim_(dim)
    , eta_(std::move(eta))
    , smoothness_(smoothness)
    , noise_(noise)
    , support_(std::move(support))
    , support_length_(0.0)
    , breakpoints_(std::move(eta_breakpoints))
{
    if (dim_ < 1) throw InvalidArgument("distribution: dimension must be at least 1");
    if (!eta_) throw InvalidArgument("distribution: eta is empty");
    if (support_.empty()) throw InvalidArgument("distribution: empty support");
    if (dim_ > 1 && (support_.size() != 1 || support_[0].lo != 0.0 || support_[0].hi != 1.0))
        throw InvalidArgument("distribution: restricted support is only available for d = 1");
    double prev = 0.0;
    for (const auto& iv : support_) {
        if (!(iv.lo >= prev && iv.hi > iv.lo && iv.hi <= 1.0))
            throw InvalidArgument("distribution: support must be disjoint sorted intervals in [0, 1]");
        support_length_ += iv.hi - iv.lo;
        prev = iv.hi;
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
}

void Distribution::sample_point(Rng& rng, std::span<double> out) const
{
    if (dim_ == 1) {
        double u = rng.uniform() * support_length_;
        for (const auto& iv : support_) {
            const double len = iv.hi - iv.lo;
            if (u < len || &iv == &support_.back()) {
                out[0] = std::min(iv.lo + u, iv.hi);
                return;
            }
            u -= len;
        }
    }
    for (auto& v : out) v = rng.uniform();
}

namespace {

double param(const FamilyParams& params, const char* key, double fallback)
{
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void check_keys(std::string_view family, const FamilyParams& params, std::initializer_list<const char*> allowed)
{
    for (const auto& [k, v] : params) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
        if (!ok) throw InvalidArgument("family '" + std::string(family) + "': unknown parameter '" + k + "'");
        if (!std::isfinite(v))
            throw InvalidArgument("family '" + std::string(family) + "': parameter '" + k + "' must be finite");
    }
}

double signed_power(double s, double r)
{
    return s >= 0.0 ? std::pow(s, r) : -std::pow(-s, r);
}

// P(U_1 ... U_d <= z) for i.i.d. uniforms.
double uniform_product_cdf(double z, int d)
{
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    const double l = -std::log(z);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < d; ++k) {
        term *= l / k;
        sum += term;
    }
    return z * sum;
}

Distribution make_product(const FamilyParams& params)
{
    const double dd = param(params, "d", 2.0);
    const double a = param(params, "a", 0.5);
    const double r = param(params, "r", 1.0);
    if (!(dd >= 2.0) || dd != std::floor(dd)) throw InvalidArgument("product: d must be an integer >= 2");
    if (!(a > 0.0 && a <= 0.5)) throw InvalidArgument("product: a must lie in (0, 1/2]");
    if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("product: r must lie in (0, 1]");
    const int d = static_cast<int>(dd);

    auto eta = [a, r](Point x) {
        double p = 1.0;
        for (double v : x) p *= signed_power(2.0 * (v - 0.5), r);
        return 0.5 + a * p;
    };
    // |2 eta - 1| = 2a prod_j |2x_j - 1|^r and |2x_j - 1| is uniform, so the
    // low-margin measure is the product-of-uniforms cdf at (tau / 2a)^(1/r).
    const double q = 1.0 / (2.0 * r);
    double best = kInf;
    for (int i = 0; i <= 4000; ++i) {
        const double tau = 2.0 * a * std::pow(10.0, -12.0 + 12.0 * i / 4000.0);
        const double meas = uniform_product_cdf(std::pow(tau / (2.0 * a), 1.0 / r), d);
        best = std::min(best, tau / std::pow(meas, 1.0 / q));
    }
    const double c0 = 4.0 * a * std::pow(static_cast<double>(d), 1.0 - r / 2.0);
    return Distribution("product", d, eta, {r, c0}, {q, 0.999 * best});
}

} // namespace

std::vector<std::string> builtin_names()
{
    return {"affine", "constant", "holder", "margin", "product"};
}

Distribution builtin(std::string_view name, const FamilyParams& params)
{
    if (name == "affine") {
        check_keys(name, params, {});
        return Distribution("affine", 1, [](Point x) { return 0.5 + 0.25 * x[0]; }, {kInf, 0.5}, {1.0, 0.5},
                            {{0.0, 1.0}}, {0.0});
    }
    if (name == "holder") {
        check_keys(name, params, {"a", "r"});
        const double a = param(params, "a", 0.5);
        const double r = param(params, "r", 1.0);
        if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("holder: r must lie in (0, 1]");
        if (!(a > 0.0) || a * std::pow(0.5, r) > 0.5) throw InvalidArgument("holder: a * (1/2)^r must lie in (0, 1/2]");
        auto eta = [a, r](Point x) { return 0.5 + a * signed_power(x[0] - 0.5, r); };
        return Distribution("holder", 1, eta, {r, a * std::pow(2.0, 2.0 - r)}, {1.0 / r, a * std::pow(2.0, 1.0 - r)},
                            {{0.0, 1.0}}, {0.5});
    }
    if (name == "margin") {
        check_keys(name, params, {"p", "gap"});
        const double p = param(params, "p", 0.9);
        const double gap = param(params, "gap", 0.2);
        if (!(p > 0.5 && p <= 1.0)) throw InvalidArgument("margin: p must lie in (1/2, 1]");
        if (!(gap > 0.0 && gap < 1.0)) throw InvalidArgument("margin: gap must lie in (0, 1)");
        auto eta = [p](Point x) { return x[0] < 0.5 ? 1.0 - p : p; };
        return Distribution("margin", 1, eta, {kInf, std::nullopt}, {kInf, 2.0 * p - 1.0},
                            {{0.0, 0.5 - gap / 2.0}, {0.5 + gap / 2.0, 1.0}}, {0.5});
    }
    if (name == "product") {
        check_keys(name, params, {"d", "a", "r"});
        return make_product(params);
    }
    if (name == "constant") {
        check_keys(name, params, {"eta"});
        const double v = param(params, "eta", 1.0);
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("constant: eta must lie in [0, 1]");
        const double kappa = std::abs(2.0 * v - 1.0);
        const NoiseCondition noise = kappa > 0.0 ? NoiseCondition{kInf, kappa} : NoiseCondition{0.0, 1.0};
        return Distribution("constant", 1, [v](Point) { return v; }, {kInf, 0.0}, noise);
    }
    throw InvalidArgument("unknown distribution family '" + std::string(name) + "'");
}

Dataset sample(const Distribution& dist, std::size_t m, std::uint64_t seed)
{
    if (m < 1) throw InvalidArgument("sample: m must be at least 1");
    const int d = dist.dim();
    Dataset data;
    data.points.resize(static_cast<Eigen::Index>(m), d);
    data.labels.resize(static_cast<Eigen::Index>(m));
    data.seed = seed;
    Rng rng(seed);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
        std::span<double> row(data.points.data() + i * d, static_cast<std::size_t>(d));
        dist.sample_point(rng, row);
        data.labels[i] = rng.uniform() < dist.eta(Point(row)) ? 1.0 : -1.0;
    }
    return data;
}

namespace {

// Breakpoints in x where eta is discontinuous or crosses 1/2.
std::vector<double> eta_breaks(const Distribution& dist, const QuadratureOptions& opts)
{
    std::vector<double> pts = dist.eta_breakpoints();
    const double half[] = {0.5};
    const auto roots = find_crossings([&](double x) { return dist.eta(x); }, 0.0, 1.0, opts.scan_points, half);
    pts.insert(pts.end(), roots.begin(), roots.end());
    return pts;
}

std::vector<double> predictor_breaks(const Predictor& f, std::size_t cells)
{
    const double levels[] = {-1.0, 0.0, 1.0};
    return find_crossings([&](double x) { return f(Point(&x, 1)); }, 0.0, 1.0, cells, levels);
}

// Integral of g against the marginal (d = 1).
Estimate integrate_marginal(const Distribution& dist, const ScalarFn& g, const std::vector<double>& breaks,
                            const QuadratureOptions& opts)
{
    Estimate total;
    for (const auto& iv : dist.support()) {
        const auto e = integrate(g, iv.lo, iv.hi, breaks, opts);
        total.value += e.value;
        total.abs_error += e.abs_error;
        total.converged = total.converged && e.converged;
    }
    total.value /= dist.support_length();
    total.abs_error /= dist.support_length();
    return total;
}

// Monte Carlo mean of g(x) under the marginal (d >= 2).
template <class G>
Estimate monte_carlo(const Distribution& dist, G&& g, const QuadratureOptions& opts)
{
    if (opts.mc_points < 2) throw InvalidArgument("monte carlo: need at least two points");
    Rng rng(opts.mc_seed);
    std::vector<double> x(static_cast<std::size_t>(dist.dim()));
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t n = 1; n <= opts.mc_points; ++n) {
        dist.sample_point(rng, x);
        const double v = g(Point(x));
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    const double var = m2 / static_cast<double>(opts.mc_points - 1);
    return {mean, std::sqrt(var / static_cast<double>(opts.mc_points)), std::isfinite(mean)};
}

double misclass_integrand(double eta, double fx)
{
    const double margin = 2.0 * eta - 1.0;
    return sign_of(fx) != sign_of(margin) ? std::abs(margin) : 0.0;
}

double phi_integrand(Loss loss, double eta, double fx, bool clipped)
{
    const double target = loss.regression_target(eta);
    const double g = clipped ? clip(fx) : fx;
    return eta * (loss.eval(g) - loss.eval(target)) + (1.0 - eta) * (loss.eval(-g) - loss.eval(-target));
}

std::size_t scan_cells_for(const TrainedModel& model, const QuadratureOptions& opts)
{
    return std::max(opts.scan_points, static_cast<std::size_t>(std::ceil(16.0 / model.sigma())));
}

void check_dims(const Distribution& dist, const TrainedModel& model)
{
    if (model.dim() != dist.dim()) throw DimensionMismatch("model dimension differs from the distribution");
}

} // namespace

Estimate bayes_risk(const Distribution& dist, const QuadratureOptions& opts)
{
    auto g = [&](Point x) {
        const double e = dist.eta(x);
        return std::min(e, 1.0 - e);
    };
    if (dist.dim() >= 2) return monte_carlo(dist, g, opts);
    return integrate_marginal(dist, [&](double x) { return g(Point(&x, 1)); }, eta_breaks(dist, opts), opts);
}

Estimate excess_misclass(const Distribution& dist, const Predictor& f, const QuadratureOptions& opts)
{
    auto g = [&](Point x) { return misclass_integrand(dist.eta(x), f(x)); };
    if (dist.dim() >= 2) return monte_carlo(dist, g, opts);
    auto breaks = eta_breaks(dist, opts);
    const auto fb = predictor_breaks(f, opts.scan_points);
    breaks.insert(breaks.end(), fb.begin(), fb.end());
    return integrate_marginal(dist, [&](double x) { return g(Point(&x, 1)); }, breaks, opts);
}

Estimate excess_misclass(const Distribution& dist, const TrainedModel& model, const QuadratureOptions& opts)
{
    check_dims(dist, model);
    QuadratureOptions o = opts;
    o.scan_points = scan_cells_for(model, opts);
    return excess_misclass(dist, [&](Point x) { return model.predict(x); }, o);
}

Estimate excess_phi_risk(const Distribution& dist, Loss loss, const Predictor& f, bool clipped,
                         const QuadratureOptions& opts)
{
    auto g = [&](Point x) { return phi_integrand(loss, dist.eta(x), f(x), clipped); };
    if (dist.dim() >= 2) return monte_carlo(dist, g, opts);
    auto breaks = eta_breaks(dist, opts);
    const auto fb = predictor_breaks(f, opts.scan_points);
    breaks.insert(breaks.end(), fb.begin(), fb.end());
    return integrate_marginal(dist, [&](double x) { return g(Point(&x, 1)); }, breaks, opts);
}

Estimate excess_phi_risk(const Distribution& dist, Loss loss, const TrainedModel& model, bool clipped,
                         const QuadratureOptions& opts)
{
    check_dims(dist, model);
    QuadratureOptions o = opts;
    o.scan_points = scan_cells_for(model, opts);
    return excess_phi_risk(dist, loss, [&](Point x) { return model.predict(x); }, clipped, o);
}

double low_margin_measure(const Distribution& dist, double level, const QuadratureOptions& opts)
{
    auto h = [&](double x) { return std::abs(2.0 * dist.eta(x) - 1.0); };
    if (dist.dim() >= 2) {
        return monte_carlo(dist, [&](Point x) { return std::abs(2.0 * dist.eta(x) - 1.0) <= level ? 1.0 : 0.0; }, opts)
            .value;
    }
    auto breaks = dist.eta_breakpoints();
    const double lv[] = {level};
    const auto roots = find_crossings(h, 0.0, 1.0, opts.scan_points, lv);
    breaks.insert(breaks.end(), roots.begin(), roots.end());
    double measure = 0.0;
    for (const auto& iv : dist.support()) {
        const auto pts = partition(iv.lo, iv.hi, breaks);
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            if (h(0.5 * (pts[k] + pts[k + 1])) <= level) measure += pts[k + 1] - pts[k];
        }
    }
    return measure / dist.support_length();
}

std::vector<double> default_t_grid()
{
    std::vector<double> t;
    for (int i = 0; i <= 240; ++i) t.push_back(std::pow(10.0, -4.0 + 6.0 * i / 240.0));
    return t;
}

double tsybakov_ratio(const Distribution& dist, double q, double c_hat, std::span<const double> t_grid,
                      const QuadratureOptions& opts)
{
    if (!(q >= 0.0)) throw InvalidArgument("tsybakov_ratio: q must be nonnegative");
    if (!(c_hat > 0.0)) throw InvalidArgument("tsybakov_ratio: c_hat must be positive");

    // For d >= 2 draw one Monte Carlo cloud and reuse it for every t.
    std::vector<double> margins;
    if (dist.dim() >= 2) {
        Rng rng(opts.mc_seed);
        std::vector<double> x(static_cast<std::size_t>(dist.dim()));
        margins.resize(opts.mc_points);
        for (auto& v : margins) {
            dist.sample_point(rng, x);
            v = std::abs(2.0 * dist.eta(Point(x)) - 1.0);
        }
        std::sort(margins.begin(), margins.end());
    }
    auto measure = [&](double level) {
        if (margins.empty()) return low_margin_measure(dist, level, opts);
        const auto n = std::upper_bound(margins.begin(), margins.end(), level) - margins.begin();
        return static_cast<double>(n) / static_cast<double>(margins.size());
    };

    double worst = 0.0;
    for (const double t : t_grid) {
        if (!(t > 0.0)) throw InvalidArgument("tsybakov_ratio: t values must be positive");
        const double meas = measure(c_hat * t);
        double ratio;
        if (std::isinf(q)) ratio = t < 1.0 ? (meas > 0.0 ? kInf : 0.0) : (t == 1.0 ? meas : 0.0);
        else ratio = meas / std::pow(t, q);
        worst = std::max(worst, ratio);
    }
    return worst;
}

double holder_ratio(const Distribution& dist, std::size_t pairs, std::uint64_t seed)
{
    const auto& s = dist.smoothness();
    if (!(s.r <= 1.0) || !s.c0 || !(*s.c0 > 0.0))
        throw InvalidArgument("holder_ratio: needs a declared r <= 1 and c0 > 0");
    const auto d = static_cast<std::size_t>(dist.dim());
    Rng rng(seed);
    std::vector<double> x(d), x2(d);
    double worst = 0.0;
    for (std::size_t n = 0; n < pairs; ++n) {
        // Half the pairs are near-diagonal to probe small distances.
        const double scale = n % 2 == 0 ? 1.0 : std::pow(10.0, -4.0 * rng.uniform());
        double dist_sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            x[j] = rng.uniform();
            x2[j] = std::clamp(x[j] + scale * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);
            dist_sq += (x[j] - x2[j]) * (x[j] - x2[j]);
        }
        if (dist_sq == 0.0) continue;
        const double lhs = std::abs(dist.eta(Point(x)) - dist.eta(Point(x2)));
        worst = std::max(worst, lhs / (0.5 * *s.c0 * std::pow(std::sqrt(dist_sq), s.r)));
    }
    return worst;
}

} // namespace gkc
