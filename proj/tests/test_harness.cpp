#include "gkc/errors.hpp"
#include "gkc/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace gkc;

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

ExperimentConfig small_config(std::string family, Loss loss, Theorem t)
{
    ExperimentConfig c;
    c.family = std::move(family);
    c.loss = loss;
    c.theorem = t;
    c.m_grid = {16, 32, 64, 128};
    c.trials_per_m = 3;
    c.seed = 99;
    return c;
}

} // namespace

TEST_CASE("theoretical exponents")
{
    const auto q = Loss::quadratic();
    const auto h = Loss::hinge();
    CHECK(std::abs(theoretical_exponent(1, 1, 1, q, Theorem::T1) - 1.0 / 3) <= 1e-12);
    CHECK(std::abs(theoretical_exponent(1, 1, 1, q, Theorem::T2) - 4.0 / 9) <= 1e-12);
    CHECK(std::abs(theoretical_exponent(kInfinity, 1, 1, q, Theorem::T2) - 2.0 / 3) <= 1e-12);
    CHECK(std::abs(theoretical_exponent(kInfinity, 1, kInfinity, h, Theorem::C5) - 1.0) <= 1e-12);
    CHECK(std::abs(theoretical_exponent(1, 1, 1, h, Theorem::T3) - 2.0 / 5) <= 1e-12);
    CHECK(std::abs(theoretical_exponent(kInfinity, 1, 1, h, Theorem::T3) - 2.0 / 3) <= 1e-12);
    CHECK(std::abs(theoretical_exponent(2, 3, kInfinity, h, Theorem::T3) - 2.0 / 5) <= 1e-12);
    CHECK(std::abs(theoretical_exponent(2, 3, kInfinity, q, Theorem::T2) - 4.0 / 7) <= 1e-12);
    CHECK(std::abs(theoretical_exponent(kInfinity, 2, 3, h, Theorem::T1) - 0.5) <= 1e-12);
    CHECK(std::abs(theoretical_exponent(5, 1, 1, q, Theorem::T2) - 20.0 / 33) <= 1e-12);
    CHECK_THROWS_AS(theoretical_exponent(1, 1, 1, h, Theorem::T2), InvalidArgument);
    CHECK_THROWS_AS(theoretical_exponent(1, 1, 1, q, Theorem::T3), InvalidArgument);
}

TEST_CASE("T2 and T3 tend to the noise-free exponent as q grows")
{
    for (double r : {0.5, 1.0, 3.0})
        for (int d : {1, 2, 4}) {
            CHECK(theoretical_exponent(r, d, 1e12, Loss::quadratic(), Theorem::T2) ==
                  doctest::Approx(theoretical_exponent(r, d, kInfinity, Loss::quadratic(), Theorem::T2)));
            CHECK(theoretical_exponent(r, d, 1e12, Loss::hinge(), Theorem::T3) ==
                  doctest::Approx(theoretical_exponent(r, d, kInfinity, Loss::hinge(), Theorem::T3)));
            CHECK(theoretical_exponent(1e12, d, 1, Loss::hinge(), Theorem::T3) ==
                  doctest::Approx(theoretical_exponent(kInfinity, d, 1, Loss::hinge(), Theorem::T3)));
        }
}

TEST_CASE("theorem names")
{
    for (auto t : {Theorem::T1, Theorem::T2, Theorem::T3, Theorem::C5}) CHECK(theorem_from_name(theorem_name(t)) == t);
    CHECK_THROWS_AS(theorem_from_name("T4"), InvalidArgument);
    CHECK(regime_for(Theorem::C5) == Regime::InfinitelySmooth);
    CHECK(regime_for(Theorem::T3) == Regime::TsybakovHinge);
}

TEST_CASE("exponent fitting on synthetic power laws")
{
    std::vector<std::pair<double, double>> pts;
    for (double m : {256.0, 512.0, 1024.0, 2048.0, 4096.0}) pts.emplace_back(m, std::pow(m, -0.5));
    auto f = fit_exponent(pts);
    CHECK(std::abs(f.slope + 0.5) <= 1e-12);
    CHECK(std::abs(f.r_squared - 1.0) <= 1e-10);

    pts.clear();
    for (double m : {10.0, 100.0, 1000.0}) pts.emplace_back(m, 0.3);
    f = fit_exponent(pts);
    CHECK(f.slope == doctest::Approx(0.0));

    pts.clear();
    for (double m : {8.0, 16.0, 32.0, 64.0}) pts.emplace_back(m, 4.0 / m);
    f = fit_exponent(pts);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(4.0)).epsilon(1e-12));

    // Zero entries are skipped, leaving too few points.
    pts = {{1.0, 1.0}, {2.0, 0.0}, {4.0, 0.25}, {8.0, 0.0}};
    CHECK_THROWS_AS(fit_exponent(pts), InvalidArgument);
}

TEST_CASE("comparison checks on fixed predictors")
{
    const auto affine = builtin("affine");
    const Predictor minus_one = [](Point) { return -1.0; };
    auto rep = check_comparison(affine, Loss::hinge(), minus_one, 1.0, 0.5);
    CHECK(rep.excess_misclass == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(rep.excess_phi == doctest::Approx(0.5).epsilon(1e-10));
    REQUIRE(rep.hinge_bound_holds.has_value());
    CHECK(*rep.hinge_bound_holds);
    CHECK_FALSE(rep.smooth_bound_holds.has_value());

    // sign(0) = +1 is the Bayes rule for this eta, so f = 0 misclassifies nothing.
    const Predictor zero = [](Point) { return 0.0; };
    rep = check_comparison(affine, Loss::quadratic(), zero, 1.0, 0.5);
    CHECK(rep.excess_misclass == 0.0);
    CHECK(rep.excess_phi == doctest::Approx(1.0 / 12).epsilon(1e-10));
    REQUIRE(rep.smooth_bound_holds.has_value());
    CHECK(*rep.smooth_bound_holds);
    CHECK(rep.margin_ratio == 0.0);

    // Just below zero every point is misclassified: 0.25 <= sqrt(1/12 + c/2 + c^2).
    const double c = 1e-9;
    const Predictor below = [c](Point) { return -c; };
    rep = check_comparison(affine, Loss::quadratic(), below, 1.0, 0.5);
    CHECK(rep.excess_misclass == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(rep.excess_phi == doctest::Approx(1.0 / 12 + c / 2 + c * c).epsilon(1e-10));
    CHECK(*rep.smooth_bound_holds);
    CHECK(rep.smooth_bound_slack == doctest::Approx(std::sqrt(1.0 / 12) - 0.25).epsilon(1e-8));
    CHECK(rep.margin_ratio == doctest::Approx(0.25 / std::pow(1.0 / 12, 2.0 / 3)).epsilon(1e-6));

    const Predictor bayes = [&](Point x) { return 2 * affine.eta(x) - 1; };
    for (auto loss : {Loss::hinge(), Loss::quadratic(), Loss::truncated_quadratic()}) {
        rep = check_comparison(affine, loss, bayes, 1.0, 0.5);
        CHECK(rep.excess_misclass <= 1e-8);
        CHECK(rep.smooth_bound_holds.value_or(true));
        CHECK(rep.hinge_bound_holds.value_or(true));
    }
}

TEST_CASE("comparison inequalities hold on many arbitrary predictors")
{
    const std::vector<Distribution> ds{builtin("affine"), builtin("holder", {{"a", 0.7}, {"r", 0.5}}),
                                       builtin("margin", {{"p", 0.9}, {"gap", 0.3}})};
    for (const auto& d : ds)
        for (int k = 1; k <= 8; ++k) {
            const Predictor f = [k](Point x) { return 1.5 * std::sin(k * 2.3 * x[0] + k) + 0.2 * k - 0.8; };
            for (auto loss : {Loss::hinge(), Loss::quadratic(), Loss::truncated_quadratic()}) {
                const auto rep = check_comparison(d, loss, f, d.noise().q, d.noise().c_hat);
                CHECK(rep.smooth_bound_holds.value_or(true));
                CHECK(rep.hinge_bound_holds.value_or(true));
            }
        }
}

TEST_CASE("learning curve on a noise-free constant distribution has zero excess")
{
    for (auto loss : {Loss::hinge(), Loss::quadratic(), Loss::truncated_quadratic()}) {
        auto cfg = small_config("constant", loss, Theorem::T1);
        cfg.params = {{"eta", 1.0}};
        const auto res = learning_curve(cfg);
        for (const auto& p : res.fit.points) CHECK(p.mean_excess == 0.0);
        CHECK(std::isnan(res.fit.exponent));
        CHECK_FALSE(res.fit.fit_note.empty());
    }
}

TEST_CASE("learning curve is deterministic and independent of thread count")
{
    auto cfg = small_config("affine", Loss::quadratic(), Theorem::T1);
    const auto a = learning_curve(cfg);
    cfg.threads = 3;
    const auto b = learning_curve(cfg);
    REQUIRE(a.trials.size() == b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        CHECK(a.trials[i].m == b.trials[i].m);
        CHECK(a.trials[i].trial == b.trials[i].trial);
        CHECK(a.trials[i].excess_misclass == b.trials[i].excess_misclass);
        CHECK(a.trials[i].objective == b.trials[i].objective);
    }
    CHECK(a.fit.exponent == b.fit.exponent);
    CHECK(a.fit.theoretical_exponent == doctest::Approx(0.5));
    CHECK(a.fit.theorem_tag == "T1");

    cfg.seed = 100;
    const auto c = learning_curve(cfg);
    CHECK(c.trials[0].objective != a.trials[0].objective);
}

TEST_CASE("learning curve records every trial's diagnostics")
{
    auto cfg = small_config("margin", Loss::hinge(), Theorem::C5);
    cfg.params = {{"p", 0.9}, {"gap", 0.3}};
    const auto res = learning_curve(cfg);
    CHECK(res.trials.size() == 12);
    for (const auto& t : res.trials) {
        CHECK_FALSE(t.failed);
        CHECK(t.lambda * t.norm_sq <= 1.0 + 1e-8);
        CHECK(t.residual <= 1e-7);
        REQUIRE(t.hinge_bound_holds.has_value());
        CHECK(*t.hinge_bound_holds);
        CHECK(t.sigma == 1.0);
    }
}

TEST_CASE("too many failed trials abort the curve")
{
    auto cfg = small_config("affine", Loss::hinge(), Theorem::T1);
    cfg.r = 1.0;
    cfg.max_iters = 1;
    cfg.hinge_gap_tol = 1e-15;
    CHECK_THROWS_AS(learning_curve(cfg), NumericalFailure);
}

TEST_CASE("config invariants are reported together")
{
    ExperimentConfig c;
    c.family = "nope";
    c.loss = Loss::hinge();
    c.theorem = Theorem::T2;
    c.m_grid = {10, 5};
    c.trials_per_m = 0;
    const auto p = c.problems();
    CHECK(p.size() >= 4);
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    CHECK(small_config("affine", Loss::quadratic(), Theorem::T2).problems().empty());
}
