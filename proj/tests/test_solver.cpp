#include "gkc/errors.hpp"
#include "gkc/solver.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace gkc;

namespace {

Dataset one_point(double x, double y)
{
    Dataset d;
    d.points = PointSet::Constant(1, 1, x);
    d.labels = Vector::Constant(1, y);
    return d;
}

TrainedModel fit(const Dataset& d, Loss loss, double sigma, double lambda)
{
    return train(d, loss, sigma, SolverConfig::defaults(static_cast<std::size_t>(d.size()), loss, lambda));
}

// Coefficient-space gradient K[(1/m) y phi'(y K a) + 2 lambda a], recomputed from scratch.
double gradient_norm(const Dataset& d, Loss loss, double sigma, double lambda, const Vector& a)
{
    const auto m = d.size();
    Vector f = Vector::Zero(m), g(m), grad = Vector::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) f[i] += oracle::gauss(d.points, i, j, sigma) * a[j];
    for (Eigen::Index i = 0; i < m; ++i)
        g[i] = d.labels[i] * loss.deriv(d.labels[i] * f[i]) / static_cast<double>(m) + 2 * lambda * a[i];
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) grad[i] += oracle::gauss(d.points, i, j, sigma) * g[j];
    return grad.norm();
}

} // namespace

TEST_CASE("single point closed form")
{
    const auto d = one_point(0.4, 1.0);
    const auto model = fit(d, Loss::quadratic(), 1.0, 0.5);
    CHECK(model.coeffs()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    const std::vector<double> x{0.4};
    CHECK(model.predict(x) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(objective(d, Loss::quadratic(), 1.0, 0.5, model.coeffs()) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("objective values")
{
    const auto d = oracle::random_dataset(7, 2, 1);
    for (auto loss : {Loss::hinge(), Loss::quadratic(), Loss::truncated_quadratic()})
        CHECK(objective(d, loss, 0.5, 0.1, Vector::Zero(7)) == 1.0);
    CHECK_THROWS_AS(objective(d, Loss::quadratic(), 0.5, 0.1, Vector::Zero(3)), DimensionMismatch);

    // Perfect hinge fit: the empirical term vanishes.
    const auto s = one_point(0.5, -1.0);
    const Vector a = Vector::Constant(1, -2.0);
    CHECK(objective(s, Loss::hinge(), 1.0, 0.3, a) == doctest::Approx(0.3 * 4.0));
}

TEST_CASE("huge lambda drives the solution to zero")
{
    const auto d = oracle::random_dataset(20, 1, 2);
    const auto model = fit(d, Loss::quadratic(), 0.3, 1e9);
    CHECK(model.coeffs().cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(model.diagnostics().final_objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("duplicated point with opposite labels predicts zero")
{
    Dataset d;
    d.points = PointSet::Constant(2, 1, 0.25);
    d.labels.resize(2);
    d.labels << 1.0, -1.0;
    const auto model = fit(d, Loss::quadratic(), 1.0, 0.1);
    const std::vector<double> x{0.25};
    CHECK(std::abs(model.predict(x)) <= 1e-12);
}

TEST_CASE("quadratic solver matches the exact linear system")
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto m = static_cast<std::size_t>(1 + seed % 6);
        const int d = 1 + static_cast<int>(seed % 3);
        const auto data = oracle::random_dataset(m, d, 100 + seed);
        const double sigma = 0.2 + 0.1 * static_cast<double>(seed % 7);
        const double lambda = std::pow(10.0, -static_cast<double>(seed % 4));
        const auto exact = oracle::quadratic_coeffs(data.points, data.labels, sigma, lambda);
        const auto model = fit(data, Loss::quadratic(), sigma, lambda);
        for (std::size_t i = 0; i < m; ++i)
            CHECK(model.coeffs()[static_cast<Eigen::Index>(i)] == doctest::Approx(exact[i]).epsilon(1e-6));
    }
}

TEST_CASE("smooth solvers reach stationarity and keep the objective monotone")
{
    for (auto loss : {Loss::quadratic(), Loss::truncated_quadratic()}) {
        for (std::uint64_t seed = 0; seed < 6; ++seed) {
            const std::size_t m = 50 + 40 * seed;
            const auto data = oracle::random_dataset(m, 1 + static_cast<int>(seed % 2), seed, 0.7);
            const double sigma = 0.15, lambda = 1.0 / static_cast<double>(m);
            const auto model = fit(data, loss, sigma, lambda);
            const auto& diag = model.diagnostics();
            REQUIRE(diag.converged);
            CHECK(gradient_norm(data, loss, sigma, lambda, model.coeffs()) <= 1e-8 * static_cast<double>(m) * 1.01);
            for (std::size_t k = 1; k < diag.objective_history.size(); ++k)
                CHECK(diag.objective_history[k] <= diag.objective_history[k - 1] + 1e-15);
            CHECK(diag.final_objective <= loss.phi_zero());
            CHECK(lambda * model.rkhs_norm_sq() <= loss.phi_zero() + 1e-8);
            CHECK(diag.final_objective ==
                  doctest::Approx(objective(data, loss, sigma, lambda, model.coeffs())).epsilon(1e-10));
        }
    }
}

TEST_CASE("truncated quadratic agrees with quadratic when every margin stays below one")
{
    // With strong regularization all y f < 1, so both losses share the minimizer.
    const auto data = oracle::random_dataset(30, 1, 9);
    const auto a = fit(data, Loss::quadratic(), 0.5, 1.0);
    const auto b = fit(data, Loss::truncated_quadratic(), 0.5, 1.0);
    CHECK((a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("hinge dual coordinate descent certifies optimality")
{
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const std::size_t m = 40 + 60 * seed;
        const auto data = oracle::random_dataset(m, 1 + static_cast<int>(seed % 3), 50 + seed, 0.6);
        const double sigma = 0.3, lambda = 1.0 / static_cast<double>(m);
        const auto model = fit(data, Loss::hinge(), sigma, lambda);
        const auto& diag = model.diagnostics();
        REQUIRE(diag.converged);
        CHECK(diag.dual_gap <= 1e-7);
        CHECK(diag.final_objective <= 1.0);
        CHECK(lambda * model.rkhs_norm_sq() <= 1.0 + 1e-8);
        const double obj = objective(data, Loss::hinge(), sigma, lambda, model.coeffs());
        CHECK(obj == doctest::Approx(diag.final_objective).epsilon(1e-9));

        // No random perturbation improves the primal by more than the gap.
        Rng rng(seed);
        for (int k = 0; k < 20; ++k) {
            Vector a = model.coeffs();
            for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += 1e-3 * (2 * rng.uniform() - 1);
            CHECK(objective(data, Loss::hinge(), sigma, lambda, a) >= obj - diag.dual_gap - 1e-12);
        }
    }
}

TEST_CASE("hinge on separable data fits every margin")
{
    Dataset d;
    d.points.resize(4, 1);
    d.points << 0.0, 0.1, 0.9, 1.0;
    d.labels.resize(4);
    d.labels << -1, -1, 1, 1;
    const auto model = fit(d, Loss::hinge(), 0.2, 1e-4);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(d.labels[i] * model.predict(row_of(d.points, i)) >= 1.0 - 1e-6);
}

TEST_CASE("invalid inputs")
{
    auto d = oracle::random_dataset(3, 1, 1);
    CHECK_THROWS_AS(train(d, Loss::quadratic(), 0.0, SolverConfig::defaults(3, Loss::quadratic(), 1)), InvalidArgument);
    SolverConfig bad;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(train(d, Loss::quadratic(), 1.0, bad), InvalidArgument);
    d.labels[0] = 0.5;
    CHECK_THROWS_AS(train(d, Loss::quadratic(), 1.0, SolverConfig{}), InvalidArgument);
    d.labels[0] = 1.0;
    d.points(0, 0) = 1.5;
    CHECK_THROWS_AS(train(d, Loss::quadratic(), 1.0, SolverConfig{}), InvalidArgument);
}

TEST_CASE("non-convergence is flagged, not thrown")
{
    const auto data = oracle::random_dataset(200, 1, 3);
    auto cfg = SolverConfig::defaults(200, Loss::hinge(), 1.0 / 200);
    cfg.max_iters = 1;
    cfg.tol = 1e-14;
    const auto model = train(data, Loss::hinge(), 0.05, cfg);
    CHECK_FALSE(model.diagnostics().converged);
}

TEST_CASE("schedules")
{
    const double inf = std::numeric_limits<double>::infinity();
    auto s = schedule(1000, 1, 1, 1, Loss::quadratic(), Regime::NoNoise);
    CHECK(s.lambda == doctest::Approx(0.001));
    CHECK(s.sigma == doctest::Approx(0.1).epsilon(1e-12));
    s = schedule(1000, 1, 1, 1, Loss::hinge(), Regime::TsybakovHinge);
    CHECK(s.sigma == doctest::Approx(std::pow(1000.0, -0.4)).epsilon(1e-12));
    CHECK(s.sigma == doctest::Approx(0.0631).epsilon(1e-3));
    s = schedule(50, 1, 1, 1, Loss::hinge(), Regime::InfinitelySmooth);
    CHECK(s.lambda == 0.02);
    CHECK(s.sigma == 1.0);
    s = schedule(4096, 5, 1, 1, Loss::quadratic(), Regime::TsybakovSmooth);
    CHECK(s.sigma == doctest::Approx(std::pow(4096.0, -1.0 / 11.0)));
    CHECK(schedule(100, 2, 1, inf, Loss::hinge(), Regime::TsybakovHinge).sigma ==
          doctest::Approx(std::pow(100.0, -1.0 / 3.0)));
    CHECK(schedule(100, inf, 1, 1, Loss::hinge(), Regime::TsybakovHinge).sigma == 1.0);
    CHECK_THROWS_AS(schedule(10, 1, 1, 1, Loss::quadratic(), Regime::TsybakovHinge), InvalidArgument);
    CHECK_THROWS_AS(schedule(10, 1, 1, 1, Loss::hinge(), Regime::TsybakovSmooth), InvalidArgument);
    CHECK_THROWS_AS(schedule(0, 1, 1, 1, Loss::hinge(), Regime::NoNoise), InvalidArgument);
}
