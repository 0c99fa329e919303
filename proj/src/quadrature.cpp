#include "gkc/quadrature.hpp"

#include "gkc/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace gkc {

std::vector<double> partition(double a, double b, std::vector<double> pts)
{
    std::erase_if(pts, [&](double p) { return !(p > a && p < b); });
    pts.push_back(a);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

namespace {

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
    int depth;
};

Panel gk_panel(const ScalarFn& f, double lo, double hi, int depth)
{
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    const double v = gauss_kronrod<double, 15>::integrate(f, lo, hi, 0, 0.0, &err);
    return {lo, hi, v, err, depth};
}

} // namespace

Estimate integrate(const ScalarFn& f, double a, double b, std::span<const double> breakpoints,
                   const QuadratureOptions& opts)
{
    Estimate est;
    if (!(b > a)) return est;
    const auto pts = partition(a, b, {breakpoints.begin(), breakpoints.end()});

    // Global adaptivity: always bisect the panel with the largest error, so an
    // unresolved jump costs O(depth) panels instead of a full binary tree.
    auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
    std::vector<Panel> heap;
    std::vector<Panel> done;
    double value = 0.0;
    double error = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (!(pts[k + 1] > pts[k])) continue;
        heap.push_back(gk_panel(f, pts[k], pts[k + 1], 0));
        value += heap.back().value;
        error += heap.back().error;
    }
    std::make_heap(heap.begin(), heap.end(), worse);

    const std::size_t max_panels = 64 * pts.size() + 2000;
    while (!heap.empty() && error > opts.abs_tol && heap.size() + done.size() < max_panels) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        const Panel p = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (p.lo + p.hi);
        if (p.depth >= opts.max_depth || !(mid > p.lo && mid < p.hi)) {
            done.push_back(p);
            continue;
        }
        const Panel left = gk_panel(f, p.lo, mid, p.depth + 1);
        const Panel right = gk_panel(f, mid, p.hi, p.depth + 1);
        value += left.value + right.value - p.value;
        error += left.error + right.error - p.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), worse);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), worse);
    }

    // Re-sum to drop the cancellation error of the running totals.
    est.value = 0.0;
    est.abs_error = 0.0;
    for (const auto* set : {&heap, &done}) {
        for (const auto& p : *set) {
            est.value += p.value;
            est.abs_error += p.error;
        }
    }
    est.converged = std::isfinite(est.value) && est.abs_error <= opts.abs_tol;
    return est;
}

std::vector<double> find_crossings(const ScalarFn& g, double a, double b, std::size_t cells,
                                   std::span<const double> levels)
{
    if (cells == 0) throw InvalidArgument("find_crossings: need at least one cell");
    std::vector<double> xs(cells + 1), gs(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        xs[i] = i == cells ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(cells);
        gs[i] = g(xs[i]);
    }
    std::vector<double> roots;
    const boost::math::tools::eps_tolerance<double> tol(52);
    for (const double level : levels) {
        for (std::size_t i = 0; i < cells; ++i) {
            const double lo = gs[i] - level;
            const double hi = gs[i + 1] - level;
            if (lo == 0.0) {
                roots.push_back(xs[i]);
                continue;
            }
            if (hi == 0.0 || (lo < 0.0) == (hi < 0.0)) continue;
            std::uintmax_t iters = 200;
            const auto bracket = boost::math::tools::toms748_solve(
                [&](double x) { return g(x) - level; }, xs[i], xs[i + 1], lo, hi, tol, iters);
            roots.push_back(0.5 * (bracket.first + bracket.second));
        }
        if (gs[cells] - level == 0.0) roots.push_back(b);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

} // namespace gkc
