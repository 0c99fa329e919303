#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gkc {

struct QuadratureOptions {
    double abs_tol = 1e-8;
    int max_depth = 30;
    // Cells used to bracket crossings before root refinement (1-D).
    std::size_t scan_points = 2048;
    // Monte Carlo budget for d >= 2.
    std::size_t mc_points = 1'000'000;
    std::uint64_t mc_seed = 0x5eed;
};

/// A numerical integral with its error estimate (quadrature error or Monte
/// Carlo standard error).
struct Estimate {
    double value = 0.0;
    double abs_error = 0.0;
    bool converged = true;
};

using ScalarFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on [a, b], split at the given breakpoints so that
/// the integrand only needs to be smooth between them.
Estimate integrate(const ScalarFn& f, double a, double b, std::span<const double> breakpoints,
                   const QuadratureOptions& opts = {});

/// Points in [a, b] where g crosses any of the levels. Brackets come from a
/// uniform scan with `cells` cells; each bracket is refined to machine precision.
std::vector<double> find_crossings(const ScalarFn& g, double a, double b, std::size_t cells,
                                   std::span<const double> levels);

/// Sorted, de-duplicated copy of pts restricted to (a, b), with a and b added.
std::vector<double> partition(double a, double b, std::vector<double> pts);

} // namespace gkc
