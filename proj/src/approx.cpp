#include "gkc/approx.hpp"

#include "gkc/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <cmath>
#include <string>
#include <utility>

namespace gkc {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

// C(s, j) (-1)^{1-j} j^{-d} (2 / (sigma^2 pi))^{d/2}
std::vector<double> binomial_coeffs(const ConvKernelSpec& spec, int dim)
{
    std::vector<double> c(static_cast<std::size_t>(spec.order));
    const double norm = std::pow(2.0 / (spec.sigma * spec.sigma * kPi), 0.5 * dim);
    for (int j = 1; j <= spec.order; ++j) {
        const double binom = boost::math::binomial_coefficient<double>(static_cast<unsigned>(spec.order),
                                                                       static_cast<unsigned>(j));
        const double sign = (j % 2 == 1) ? 1.0 : -1.0;
        c[static_cast<std::size_t>(j - 1)] = binom * sign * std::pow(static_cast<double>(j), -dim) * norm;
    }
    return c;
}

// Visits every node of a tensor grid with `n` nodes per axis in dimension d.
template <class F>
void for_each_node(std::size_t n, int d, F&& visit)
{
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    for (;;) {
        visit(std::span<const std::size_t>(idx));
        int k = 0;
        while (k < d && ++idx[static_cast<std::size_t>(k)] == n) idx[static_cast<std::size_t>(k++)] = 0;
        if (k == d) return;
    }
}

std::size_t checked_grid_size(std::size_t per_axis, int d, std::size_t budget)
{
    double total = std::pow(static_cast<double>(per_axis), d);
    if (total > static_cast<double>(budget))
        throw NumericalFailure("convolution quadrature needs " + std::to_string(static_cast<long long>(total)) +
                               " nodes, budget is " + std::to_string(budget));
    return static_cast<std::size_t>(total);
}

} // namespace

double fold(double x)
{
    double w = std::fmod(x, 2.0);
    if (w < 0.0) w += 2.0;
    return std::min(w, 2.0 - w);
}

std::vector<double> fold(Point x)
{
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = fold(x[i]);
    return out;
}

void ConvKernelSpec::validate() const
{
    if (order < 1) throw InvalidArgument("conv kernel: order must be at least 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("conv kernel: sigma must be positive");
}

int order_for_smoothness(double r)
{
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("order_for_smoothness: r must be positive and finite");
    return std::max(1, static_cast<int>(std::ceil(r)));
}

double conv_kernel(const ConvKernelSpec& spec, Point x)
{
    spec.validate();
    const int d = static_cast<int>(x.size());
    double sq = 0.0;
    for (double v : x) sq += v * v;
    const auto c = binomial_coeffs(spec, d);
    double k = 0.0;
    for (int j = 1; j <= spec.order; ++j) {
        const double w = static_cast<double>(j) * spec.sigma;
        k += c[static_cast<std::size_t>(j - 1)] * std::exp(-2.0 * sq / (w * w));
    }
    return k;
}

SmoothApproximant::SmoothApproximant(FieldFn f, int dim, ConvKernelSpec spec, ConvQuadrature quad)
    : f_(std::move(f))
    , dim_(dim)
    , spec_(spec)
{
    spec_.validate();
    if (dim_ < 1) throw InvalidArgument("smooth_approximant: dimension must be at least 1");
    if (!(quad.nodes_per_sigma > 0.0) || !(quad.radius_factor > 0.0))
        throw InvalidArgument("smooth_approximant: quadrature spacing and radius must be positive");
    const double h = spec_.sigma / quad.nodes_per_sigma;
    const double radius = quad.radius_factor * spec_.order * spec_.sigma;
    const auto half = static_cast<long>(std::ceil(radius / h));
    const auto n = static_cast<std::size_t>(2 * half + 1);
    checked_grid_size(n, dim_, quad.max_nodes);

    offsets_.resize(n);
    for (std::size_t i = 0; i < n; ++i) offsets_[i] = (static_cast<double>(i) - static_cast<double>(half)) * h;

    // The kernel factorizes over coordinates, so each binomial term is a product
    // of 1-D factors; the constant per term absorbs the normalization.
    coeffs_ = binomial_coeffs(spec_, dim_);
    factors_.assign(static_cast<std::size_t>(spec_.order), std::vector<double>(n));
    for (int j = 1; j <= spec_.order; ++j) {
        const double w = static_cast<double>(j) * spec_.sigma;
        auto& fac = factors_[static_cast<std::size_t>(j - 1)];
        for (std::size_t i = 0; i < n; ++i) {
            const double trap = (i == 0 || i + 1 == n) ? 0.5 * h : h;
            fac[i] = trap * std::exp(-2.0 * offsets_[i] * offsets_[i] / (w * w));
        }
    }
}

double SmoothApproximant::operator()(Point x) const
{
    if (static_cast<int>(x.size()) != dim_) throw DimensionMismatch("smooth approximant: wrong point dimension");
    const std::size_t n = offsets_.size();
    std::vector<double> node(static_cast<std::size_t>(dim_));
    double total = 0.0;
    for_each_node(n, dim_, [&](std::span<const std::size_t> idx) {
        for (int k = 0; k < dim_; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            node[uk] = fold(x[uk] - offsets_[idx[uk]]);
        }
        double weight = 0.0;
        for (std::size_t j = 0; j < factors_.size(); ++j) {
            double w = coeffs_[j];
            for (int k = 0; k < dim_; ++k) w *= factors_[j][idx[static_cast<std::size_t>(k)]];
            weight += w;
        }
        total += weight * f_(Point(node));
    });
    return total;
}

SmoothApproximant smooth_approximant(FieldFn f, int dim, const ConvKernelSpec& spec, const ConvQuadrature& quad)
{
    return SmoothApproximant(std::move(f), dim, spec, quad);
}

double kernel_mass(const ConvKernelSpec& spec, int dim, const ConvQuadrature& quad)
{
    // K * 1 at any point is the quadrature of K over the truncation box.
    const SmoothApproximant one([](Point) { return 1.0; }, dim, spec, quad);
    const std::vector<double> origin(static_cast<std::size_t>(dim), 0.5);
    return one(Point(origin));
}

double rkhs_norm_bound(const ConvKernelSpec& spec, int dim, double f_sup)
{
    spec.validate();
    if (!(f_sup >= 0.0)) throw InvalidArgument("rkhs_norm_bound: f_sup must be nonnegative");
    return std::pow(kPi, -0.25 * dim) * (std::pow(2.0, spec.order) - 1.0) * std::pow(spec.sigma, -0.5 * dim) * f_sup;
}

double sup_error(const FieldFn& f, const FieldFn& f0, const PointSet& grid)
{
    if (grid.rows() == 0) throw InvalidArgument("sup_error: empty grid");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        const Point x = row_of(grid, i);
        worst = std::max(worst, std::abs(f(x) - f0(x)));
    }
    return worst;
}

PointSet uniform_grid(int dim, std::size_t per_axis)
{
    if (dim < 1 || per_axis < 2) throw InvalidArgument("uniform_grid: need dim >= 1 and at least 2 points per axis");
    const std::size_t total = checked_grid_size(per_axis, dim, 100'000'000);
    PointSet grid(static_cast<Eigen::Index>(total), dim);
    Eigen::Index row = 0;
    for_each_node(per_axis, dim, [&](std::span<const std::size_t> idx) {
        for (int k = 0; k < dim; ++k)
            grid(row, k) = static_cast<double>(idx[static_cast<std::size_t>(k)]) / static_cast<double>(per_axis - 1);
        ++row;
    });
    return grid;
}

std::vector<SweepRow> sigma_sweep(const FieldFn& f, int dim, int order, std::span<const double> sigmas,
                                  const PointSet& grid, const ConvQuadrature& quad)
{
    std::vector<SweepRow> rows;
    rows.reserve(sigmas.size());
    for (const double sigma : sigmas) {
        const auto f0 = smooth_approximant(f, dim, {order, sigma}, quad);
        rows.push_back({sigma, sup_error(f, [&](Point x) { return f0(x); }, grid)});
    }
    return rows;
}

} // namespace gkc
