#include "gkc/loss.hpp"

#include "gkc/errors.hpp"

#include <algorithm>
#include <string>

namespace gkc {

Loss Loss::from_name(std::string_view name)
{
    if (name == "hinge") return hinge();
    if (name == "quadratic") return quadratic();
    if (name == "truncated_quadratic") return truncated_quadratic();
    throw InvalidArgument("unknown loss '" + std::string(name) +
                          "' (expected hinge | quadratic | truncated_quadratic)");
}

std::string_view Loss::name() const noexcept
{
    switch (kind_) {
    case LossKind::Hinge: return "hinge";
    case LossKind::Quadratic: return "quadratic";
    case LossKind::TruncatedQuadratic: return "truncated_quadratic";
    }
    return "";
}

double Loss::eval(double u) const noexcept
{
    switch (kind_) {
    case LossKind::Quadratic: return (1.0 - u) * (1.0 - u);
    case LossKind::TruncatedQuadratic: {
        const double t = std::max(1.0 - u, 0.0);
        return t * t;
    }
    case LossKind::Hinge: return std::max(1.0 - u, 0.0);
    }
    return 0.0;
}

double Loss::deriv(double u) const noexcept
{
    switch (kind_) {
    case LossKind::Quadratic: return -2.0 * (1.0 - u);
    case LossKind::TruncatedQuadratic: return -2.0 * std::max(1.0 - u, 0.0);
    case LossKind::Hinge: return u < 1.0 ? -1.0 : 0.0;
    }
    return 0.0;
}

double Loss::second_deriv(double u) const noexcept
{
    switch (kind_) {
    case LossKind::Quadratic: return 2.0;
    case LossKind::TruncatedQuadratic: return u < 1.0 ? 2.0 : 0.0;
    case LossKind::Hinge: return 0.0;
    }
    return 0.0;
}

double Loss::regression_target(double eta) const
{
    if (!(eta >= 0.0 && eta <= 1.0))
        throw InvalidArgument("regression_target: eta must lie in [0, 1]");
    if (kind_ == LossKind::Hinge) return sign_of(2.0 * eta - 1.0);
    return 2.0 * eta - 1.0;
}

CurvatureConstants Loss::curvature_constants() const
{
    switch (kind_) {
    case LossKind::Quadratic: return {0.25, 2.0};
    // Modulus of convexity taken over u, v <= 1; on the flat piece u, v >= 1
    // the midpoint gap is identically zero.
    case LossKind::TruncatedQuadratic: return {0.25, 2.0};
    case LossKind::Hinge: break;
    }
    throw UnsupportedLoss("hinge loss is not twice smooth: no curvature constants");
}

} // namespace gkc
