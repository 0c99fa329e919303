#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gkc {

enum class LossKind { Hinge, Quadratic, TruncatedQuadratic };

struct CurvatureConstants {
    double mu;        // modulus of convexity: delta(eps) >= mu * eps^2
    double lipschitz; // |phi'(u) - phi'(v)| <= L* |u - v|
};

/// Convex classifying loss phi with phi(0) = 1 and smallest zero at 1.
///
/// Immutable value type. The curvature constants are stored per kind rather
/// than recomputed; the grid checks live in the test suite.
class Loss {
public:
    constexpr explicit Loss(LossKind kind) noexcept : kind_(kind) {}

    static constexpr Loss hinge() noexcept { return Loss(LossKind::Hinge); }
    static constexpr Loss quadratic() noexcept { return Loss(LossKind::Quadratic); }
    static constexpr Loss truncated_quadratic() noexcept { return Loss(LossKind::TruncatedQuadratic); }

    /// Parses "hinge" | "quadratic" | "truncated_quadratic".
    static Loss from_name(std::string_view name);

    constexpr LossKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept;

    /// Twice smooth in the sense of a Lipschitz derivative plus quadratic modulus of convexity.
    constexpr bool is_smooth() const noexcept { return kind_ != LossKind::Hinge; }

    constexpr double phi_zero() const noexcept { return 1.0; }

    double eval(double u) const noexcept;

    /// Derivative; for hinge the subgradient -1 (u < 1) or 0 (u >= 1).
    double deriv(double u) const noexcept;

    /// Second derivative where it exists, 0 on flat pieces. Hinge returns 0.
    double second_deriv(double u) const noexcept;

    /// Pointwise minimizer of the conditional risk eta*phi(t) + (1-eta)*phi(-t).
    /// Hinge uses the representative sign(2 eta - 1) with sign(0) = +1.
    double regression_target(double eta) const;

    /// Throws UnsupportedLoss for hinge.
    CurvatureConstants curvature_constants() const;

    friend constexpr bool operator==(Loss, Loss) = default;

private:
    LossKind kind_;
};

/// Truncation to [-1, 1].
constexpr double clip(double v) noexcept
{
    return v > 1.0 ? 1.0 : (v < -1.0 ? -1.0 : v);
}

/// sign with sign(0) = +1.
constexpr double sign_of(double v) noexcept
{
    return v >= 0.0 ? 1.0 : -1.0;
}

} // namespace gkc
