#include "gkc/kernel.hpp"

#include "gkc/errors.hpp"
#include "gkc/loss.hpp"

#include <utility>

namespace gkc {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) noexcept
{
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

} // namespace

GaussianKernel::GaussianKernel(double sigma)
    : sigma_(sigma)
    , inv_sigma_sq_(1.0 / (sigma * sigma))
{
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidArgument("GaussianKernel: sigma must be positive and finite");
}

double GaussianKernel::operator()(Point x, Point x2) const
{
    if (x.size() != x2.size())
        throw DimensionMismatch("gauss: points have different dimensions");
    return from_sq_dist(sq_dist(x.data(), x2.data(), x.size()));
}

Matrix gram(const GaussianKernel& k, const PointSet& points)
{
    const Eigen::Index m = points.rows();
    if (m == 0) throw InvalidArgument("gram: empty point set");
    const auto d = static_cast<std::size_t>(points.cols());
    Matrix g(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        g(j, j) = 1.0;
        const double* xj = points.data() + j * points.cols();
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const double v = k.from_sq_dist(sq_dist(points.data() + i * points.cols(), xj, d));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

double rkhs_norm_sq(const Matrix& gram, const Vector& coeffs)
{
    if (gram.rows() != gram.cols() || gram.rows() != coeffs.size())
        throw DimensionMismatch("rkhs_norm_sq: Gram and coefficient sizes disagree");
    return coeffs.dot(gram * coeffs);
}

TrainedModel::TrainedModel(PointSet support_points, Vector coeffs, double sigma, double lambda,
                           SolverDiagnostics diagnostics)
    : support_(std::move(support_points))
    , coeffs_(std::move(coeffs))
    , kernel_(sigma)
    , lambda_(lambda)
    , diagnostics_(std::move(diagnostics))
{
    if (support_.rows() != coeffs_.size())
        throw DimensionMismatch("TrainedModel: one coefficient per support point required");
}

double TrainedModel::predict(Point x) const
{
    if (static_cast<Eigen::Index>(x.size()) != support_.cols())
        throw DimensionMismatch("predict: point dimension differs from the model");
    const auto d = x.size();
    double f = 0.0;
    for (Eigen::Index i = 0; i < support_.rows(); ++i) {
        const double c = coeffs_[i];
        if (c == 0.0) continue;
        f += c * kernel_.from_sq_dist(sq_dist(support_.data() + i * support_.cols(), x.data(), d));
    }
    return f;
}

double TrainedModel::classify(Point x) const
{
    return sign_of(predict(x));
}

double TrainedModel::rkhs_norm_sq() const
{
    if (support_.rows() == 0) return 0.0;
    return gkc::rkhs_norm_sq(gram(kernel_, support_), coeffs_);
}

} // namespace gkc
