#include "gkc/solver.hpp"

#include "gkc/errors.hpp"
#include "gkc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace gkc {

SolverConfig SolverConfig::defaults(std::size_t m, Loss loss, double lambda)
{
    SolverConfig c;
    c.lambda = lambda;
    if (loss.is_smooth()) {
        c.max_iters = 200;
        c.tol = 1e-8 * static_cast<double>(m);
    } else {
        c.max_iters = 50000;
        c.tol = 1e-7;
    }
    return c;
}

void SolverConfig::validate() const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("solver: lambda must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("solver: tol must be positive");
    if (max_iters < 1) throw InvalidArgument("solver: max_iters must be at least 1");
}

void Dataset::validate() const
{
    if (points.rows() != labels.size())
        throw DimensionMismatch("dataset: points and labels have different lengths");
    for (Eigen::Index i = 0; i < points.size(); ++i) {
        const double v = points.data()[i];
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("dataset: coordinates must lie in [0, 1]");
    }
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        if (labels[i] != 1.0 && labels[i] != -1.0) throw InvalidArgument("dataset: labels must be -1 or +1");
}

namespace {

double empirical_risk(Loss loss, const Vector& y, const Vector& f)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) s += loss.eval(y[i] * f[i]);
    return s / static_cast<double>(y.size());
}

TrainedModel train_smooth(const Dataset& data, Loss loss, double sigma, const SolverConfig& cfg,
                          const Matrix& K)
{
    const Eigen::Index m = data.size();
    const double md = static_cast<double>(m);
    const double lambda = cfg.lambda;
    const Vector& y = data.labels;

    Vector alpha = Vector::Zero(m);
    Vector f = Vector::Zero(m);
    double norm_sq = 0.0;
    double obj = loss.phi_zero();

    SolverDiagnostics diag;
    diag.objective_history.push_back(obj);

    Vector g(m), grad(m), delta(m), k_delta(m);
    std::vector<Eigen::Index> active, inactive;
    active.reserve(static_cast<std::size_t>(m));
    inactive.reserve(static_cast<std::size_t>(m));

    int it = 0;
    for (;; ++it) {
        for (Eigen::Index i = 0; i < m; ++i) g[i] = y[i] * loss.deriv(y[i] * f[i]) / md + 2.0 * lambda * alpha[i];
        grad.noalias() = K * g;
        const double gnorm = grad.norm();
        diag.stationarity_residual = gnorm;
        if (gnorm <= cfg.tol) {
            diag.converged = true;
            break;
        }
        if (it >= cfg.max_iters) break;

        // Newton system [(1/m) diag(phi'') K + 2 lambda I] delta = -g with phi'' in {0, 2}:
        // inactive rows decouple, active rows give (K_AA + lambda m I) delta_A = rhs.
        active.clear();
        inactive.clear();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (loss.second_deriv(y[i] * f[i]) > 0.0) active.push_back(i);
            else inactive.push_back(i);
        }
        for (auto i : inactive) delta[i] = -g[i] / (2.0 * lambda);
        if (!active.empty()) {
            const auto na = static_cast<Eigen::Index>(active.size());
            Matrix kaa(na, na);
            Vector rhs(na);
            for (Eigen::Index b = 0; b < na; ++b) {
                const Eigen::Index jb = active[static_cast<std::size_t>(b)];
                for (Eigen::Index a = 0; a < na; ++a) kaa(a, b) = K(active[static_cast<std::size_t>(a)], jb);
                kaa(b, b) += lambda * md;
                double s = -0.5 * md * g[jb];
                for (auto j : inactive) s -= K(jb, j) * delta[j];
                rhs[b] = s;
            }
            Eigen::LLT<Matrix> llt(kaa);
            Vector da;
            if (llt.info() == Eigen::Success) {
                da = llt.solve(rhs);
            } else {
                da = kaa.ldlt().solve(rhs);
            }
            for (Eigen::Index a = 0; a < na; ++a) delta[active[static_cast<std::size_t>(a)]] = da[a];
        }
        k_delta.noalias() = K * delta;
        double slope = grad.dot(delta);
        if (!(slope < 0.0) || !std::isfinite(slope)) {
            delta = -grad;
            k_delta.noalias() = K * delta;
            slope = grad.dot(delta);
        }

        const double a_kd = alpha.dot(k_delta);
        const double d_kd = delta.dot(k_delta);
        double t = 1.0;
        bool accepted = false;
        double new_obj = obj;
        for (int ls = 0; ls < 60; ++ls) {
            const double ns = norm_sq + 2.0 * t * a_kd + t * t * d_kd;
            new_obj = empirical_risk(loss, y, f + t * k_delta) + lambda * ns;
            if (new_obj <= obj + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break; // no representable descent left
        alpha += t * delta;
        f.noalias() = K * alpha;
        norm_sq = alpha.dot(f);
        obj = empirical_risk(loss, y, f) + lambda * norm_sq;
        diag.objective_history.push_back(obj);
    }

    diag.iterations = it;
    diag.final_objective = empirical_risk(loss, y, f) + lambda * norm_sq;
    diag.rkhs_norm_sq = norm_sq;
    return TrainedModel(data.points, std::move(alpha), sigma, lambda, std::move(diag));
}

struct HingeState {
    double primal;
    double dual;
};

HingeState hinge_values(const Vector& y, const Vector& beta, const Vector& f, double lambda)
{
    const Eigen::Index m = y.size();
    double hinge_sum = 0.0;
    double beta_sum = 0.0;
    double norm_sq = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        hinge_sum += std::max(1.0 - y[i] * f[i], 0.0);
        beta_sum += beta[i];
        norm_sq += y[i] * beta[i] * f[i];
    }
    const double primal = hinge_sum / static_cast<double>(m) + lambda * norm_sq;
    const double dual = 2.0 * lambda * beta_sum - lambda * norm_sq;
    return {primal, dual};
}

// Dual of (1/2)|f|^2 + C sum_i xi_i without offset:
//   max_beta sum beta_i - (1/2) beta^T Q beta,  0 <= beta_i <= C,  Q_ij = y_i y_j K_ij,
// with f = sum_i beta_i y_i K(., x_i). Values are reported in the lambda-scaled
// objective, i.e. multiplied by 2 lambda.
TrainedModel train_hinge_dcd(const Dataset& data, double sigma, const SolverConfig& cfg, const Matrix& K)
{
    const Eigen::Index m = data.size();
    const double lambda = cfg.lambda;
    const double upper = 1.0 / (2.0 * lambda * static_cast<double>(m));
    const Vector& y = data.labels;

    Vector beta = Vector::Zero(m);
    Vector f = Vector::Zero(m);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(derive_seed(data.seed, 0x64636400));

    auto refresh = [&] { f.noalias() = K * y.cwiseProduct(beta); };

    SolverDiagnostics diag;
    diag.objective_history.push_back(1.0);
    HingeState st{1.0, 0.0};
    int epoch = 0;
    while (epoch < cfg.max_iters) {
        ++epoch;
        rng.shuffle(std::span<Eigen::Index>(order));
        for (auto i : order) {
            const double grad = y[i] * f[i] - 1.0;
            const double b = beta[i];
            double pg = grad;
            if (b <= 0.0) pg = std::min(grad, 0.0);
            else if (b >= upper) pg = std::max(grad, 0.0);
            if (pg == 0.0) continue;
            const double nb = std::clamp(b - grad / K(i, i), 0.0, upper);
            const double step = (nb - b) * y[i];
            if (step == 0.0) continue;
            beta[i] = nb;
            f.noalias() += step * K.col(i);
        }
        if (epoch % 32 == 0) refresh();
        st = hinge_values(y, beta, f, lambda);
        if (st.primal - st.dual <= cfg.tol) {
            refresh();
            st = hinge_values(y, beta, f, lambda);
            if (st.primal - st.dual <= cfg.tol) {
                diag.converged = true;
                break;
            }
        }
    }
    if (!diag.converged) {
        refresh();
        st = hinge_values(y, beta, f, lambda);
    }

    Vector alpha = y.cwiseProduct(beta);
    double norm_sq = alpha.dot(f);
    // A gap-optimal point above phi(0) means the zero function is gap-optimal too.
    if (st.primal > 1.0) {
        alpha.setZero();
        norm_sq = 0.0;
        st.primal = 1.0;
    }
    diag.iterations = epoch;
    diag.final_objective = st.primal;
    diag.dual_gap = st.primal - st.dual;
    diag.stationarity_residual = diag.dual_gap;
    diag.rkhs_norm_sq = norm_sq;
    diag.objective_history.push_back(st.primal);
    return TrainedModel(data.points, std::move(alpha), sigma, lambda, std::move(diag));
}

} // namespace

TrainedModel train(const Dataset& data, Loss loss, double sigma, const SolverConfig& config)
{
    data.validate();
    if (data.size() < 1) throw InvalidArgument("train: empty dataset");
    return train(data, loss, sigma, config, gram(GaussianKernel(sigma), data.points));
}

TrainedModel train(const Dataset& data, Loss loss, double sigma, const SolverConfig& config,
                   const Matrix& K)
{
    config.validate();
    if (data.size() < 1) throw InvalidArgument("train: empty dataset");
    if (!(sigma > 0.0)) throw InvalidArgument("train: sigma must be positive");
    if (K.rows() != data.size() || K.cols() != data.size())
        throw DimensionMismatch("train: Gram matrix size differs from the sample size");
    if (loss.is_smooth()) return train_smooth(data, loss, sigma, config, K);
    return train_hinge_dcd(data, sigma, config, K);
}

double objective(const Dataset& data, Loss loss, double sigma, double lambda, const Vector& coeffs)
{
    if (coeffs.size() != data.size() || data.labels.size() != data.size())
        throw DimensionMismatch("objective: coefficient count differs from the sample size");
    if (data.size() == 0) throw InvalidArgument("objective: empty dataset");
    const Matrix K = gram(GaussianKernel(sigma), data.points);
    const Vector f = K * coeffs;
    return empirical_risk(loss, data.labels, f) + lambda * coeffs.dot(f);
}

std::string_view regime_name(Regime r) noexcept
{
    switch (r) {
    case Regime::NoNoise: return "NoNoise";
    case Regime::TsybakovSmooth: return "TsybakovSmooth";
    case Regime::TsybakovHinge: return "TsybakovHinge";
    case Regime::InfinitelySmooth: return "InfinitelySmooth";
    }
    return "";
}

Schedule schedule(std::size_t m, double r, int d, double q, Loss loss, Regime regime)
{
    if (m < 1) throw InvalidArgument("schedule: m must be at least 1");
    if (!(r > 0.0)) throw InvalidArgument("schedule: r must be positive");
    if (d < 1) throw InvalidArgument("schedule: d must be at least 1");
    if (!(q >= 0.0)) throw InvalidArgument("schedule: q must be nonnegative");
    if (regime == Regime::TsybakovHinge && loss.is_smooth())
        throw InvalidArgument("schedule: TsybakovHinge requires the hinge loss");
    if (regime == Regime::TsybakovSmooth && !loss.is_smooth())
        throw InvalidArgument("schedule: TsybakovSmooth requires a twice smooth loss");

    const double md = static_cast<double>(m);
    const double dd = static_cast<double>(d);
    double exponent = 0.0;
    switch (regime) {
    case Regime::NoNoise:
    case Regime::TsybakovSmooth:
        exponent = std::isinf(r) ? 0.0 : 1.0 / (2.0 * r + dd);
        break;
    case Regime::TsybakovHinge:
        if (std::isinf(r)) exponent = 0.0;
        else if (std::isinf(q)) exponent = 1.0 / (r + dd);
        else exponent = (q + 1.0) / ((q + 2.0) * r + (q + 1.0) * dd);
        break;
    case Regime::InfinitelySmooth:
        exponent = 0.0;
        break;
    }
    return {1.0 / md, std::pow(md, -exponent)};
}

} // namespace gkc
