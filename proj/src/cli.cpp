#include "gkc/cli.hpp"

#include "gkc/approx.hpp"
#include "gkc/config.hpp"
#include "gkc/errors.hpp"
#include "gkc/harness.hpp"
#include "gkc/output.hpp"
#include "gkc/rng.hpp"
#include "gkc/synth.hpp"

#include <CLI11.hpp>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>

namespace gkc::cli {

namespace {

double parse_real(const std::string& text, const char* what)
{
    if (text == "inf" || text == "+inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InvalidArgument(std::string(what) + ": '" + text + "' is not a number");
    return v;
}

FamilyParams parse_params(const std::vector<std::string>& items)
{
    FamilyParams params;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw InvalidArgument("--param expects key=value, got '" + item + "'");
        params[item.substr(0, eq)] = parse_real(item.substr(eq + 1), "--param");
    }
    return params;
}

struct ModelOptions {
    std::string family = "affine";
    std::vector<std::string> params;
    std::string loss = "quadratic";
    std::string regime = "T1";
    std::size_t m = 256;
    std::uint64_t seed = 0;
    std::string r;
    std::string q;
    std::optional<double> sigma;
    std::optional<double> lambda;

    void attach(CLI::App& app)
    {
        app.add_option("--family", family, "Distribution family")->capture_default_str();
        app.add_option("--param", params, "Family parameter key=value (repeatable)");
        app.add_option("--loss", loss, "hinge | quadratic | truncated_quadratic")->capture_default_str();
        app.add_option("--regime", regime, "Schedule: T1 | T2 | T3 | C5")->capture_default_str();
        app.add_option("--m", m, "Sample size")->capture_default_str()->check(CLI::PositiveNumber);
        app.add_option("--seed", seed, "Sample seed")->capture_default_str();
        app.add_option("--r", r, "Override smoothness r (inf allowed)");
        app.add_option("--q", q, "Override noise exponent q (inf allowed)");
        app.add_option("--sigma", sigma, "Override the scheduled kernel width");
        app.add_option("--lambda", lambda, "Override the scheduled regularization");
    }
};

struct Trained {
    Distribution dist;
    Loss loss;
    ResolvedNoise noise;
    Schedule sched;
    TrainedModel model;
};

Trained train_one(const ModelOptions& o)
{
    ExperimentConfig cfg;
    cfg.family = o.family;
    cfg.params = parse_params(o.params);
    cfg.loss = Loss::from_name(o.loss);
    cfg.theorem = theorem_from_name(o.regime);
    if (!o.r.empty()) cfg.r = parse_real(o.r, "--r");
    if (!o.q.empty()) cfg.q = parse_real(o.q, "--q");
    check_pairing(cfg.loss, cfg.theorem);

    auto dist = builtin(cfg.family, cfg.params);
    const auto rq = resolve(cfg, dist);
    auto sched = schedule(o.m, rq.r, dist.dim(), rq.q, cfg.loss, regime_for(cfg.theorem));
    if (o.sigma) sched.sigma = *o.sigma;
    if (o.lambda) sched.lambda = *o.lambda;
    const auto data = sample(dist, o.m, o.seed);
    auto model = train(data, cfg.loss, sched.sigma, SolverConfig::defaults(o.m, cfg.loss, sched.lambda));
    return {std::move(dist), cfg.loss, rq, sched, std::move(model)};
}

void print_model(std::ostream& out, const Trained& t)
{
    const auto& d = t.model.diagnostics();
    fmt::print(out, "sigma            {}\n", format_double(t.sched.sigma));
    fmt::print(out, "lambda           {}\n", format_double(t.sched.lambda));
    fmt::print(out, "iterations       {}\n", d.iterations);
    fmt::print(out, "converged        {}\n", d.converged ? "yes" : "no");
    fmt::print(out, "objective        {}\n", format_double(d.final_objective));
    fmt::print(out, "residual         {}\n", format_double(d.stationarity_residual));
    if (!std::isnan(d.dual_gap)) fmt::print(out, "dual_gap         {}\n", format_double(d.dual_gap));
    fmt::print(out, "norm_sq          {}\n", format_double(d.rkhs_norm_sq));
    fmt::print(out, "lambda_norm_sq   {}\n", format_double(t.sched.lambda * d.rkhs_norm_sq));
}

int cmd_train(const ModelOptions& o, std::ostream& out)
{
    const auto t = train_one(o);
    print_model(out, t);
    const auto mis = excess_misclass(t.dist, t.model);
    const auto phi = excess_phi_risk(t.dist, t.loss, t.model, true);
    fmt::print(out, "excess_misclass  {}\n", format_double(mis.value));
    fmt::print(out, "excess_phi       {}\n", format_double(phi.value));
    return t.model.diagnostics().converged ? kExitOk : kExitNumerical;
}

std::string verdict(const std::optional<bool>& v)
{
    if (!v) return "n/a";
    return *v ? "PASS" : "FAIL";
}

int cmd_compare(const ModelOptions& o, double tol, std::ostream& out)
{
    const auto t = train_one(o);
    print_model(out, t);
    const auto rep = check_comparison(t.dist, t.loss, t.model, t.noise.q, t.noise.c_hat, {}, tol);
    fmt::print(out, "excess_misclass  {}\n", format_double(rep.excess_misclass));
    fmt::print(out, "excess_phi       {}\n", format_double(rep.excess_phi));
    fmt::print(out, "smooth_bound     {} slack {}\n", verdict(rep.smooth_bound_holds), format_double(rep.smooth_bound_slack));
    fmt::print(out, "hinge_bound      {} slack {}\n", verdict(rep.hinge_bound_holds), format_double(rep.hinge_bound_slack));
    fmt::print(out, "margin_ratio     {}\n", format_double(rep.margin_ratio));
    const bool ok = rep.smooth_bound_holds.value_or(true) && rep.hinge_bound_holds.value_or(true);
    return ok ? kExitOk : kExitNumerical;
}

void finish_run(const std::filesystem::path& dir, const std::string& digest, const std::string& started,
                std::vector<std::string> outputs)
{
    RunManifest man{digest, std::string(kToolVersion), started, utc_timestamp(), {}};
    outputs.push_back((dir / "manifest.json").string());
    man.outputs = std::move(outputs);
    write_atomic(dir / "manifest.json", manifest_json(man).dump(2) + "\n");
}

int cmd_curve(const std::string& config_path, const std::string& out_dir, std::optional<unsigned> threads,
              bool quiet, std::ostream& out, std::ostream& err)
{
    auto cfg = load_config(config_path);
    if (threads) cfg.threads = *threads;
    const auto digest = config_digest(cfg);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const auto started = utc_timestamp();

    ProgressFn progress;
    if (!quiet) {
        progress = [&](const TrialRecord& r) {
            fmt::print(err, "m={} trial={} excess={}{}\n", r.m, r.trial, format_double(r.excess_misclass),
                       r.failed ? " FAILED: " + r.failure : "");
        };
    }
    const auto result = learning_curve(cfg, progress);
    write_atomic(dir / "trials.csv", trials_csv(result.trials, digest));
    write_atomic(dir / "ratefit.json", ratefit_json(result.fit, digest).dump(2) + "\n");
    finish_run(dir, digest, started, {(dir / "trials.csv").string(), (dir / "ratefit.json").string()});

    for (const auto& p : result.fit.points)
        fmt::print(out, "m={} mean={} std={} ok={} failed={}\n", p.m, format_double(p.mean_excess),
                   format_double(p.std_excess), p.trials, p.failed);
    fmt::print(out, "exponent {} (r^2 {}), theoretical {} [{}]\n", format_double(result.fit.exponent),
               format_double(result.fit.r_squared), format_double(result.fit.theoretical_exponent),
               result.fit.theorem_tag);
    if (!result.fit.fit_note.empty()) fmt::print(out, "note: {}\n", result.fit.fit_note);
    return kExitOk;
}

struct ApproxOptions {
    double power = 1.0;
    int dim = 1;
    int order = 0;
    std::vector<double> sigmas{0.4, 0.2, 0.1, 0.05};
    std::size_t grid = 201;
    std::string out_dir;
};

int cmd_approx(const ApproxOptions& o, std::ostream& out)
{
    if (!(o.power > 0.0)) throw InvalidArgument("--power must be positive");
    const int order = o.order > 0 ? o.order : order_for_smoothness(o.power);
    const double p = o.power;
    const FieldFn f = [p](Point x) {
        double s = 0.0;
        for (double v : x) s += std::pow(std::abs(v - 0.5), p);
        return s;
    };
    const auto grid = uniform_grid(o.dim, o.grid);
    const auto rows = sigma_sweep(f, o.dim, order, o.sigmas, grid);
    for (const auto& r : rows) fmt::print(out, "{},{}\n", format_double(r.sigma), format_double(r.sup_error));
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) pts.emplace_back(r.sigma, r.sup_error);
    if (pts.size() >= 3) {
        const auto fit = fit_exponent(pts);
        fmt::print(out, "slope {} (r^2 {})\n", format_double(fit.slope), format_double(fit.r_squared));
    }
    if (!o.out_dir.empty()) {
        const std::filesystem::path dir(o.out_dir);
        std::filesystem::create_directories(dir);
        const auto started = utc_timestamp();
        std::string key = fmt::format("approx power={} dim={} order={} grid={} sigmas=", format_double(o.power),
                                      o.dim, order, o.grid);
        for (double s : o.sigmas) key += format_double(s) + ";";
        const auto digest = sha256_hex(key);
        write_atomic(dir / "approx_sweep.csv", sweep_csv(rows, digest));
        finish_run(dir, digest, started, {(dir / "approx_sweep.csv").string()});
    }
    return kExitOk;
}

int cmd_tsybakov(const std::string& family, const std::vector<std::string>& params, const std::string& q_text,
                 double c_hat, std::ostream& out)
{
    const auto dist = builtin(family, parse_params(params));
    const double q = q_text.empty() ? dist.noise().q : parse_real(q_text, "--q");
    const double c = c_hat > 0.0 ? c_hat : dist.noise().c_hat;
    const auto grid = default_t_grid();
    const double ratio = tsybakov_ratio(dist, q, c, grid);
    const bool pass = ratio <= 1.0 + 1e-6;
    fmt::print(out, "family {} q {} c_hat {}\n", family, format_double(q), format_double(c));
    fmt::print(out, "max ratio {} {}\n", format_double(ratio), pass ? "PASS" : "FAIL");
    return pass ? kExitOk : kExitNumerical;
}

int cmd_exponent(const std::string& r_text, int d, const std::string& q_text, const std::string& loss_name,
                 const std::string& theorem_name_text, std::ostream& out)
{
    const auto th = theorem_from_name(theorem_name_text);
    const double r = parse_real(r_text, "--r");
    const double q = parse_real(q_text, "--q");
    const Loss loss = loss_name.empty() ? (th == Theorem::T3 ? Loss::hinge() : Loss::quadratic())
                                        : Loss::from_name(loss_name);
    fmt::print(out, "{}\n", format_double(theoretical_exponent(r, d, q, loss, th)));
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Gaussian-kernel classification learning-rate experiments", "gkc"};
    app.require_subcommand(1);

    ModelOptions train_opts;
    auto* train_cmd = app.add_subcommand("train", "Train one model and print its diagnostics");
    train_opts.attach(*train_cmd);

    ModelOptions compare_opts;
    double compare_tol = 1e-6;
    auto* compare_cmd = app.add_subcommand("compare", "Comparison-inequality report for one trained model");
    compare_opts.attach(*compare_cmd);
    compare_cmd->add_option("--tol", compare_tol, "Slack tolerance")->capture_default_str();

    std::string config_path, out_dir = "out";
    std::optional<unsigned> threads;
    bool quiet = false;
    auto* curve_cmd = app.add_subcommand("curve", "Learning-curve experiment from a YAML config");
    curve_cmd->add_option("--config", config_path, "Config file")->required();
    curve_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    curve_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    curve_cmd->add_flag("--quiet", quiet, "No per-trial progress on stderr");

    ApproxOptions approx_opts;
    auto* approx_cmd = app.add_subcommand("approx", "Sup-norm error of the convolution approximant over a sigma sweep");
    approx_cmd->add_option("--power", approx_opts.power, "Target f(x) = sum_j |x_j - 1/2|^power")
        ->capture_default_str();
    approx_cmd->add_option("--dim", approx_opts.dim, "Dimension")->capture_default_str()->check(CLI::Range(1, 3));
    approx_cmd->add_option("--order", approx_opts.order, "Binomial order (default ceil(power))");
    approx_cmd->add_option("--sigmas", approx_opts.sigmas, "Kernel widths")->capture_default_str();
    approx_cmd->add_option("--grid", approx_opts.grid, "Evaluation points per axis")->capture_default_str();
    approx_cmd->add_option("--out", approx_opts.out_dir, "Write approx_sweep.csv and manifest.json here");

    std::string ts_family = "affine", ts_q;
    std::vector<std::string> ts_params;
    double ts_c_hat = 0.0;
    auto* ts_cmd = app.add_subcommand("tsybakov", "Check the noise condition of a family");
    ts_cmd->add_option("--family", ts_family, "Distribution family")->capture_default_str();
    ts_cmd->add_option("--param", ts_params, "Family parameter key=value (repeatable)");
    ts_cmd->add_option("--q", ts_q, "Noise exponent (default: declared)");
    ts_cmd->add_option("--c-hat", ts_c_hat, "Noise constant (default: declared)");

    std::string ex_r = "inf", ex_q = "inf", ex_loss, ex_theorem;
    int ex_d = 1;
    auto* ex_cmd = app.add_subcommand("exponent", "Print a theoretical rate exponent");
    ex_cmd->add_option("--r", ex_r, "Smoothness (inf allowed)")->capture_default_str();
    ex_cmd->add_option("--d", ex_d, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
    ex_cmd->add_option("--q", ex_q, "Noise exponent (inf allowed)")->capture_default_str();
    ex_cmd->add_option("--loss", ex_loss, "Loss (default: hinge for T3, else quadratic)");
    ex_cmd->add_option("--theorem", ex_theorem, "T1 | T2 | T3 | C5")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitInvalid;
    }

    try {
        if (*train_cmd) return cmd_train(train_opts, out);
        if (*compare_cmd) return cmd_compare(compare_opts, compare_tol, out);
        if (*curve_cmd) return cmd_curve(config_path, out_dir, threads, quiet, out, err);
        if (*approx_cmd) return cmd_approx(approx_opts, out);
        if (*ts_cmd) return cmd_tsybakov(ts_family, ts_params, ts_q, ts_c_hat, out);
        if (*ex_cmd) return cmd_exponent(ex_r, ex_d, ex_q, ex_loss, ex_theorem, out);
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}

int run(int argc, char** argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace gkc::cli
