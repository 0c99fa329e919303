#include "gkc/output.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace gkc {

void write_atomic(const std::filesystem::path& path, std::string_view content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

std::string trials_csv(const std::vector<TrialRecord>& trials, std::string_view digest)
{
    std::string out = fmt::format("# config_digest: {}\n", digest);
    out += "m,trial,excess_misclass,excess_phi,objective,norm_sq,solver_iters,failed\n";
    for (const auto& t : trials) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", t.m, t.trial, format_double(t.excess_misclass),
                           format_double(t.excess_phi), format_double(t.objective), format_double(t.norm_sq),
                           t.solver_iters, t.failed ? 1 : 0);
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, std::string_view digest)
{
    std::string out = fmt::format("# config_digest: {}\n", digest);
    out += "sigma,sup_error\n";
    for (const auto& r : rows) out += fmt::format("{},{}\n", format_double(r.sigma), format_double(r.sup_error));
    return out;
}

namespace {

nlohmann::json num(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

} // namespace

nlohmann::json ratefit_json(const RateFit& fit, std::string_view digest)
{
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : fit.points) {
        pts.push_back({{"m", p.m},
                       {"mean_excess", num(p.mean_excess)},
                       {"std_excess", num(p.std_excess)},
                       {"trials", p.trials},
                       {"failed", p.failed}});
    }
    nlohmann::json j = {
        {"config_digest", digest},
        {"points", pts},
        {"exponent", num(fit.exponent)},
        {"intercept", num(fit.intercept)},
        {"r_squared", num(fit.r_squared)},
        {"theoretical_exponent", num(fit.theoretical_exponent)},
        {"theorem_tag", fit.theorem_tag},
    };
    if (!fit.fit_note.empty()) j["fit_note"] = fit.fit_note;
    return j;
}

nlohmann::json manifest_json(const RunManifest& m)
{
    return {{"config_digest", m.config_digest},
            {"tool_version", m.tool_version},
            {"started_at", m.started_at},
            {"finished_at", m.finished_at},
            {"outputs", m.outputs}};
}

std::string utc_timestamp()
{
    const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

} // namespace gkc
