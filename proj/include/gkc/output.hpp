#pragma once

#include "gkc/approx.hpp"
#include "gkc/harness.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gkc {

/// Writes to a temporary sibling and renames it over path.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal that round-trips the double; nan and inf spelled out.
std::string format_double(double v);

/// Header line "# config_digest: <hex>", then
/// m,trial,excess_misclass,excess_phi,objective,norm_sq,solver_iters,failed
std::string trials_csv(const std::vector<TrialRecord>& trials, std::string_view digest);

/// sigma,sup_error rows under the same digest header.
std::string sweep_csv(const std::vector<SweepRow>& rows, std::string_view digest);

nlohmann::json ratefit_json(const RateFit& fit, std::string_view digest);

struct RunManifest {
    std::string config_digest;
    std::string tool_version;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
};

nlohmann::json manifest_json(const RunManifest& manifest);

/// UTC time as ISO 8601.
std::string utc_timestamp();

inline constexpr std::string_view kToolVersion = "0.1.0";

} // namespace gkc
