#pragma once

#include "gkc/errors.hpp"
#include "gkc/harness.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gkc {

/// Config parse or validation failure; what() lists every problem found, one
/// per line, prefixed with the source line when known.
class ConfigError : public InvalidArgument {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Experiment config from YAML text. Missing optional keys take their defaults.
///
///   distribution: {family: affine, params: {}}
///   loss: quadratic            # hinge | quadratic | truncated_quadratic
///   regime: T2                 # T1 | T2 | T3 | C5
///   r: 5                       # optional, overrides the family's r (.inf allowed)
///   q: 1                       # optional, overrides the family's q
///   m_grid: [256, 512, 1024, 2048]
///   trials_per_m: 20
///   seed: 1
///   threads: 1
///   solver: {max_iters: 0, tol_factor: 1.0e-8, hinge_gap_tol: 1.0e-7}
///   quadrature: {abs_tol: 1.0e-8, max_depth: 30, scan_points: 2048, mc_points: 1000000, mc_seed: 24301}
///   comparison_tol: 1.0e-6
ExperimentConfig parse_config(std::string_view yaml_text);

/// Throws ConfigError when the file is missing or invalid.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Key-sorted compact JSON of the fully defaulted config.
std::string canonical_json(const ExperimentConfig& config);

/// Lowercase hex SHA-256 of canonical_json(config).
std::string config_digest(const ExperimentConfig& config);

std::string sha256_hex(std::string_view bytes);

} // namespace gkc
