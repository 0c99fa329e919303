#include "gkc/config.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gkc {

namespace {

std::string join_problems(const std::vector<std::string>& problems)
{
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    return msg;
}

class Reader {
public:
    std::vector<std::string> problems;

    void error(const YAML::Node& node, const std::string& what)
    {
        const auto mark = node.Mark();
        if (mark.line >= 0)
            problems.push_back("line " + std::to_string(mark.line + 1) + ": " + what);
        else
            problems.push_back(what);
    }

    void check_keys(const YAML::Node& map, const std::string& where, std::initializer_list<const char*> allowed)
    {
        if (!map.IsMap()) {
            error(map, where + ": expected a mapping");
            return;
        }
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!ok.count(key)) error(kv.first, where + ": unknown key '" + key + "'");
        }
    }

    template <class T>
    bool read(const YAML::Node& parent, const char* key, const std::string& path, T& out)
    {
        const auto node = parent[key];
        if (!node) return false;
        try {
            if constexpr (std::is_same_v<T, double>) {
                // Accept inf spelled either way; yaml-cpp only knows .inf.
                const auto text = node.as<std::string>();
                if (text == "inf" || text == "+inf" || text == "infinity") {
                    out = std::numeric_limits<double>::infinity();
                    return true;
                }
            }
            out = node.as<T>();
            return true;
        } catch (const YAML::Exception&) {
            error(node, path + ": cannot read value '" + (node.IsScalar() ? node.Scalar() : "<non-scalar>") + "'");
            return false;
        }
    }
};

ExperimentConfig build(const YAML::Node& root)
{
    Reader rd;
    ExperimentConfig cfg;
    if (!root.IsMap()) throw ConfigError({"config root must be a mapping"});
    rd.check_keys(root, "config",
                  {"distribution", "loss", "regime", "r", "q", "m_grid", "trials_per_m", "seed", "threads", "solver",
                   "quadrature", "comparison_tol"});

    if (const auto dist = root["distribution"]) {
        rd.check_keys(dist, "distribution", {"family", "params"});
        if (!rd.read(dist, "family", "distribution.family", cfg.family))
            rd.error(dist, "distribution.family: required");
        if (const auto params = dist["params"]) {
            if (!params.IsMap()) {
                rd.error(params, "distribution.params: expected a mapping");
            } else {
                for (const auto& kv : params) {
                    const auto key = kv.first.as<std::string>();
                    double v = 0.0;
                    if (rd.read(params, key.c_str(), "distribution.params." + key, v)) cfg.params[key] = v;
                }
            }
        }
    } else {
        rd.error(root, "distribution: required");
    }

    std::string loss_name;
    if (rd.read(root, "loss", "loss", loss_name)) {
        try {
            cfg.loss = Loss::from_name(loss_name);
        } catch (const InvalidArgument& e) {
            rd.error(root["loss"], std::string("loss: ") + e.what());
        }
    } else {
        rd.error(root, "loss: required");
    }

    std::string regime;
    if (rd.read(root, "regime", "regime", regime)) {
        try {
            cfg.theorem = theorem_from_name(regime);
        } catch (const InvalidArgument& e) {
            rd.error(root["regime"], std::string("regime: ") + e.what());
        }
    } else {
        rd.error(root, "regime: required");
    }

    double v = 0.0;
    if (rd.read(root, "r", "r", v)) cfg.r = v;
    if (rd.read(root, "q", "q", v)) cfg.q = v;

    if (const auto grid = root["m_grid"]) {
        if (!grid.IsSequence()) {
            rd.error(grid, "m_grid: expected a list of sample sizes");
        } else {
            for (const auto& item : grid) {
                try {
                    const auto m = item.as<long long>();
                    if (m < 1) rd.error(item, "m_grid: entries must be positive");
                    else cfg.m_grid.push_back(static_cast<std::size_t>(m));
                } catch (const YAML::Exception&) {
                    rd.error(item, "m_grid: '" + (item.IsScalar() ? item.Scalar() : "<non-scalar>") +
                                       "' is not an integer");
                }
            }
        }
    } else {
        rd.error(root, "m_grid: required");
    }

    rd.read(root, "trials_per_m", "trials_per_m", cfg.trials_per_m);
    rd.read(root, "seed", "seed", cfg.seed);
    rd.read(root, "threads", "threads", cfg.threads);
    rd.read(root, "comparison_tol", "comparison_tol", cfg.comparison_tol);

    if (const auto s = root["solver"]) {
        rd.check_keys(s, "solver", {"max_iters", "tol_factor", "hinge_gap_tol"});
        rd.read(s, "max_iters", "solver.max_iters", cfg.max_iters);
        rd.read(s, "tol_factor", "solver.tol_factor", cfg.tol_factor);
        rd.read(s, "hinge_gap_tol", "solver.hinge_gap_tol", cfg.hinge_gap_tol);
    }
    if (const auto qd = root["quadrature"]) {
        rd.check_keys(qd, "quadrature", {"abs_tol", "max_depth", "scan_points", "mc_points", "mc_seed"});
        rd.read(qd, "abs_tol", "quadrature.abs_tol", cfg.quadrature.abs_tol);
        rd.read(qd, "max_depth", "quadrature.max_depth", cfg.quadrature.max_depth);
        rd.read(qd, "scan_points", "quadrature.scan_points", cfg.quadrature.scan_points);
        rd.read(qd, "mc_points", "quadrature.mc_points", cfg.quadrature.mc_points);
        rd.read(qd, "mc_seed", "quadrature.mc_seed", cfg.quadrature.mc_seed);
    }

    // Semantic checks only make sense once the required keys parsed.
    if (rd.problems.empty()) {
        for (auto& p : cfg.problems()) rd.problems.push_back(std::move(p));
        if (rd.problems.empty()) {
            try {
                (void)builtin(cfg.family, cfg.params);
            } catch (const InvalidArgument& e) {
                rd.problems.push_back(std::string("distribution: ") + e.what());
            }
        }
    }
    if (!rd.problems.empty()) throw ConfigError(std::move(rd.problems));
    return cfg;
}

nlohmann::json number(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : InvalidArgument(join_problems(problems))
    , problems_(std::move(problems))
{
}

ExperimentConfig parse_config(std::string_view yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::ParserException& e) {
        throw ConfigError({"line " + std::to_string(e.mark.line + 1) + ": " + e.msg});
    }
    return build(root);
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open config file '" + path.string() + "'"});
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string canonical_json(const ExperimentConfig& c)
{
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : c.params) params[k] = number(v);
    nlohmann::json j = {
        {"distribution", {{"family", c.family}, {"params", params}}},
        {"loss", std::string(c.loss.name())},
        {"regime", std::string(theorem_name(c.theorem))},
        {"r", c.r ? number(*c.r) : nlohmann::json(nullptr)},
        {"q", c.q ? number(*c.q) : nlohmann::json(nullptr)},
        {"m_grid", c.m_grid},
        {"trials_per_m", c.trials_per_m},
        {"seed", c.seed},
        {"solver", {{"max_iters", c.max_iters}, {"tol_factor", c.tol_factor}, {"hinge_gap_tol", c.hinge_gap_tol}}},
        {"quadrature",
         {{"abs_tol", c.quadrature.abs_tol},
          {"max_depth", c.quadrature.max_depth},
          {"scan_points", c.quadrature.scan_points},
          {"mc_points", c.quadrature.mc_points},
          {"mc_seed", c.quadrature.mc_seed}}},
        {"comparison_tol", c.comparison_tol},
    };
    // threads is left out: it cannot change any result.
    return j.dump();
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string config_digest(const ExperimentConfig& config)
{
    return sha256_hex(canonical_json(config));
}

} // namespace gkc
