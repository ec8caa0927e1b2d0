#ifndef ASYNCBO_CONFIG_HPP
#define ASYNCBO_CONFIG_HPP

#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include <asyncbo/suite.hpp>

namespace asyncbo {

/// Raised for malformed configuration (bad JSON, unknown keys, wrong types).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::vector<PolicyKind> parse_policy_list(const std::vector<std::string>& names)
{
    std::vector<PolicyKind> out;
    for (const auto& n : names) {
        const auto p = parse_policy(n);
        if (!p)
            throw ConfigError("unknown policy '" + n
                              + "' (expected serial, greedy, pessimistic, asc-pessimism, desc-pessimism, lcb-liar)");
        out.push_back(*p);
    }
    return out;
}

/// Applies the keys present in `j` on top of `cfg`. Unknown keys are errors.
inline void apply_json(SuiteConfig& cfg, const nlohmann::json& j)
{
    static const std::set<std::string> known{"name",    "policies", "buffers", "dims",   "noise",
                                             "replicates", "budget", "init_count", "seed", "candidates_per_dim",
                                             "workers", "out",      "force",   "save_traces", "log_y"};
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw ConfigError("unknown config key '" + key + "'");
    try {
        if (j.contains("name"))
            cfg.name = j.at("name").get<std::string>();
        if (j.contains("policies"))
            cfg.policies = parse_policy_list(j.at("policies").get<std::vector<std::string>>());
        if (j.contains("buffers"))
            cfg.buffers = j.at("buffers").get<std::vector<int>>();
        if (j.contains("dims"))
            cfg.dims = j.at("dims").get<std::vector<int>>();
        if (j.contains("noise"))
            cfg.noise = j.at("noise").get<std::vector<double>>();
        if (j.contains("replicates"))
            cfg.replicates = j.at("replicates").get<int>();
        if (j.contains("budget"))
            cfg.budget = j.at("budget").get<int>();
        if (j.contains("init_count"))
            cfg.init_count = j.at("init_count").get<int>();
        if (j.contains("seed"))
            cfg.base_seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("candidates_per_dim"))
            cfg.candidates_per_dim = j.at("candidates_per_dim").get<int>();
        if (j.contains("workers"))
            cfg.workers = j.at("workers").get<int>();
        if (j.contains("out"))
            cfg.output_dir = j.at("out").get<std::string>();
        if (j.contains("force"))
            cfg.force = j.at("force").get<bool>();
        if (j.contains("save_traces"))
            cfg.save_traces = j.at("save_traces").get<bool>();
        if (j.contains("log_y"))
            cfg.log_y = j.at("log_y").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline SuiteConfig suite_config_from_json(const std::string& text, SuiteConfig base = {})
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    apply_json(base, j);
    return base;
}

inline nlohmann::json to_json(const SuiteConfig& cfg)
{
    std::vector<std::string> policies;
    for (auto p : cfg.policies)
        policies.emplace_back(to_string(p));
    return {{"name", cfg.name},
            {"policies", policies},
            {"buffers", cfg.buffers},
            {"dims", cfg.dims},
            {"noise", cfg.noise},
            {"replicates", cfg.replicates},
            {"budget", cfg.budget},
            {"init_count", cfg.init_count},
            {"seed", cfg.base_seed},
            {"candidates_per_dim", cfg.candidates_per_dim},
            {"workers", cfg.workers},
            {"out", cfg.output_dir.string()},
            {"force", cfg.force},
            {"save_traces", cfg.save_traces},
            {"log_y", cfg.log_y}};
}

} // namespace asyncbo

#endif
