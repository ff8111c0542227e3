#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

namespace fgrlab {

struct RunConfig {
    double grid_L = 50.0;
    double grid_h = 0.005;
    double p = 4.3;
    double p_min = 4.5;
    double p_max = 4.95;
    int n = 3;
    int steps = 50;
    double k_re = 1.0;
    double k_im = 0.0;
    double dt = 1e-3;
    double T = 400.0;
    double z0 = 0.05;
    bool sponge = false;
    bool svg = false;
    bool validate_p3 = false;
    std::string out = "out";
    std::uint64_t seed = 7;
    // named tolerance overrides, e.g. "decompose_accept"
    std::map<std::string, double> tolerances;

    bool operator==(const RunConfig&) const = default;
    double tolerance(const std::string& name, double fallback) const;
};

nlohmann::json to_json(const RunConfig& c);
// every key must be a RunConfig field; missing keys keep the values of `base`
RunConfig apply_overrides(const RunConfig& base, const nlohmann::json& partial);
std::string emit_config(const RunConfig& c);
RunConfig parse_config(const std::string& text);
// partial JSON document from disk
nlohmann::json read_config_file(const std::string& path);

}  // namespace fgrlab
