#include "fgrlab/config.hpp"

#include <fstream>
#include <sstream>

#include "fgrlab/grid.hpp"

namespace fgrlab {

using nlohmann::json;

double RunConfig::tolerance(const std::string& name, double fallback) const {
    auto it = tolerances.find(name);
    return it == tolerances.end() ? fallback : it->second;
}

json to_json(const RunConfig& c) {
    json j;
    j["grid_L"] = c.grid_L;
    j["grid_h"] = c.grid_h;
    j["p"] = c.p;
    j["p_min"] = c.p_min;
    j["p_max"] = c.p_max;
    j["n"] = c.n;
    j["steps"] = c.steps;
    j["k_re"] = c.k_re;
    j["k_im"] = c.k_im;
    j["dt"] = c.dt;
    j["T"] = c.T;
    j["z0"] = c.z0;
    j["sponge"] = c.sponge;
    j["svg"] = c.svg;
    j["validate_p3"] = c.validate_p3;
    j["out"] = c.out;
    j["seed"] = c.seed;
    j["tolerances"] = c.tolerances;
    return j;
}

namespace {

template <class T>
void take(const json& src, const char* key, T& dst) {
    auto it = src.find(key);
    if (it == src.end()) return;
    try {
        dst = it->get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Usage, std::string("config: bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

RunConfig apply_overrides(const RunConfig& base, const json& partial) {
    if (!partial.is_object()) throw Error(ErrorKind::Usage, "config: expected a JSON object");
    const json known = to_json(base);
    for (auto it = partial.begin(); it != partial.end(); ++it)
        if (!known.contains(it.key())) throw Error(ErrorKind::Usage, "config: unknown field '" + it.key() + "'");
    RunConfig c = base;
    take(partial, "grid_L", c.grid_L);
    take(partial, "grid_h", c.grid_h);
    take(partial, "p", c.p);
    take(partial, "p_min", c.p_min);
    take(partial, "p_max", c.p_max);
    take(partial, "n", c.n);
    take(partial, "steps", c.steps);
    take(partial, "k_re", c.k_re);
    take(partial, "k_im", c.k_im);
    take(partial, "dt", c.dt);
    take(partial, "T", c.T);
    take(partial, "z0", c.z0);
    take(partial, "sponge", c.sponge);
    take(partial, "svg", c.svg);
    take(partial, "validate_p3", c.validate_p3);
    take(partial, "out", c.out);
    take(partial, "seed", c.seed);
    if (partial.contains("tolerances")) {
        std::map<std::string, double> t;
        take(partial, "tolerances", t);
        for (auto& [k, v] : t) c.tolerances[k] = v;
    }
    return c;
}

// json dumps doubles in shortest round-trip form, so parse(emit(c)) == c exactly
std::string emit_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Usage, std::string("config: ") + e.what());
    }
    return apply_overrides(RunConfig{}, j);
}

json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Usage, "config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Usage, "config: " + path + ": " + e.what());
    }
}

}  // namespace fgrlab
