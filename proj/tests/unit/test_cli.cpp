#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fgrlab/config.hpp"
#include "fgrlab/grid.hpp"
#include "fgrlab/output.hpp"

using namespace fgrlab;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(FGRLAB_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult r;
    FILE* f = popen(cmd.c_str(), "r");
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, f)) r.out.append(buf, n);
    const int st = pclose(f);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("fgrlab_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("config round trip") {
        RunConfig c;
        c.p = 4.123456789012345;
        c.grid_h = 0.1 + 0.2;
        c.tolerances["decompose_accept"] = 3e-9;
        c.sponge = true;
        c.out = "somewhere/else";
        CHECK(parse_config(emit_config(c)) == c);
        CHECK(parse_config(emit_config(RunConfig{})) == RunConfig{});
        CHECK_THROWS_AS(parse_config("{\"unknown\": 1}"), Error);
        CHECK_THROWS_AS(parse_config("{\"p\": \"x\"}"), Error);
        CHECK_THROWS_AS(parse_config("not json"), Error);
    }

    TEST_CASE("precedence: flag over file over default") {
        const RunConfig d;
        RunConfig file_set = apply_overrides(d, {{"p", 4.0}, {"grid_L", 30.0}, {"steps", 9}});
        const RunConfig both = apply_overrides(file_set, {{"p", 3.5}, {"steps", 11}});
        CHECK(both.p == 3.5);
        CHECK(both.steps == 11);
        CHECK(both.grid_L == 30.0);
        CHECK(both.grid_h == d.grid_h);
        CHECK(both.seed == d.seed);
    }

    TEST_CASE("output formatting") {
        CHECK(format_double(0.1) == "0.10000000000000001");
        CHECK(format_double(-2.0) == "-2");
        CHECK(csv_string({{"a", "b"}, {{1.5, 2.0}}}) == "a,b\n1.5,2\n");
        CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        const std::string svg = svg_plot("t", "x", "y", {{{0, 1, 2}, {1, 0, 1}, "s"}});
        CHECK(svg.find("<polyline") != std::string::npos);
    }

    TEST_CASE("usage errors exit with 2") {
        CHECK(run("thresholds --no-such-flag").code == 2);
        CHECK(run("").code == 2);
        CHECK(run("frobnicate").code == 2);
        const fs::path d = scratch("usage");
        std::ofstream(d / "bad.json") << "{\"nope\": 1}";
        CHECK(run("--config " + (d / "bad.json").string() + " thresholds").code == 2);
    }

    TEST_CASE("precedence through the binary") {
        const fs::path d = scratch("prec");
        std::ofstream(d / "c.json") << "{\"p\": 4.0, \"grid_L\": 30, \"grid_h\": 0.02}";
        const RunResult r = run("--config " + (d / "c.json").string() + " --out " + (d / "o").string() +
                                " --grid-h 0.01 mode --p 3.5");
        CHECK(r.code == 0);
        const auto m = nlohmann::json::parse(slurp(d / "o" / "manifest.json"));
        CHECK(m["config"]["p"].get<double>() == 3.5);
        CHECK(m["config"]["grid_L"].get<double>() == 30.0);
        CHECK(m["config"]["grid_h"].get<double>() == 0.01);
        CHECK(m["config"]["seed"].get<int>() == 7);
        CHECK(m["files"].size() == 1);
        CHECK(m["files"][0]["sha256"].get<std::string>() == sha256_hex(slurp(d / "o" / "mode.csv")));
    }

    TEST_CASE("thresholds") {
        const fs::path d = scratch("thr");
        const RunResult r = run("--out " + d.string() + " --grid-h 0.01 thresholds");
        CHECK(r.code == 0);
        double prev = 4.0;
        int count = 0;
        std::istringstream in(r.out);
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find("= ");
            if (line.rfind("p", 0) != 0 || eq == std::string::npos) continue;
            const double v = std::stod(line.substr(eq + 2));
            CHECK(v > prev);
            CHECK(v < 5.0);
            prev = v;
            ++count;
        }
        CHECK(count == 3);
    }

    TEST_CASE("deterministic output") {
        const fs::path a = scratch("det_a"), b = scratch("det_b");
        CHECK(run("--out " + a.string() + " --grid-h 0.02 profile --p 4.88 --n 3").code == 0);
        CHECK(run("--out " + b.string() + " --grid-h 0.02 profile --p 4.88 --n 3").code == 0);
        for (const char* f : {"profile.csv", "residual.csv"}) CHECK(slurp(a / f) == slurp(b / f));
        const auto ma = nlohmann::json::parse(slurp(a / "manifest.json"));
        const auto mb = nlohmann::json::parse(slurp(b / "manifest.json"));
        CHECK(ma["files"] == mb["files"]);
    }

    TEST_CASE("fgr-sweep row count") {
        const fs::path d = scratch("fgr");
        const RunResult r = run("--out " + d.string() + " --grid-h 0.01 fgr-sweep --n 3 --steps 50 --svg");
        CHECK(r.code == 0);
        const std::string csv = slurp(d / "fgr.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
        CHECK(csv.rfind("p,n,lambda,kappa,gamma,g_residual,zero_flag\n", 0) == 0);
        CHECK(fs::exists(d / "fgr.svg"));
    }

    TEST_CASE("p3-oracle exits 0") {
        const fs::path d = scratch("oracle");
        const RunResult r = run("--out " + d.string() + " p3-oracle");
        CHECK(r.code == 0);
        CHECK(r.out.find("0 failing identities") != std::string::npos);
    }

    TEST_CASE("jost and simulate") {
        const fs::path d = scratch("jost");
        CHECK(run("--out " + d.string() + " jost --p 3 --k 1,0 --validate-p3").code == 0);
        CHECK(run("--out " + d.string() + " jost --p 4 --k 1 --validate-p3").code == 2);
        CHECK(run("--out " + d.string() + " jost --p 3 --k 1,x").code == 2);
        const fs::path s = scratch("sim");
        CHECK(run("--out " + s.string() + " simulate --p 4.3 --z0 0.05 --T 1 --dt 0.001 --svg").code == 0);
        const std::string csv = slurp(s / "trajectory.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
        CHECK(fs::exists(s / "trajectory.svg"));
        // an amplitude outside the tube is a computational anomaly
        CHECK(run("--out " + s.string() + " simulate --z0 0.5 --T 1").code == 1);
    }
}
