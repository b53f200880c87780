#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_core.hpp"
#include "esov/error.hpp"

using namespace esov;
using namespace esov::cli;

namespace {

const std::string kDir = ESOV_CONFIG_DIR;

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "esov_test_cli";
    std::filesystem::create_directories(dir);
    return dir / name;
}

struct Outcome {
    int code;
    std::string out, err;
    json report() const { return json::parse(out); }
};

Outcome run_cmd(const std::string& command, RunOptions opt)
{
    std::ostringstream out, err;
    const int code = run(command, opt, out, err);
    return {code, out.str(), err.str()};
}

RunOptions with_config(const std::string& file)
{
    RunOptions o;
    o.config_path = kDir + "/" + file;
    return o;
}

json base_config()
{
    return json::parse(R"({"tau": [0.31, 1.07], "eta": [0.137, 0.041],
                           "sites": [{"z": [0.13, 0.07], "lambda": 1}]})");
}

std::string write_config(const std::string& name, const json& j)
{
    const auto p = scratch(name);
    std::ofstream(p) << j.dump();
    return p.string();
}

} // namespace

TEST_CASE("config parsing")
{
    const ModelConfig c = parse_config(base_config());
    CHECK(c.seed == 1);
    CHECK(c.tol.residual_tol == 1e-9);
    CHECK(c.sites.size() == 1);
    CHECK(parse_complex(json::array({1.5, -2.0}), "x") == cplx(1.5, -2.0));
    CHECK(complex_json(cplx(1.5, -2.0)) == json::array({1.5, -2.0}));

    json j = base_config();
    j["extra"] = 1;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base_config();
    j["eta"] = 0.1;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base_config();
    j["sites"][0]["lambda"] = 0;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base_config();
    j["tolerances"] = {{"residual_tol", -1.0}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base_config();
    j["irf"] = {{"rows", {{0.1}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base_config();
    j.erase("tau");
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    // the effective config round-trips
    const ModelConfig c2 = parse_config(c.to_json());
    CHECK(c2.to_json() == c.to_json());
}

TEST_CASE("every bundled config parses")
{
    for (const auto& e : std::filesystem::directory_iterator(kDir)) {
        CAPTURE(e.path().string());
        CHECK_NOTHROW(load_config(e.path().string()).params());
    }
}

TEST_CASE("non-positive Im tau exits 2 with the lattice message")
{
    json j = base_config();
    j["tau"] = {0.3, 0.0};
    RunOptions o;
    o.config_path = write_config("bad_tau.json", j);
    const auto r = run_cmd("theta eval", o);
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("Lattice invariant violated") != std::string::npos);
    CHECK(r.report()["error"]["kind"] == "config");

    j["tau"] = {0.3, 1e-4}; // below the floor
    o.config_path = write_config("low_tau.json", j);
    CHECK(run_cmd("theta eval", o).err.find("Lattice invariant violated") != std::string::npos);
}

TEST_CASE("config errors exit 2")
{
    RunOptions o;
    o.config_path = scratch("missing.json").string() + ".nope";
    CHECK(run_cmd("theta eval", o).code == kConfigError);

    o.config_path = scratch("broken.json").string();
    std::ofstream(o.config_path) << "{ not json";
    CHECK(run_cmd("theta eval", o).code == kConfigError);

    // odd sum of weights for a Bethe task, even n for an IRF task
    CHECK(run_cmd("gaudin bethe", with_config("n1.json")).code == kConfigError);
    const auto r = run_cmd("irf spectrum", with_config("n2.json"));
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("Model invariant violated") != std::string::npos);

    CHECK(run_cmd("irf dance", with_config("n3.json")).code == kConfigError);
    RunOptions t = with_config("n1.json");
    t.tol = -1.0;
    CHECK(run_cmd("theta eval", t).code == kConfigError);
}

TEST_CASE("rll-check on the n = 1 config")
{
    const auto r = run_cmd("eqg rll-check", with_config("n1.json"));
    CHECK(r.code == kPass);
    const json rep = r.report();
    CHECK(rep["pass"] == true);
    CHECK(rep["results"]["rll_relations"].size() == 16);
    for (const auto& rel : rep["results"]["rll_relations"])
        CHECK(rel["residual"].get<double>() <= 1e-9);
    bool saw = false;
    for (const auto& c : rep["checks"])
        saw = saw || c["name"] == "single_site_formulas";
    CHECK(saw);
}

TEST_CASE("a tolerance below the achievable residual exits 1")
{
    RunOptions o = with_config("n1.json");
    o.tol = 1e-30;
    const auto r = run_cmd("eqg rll-check", o);
    CHECK(r.code == kCheckFailed);
    CHECK(r.report()["pass"] == false);
    CHECK(r.err.find("check failed") != std::string::npos);
}

TEST_CASE("reports are deterministic apart from timing")
{
    for (const char* cmd : {"theta eval", "irf spectrum"}) {
        const auto a = run_cmd(cmd, with_config(std::string(cmd) == "theta eval" ? "n2.json" : "n3.json"));
        const auto b = run_cmd(cmd, with_config(std::string(cmd) == "theta eval" ? "n2.json" : "n3.json"));
        json ja = a.report(), jb = b.report();
        CHECK(ja.contains("timing"));
        ja.erase("timing");
        jb.erase("timing");
        CHECK(ja.dump() == jb.dump());
    }
    // a different seed changes the random samples
    RunOptions o = with_config("n2.json");
    o.seed = 99;
    json ja = run_cmd("theta eval", with_config("n2.json")).report();
    json jb = run_cmd("theta eval", o).report();
    CHECK(jb["config"]["seed"] == 99);
    CHECK(ja["checks"] != jb["checks"]);
}

TEST_CASE("irf spectrum certificates and CSV output")
{
    RunOptions o = with_config("n3.json");
    const auto dir = scratch("csv");
    std::filesystem::remove_all(dir);
    o.csv_dir = dir.string();
    o.out_path = scratch("spectrum.json").string();
    std::ostringstream out, err;
    CHECK(run("irf spectrum", o, out, err) == kPass);
    CHECK(out.str().empty());
    std::ifstream f(o.out_path);
    const json rep = json::parse(f);
    REQUIRE(rep["results"]["certificates"].size() == 8);
    for (const auto& c : rep["results"]["certificates"])
        CHECK(c["pass"] == true);
    std::ifstream csv(dir / "spectrum_eps.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("t,re_z,im_z,re_eps0", 0) == 0);
    int lines = 0;
    for (std::string line; std::getline(csv, line);)
        ++lines;
    CHECK(lines == 64);
}

TEST_CASE("every subcommand runs on a suitable bundled config")
{
    const std::vector<std::pair<std::string, std::string>> jobs{
        {"theta eval", "n2.json"},    {"gaudin check", "n2.json"},  {"gaudin bethe", "n2.json"},
        {"eqg rll-check", "n2.json"}, {"eqg hw-check", "n2.json"},  {"irf build", "n3.json"},
        {"irf spectrum", "n3.json"},  {"irf partition", "n3.json"}, {"irf bethe", "n2.json"},
    };
    CHECK(jobs.size() == subcommands().size());
    for (const auto& [cmd, file] : jobs) {
        CAPTURE(cmd);
        const auto r = run_cmd(cmd, with_config(file));
        CHECK(r.code == kPass);
        const json rep = r.report();
        CHECK(rep["task"] == cmd);
        bool all = true;
        for (const auto& c : rep["checks"])
            all = all && c["pass"].get<bool>();
        CHECK(rep["pass"] == all);
    }
}
