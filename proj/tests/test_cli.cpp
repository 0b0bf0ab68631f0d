#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "mrw/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
    std::string cmd = env + " " MRW_CLI_PATH " " + args + " 2>/dev/null";
    Run r{-1, ""};
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

nlohmann::json json_of(const Run& r) {
    REQUIRE(r.code == 0);
    return nlohmann::json::parse(r.out);
}

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("mrw_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("validate") {
    fs::path d = scratch("validate");
    write(d / "ok.json", R"({"name": "swap", "states": ["a", "b"],
        "transitions": {"a": {"b": 1}, "b": {"a": 1}}, "kernels": {"a->b": 1, "b->a": -2}})");
    write(d / "bad.json", R"({"name": "leaky", "states": ["a", "b"],
        "transitions": {"a": {"b": 0.9}, "b": {"a": 1}}, "kernels": {"a->b": 1, "b->a": -2}})");
    write(d / "broken.json", "{not json");

    auto ok = json_of(run("validate " + (d / "ok.json").string() + " --format json"));
    CHECK(ok["schema_version"] == mrw::kSchemaVersion);
    CHECK(ok["model"]["stationary"][0]["pi"].get<double>() == doctest::Approx(0.5));
    CHECK(run("validate " + (d / "bad.json").string()).code == 1);
    CHECK(run("validate " + (d / "broken.json").string()).code == 5);
    CHECK(run("validate " + (d / "missing.json").string()).code != 0);

    auto petal = json_of(run("validate --zoo \"petal-flower --p0 'zipf2'\" --format json"));
    CHECK(petal["model"]["stationary"][0]["pi"].get<double>() == doctest::Approx(0.5));
    CHECK(run("validate --zoo gen-petal-min:alpha=0.5").code == 4);
    fs::remove_all(d);
}

TEST_CASE("shipped sample models") {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(fs::path(MRW_SOURCE_DIR) / "data" / "models")) {
        INFO(e.path().string());
        CHECK(run("validate " + e.path().string()).code == 0);
        ++n;
    }
    CHECK(n >= 3);
    const std::string dir = std::string(MRW_SOURCE_DIR) + "/data/models/";
    auto three = json_of(run("classify -m " + dir + "three_state.json --seed 2 --trials 300 --cycles 3000 --format json"));
    CHECK(three["verdict"]["category"] == "PD");
    CHECK(three["trichotomy"]["mean_matches"] == true);
    auto swap = json_of(run("classify -m " + dir + "swap.json --seed 2 --format json"));
    CHECK(swap["verdict"]["category"] == "NullHomologous");
}

TEST_CASE("flag errors and help") {
    CHECK(run("").code == 5);
    CHECK(run("simulate --zoo petal-flower").code == 5);
    CHECK(run("simulate --zoo petal-flower --seed 1 --trials abc").code == 5);
    CHECK(run("verify --zoo petal-flower --seed 1 --theorems nonsense").code == 5);
    Run h = run("--help");
    CHECK(h.code == 0);
    CHECK(h.out.find("Exit codes") != std::string::npos);
    CHECK(h.out.find("13") != std::string::npos);
}

TEST_CASE("criteria of the constant walk") {
    auto d = json_of(run("criteria --zoo single-state:+1 --alpha 1 --x 0,1,2 --seed 1 --format json"));
    const auto& jt = d["J_table"];
    REQUIRE(jt.size() == 3);
    CHECK(jt[0]["J"].get<double>() == doctest::Approx(1.0));
    CHECK(jt[1]["J"].get<double>() == doctest::Approx(1.0));
    CHECK(jt[2]["J"].get<double>() == doctest::Approx(2.0));
    CHECK(d["alpha"][0]["moments"][0]["id"] == "E_J_D");
    CHECK(d["alpha"][0]["moments"][0]["estimate"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("classify petal flower") {
    auto d = json_of(run("classify --zoo petal-flower --seed 7 --trials 1e3 --cycles 5000 --format json"));
    CHECK(d["command"] == "classify");
    CHECK(d["verdict"]["category"] == "Osc");
    CHECK(d["verdict"]["embedded"] == "PD");
    CHECK(d["null_homology"]["null_homologous"] == false);
}

TEST_CASE("campaign csv") {
    Run r = run("simulate --zoo petal-flower --seed 1 --trials 3 --x 0,1 --format csv");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string header, line;
    std::getline(in, header);
    std::string want;
    for (const auto& c : mrw::kCampaignColumns) want += (want.empty() ? "" : ",") + c;
    CHECK(header == want);
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 6);
}

TEST_CASE("output directory from the environment") {
    fs::path d = scratch("out");
    Run r = run("classify --zoo single-state:+1 --seed 3 --trials 200 --cycles 2000", "MRW_OUT_DIR=" + d.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(d / "classify.json"));
    CHECK(fs::exists(d / "classify.csv"));
    auto j = nlohmann::json::parse(std::ifstream(d / "classify.json"));
    CHECK(j["verdict"]["category"] == "PD");
    fs::remove_all(d);
}

TEST_CASE("results do not depend on the worker count") {
    const std::string args = "verify --zoo sisyphus --seed 5 --trials 300 --cycles 3000 --alpha 1 --format json";
    Run a = run(args + " --workers 1");
    Run b = run(args + " --workers 3");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("fast zoo regression") {
    Run r = run("zoo regress --fast --format json");
    CHECK(r.code == 0);
    auto d = nlohmann::json::parse(r.out);
    CHECK(d["mismatches"] == 0);
}
