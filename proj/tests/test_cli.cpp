#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "crossrl/agent.hpp"
#include "crossrl/bench.hpp"
#include "crossrl/pipeline.hpp"
#include "support.hpp"

using namespace crossrl;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) { return crossrl::cli::run_cli(args); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

// Ten inputs: eight nonplanar (K5, K3,3 and friends) and two planar (K4, triangular prism).
void write_ten_graphs(const fs::path& dir) {
    fs::create_directories(dir);
    std::mt19937_64 gen(1);
    std::vector<Graph> graphs{complete_graph(5), complete_graph(6), complete_graph(7),
                              make_graph(6, {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}}),
                              complete_graph(4),
                              make_graph(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {0, 3}, {1, 4}, {2, 5}})};
    for (int i = 0; i < 4; ++i) graphs.push_back(random_connected_graph(20, 0.4, gen));
    for (std::size_t i = 0; i < graphs.size(); ++i) save_edgelist(graphs[i], dir / ("g" + std::to_string(i) + ".txt"));
}

fs::path trained_model(const fs::path& dir, const std::string& objective) {
    const fs::path p = dir / ("model-" + objective + ".ckpt");
    Checkpoint c{Policy(PolicyShape{}, 2), objective_from_string(objective), 0, shape_hash(PolicyShape{})};
    save_checkpoint(c, p);
    return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("prepare drops the planar inputs") {
    TempDir tmp("cli-prep");
    write_ten_graphs(tmp.path / "in");
    REQUIRE(run({"prepare", "--in", (tmp.path / "in").string(), "--class", "rome", "--out", (tmp.path / "ds").string(),
                 "--seed", "3"}) == 0);
    const Manifest m = load_manifest(tmp.path / "ds" / "manifest.json");
    CHECK(m.entries.size() == 8);
    for (const auto& e : m.entries) {
        CHECK(e.id != "g4");
        CHECK(e.id != "g5");
        CHECK(fs::exists(tmp.path / "ds" / e.path));
        CHECK(fs::exists(tmp.path / "ds" / e.embedding));
    }
    // floor(0.8 * 8) = 6 training graphs
    CHECK(m.select("train").size() == 6);
    CHECK(m.select("test").size() == 2);
    CHECK(fs::exists(tmp.path / "ds" / "resolved_config.json"));
}

TEST_CASE("prepare is reproducible for a fixed seed") {
    TempDir tmp("cli-prep2");
    REQUIRE(run({"prepare", "--rome-like", "6", "--ba", "4", "--ba-train", "2", "--ba-test", "2", "--out",
                 (tmp.path / "a").string(), "--seed", "7"}) == 0);
    REQUIRE(run({"prepare", "--rome-like", "6", "--ba", "4", "--ba-train", "2", "--ba-test", "2", "--out",
                 (tmp.path / "b").string(), "--seed", "7"}) == 0);
    CHECK(slurp(tmp.path / "a" / "manifest.json") == slurp(tmp.path / "b" / "manifest.json"));
}

TEST_CASE("layout writes a drawing") {
    TempDir tmp("cli-layout");
    save_edgelist(complete_graph(5), tmp.path / "k5.txt");
    CHECK(run({"layout", "--algo", "fr", "--in", (tmp.path / "k5.txt").string(), "--out", (tmp.path / "k5.json").string()}) == 0);
    CHECK(read_json(tmp.path / "k5.json").size() == 5);
    CHECK(run({"layout", "--algo", "spring", "--in", (tmp.path / "k5.txt").string(), "--out", (tmp.path / "x.json").string()}) != 0);
}

TEST_CASE("optimize: deterministic, never worse, objective checked") {
    TempDir tmp("cli-opt");
    std::mt19937_64 gen(2);
    save_edgelist(random_connected_graph(20, 0.3, gen), tmp.path / "g.txt");
    const fs::path model = trained_model(tmp.path, "gc");
    const std::string graph = (tmp.path / "g.txt").string();
    REQUIRE(run({"optimize", "--graph", graph, "--model", model.string(), "--seed", "4", "--step-cap", "300", "--out",
                 (tmp.path / "a.json").string(), "--svg", (tmp.path / "a.svg").string()}) == 0);
    REQUIRE(run({"optimize", "--graph", graph, "--model", model.string(), "--seed", "4", "--step-cap", "300", "--out",
                 (tmp.path / "b.json").string()}) == 0);
    CHECK(slurp(tmp.path / "a.json") == slurp(tmp.path / "b.json"));
    const auto m = read_json(tmp.path / "a_metrics.json");
    CHECK(m["gcn"].get<long>() <= m["initial_gcn"].get<long>());
    CHECK(m["objective"] == "gc");
    CHECK(fs::exists(tmp.path / "a.svg"));
    CHECK(fs::exists(tmp.path / "resolved_config.json"));

    CHECK(run({"optimize", "--graph", graph, "--model", model.string(), "--objective", "lc", "--out",
               (tmp.path / "c.json").string()}) != 0);
}

TEST_CASE("optimize: planar graph returns at once") {
    TempDir tmp("cli-planar");
    save_edgelist(cycle_graph(8), tmp.path / "c8.txt");
    const fs::path model = trained_model(tmp.path, "gc");
    REQUIRE(run({"optimize", "--graph", (tmp.path / "c8.txt").string(), "--model", model.string(), "--out",
                 (tmp.path / "c8.json").string()}) == 0);
    const auto m = read_json(tmp.path / "c8_metrics.json");
    CHECK(m["gcn"] == 0);
    CHECK(m["steps"] == 0);
}

TEST_CASE("optimize: a checkpoint with a bad hash is refused") {
    TempDir tmp("cli-hash");
    save_edgelist(complete_graph(5), tmp.path / "k5.txt");
    Checkpoint c{Policy(PolicyShape{}, 2), Objective::global, 0, "ffffffffffffffff"};
    save_checkpoint(c, tmp.path / "bad.ckpt");
    CHECK(run({"optimize", "--graph", (tmp.path / "k5.txt").string(), "--model", (tmp.path / "bad.ckpt").string(),
               "--out", (tmp.path / "o.json").string()}) != 0);
}

TEST_CASE("config file values apply and flags override them") {
    TempDir tmp("cli-config");
    std::mt19937_64 gen(3);
    save_edgelist(random_connected_graph(15, 0.3, gen), tmp.path / "g.txt");
    const fs::path model = trained_model(tmp.path, "gc");
    std::ofstream(tmp.path / "cfg.json") << R"({"optimize": {"seed": 11, "step-cap": 50}})";
    REQUIRE(run({"--config", (tmp.path / "cfg.json").string(), "optimize", "--graph", (tmp.path / "g.txt").string(),
                 "--model", model.string(), "--step-cap", "40", "--out", (tmp.path / "o" / "d.json").string()}) == 0);
    const auto cfg = read_json(tmp.path / "o" / "resolved_config.json");
    CHECK(cfg["command"] == "optimize");
    CHECK(cfg["options"]["seed"] == 11);
    CHECK(cfg["options"]["step_cap"] == 40);
}

TEST_CASE("relative outputs land under the output root") {
    TempDir tmp("cli-root");
    save_edgelist(complete_graph(5), tmp.path / "k5.txt");
    ::setenv(crossrl::cli::kOutputRootEnv, tmp.path.c_str(), 1);
    const int code = run({"layout", "--in", (tmp.path / "k5.txt").string(), "--out", "rooted/k5.json"});
    ::unsetenv(crossrl::cli::kOutputRootEnv);
    REQUIRE(code == 0);
    CHECK(fs::exists(tmp.path / "rooted" / "k5.json"));
    CHECK(fs::exists(tmp.path / "rooted" / "resolved_config.json"));
}

TEST_CASE("bench run, stats and render") {
    TempDir tmp("cli-bench");
    REQUIRE(run({"prepare", "--rome-like", "5", "--ba", "0", "--ba-train", "0", "--ba-test", "0",
                 "--rome-train-fraction", "0.4", "--out", (tmp.path / "ds").string(), "--seed", "2"}) == 0);
    const fs::path model = trained_model(tmp.path, "gc");
    const fs::path csv = tmp.path / "res" / "results.csv";
    REQUIRE(run({"bench", "run", "--algos", "kk,fr,svm,rl-gc", "--set", (tmp.path / "ds" / "manifest.json").string(),
                 "--limit", "2", "--timeout", "120", "--model-gc", model.string(), "--vm-samples", "10", "--vm-sweeps",
                 "1", "--step-cap", "100", "--out", csv.string()}) == 0);
    const auto recs = read_results(csv);
    CHECK(recs.size() == 8);
    for (const auto& r : recs) CHECK(r.status == RunStatus::ok);

    REQUIRE(run({"bench", "stats", "--in", csv.string(), "--pairwise", "--wilcoxon", "--out",
                 (tmp.path / "stats").string()}) == 0);
    CHECK(fs::exists(tmp.path / "stats" / "summary_gcn.csv"));
    CHECK(fs::exists(tmp.path / "stats" / "pairwise_gcn.csv"));
    CHECK(fs::exists(tmp.path / "stats" / "wilcoxon_gcn.csv"));

    REQUIRE(run({"bench", "render", "--in", csv.string(), "--graphs", "1", "--algos", "kk,svm", "--out",
                 (tmp.path / "svg").string()}) == 0);
    int svgs = 0;
    for (const auto& f : fs::directory_iterator(tmp.path / "svg")) svgs += f.path().extension() == ".svg";
    CHECK(svgs == 2);

    CHECK(run({"bench", "run", "--algos", "rl-lc", "--set", (tmp.path / "ds" / "manifest.json").string(), "--out",
               (tmp.path / "x.csv").string()}) != 0);
}

TEST_CASE("unknown subcommand fails") {
    CHECK(run({"frobnicate"}) != 0);
}

}  // TEST_SUITE
