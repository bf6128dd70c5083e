#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "crossrl/agent.hpp"
#include "crossrl/bench.hpp"
#include "crossrl/layout.hpp"
#include "crossrl/pipeline.hpp"

namespace crossrl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Reads --config files: nested objects select subcommands, e.g.
// {"train": {"steps": 5000}, "bench": {"run": {"timeout": 60}}}.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        const auto doc = nlohmann::json::parse(input);
        if (!doc.is_object()) {
            throw CLI::ConfigError("config file must hold a JSON object");
        }
        std::vector<CLI::ConfigItem> items;
        walk(doc, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void walk(const nlohmann::json& obj, const std::vector<std::string>& parents,
                     std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto next = parents;
                next.push_back(key);
                walk(value, next, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

fs::path output_path(const std::string& p) {
    fs::path path(p);
    if (path.is_relative()) {
        if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
            path = fs::path(root) / path;
        }
    }
    return path;
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
}

void write_resolved_config(const fs::path& dir, const std::string& command, const json& values) {
    fs::create_directories(dir.empty() ? fs::path(".") : dir);
    json doc = {{"command", command}, {"options", values}};
    std::ofstream(dir / "resolved_config.json") << doc.dump(2) << '\n';
}

LoadedGraph load_any_graph(const fs::path& p) {
    const auto ext = p.extension().string();
    return (ext == ".graphml" || ext == ".xml") ? load_graphml(p) : load_edgelist(p);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
    std::vector<std::string> inputs;
    std::string graph_class = "rome";
    int rome_like = 0;
    int ba = 0;
    std::string out;
    std::uint64_t seed = 0;
    double rome_train_fraction = 0.8;
    int ba_train = 1000;
    int ba_test = 500;
    int filter_sweeps = 3;
    int filter_samples = 40;
};

int cmd_prepare(const PrepareArgs& a) {
    std::vector<std::string> warnings;
    std::vector<fs::path> paths(a.inputs.begin(), a.inputs.end());
    auto sources = load_sources(paths, a.graph_class, &warnings);
    auto synthetic = generate_sources(a.rome_like, a.ba, a.seed);
    sources.insert(sources.end(), std::make_move_iterator(synthetic.begin()), std::make_move_iterator(synthetic.end()));
    if (sources.empty()) {
        throw std::runtime_error("prepare: no sources given (use --in, --rome-like or --ba)");
    }
    for (const auto& w : warnings) {
        fmt::print(stderr, "warning: {}\n", w);
    }
    PrepareOptions opt;
    opt.out_dir = output_path(a.out);
    opt.seed = a.seed;
    opt.rome_train_fraction = a.rome_train_fraction;
    opt.ba_train = a.ba_train;
    opt.ba_test = a.ba_test;
    opt.filter.vm_sweeps = a.filter_sweeps;
    opt.filter.samples_per_vertex = a.filter_samples;
    const PrepareReport report = prepare_dataset(sources, opt);

    std::map<std::string, std::map<std::string, int>> counts;
    for (const auto& e : report.manifest.entries) counts[e.graph_class][e.split]++;
    std::map<std::string, int> reasons;
    for (const auto& [id, r] : report.rejected) reasons[to_string(r)]++;
    fmt::print("sources: {}  kept: {}  rejected: {}\n", sources.size(), report.manifest.entries.size(),
               report.rejected.size());
    for (const auto& [reason, c] : reasons) fmt::print("  rejected ({}): {}\n", reason, c);
    for (const auto& [cls, s] : counts) {
        fmt::print("  {}: train {}  test {}\n", cls, s.count("train") ? s.at("train") : 0,
                   s.count("test") ? s.at("test") : 0);
    }
    fmt::print("split rule: {}\n", report.manifest.split_rule);
    fmt::print("manifest: {}\n", (opt.out_dir / "manifest.json").string());

    write_resolved_config(opt.out_dir, "prepare",
                          {{"in", a.inputs},
                           {"class", a.graph_class},
                           {"rome_like", a.rome_like},
                           {"ba", a.ba},
                           {"out", opt.out_dir.string()},
                           {"seed", a.seed},
                           {"rome_train_fraction", a.rome_train_fraction},
                           {"ba_train", a.ba_train},
                           {"ba_test", a.ba_test},
                           {"filter_sweeps", a.filter_sweeps},
                           {"filter_samples", a.filter_samples}});
    return 0;
}

// ---------------------------------------------------------------- layout

struct LayoutArgs {
    std::string algo = "kk";
    std::uint64_t seed = 0;
    std::string in;
    std::string out;
    int iterations = 50;
};

int cmd_layout(const LayoutArgs& a) {
    const LoadedGraph loaded = load_any_graph(a.in);
    for (const auto& w : loaded.warnings) fmt::print(stderr, "warning: {}\n", w);
    if (!loaded.graph.is_connected()) {
        throw std::runtime_error("layout: graph is disconnected");
    }
    const Drawing d = a.algo == "kk" ? layout_kamada_kawai(loaded.graph, a.seed)
                                     : layout_fruchterman_reingold(loaded.graph, a.seed, a.iterations);
    const fs::path out = output_path(a.out);
    ensure_parent(out);
    save_drawing(d, out);
    const CrossingIndex idx = build_index(d);
    fmt::print("{} layout: n={} m={} gcn={} lcn={}\n", a.algo, loaded.graph.num_vertices(), loaded.graph.num_edges(),
               idx.total(), idx.local_crossing_number());
    write_resolved_config(out.parent_path(), "layout",
                          {{"algo", a.algo}, {"seed", a.seed}, {"in", a.in}, {"out", out.string()},
                           {"iterations", a.iterations}});
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string objective = "gc";
    long steps = 200000;
    int envs = 16;
    double lr = 3e-3;
    int batch = 1028;
    int epochs = 10;
    int rollout = 128;
    double clip = 0.2;
    double entropy = 0.01;
    double gamma = 0.99;
    double lambda = 0.95;
    int step_cap = 2000;
    std::string set;
    std::string split = "train";
    int limit = -1;
    std::uint64_t seed = 0;
    std::string out;
    std::string log;
};

int cmd_train(const TrainArgs& a) {
    TrainConfig cfg;
    cfg.ppo.learning_rate = a.lr;
    cfg.ppo.batch_size = a.batch;
    cfg.ppo.epochs = a.epochs;
    cfg.ppo.clip_ratio = a.clip;
    cfg.ppo.entropy_coef = a.entropy;
    cfg.ppo.gamma = a.gamma;
    cfg.ppo.lambda = a.lambda;
    cfg.env.objective = objective_from_string(a.objective);
    cfg.env.step_cap = a.step_cap;
    cfg.total_steps = a.steps;
    cfg.envs = a.envs;
    cfg.rollout_steps = a.rollout;
    cfg.seed = a.seed;
    cfg.ppo.validate();

    const auto instances = load_split(a.set, a.split, layout_seed_for(a.seed), a.limit);
    if (instances.empty()) {
        throw std::runtime_error("train: split '" + a.split + "' of " + a.set + " is empty");
    }
    std::vector<const Instance*> ptrs;
    for (const auto& i : instances) ptrs.push_back(i.get());

    const fs::path out = output_path(a.out);
    ensure_parent(out);
    const fs::path log_path = a.log.empty() ? out.parent_path() / (out.stem().string() + "_log.csv") : output_path(a.log);
    ensure_parent(log_path);

    fmt::print("training {} on {} graphs for {} steps ({} envs)\n", a.objective, ptrs.size(), a.steps, a.envs);
    TrainResult result = train(cfg, ptrs, [&](const TrainLogRow& row, const Policy&) {
        fmt::print("step {:>8}  reward {:+.4f}  entropy {:.3f}  pl {:+.4f}  vl {:.4f}\n", row.step, row.mean_reward,
                   row.entropy, row.policy_loss, row.value_loss);
    });
    write_train_log(result.log, log_path);
    save_checkpoint({result.policy, cfg.env.objective, result.steps, shape_hash(cfg.shape)}, out);
    fmt::print("checkpoint: {}\nlog: {}\n", out.string(), log_path.string());

    write_resolved_config(out.parent_path(), "train",
                          {{"objective", a.objective}, {"steps", a.steps}, {"envs", a.envs}, {"lr", a.lr},
                           {"batch", a.batch}, {"epochs", a.epochs}, {"rollout", a.rollout}, {"clip", a.clip},
                           {"entropy", a.entropy}, {"gamma", a.gamma}, {"lambda", a.lambda},
                           {"step_cap", a.step_cap}, {"set", a.set}, {"split", a.split}, {"limit", a.limit},
                           {"seed", a.seed}, {"out", out.string()}, {"log", log_path.string()}});
    return 0;
}

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
    std::string graph;
    std::string model;
    std::string objective;
    std::uint64_t seed = 0;
    int step_cap = 2000;
    std::string out;
    std::string metrics;
    std::string svg;
};

int cmd_optimize(const OptimizeArgs& a) {
    const Checkpoint ckpt = load_checkpoint(a.model);
    if (!a.objective.empty() && objective_from_string(a.objective) != ckpt.objective) {
        throw std::runtime_error(fmt::format("model was trained for objective {}, not {}", to_string(ckpt.objective),
                                             a.objective));
    }
    const LoadedGraph loaded = load_any_graph(a.graph);
    const Graph& g = loaded.graph;
    if (!g.is_connected()) {
        throw std::runtime_error("optimize: graph is disconnected");
    }
    const Drawing initial = layout_kamada_kawai(g, layout_seed_for(a.seed));
    const StructuralEmbedding emb = structural_embedding(g);
    EnvConfig env;
    env.objective = ckpt.objective;
    env.step_cap = a.step_cap;
    const OptimizeResult r = optimize_drawing(g, initial, emb, ckpt.policy, env, a.seed);

    const fs::path out = output_path(a.out);
    ensure_parent(out);
    save_drawing(r.drawing, out);
    const fs::path metrics = a.metrics.empty() ? out.parent_path() / (out.stem().string() + "_metrics.json")
                                               : output_path(a.metrics);
    ensure_parent(metrics);
    json m = {{"gcn", r.index.total()},
              {"lcn", r.index.local_crossing_number()},
              {"steps", r.steps},
              {"runtime", r.runtime_seconds},
              {"initial_gcn", r.initial_gcn},
              {"initial_lcn", r.initial_lcn},
              {"objective", to_string(ckpt.objective)}};
    std::ofstream(metrics) << m.dump(2) << '\n';
    if (!a.svg.empty()) {
        const fs::path svg = output_path(a.svg);
        ensure_parent(svg);
        std::ofstream(svg) << render_svg(r.drawing, {fs::path(a.graph).stem().string(), r.runtime_seconds});
    }
    fmt::print("gcn {} -> {}  lcn {} -> {}  steps {}  {:.2f}s\n", r.initial_gcn, r.index.total(), r.initial_lcn,
               r.index.local_crossing_number(), r.steps, r.runtime_seconds);
    write_resolved_config(out.parent_path(), "optimize",
                          {{"graph", a.graph}, {"model", a.model}, {"objective", to_string(ckpt.objective)},
                           {"seed", a.seed}, {"step_cap", a.step_cap}, {"out", out.string()},
                           {"metrics", metrics.string()}, {"svg", a.svg}});
    return 0;
}

// ---------------------------------------------------------------- bench

struct BenchRunArgs {
    std::string algos = "kk,fr,rl-gc,rl-lc,svm";
    std::string set;
    std::string split = "test";
    int limit = -1;
    double timeout = kDefaultTimeLimitSeconds;
    std::string out;
    std::uint64_t seed = 0;
    std::string model_gc;
    std::string model_lc;
    int vm_samples = 50;
    int vm_sweeps = 3;
    int step_cap = 2000;
    bool append = false;
};

json bench_config_json(const BenchRunArgs& a) {
    return {{"algos", a.algos}, {"set", fs::absolute(a.set).string()}, {"split", a.split}, {"limit", a.limit},
            {"timeout", a.timeout}, {"seed", a.seed},
            {"model_gc", a.model_gc.empty() ? "" : fs::absolute(a.model_gc).string()},
            {"model_lc", a.model_lc.empty() ? "" : fs::absolute(a.model_lc).string()},
            {"vm_samples", a.vm_samples}, {"vm_sweeps", a.vm_sweeps}, {"step_cap", a.step_cap}};
}

BenchRunArgs bench_config_from_json(const nlohmann::json& j) {
    BenchRunArgs a;
    a.algos = j.at("algos");
    a.set = j.at("set");
    a.split = j.at("split");
    a.limit = j.at("limit");
    a.timeout = j.at("timeout");
    a.seed = j.at("seed");
    a.model_gc = j.at("model_gc");
    a.model_lc = j.at("model_lc");
    a.vm_samples = j.at("vm_samples");
    a.vm_sweeps = j.at("vm_sweeps");
    a.step_cap = j.at("step_cap");
    return a;
}

// Models and options backing a registry; keeps the policies alive.
struct Registry {
    std::optional<Policy> gc, lc;
    RegistryOptions options;
    std::vector<AlgorithmEntry> entries;

    Registry(const BenchRunArgs& a, const std::vector<std::string>& names) {
        if (!a.model_gc.empty()) gc = load_checkpoint(a.model_gc).policy;
        if (!a.model_lc.empty()) lc = load_checkpoint(a.model_lc).policy;
        options.policy_gc = gc ? &*gc : nullptr;
        options.policy_lc = lc ? &*lc : nullptr;
        options.env.step_cap = a.step_cap;
        options.vm.samples_per_vertex = a.vm_samples;
        options.vm.sweeps = a.vm_sweeps;
        for (const auto& n : names) entries.push_back(make_algorithm(n, options));
    }
};

fs::path sidecar_of(const fs::path& csv) { return fs::path(csv.string() + ".json"); }

int cmd_bench_run(const BenchRunArgs& a) {
    const auto names = split_list(a.algos);
    if (names.empty()) {
        throw std::runtime_error("bench run: no algorithms given");
    }
    Registry registry(a, names);
    const auto instances = load_split(a.set, a.split, layout_seed_for(a.seed), a.limit);
    if (instances.empty()) {
        throw std::runtime_error("bench run: split '" + a.split + "' of " + a.set + " is empty");
    }
    std::vector<BenchGraph> graphs;
    for (const auto& i : instances) graphs.push_back({i->id, &i->graph, &i->initial, &i->embedding});

    const fs::path out = output_path(a.out);
    ensure_parent(out);
    if (!a.append) {
        fs::remove(out);
    }
    std::ofstream(sidecar_of(out)) << bench_config_json(a).dump(2) << '\n';
    write_resolved_config(out.parent_path(), "bench run", bench_config_json(a));

    SuiteOptions opt;
    opt.time_limit_seconds = a.timeout;
    opt.seed = a.seed;
    opt.results_csv = out;
    fmt::print("running {} algorithms on {} graphs (limit {:.0f}s)\n", names.size(), graphs.size(), a.timeout);
    const auto records = run_suite(registry.entries, graphs, opt);
    int timeouts = 0, failures = 0;
    for (const auto& r : records) {
        timeouts += r.status == RunStatus::timeout;
        failures += r.status == RunStatus::failed;
        if (r.status == RunStatus::failed) {
            fmt::print(stderr, "failed: {} on {}: {}\n", r.algorithm, r.graph_id, r.message);
        }
    }
    fmt::print("records: {}  timeouts: {}  failed: {}\nresults: {}\n", records.size(), timeouts, failures,
               out.string());
    return failures == 0 ? 0 : 1;
}

struct BenchStatsArgs {
    std::string metric = "gcn";
    std::string in;
    bool pairwise = false;
    bool wilcoxon = false;
    bool common = false;
    std::string out;
};

int cmd_bench_stats(const BenchStatsArgs& a) {
    const Metric metric = metric_from_string(a.metric);
    std::vector<RunRecord> records = read_results(a.in);
    std::set<std::string> algos_set;
    for (const auto& r : records) algos_set.insert(r.algorithm);
    const std::vector<std::string> algos(algos_set.begin(), algos_set.end());
    if (a.common) {
        records = commonly_solved(records, algos);
    }
    const fs::path out_dir = a.out.empty() ? fs::path() : output_path(a.out);
    if (!out_dir.empty()) fs::create_directories(out_dir);

    const SummaryResult summary = summarize(records, metric);
    for (const auto& w : summary.warnings) fmt::print(stderr, "warning: {}\n", w);
    std::string csv = "algo,count,min,q1,median,mean,q3,max\n";
    fmt::print("{:<8} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "algo", "n", "min", "q1", "median", "mean", "q3",
               "max");
    for (const auto& s : summary.rows) {
        fmt::print("{:<8} {:>5} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f}\n", s.algorithm, s.count, s.min,
                   s.q1, s.median, s.mean, s.q3, s.max);
        csv += fmt::format("{},{},{},{},{},{},{},{}\n", s.algorithm, s.count, s.min, s.q1, s.median, s.mean, s.q3,
                           s.max);
    }
    if (!out_dir.empty()) std::ofstream(out_dir / fmt::format("summary_{}.csv", a.metric)) << csv;

    if (a.pairwise) {
        const PairwiseWinTable table = pairwise_wins(records, metric);
        std::string pcsv = "algo,versus,win,loss,tie,graphs\n";
        fmt::print("\npairwise {} (row vs column: win/loss/tie %)\n", a.metric);
        fmt::print("{:<8}", "");
        for (const auto& b : table.algorithms) fmt::print(" {:>20}", b);
        fmt::print("\n");
        for (std::size_t i = 0; i < table.algorithms.size(); ++i) {
            fmt::print("{:<8}", table.algorithms[i]);
            for (std::size_t j = 0; j < table.algorithms.size(); ++j) {
                const WinCell& c = table.cells[i][j];
                if (i == j) {
                    fmt::print(" {:>20}", "-");
                    continue;
                }
                fmt::print(" {:>20}", fmt::format("{:.1f}/{:.1f}/{:.1f}", c.win, c.loss, c.tie));
                pcsv += fmt::format("{},{},{:.4f},{:.4f},{:.4f},{}\n", table.algorithms[i], table.algorithms[j],
                                    c.win, c.loss, c.tie, c.graphs);
            }
            fmt::print("\n");
        }
        if (!out_dir.empty()) std::ofstream(out_dir / fmt::format("pairwise_{}.csv", a.metric)) << pcsv;
    }

    if (a.wilcoxon) {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (std::size_t i = 0; i < algos.size(); ++i)
            for (std::size_t j = i + 1; j < algos.size(); ++j) pairs.emplace_back(algos[i], algos[j]);
        const auto tests = wilcoxon_holm(records, metric, pairs);
        std::string wcsv = "a,b,n,w_plus,w_minus,p,p_holm,exact,degenerate\n";
        fmt::print("\nWilcoxon signed-rank, Holm-adjusted ({})\n", a.metric);
        for (const auto& t : tests) {
            fmt::print("{:<8} vs {:<8} n={:<4} W+={:<8.1f} W-={:<8.1f} p={:.4g}  p_holm={:.4g}{}\n", t.a, t.b,
                       t.test.n, t.test.w_plus, t.test.w_minus, t.test.p_value, t.adjusted_p,
                       t.test.degenerate ? "  (no nonzero differences)" : "");
            wcsv += fmt::format("{},{},{},{},{},{},{},{},{}\n", t.a, t.b, t.test.n, t.test.w_plus, t.test.w_minus,
                                t.test.p_value, t.adjusted_p, t.test.exact, t.test.degenerate);
        }
        if (!out_dir.empty()) std::ofstream(out_dir / fmt::format("wilcoxon_{}.csv", a.metric)) << wcsv;
    }
    if (!out_dir.empty()) {
        write_resolved_config(out_dir, "bench stats",
                              {{"metric", a.metric}, {"in", a.in}, {"pairwise", a.pairwise},
                               {"wilcoxon", a.wilcoxon}, {"common", a.common}});
    }
    return 0;
}

struct BenchRenderArgs {
    std::string in;
    int graphs = 5;
    std::string out;
    std::string algos;
};

int cmd_bench_render(const BenchRenderArgs& a) {
    const fs::path sidecar = sidecar_of(a.in);
    if (!fs::exists(sidecar)) {
        throw std::runtime_error("bench render: missing run description " + sidecar.string());
    }
    std::ifstream sin(sidecar);
    const BenchRunArgs run = bench_config_from_json(nlohmann::json::parse(sin));
    const auto records = read_results(a.in);

    std::vector<std::string> graph_order;
    std::set<std::string> wanted_algos;
    const auto filter = split_list(a.algos);
    for (const auto& r : records) {
        if (std::find(graph_order.begin(), graph_order.end(), r.graph_id) == graph_order.end()) {
            graph_order.push_back(r.graph_id);
        }
        if (r.status == RunStatus::ok &&
            (filter.empty() || std::find(filter.begin(), filter.end(), r.algorithm) != filter.end())) {
            wanted_algos.insert(r.algorithm);
        }
    }
    if (static_cast<int>(graph_order.size()) > a.graphs) graph_order.resize(static_cast<std::size_t>(a.graphs));

    Registry registry(run, std::vector<std::string>(wanted_algos.begin(), wanted_algos.end()));
    const Manifest manifest = load_manifest(run.set);
    const fs::path manifest_dir = fs::path(run.set).parent_path();
    const fs::path out_dir = output_path(a.out);
    fs::create_directories(out_dir);

    int written = 0;
    for (const auto& gid : graph_order) {
        auto it = std::find_if(manifest.entries.begin(), manifest.entries.end(),
                               [&](const ManifestEntry& e) { return e.id == gid; });
        if (it == manifest.entries.end()) {
            fmt::print(stderr, "warning: graph {} not in manifest; skipped\n", gid);
            continue;
        }
        const auto inst = load_instance(*it, manifest_dir, layout_seed_for(run.seed));
        for (const auto& entry : registry.entries) {
            auto rec = std::find_if(records.begin(), records.end(), [&](const RunRecord& r) {
                return r.graph_id == gid && r.algorithm == entry.name && r.status == RunStatus::ok;
            });
            if (rec == records.end()) continue;
            const Drawing d = entry.run({inst->graph, inst->initial, &inst->embedding, run.seed, {}});
            const CrossingIndex idx = build_index(d);
            if (rec->gcn && *rec->gcn != idx.total()) {
                fmt::print(stderr, "warning: {} on {} reproduced gcn {} but recorded {}\n", entry.name, gid,
                           idx.total(), *rec->gcn);
            }
            const fs::path file = out_dir / fmt::format("{}__{}.svg", gid, entry.name);
            std::ofstream(file) << render_svg(d, {fmt::format("{} {}", gid, entry.name), rec->runtime_seconds});
            ++written;
        }
    }
    fmt::print("wrote {} drawings to {}\n", written, out_dir.string());
    write_resolved_config(out_dir, "bench render",
                          {{"in", a.in}, {"graphs", a.graphs}, {"out", out_dir.string()}, {"algos", a.algos}});
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"crossrl: crossing minimization by reinforcement learning post-processing"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file with option values; flags on the command line take precedence");
    app.require_subcommand(1);

    const std::vector<std::string> objectives{"gc", "lc"};

    PrepareArgs prep;
    auto* p = app.add_subcommand("prepare", "Preprocess graphs, split train/test, cache embeddings");
    p->add_option("--in", prep.inputs, "Edge-list or GraphML files, or directories of them");
    p->add_option("--class", prep.graph_class, "Class recorded for --in graphs")->check(CLI::IsMember({"rome", "ba"}));
    p->add_option("--rome-like", prep.rome_like, "Number of synthetic Rome-like graphs to generate");
    p->add_option("--ba", prep.ba, "Number of extended BA graphs to generate");
    p->add_option("--out", prep.out, "Dataset directory")->required();
    p->add_option("--seed", prep.seed);
    p->add_option("--rome-train-fraction", prep.rome_train_fraction)->check(CLI::Range(0.0, 1.0));
    p->add_option("--ba-train", prep.ba_train);
    p->add_option("--ba-test", prep.ba_test);
    p->add_option("--filter-sweeps", prep.filter_sweeps, "Vertex-movement sweeps of the planarity filter");
    p->add_option("--filter-samples", prep.filter_samples, "Samples per vertex of the planarity filter");

    LayoutArgs lay;
    auto* l = app.add_subcommand("layout", "Compute a KK or FR layout");
    l->add_option("--algo", lay.algo)->check(CLI::IsMember({"kk", "fr"}));
    l->add_option("--seed", lay.seed);
    l->add_option("--in", lay.in, "Graph file")->required()->check(CLI::ExistingFile);
    l->add_option("--out", lay.out, "Drawing JSON")->required();
    l->add_option("--iterations", lay.iterations, "FR iterations");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a policy with PPO");
    t->add_option("--objective", tr.objective)->check(CLI::IsMember(objectives));
    t->add_option("--steps", tr.steps, "Total environment steps");
    t->add_option("--envs", tr.envs, "Parallel environments")->check(CLI::PositiveNumber);
    t->add_option("--lr", tr.lr);
    t->add_option("--batch", tr.batch, "Minibatch size")->check(CLI::PositiveNumber);
    t->add_option("--epochs", tr.epochs)->check(CLI::PositiveNumber);
    t->add_option("--rollout", tr.rollout, "Steps per environment between updates")->check(CLI::PositiveNumber);
    t->add_option("--clip", tr.clip);
    t->add_option("--entropy", tr.entropy);
    t->add_option("--gamma", tr.gamma);
    t->add_option("--lambda", tr.lambda);
    t->add_option("--step-cap", tr.step_cap, "Episode length cap");
    t->add_option("--set", tr.set, "Dataset manifest")->required()->check(CLI::ExistingFile);
    t->add_option("--split", tr.split);
    t->add_option("--limit", tr.limit, "Use at most this many graphs");
    t->add_option("--seed", tr.seed);
    t->add_option("--out", tr.out, "Checkpoint path")->required();
    t->add_option("--log", tr.log, "Training log CSV (default: <out>_log.csv)");

    OptimizeArgs opt;
    auto* o = app.add_subcommand("optimize", "Improve the KK layout of one graph with a trained policy");
    o->add_option("--graph", opt.graph)->required()->check(CLI::ExistingFile);
    o->add_option("--model", opt.model)->required()->check(CLI::ExistingFile);
    o->add_option("--objective", opt.objective, "Must match the model")->check(CLI::IsMember(objectives));
    o->add_option("--seed", opt.seed);
    o->add_option("--step-cap", opt.step_cap);
    o->add_option("--out", opt.out, "Drawing JSON")->required();
    o->add_option("--metrics", opt.metrics, "Metrics JSON (default: <out>_metrics.json)");
    o->add_option("--svg", opt.svg, "Also render the drawing");

    auto* b = app.add_subcommand("bench", "Benchmark harness");
    b->require_subcommand(1);

    BenchRunArgs br;
    auto* brun = b->add_subcommand("run", "Run algorithms on a test set");
    brun->add_option("--algos", br.algos, "Comma-separated: kk,fr,rl-gc,rl-lc,svm");
    brun->add_option("--set", br.set, "Dataset manifest")->required()->check(CLI::ExistingFile);
    brun->add_option("--split", br.split);
    brun->add_option("--limit", br.limit, "Use at most this many graphs");
    brun->add_option("--timeout", br.timeout, "Seconds per graph and algorithm");
    brun->add_option("--out", br.out, "Results CSV")->required();
    brun->add_option("--seed", br.seed);
    brun->add_option("--model-gc", br.model_gc)->check(CLI::ExistingFile);
    brun->add_option("--model-lc", br.model_lc)->check(CLI::ExistingFile);
    brun->add_option("--vm-samples", br.vm_samples);
    brun->add_option("--vm-sweeps", br.vm_sweeps);
    brun->add_option("--step-cap", br.step_cap);
    brun->add_flag("--append", br.append, "Append to an existing results file");

    BenchStatsArgs bs;
    auto* bstats = b->add_subcommand("stats", "Summaries, pairwise wins and Wilcoxon-Holm tests");
    bstats->add_option("--metric", bs.metric)->check(CLI::IsMember({"gcn", "lcn"}));
    bstats->add_option("--in", bs.in)->required()->check(CLI::ExistingFile);
    bstats->add_flag("--pairwise", bs.pairwise);
    bstats->add_flag("--wilcoxon", bs.wilcoxon);
    bstats->add_flag("--common", bs.common, "Restrict to graphs every algorithm finished");
    bstats->add_option("--out", bs.out, "Directory for CSV tables");

    BenchRenderArgs bren;
    auto* brender = b->add_subcommand("render", "Render drawings of benchmarked graphs as SVG");
    brender->add_option("--in", bren.in)->required()->check(CLI::ExistingFile);
    brender->add_option("--graphs", bren.graphs);
    brender->add_option("--out", bren.out)->required();
    brender->add_option("--algos", bren.algos, "Comma-separated subset");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (p->parsed()) return cmd_prepare(prep);
        if (l->parsed()) return cmd_layout(lay);
        if (t->parsed()) return cmd_train(tr);
        if (o->parsed()) return cmd_optimize(opt);
        if (brun->parsed()) return cmd_bench_run(br);
        if (bstats->parsed()) return cmd_bench_stats(bs);
        if (brender->parsed()) return cmd_bench_render(bren);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 1;
}

}  // namespace crossrl::cli
