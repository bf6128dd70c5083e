#include "crossrl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace crossrl {

namespace fs = std::filesystem;

std::vector<const ManifestEntry*> Manifest::select(const std::string& split) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries) {
        if (split.empty() || split == "all" || e.split == split) {
            out.push_back(&e);
        }
    }
    return out;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
    nlohmann::ordered_json graphs = nlohmann::ordered_json::array();
    for (const auto& e : manifest.entries) {
        graphs.push_back({{"id", e.id},
                          {"path", e.path},
                          {"split", e.split},
                          {"class", e.graph_class},
                          {"embedding", e.embedding},
                          {"n", e.n},
                          {"m", e.m}});
    }
    nlohmann::ordered_json doc = {{"seed", manifest.seed}, {"split_rule", manifest.split_rule}, {"graphs", graphs}};
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write manifest " + path.string());
    }
    out << doc.dump(2) << '\n';
}

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open manifest " + path.string());
    }
    const auto doc = nlohmann::json::parse(in);
    Manifest m;
    m.seed = doc.value("seed", std::uint64_t{0});
    m.split_rule = doc.value("split_rule", std::string{});
    for (const auto& g : doc.at("graphs")) {
        ManifestEntry e;
        e.path = g.at("path");
        e.split = g.at("split");
        e.graph_class = g.at("class");
        e.id = g.value("id", fs::path(e.path).stem().string());
        e.embedding = g.value("embedding", std::string{});
        e.n = g.value("n", 0);
        e.m = g.value("m", 0);
        m.entries.push_back(std::move(e));
    }
    return m;
}

namespace {

bool is_graphml(const fs::path& p) {
    const auto ext = p.extension().string();
    return ext == ".graphml" || ext == ".xml";
}

bool is_graph_file(const fs::path& p) {
    const auto ext = p.extension().string();
    return is_graphml(p) || ext == ".txt" || ext == ".edges" || ext == ".el";
}

}  // namespace

std::vector<SourceGraph> load_sources(const std::vector<fs::path>& paths, const std::string& graph_class,
                                      std::vector<std::string>* warnings) {
    std::vector<fs::path> files;
    for (const auto& p : paths) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file() && is_graph_file(entry.path())) {
                    found.push_back(entry.path());
                }
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::exists(p)) {
            files.push_back(p);
        } else {
            throw std::runtime_error("source not found: " + p.string());
        }
    }
    std::vector<SourceGraph> out;
    for (const auto& f : files) {
        LoadedGraph loaded = is_graphml(f) ? load_graphml(f) : load_edgelist(f);
        if (warnings) {
            for (auto& w : loaded.warnings) {
                warnings->push_back(f.filename().string() + ": " + w);
            }
        }
        out.push_back({f.stem().string(), graph_class, std::move(loaded.graph)});
    }
    return out;
}

std::vector<SourceGraph> generate_sources(int rome_like_count, int ba_count, std::uint64_t seed) {
    std::vector<SourceGraph> out;
    for (int i = 0; i < rome_like_count; ++i) {
        const auto params = sample_rome_like_params(derive_seed(seed, "rome-like", static_cast<std::uint64_t>(i)));
        out.push_back({fmt::format("romelike-{:05d}", i), "rome", generate_rome_like(params)});
    }
    for (int i = 0; i < ba_count; ++i) {
        const auto params = sample_ba_params(derive_seed(seed, "ba", static_cast<std::uint64_t>(i)));
        out.push_back({fmt::format("ba-{:05d}", i), "ba", generate_extended_ba(params)});
    }
    return out;
}

PrepareReport prepare_dataset(const std::vector<SourceGraph>& sources, const PrepareOptions& options) {
    PrepareReport report;
    std::map<std::string, std::vector<int>> by_class;
    std::vector<Graph> kept;
    std::vector<const SourceGraph*> kept_src;
    for (const auto& src : sources) {
        PlanarityFilterOptions filter = options.filter;
        filter.seed = derive_seed(options.seed, "planarity-" + src.id);
        PreprocessResult r = preprocess(src.graph, filter);
        if (auto* rej = std::get_if<Rejected>(&r)) {
            report.rejected.emplace_back(src.id, rej->reason);
            continue;
        }
        by_class[src.graph_class].push_back(static_cast<int>(kept.size()));
        kept.push_back(std::move(std::get<Graph>(r)));
        kept_src.push_back(&src);
    }
    if (kept.empty()) {
        throw std::runtime_error("no graph survived preprocessing");
    }

    std::vector<std::string> split(kept.size());
    for (const auto& [cls, ids] : by_class) {
        const auto seed = derive_seed(options.seed, "split-" + cls);
        const DatasetSplit s = cls == "ba" ? split_by_count(ids, options.ba_train, options.ba_test, seed)
                                           : split_by_fraction(ids, options.rome_train_fraction, seed);
        for (int i : s.train) split[static_cast<std::size_t>(i)] = "train";
        for (int i : s.test) split[static_cast<std::size_t>(i)] = "test";
    }

    fs::create_directories(options.out_dir / "graphs");
    fs::create_directories(options.out_dir / "embeddings");
    report.manifest.seed = options.seed;
    report.manifest.split_rule =
        fmt::format("rome-class: train = floor({} * n), test = rest; ba-class: {} train / {} test after shuffle",
                    options.rome_train_fraction, options.ba_train, options.ba_test);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (split[i].empty()) {
            continue;  // beyond the absolute BA quota
        }
        const auto& src = *kept_src[i];
        ManifestEntry e;
        e.id = src.id;
        e.graph_class = src.graph_class;
        e.split = split[i];
        e.path = "graphs/" + src.id + ".edges";
        e.embedding = "embeddings/" + src.id + ".json";
        e.n = kept[i].num_vertices();
        e.m = kept[i].num_edges();
        save_edgelist(kept[i], options.out_dir / e.path);
        save_embedding(structural_embedding(kept[i]), options.out_dir / e.embedding);
        report.manifest.entries.push_back(std::move(e));
    }
    save_manifest(report.manifest, options.out_dir / "manifest.json");
    return report;
}

std::unique_ptr<Instance> load_instance(const ManifestEntry& entry, const fs::path& manifest_dir,
                                        std::uint64_t layout_seed) {
    auto inst = std::make_unique<Instance>();
    inst->id = entry.id;
    inst->graph_class = entry.graph_class;
    inst->graph = load_edgelist(manifest_dir / entry.path).graph;
    inst->initial = layout_kamada_kawai(inst->graph, layout_seed);
    const fs::path cache = manifest_dir / entry.embedding;
    if (!entry.embedding.empty() && fs::exists(cache)) {
        inst->embedding = load_embedding(cache, inst->graph.num_vertices());
    } else {
        inst->embedding = structural_embedding(inst->graph);
    }
    return inst;
}

std::vector<std::unique_ptr<Instance>> load_split(const fs::path& manifest_path, const std::string& split,
                                                  std::uint64_t layout_seed, int limit) {
    const Manifest manifest = load_manifest(manifest_path);
    const fs::path dir = manifest_path.parent_path();
    std::vector<std::unique_ptr<Instance>> out;
    for (const ManifestEntry* e : manifest.select(split)) {
        if (limit >= 0 && static_cast<int>(out.size()) >= limit) {
            break;
        }
        out.push_back(load_instance(*e, dir, layout_seed));
    }
    return out;
}

namespace {

OptimizeResult run_episode(const Graph& graph, const Drawing& initial, const StructuralEmbedding& embedding,
                           const EnvConfig& env_config, std::uint64_t seed, const Environment::ActionChooser& choose,
                           std::stop_token stop) {
    const auto t0 = std::chrono::steady_clock::now();
    Environment env(graph, initial, embedding, env_config, derive_seed(seed, "env"));
    OptimizeResult out;
    const CrossingIndex start = build_index(env.drawing());
    out.initial_gcn = start.total();
    out.initial_lcn = start.local_crossing_number();
    while (!env.done() && !stop.stop_requested()) {
        env.step(choose);
    }
    out.steps = env.steps();
    out.drawing = env.best_drawing();
    out.index = env.best_index();
    out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace

OptimizeResult optimize_drawing(const Graph& graph, const Drawing& initial, const StructuralEmbedding& embedding,
                                const Policy& policy, const EnvConfig& env, std::uint64_t seed, std::stop_token stop) {
    Rng rng(derive_seed(seed, "agent"));
    return run_episode(graph, initial, embedding, env, seed, policy_chooser(policy, rng), stop);
}

OptimizeResult random_episode(const Graph& graph, const Drawing& initial, const StructuralEmbedding& embedding,
                              const EnvConfig& env, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "agent"));
    return run_episode(graph, initial, embedding, env, seed, uniform_chooser(rng), {});
}

AlgorithmEntry make_algorithm(const std::string& name, const RegistryOptions& options) {
    if (name == "kk") {
        return {name, [](const AlgorithmInput& in) {
                    return layout_kamada_kawai(in.graph, layout_seed_for(in.seed), {}, nullptr, in.stop);
                }};
    }
    if (name == "fr") {
        const int iterations = options.fr_iterations;
        return {name, [iterations](const AlgorithmInput& in) {
                    return layout_fruchterman_reingold(in.graph, derive_seed(in.seed, "fr"), iterations, in.stop);
                }};
    }
    if (name == "svm") {
        const VertexMovementOptions vm = options.vm;
        return {name, [vm](const AlgorithmInput& in) {
                    Drawing d = in.initial;
                    CrossingIndex idx = build_index(d);
                    VertexMovementOptions o = vm;
                    o.seed = derive_seed(in.seed, "svm");
                    sampled_vertex_movement(d, idx, o, nullptr, in.stop);
                    return d;
                }};
    }
    if (name == "rl-gc" || name == "rl-lc") {
        const bool gc = name == "rl-gc";
        const Policy* policy = gc ? options.policy_gc : options.policy_lc;
        if (!policy) {
            throw std::invalid_argument("algorithm " + name + " needs a trained model");
        }
        EnvConfig env = options.env;
        env.objective = gc ? Objective::global : Objective::local;
        return {name, [policy, env](const AlgorithmInput& in) {
                    if (!in.embedding) {
                        throw std::invalid_argument("RL algorithms need a structural embedding");
                    }
                    return optimize_drawing(in.graph, in.initial, *in.embedding, *policy, env, in.seed, in.stop)
                        .drawing;
                }};
    }
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

}  // namespace crossrl
