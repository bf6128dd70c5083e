#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "crossrl/agent.hpp"
#include "crossrl/bench.hpp"
#include "crossrl/graph.hpp"
#include "crossrl/layout.hpp"

namespace crossrl {

/// One graph of a prepared dataset. Paths are relative to the manifest.
struct ManifestEntry {
    std::string id;
    std::string path;
    std::string split;
    std::string graph_class;
    std::string embedding;
    int n = 0;
    int m = 0;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    std::uint64_t seed = 0;
    std::string split_rule;

    std::vector<const ManifestEntry*> select(const std::string& split) const;
};

void save_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

struct SourceGraph {
    std::string id;
    std::string graph_class;
    Graph graph;
};

/// Reads edge lists (.txt, .edges, .el) and GraphML (.graphml, .xml); a
/// directory contributes every such file it contains, in name order.
std::vector<SourceGraph> load_sources(const std::vector<std::filesystem::path>& paths, const std::string& graph_class,
                                      std::vector<std::string>* warnings = nullptr);

/// Synthetic Rome-like and extended BA graphs drawn inside the dataset envelopes.
std::vector<SourceGraph> generate_sources(int rome_like_count, int ba_count, std::uint64_t seed);

struct PrepareOptions {
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    double rome_train_fraction = 0.8;
    int ba_train = 1000;
    int ba_test = 500;
    PlanarityFilterOptions filter;
};

struct PrepareReport {
    Manifest manifest;
    std::vector<std::pair<std::string, RejectReason>> rejected;
};

/// Preprocesses every source, splits each class (fraction for Rome-class,
/// absolute counts for BA-class) and writes graphs, embedding caches and
/// out_dir/manifest.json. Throws when nothing survives the filter.
PrepareReport prepare_dataset(const std::vector<SourceGraph>& sources, const PrepareOptions& options);

/// Loads one manifest entry with its KK initial layout; the embedding comes
/// from the cache when present.
std::unique_ptr<Instance> load_instance(const ManifestEntry& entry, const std::filesystem::path& manifest_dir,
                                        std::uint64_t layout_seed);

std::vector<std::unique_ptr<Instance>> load_split(const std::filesystem::path& manifest_path, const std::string& split,
                                                  std::uint64_t layout_seed, int limit = -1);

struct OptimizeResult {
    Drawing drawing;
    CrossingIndex index;
    long initial_gcn = 0;
    int initial_lcn = 0;
    int steps = 0;
    double runtime_seconds = 0.0;
};

/// One RL episode from `initial`; returns the best drawing seen.
OptimizeResult optimize_drawing(const Graph& graph, const Drawing& initial, const StructuralEmbedding& embedding,
                                const Policy& policy, const EnvConfig& env, std::uint64_t seed,
                                std::stop_token stop = {});

/// Same episode driven by a uniform-random policy.
OptimizeResult random_episode(const Graph& graph, const Drawing& initial, const StructuralEmbedding& embedding,
                              const EnvConfig& env, std::uint64_t seed);

struct RegistryOptions {
    const Policy* policy_gc = nullptr;
    const Policy* policy_lc = nullptr;
    EnvConfig env;
    VertexMovementOptions vm;
    int fr_iterations = 50;
};

inline constexpr const char* kKnownAlgorithms[] = {"kk", "fr", "rl-gc", "rl-lc", "svm"};

/// Seed used for the KK layout that both the `kk` entry and the shared
/// initial drawing come from.
inline std::uint64_t layout_seed_for(std::uint64_t seed) { return derive_seed(seed, "layout"); }

/// Throws std::invalid_argument for unknown names or a missing RL model.
AlgorithmEntry make_algorithm(const std::string& name, const RegistryOptions& options);

}  // namespace crossrl
