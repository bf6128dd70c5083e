#pragma once

#include <cstdint>
#include <stop_token>
#include <vector>

#include "crossrl/geometry.hpp"
#include "crossrl/graph.hpp"

namespace crossrl {

/// Hop distances between all vertex pairs (row-major n x n); -1 if unreachable.
class DistanceMatrix {
public:
    explicit DistanceMatrix(const Graph& g);

    int size() const { return n_; }
    int operator()(int u, int v) const { return d_[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v)]; }
    int eccentricity(int v) const;

private:
    int n_ = 0;
    std::vector<int> d_;
};

/// Σ_{u<v} (‖p_u − p_v‖ − d_uv)² / d_uv²
double stress(const Drawing& d, const DistanceMatrix& dist);

struct KamadaKawaiOptions {
    int max_sweeps = 500;
    double tolerance = 1e-6;
};

/// Stress layout by per-vertex majorization sweeps from a seeded random
/// placement. `stress_trace`, when given, receives the stress before the
/// first sweep and after each sweep.
Drawing layout_kamada_kawai(const Graph& g, std::uint64_t seed, const KamadaKawaiOptions& options = {},
                            std::vector<double>* stress_trace = nullptr, std::stop_token stop = {});

Drawing layout_fruchterman_reingold(const Graph& g, std::uint64_t seed, int iterations = 50,
                                    std::stop_token stop = {});

struct VertexMovementOptions {
    int samples_per_vertex = 50;
    int sweeps = 3;
    std::uint64_t seed = 0;
};

/// Local search that relocates one vertex at a time to the best of a set of
/// sampled candidate positions. Never increases the total crossing count.
/// `sweep_totals`, when given, receives the total after each sweep.
void sampled_vertex_movement(Drawing& d, CrossingIndex& idx, const VertexMovementOptions& options,
                             std::vector<long>* sweep_totals = nullptr, std::stop_token stop = {});

}  // namespace crossrl
