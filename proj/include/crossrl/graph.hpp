#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace crossrl {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Undirected edge with endpoints stored as (min, max).
struct Edge {
    int u = 0;
    int v = 0;

    Edge() = default;
    Edge(int a, int b) : u(a < b ? a : b), v(a < b ? b : a) {}

    bool touches(int w) const { return u == w || v == w; }
    bool shares_endpoint(const Edge& o) const { return touches(o.u) || touches(o.v); }
    int other(int w) const { return w == u ? v : u; }

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable simple undirected graph on vertices 0..n-1.
class Graph {
public:
    Graph() = default;

    /// Throws GraphError on self-loops, duplicate edges or out-of-range ids.
    Graph(int n, std::vector<Edge> edges);

    int num_vertices() const { return n_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    std::span<const Edge> edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

    std::span<const int> neighbors(int v) const { return adjacency_[static_cast<std::size_t>(v)]; }
    /// Ids of the edges incident to v, aligned with neighbors(v).
    std::span<const int> incident_edges(int v) const { return incidence_[static_cast<std::size_t>(v)]; }
    int degree(int v) const { return static_cast<int>(adjacency_[static_cast<std::size_t>(v)].size()); }

    /// Edge id of {u, v}, or -1.
    int edge_id(int u, int v) const;
    bool has_edge(int u, int v) const { return edge_id(u, v) >= 0; }

    bool is_connected() const;
    int min_degree() const;

    friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<std::vector<int>> incidence_;
};

/// Graph as read from disk together with non-fatal diagnostics.
struct LoadedGraph {
    Graph graph;
    std::vector<std::string> warnings;
};

/// Edge list: one `u v` pair per line, `#` comments and blank lines skipped.
/// Vertex ids are compacted to 0..n-1 in order of first appearance.
LoadedGraph load_edgelist(const std::filesystem::path& path);
LoadedGraph parse_edgelist(const std::string& text);

/// GraphML subset: only `<node id>` and `<edge source target>` are read.
LoadedGraph load_graphml(const std::filesystem::path& path);
LoadedGraph parse_graphml(const std::string& text);

void save_edgelist(const Graph& g, const std::filesystem::path& path);

struct BAParams {
    int n = 100;
    int m_attach = 2;
    double p = 0.0;
    double q = 0.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument unless p + q < 1 and n >= m_attach + 1.
    void validate() const;
};

/// Extended Barabasi-Albert growth (Albert-Barabasi topology model).
/// Starts from the complete graph on m_attach vertices.
Graph generate_extended_ba(const BAParams& params);

/// Synthetic stand-in for Rome-style benchmark graphs: a sparse biconnected
/// core of `core_n` vertices with extra chords plus `leaves` pendant vertices.
struct RomeLikeParams {
    int core_n = 40;
    int chords = 16;
    int leaves = 4;
    std::uint64_t seed = 0;
};

Graph generate_rome_like(const RomeLikeParams& params);

/// Draws RomeLikeParams inside the Rome envelope (10-100 vertices, 9-158 edges).
RomeLikeParams sample_rome_like_params(std::uint64_t seed);

/// Draws BAParams inside the benchmark envelope (50-150 vertices, m in {1,2,3}).
BAParams sample_ba_params(std::uint64_t seed);

/// Vertex-induced subgraph with ids compacted in increasing order of `keep`.
Graph induced_subgraph(const Graph& g, std::span<const int> keep);

/// Repeatedly removes degree-1 vertices (and isolated vertices they leave
/// behind) until every remaining vertex has degree >= 2.
Graph strip_leaves(const Graph& g);

enum class RejectReason { disconnected, planar, empty_after_stripping };

std::string to_string(RejectReason reason);

struct Rejected {
    RejectReason reason;
};

struct PlanarityFilterOptions {
    int vm_sweeps = 3;
    int samples_per_vertex = 40;
    std::uint64_t seed = 0;
};

/// True when the graph is nonplanar by the Euler bound or the heuristic
/// layout + local search fails to find a crossing-free drawing.
bool judged_nonplanar(const Graph& g, const PlanarityFilterOptions& options);

using PreprocessResult = std::variant<Graph, Rejected>;

/// Rejects disconnected inputs, strips leaves to a fixed point and rejects
/// graphs the planarity heuristic can draw without crossings.
PreprocessResult preprocess(const Graph& g, const PlanarityFilterOptions& options = {});

struct DatasetSplit {
    std::vector<int> train;
    std::vector<int> test;
    std::uint64_t seed = 0;
};

/// Seeded shuffle, first floor(train_fraction * n) ids go to train.
DatasetSplit split_by_fraction(std::span<const int> ids, double train_fraction, std::uint64_t seed);

/// Seeded shuffle, absolute sizes (clamped to what is available).
DatasetSplit split_by_count(std::span<const int> ids, int train_count, int test_count, std::uint64_t seed);

}  // namespace crossrl
