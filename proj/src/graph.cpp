#include "crossrl/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>

#include "crossrl/rng.hpp"

namespace crossrl {

Graph::Graph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    if (n < 0) {
        throw GraphError("negative vertex count");
    }
    adjacency_.assign(static_cast<std::size_t>(n), {});
    incidence_.assign(static_cast<std::size_t>(n), {});
    std::set<Edge> seen;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (e.u < 0 || e.v >= n) {
            throw GraphError(fmt::format("edge ({}, {}) out of range for n={}", e.u, e.v, n));
        }
        if (e.u == e.v) {
            throw GraphError(fmt::format("self-loop at vertex {}", e.u));
        }
        if (!seen.insert(e).second) {
            throw GraphError(fmt::format("duplicate edge ({}, {})", e.u, e.v));
        }
        adjacency_[static_cast<std::size_t>(e.u)].push_back(e.v);
        adjacency_[static_cast<std::size_t>(e.v)].push_back(e.u);
        incidence_[static_cast<std::size_t>(e.u)].push_back(static_cast<int>(i));
        incidence_[static_cast<std::size_t>(e.v)].push_back(static_cast<int>(i));
    }
}

int Graph::edge_id(int u, int v) const {
    if (u < 0 || v < 0 || u >= n_ || v >= n_) {
        return -1;
    }
    const auto& nb = adjacency_[static_cast<std::size_t>(u)];
    for (std::size_t i = 0; i < nb.size(); ++i) {
        if (nb[i] == v) {
            return incidence_[static_cast<std::size_t>(u)][i];
        }
    }
    return -1;
}

bool Graph::is_connected() const {
    if (n_ <= 1) {
        return true;
    }
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : neighbors(v)) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == n_;
}

int Graph::min_degree() const {
    int best = n_ > 0 ? degree(0) : 0;
    for (int v = 1; v < n_; ++v) {
        best = std::min(best, degree(v));
    }
    return best;
}

namespace {

// Accumulates edges over arbitrary external ids, compacting them on first use.
class GraphBuilder {
public:
    int id_for(const std::string& key) {
        auto [it, inserted] = ids_.try_emplace(key, static_cast<int>(ids_.size()));
        return it->second;
    }

    bool known(const std::string& key) const { return ids_.count(key) > 0; }

    void add_edge(const std::string& a, const std::string& b, int line, std::vector<std::string>& warnings) {
        if (a == b) {
            throw GraphError(fmt::format("line {}: self-loop at vertex {}", line, a));
        }
        int u = id_for(a);
        int v = id_for(b);
        Edge e(u, v);
        if (!seen_.insert(e).second) {
            warnings.push_back(fmt::format("line {}: duplicate edge ({}, {}) ignored", line, a, b));
            return;
        }
        edges_.push_back(e);
    }

    Graph build() { return Graph(static_cast<int>(ids_.size()), std::move(edges_)); }

private:
    std::unordered_map<std::string, int> ids_;
    std::set<Edge> seen_;
    std::vector<Edge> edges_;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw GraphError(fmt::format("cannot open {}", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_nonnegative_integer(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

LoadedGraph parse_edgelist(const std::string& text) {
    LoadedGraph out;
    GraphBuilder builder;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a >> b) || (ls >> extra) || !is_nonnegative_integer(a) || !is_nonnegative_integer(b)) {
            throw GraphError(fmt::format("line {}: expected `u v` with nonnegative integer ids, got '{}'", lineno, line));
        }
        // normalize leading zeros so "01" and "1" name the same vertex
        a = std::to_string(std::stoull(a));
        b = std::to_string(std::stoull(b));
        builder.add_edge(a, b, lineno, out.warnings);
    }
    out.graph = builder.build();
    return out;
}

LoadedGraph load_edgelist(const std::filesystem::path& path) {
    return parse_edgelist(read_file(path));
}

LoadedGraph parse_graphml(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& err) {
        throw GraphError(fmt::format("GraphML parse error: {}", err.what()));
    }
    auto root = tree.get_child_optional("graphml");
    if (!root) {
        throw GraphError("GraphML: missing <graphml> root element");
    }
    auto graph = root->get_child_optional("graph");
    if (!graph) {
        throw GraphError("GraphML: missing <graph> element");
    }

    LoadedGraph out;
    GraphBuilder builder;
    // nodes may appear after edges in valid documents, so declare them first
    for (const auto& [tag, child] : *graph) {
        if (tag == "node") {
            auto id = child.get_optional<std::string>("<xmlattr>.id");
            if (!id) {
                throw GraphError("GraphML: <node> without id");
            }
            builder.id_for(*id);
        }
    }
    int index = 0;
    for (const auto& [tag, child] : *graph) {
        if (tag != "edge") {
            continue;
        }
        ++index;
        auto src = child.get_optional<std::string>("<xmlattr>.source");
        auto dst = child.get_optional<std::string>("<xmlattr>.target");
        if (!src || !dst) {
            throw GraphError(fmt::format("GraphML: edge #{} lacks source or target", index));
        }
        for (const auto* endpoint : {&*src, &*dst}) {
            if (!builder.known(*endpoint)) {
                throw GraphError(fmt::format("GraphML: edge #{} references undeclared node '{}'", index, *endpoint));
            }
        }
        builder.add_edge(*src, *dst, index, out.warnings);
    }
    out.graph = builder.build();
    return out;
}

LoadedGraph load_graphml(const std::filesystem::path& path) {
    return parse_graphml(read_file(path));
}

void save_edgelist(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw GraphError(fmt::format("cannot write {}", path.string()));
    }
    out << "# n=" << g.num_vertices() << " m=" << g.num_edges() << '\n';
    for (const Edge& e : g.edges()) {
        out << e.u << ' ' << e.v << '\n';
    }
    // isolated vertices cannot be expressed in an edge list
}

void BAParams::validate() const {
    if (m_attach < 1) {
        throw std::invalid_argument("m_attach must be >= 1");
    }
    if (n < m_attach + 1) {
        throw std::invalid_argument("n must be >= m_attach + 1");
    }
    if (p < 0.0 || q < 0.0 || p + q >= 1.0) {
        throw std::invalid_argument("need p, q >= 0 and p + q < 1");
    }
}

namespace {

// Mutable adjacency used while growing a graph.
struct GrowingGraph {
    std::vector<std::set<int>> adj;
    int edges = 0;

    void add_vertex() { adj.emplace_back(); }
    int size() const { return static_cast<int>(adj.size()); }
    int degree(int v) const { return static_cast<int>(adj[static_cast<std::size_t>(v)].size()); }
    bool has(int u, int v) const { return adj[static_cast<std::size_t>(u)].count(v) > 0; }
    void add(int u, int v) {
        if (adj[static_cast<std::size_t>(u)].insert(v).second) {
            adj[static_cast<std::size_t>(v)].insert(u);
            ++edges;
        }
    }
    void remove(int u, int v) {
        if (adj[static_cast<std::size_t>(u)].erase(v) > 0) {
            adj[static_cast<std::size_t>(v)].erase(u);
            --edges;
        }
    }
    Graph freeze() const {
        std::vector<Edge> out;
        for (int u = 0; u < size(); ++u) {
            for (int v : adj[static_cast<std::size_t>(u)]) {
                if (u < v) {
                    out.emplace_back(u, v);
                }
            }
        }
        return Graph(size(), std::move(out));
    }
};

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
    std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
    return items[d(rng)];
}

}  // namespace

Graph generate_extended_ba(const BAParams& params) {
    params.validate();
    const int m = params.m_attach;
    Rng rng(derive_seed(params.seed, "extended-ba"));
    GrowingGraph g;
    // each vertex appears (degree + 1) times
    std::vector<int> preference;
    for (int v = 0; v < m; ++v) {
        g.add_vertex();
    }
    for (int u = 0; u < m; ++u) {
        for (int v = u + 1; v < m; ++v) {
            g.add(u, v);
        }
    }
    for (int v = 0; v < m; ++v) {
        preference.insert(preference.end(), static_cast<std::size_t>(g.degree(v) + 1), v);
    }

    auto pick_preferential_excluding = [&](const std::set<int>& excluded, int self) -> int {
        std::vector<int> options;
        options.reserve(preference.size());
        for (int w : preference) {
            if (w != self && !excluded.count(w)) {
                options.push_back(w);
            }
        }
        return options.empty() ? -1 : pick(options, rng);
    };

    while (g.size() < params.n) {
        const double a = uniform01(rng);
        const int clique_degree = g.size() - 1;
        const int clique_size = g.size() * clique_degree / 2;
        if (a < params.p && g.edges <= clique_size - m) {
            std::vector<int> eligible;
            for (int v = 0; v < g.size(); ++v) {
                if (g.degree(v) < clique_degree) {
                    eligible.push_back(v);
                }
            }
            for (int i = 0; i < m && !eligible.empty(); ++i) {
                const int src = pick(eligible, rng);
                const int dst = pick_preferential_excluding(g.adj[static_cast<std::size_t>(src)], src);
                if (dst < 0) {
                    continue;
                }
                g.add(src, dst);
                preference.push_back(src);
                preference.push_back(dst);
                std::erase_if(eligible, [&](int v) { return g.degree(v) >= clique_degree; });
            }
        } else if (a >= params.p && a < params.p + params.q && g.edges >= m && g.edges < clique_size) {
            std::vector<int> eligible;
            for (int v = 0; v < g.size(); ++v) {
                if (g.degree(v) > 0 && g.degree(v) < clique_degree) {
                    eligible.push_back(v);
                }
            }
            for (int i = 0; i < m && !eligible.empty(); ++i) {
                const int node = pick(eligible, rng);
                std::vector<int> nbrs(g.adj[static_cast<std::size_t>(node)].begin(),
                                      g.adj[static_cast<std::size_t>(node)].end());
                const int src = pick(nbrs, rng);
                const int dst = pick_preferential_excluding(g.adj[static_cast<std::size_t>(node)], node);
                if (dst < 0) {
                    continue;
                }
                g.remove(node, src);
                g.add(node, dst);
                auto it = std::find(preference.begin(), preference.end(), src);
                if (it != preference.end()) {
                    preference.erase(it);
                }
                preference.push_back(dst);
                std::erase_if(eligible, [&](int v) { return g.degree(v) == 0 || g.degree(v) >= clique_degree; });
            }
        } else {
            std::set<int> targets;
            while (static_cast<int>(targets.size()) < std::min(m, g.size())) {
                targets.insert(pick(preference, rng));
            }
            const int v = g.size();
            g.add_vertex();
            for (int t : targets) {
                g.add(v, t);
                preference.push_back(t);
            }
            preference.insert(preference.end(), static_cast<std::size_t>(m + 1), v);
        }
    }
    return g.freeze();
}

Graph generate_rome_like(const RomeLikeParams& params) {
    if (params.core_n < 3) {
        throw std::invalid_argument("rome-like core needs at least 3 vertices");
    }
    Rng rng(derive_seed(params.seed, "rome-like"));
    const int n = params.core_n + params.leaves;
    GrowingGraph g;
    for (int v = 0; v < n; ++v) {
        g.add_vertex();
    }
    std::vector<int> order(static_cast<std::size_t>(params.core_n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < params.core_n; ++i) {
        g.add(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>((i + 1) % params.core_n)]);
    }
    const int max_core_edges = params.core_n * (params.core_n - 1) / 2;
    const int target = std::min(max_core_edges, params.core_n + params.chords);
    std::uniform_int_distribution<int> any(0, params.core_n - 1);
    while (g.edges < target) {
        int a = any(rng);
        int b = any(rng);
        if (a != b) {
            g.add(a, b);
        }
    }
    for (int leaf = params.core_n; leaf < n; ++leaf) {
        g.add(leaf, any(rng));
    }
    return g.freeze();
}

RomeLikeParams sample_rome_like_params(std::uint64_t seed) {
    Rng rng(derive_seed(seed, "rome-like-params"));
    RomeLikeParams p;
    p.seed = seed;
    p.core_n = std::uniform_int_distribution<int>(12, 90)(rng);
    const int room = 100 - p.core_n;
    p.leaves = std::uniform_int_distribution<int>(0, std::min(room, std::max(1, p.core_n / 5)))(rng);
    const double density = std::uniform_real_distribution<double>(0.2, 0.5)(rng);
    p.chords = std::max(3, static_cast<int>(density * p.core_n));
    p.chords = std::min(p.chords, 158 - p.core_n - p.leaves);
    return p;
}

BAParams sample_ba_params(std::uint64_t seed) {
    Rng rng(derive_seed(seed, "ba-params"));
    BAParams p;
    p.seed = seed;
    p.n = std::uniform_int_distribution<int>(50, 150)(rng);
    p.m_attach = std::uniform_int_distribution<int>(1, 3)(rng);
    p.p = std::uniform_real_distribution<double>(0.0, 0.1)(rng);
    p.q = std::uniform_real_distribution<double>(0.0, 0.2)(rng);
    return p;
}

Graph induced_subgraph(const Graph& g, std::span<const int> keep) {
    std::vector<int> sorted(keep.begin(), keep.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> remap(static_cast<std::size_t>(g.num_vertices()), -1);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        remap[static_cast<std::size_t>(sorted[i])] = static_cast<int>(i);
    }
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
        int a = remap[static_cast<std::size_t>(e.u)];
        int b = remap[static_cast<std::size_t>(e.v)];
        if (a >= 0 && b >= 0) {
            edges.emplace_back(a, b);
        }
    }
    return Graph(static_cast<int>(sorted.size()), std::move(edges));
}

Graph strip_leaves(const Graph& g) {
    const int n = g.num_vertices();
    std::vector<int> deg(static_cast<std::size_t>(n));
    std::vector<char> removed(static_cast<std::size_t>(n), 0);
    std::queue<int> pending;
    for (int v = 0; v < n; ++v) {
        deg[static_cast<std::size_t>(v)] = g.degree(v);
        if (deg[static_cast<std::size_t>(v)] <= 1) {
            pending.push(v);
        }
    }
    while (!pending.empty()) {
        int v = pending.front();
        pending.pop();
        if (removed[static_cast<std::size_t>(v)]) {
            continue;
        }
        removed[static_cast<std::size_t>(v)] = 1;
        for (int w : g.neighbors(v)) {
            if (!removed[static_cast<std::size_t>(w)] && --deg[static_cast<std::size_t>(w)] <= 1) {
                pending.push(w);
            }
        }
    }
    std::vector<int> keep;
    for (int v = 0; v < n; ++v) {
        if (!removed[static_cast<std::size_t>(v)]) {
            keep.push_back(v);
        }
    }
    return induced_subgraph(g, keep);
}

std::string to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::disconnected: return "disconnected";
        case RejectReason::planar: return "planar";
        case RejectReason::empty_after_stripping: return "empty_after_stripping";
    }
    return "unknown";
}

PreprocessResult preprocess(const Graph& g, const PlanarityFilterOptions& options) {
    if (!g.is_connected()) {
        return Rejected{RejectReason::disconnected};
    }
    Graph core = strip_leaves(g);
    if (core.num_vertices() == 0) {
        return Rejected{RejectReason::empty_after_stripping};
    }
    if (!judged_nonplanar(core, options)) {
        return Rejected{RejectReason::planar};
    }
    return core;
}

DatasetSplit split_by_fraction(std::span<const int> ids, double train_fraction, std::uint64_t seed) {
    const auto n = static_cast<int>(ids.size());
    const int train = static_cast<int>(train_fraction * n);
    return split_by_count(ids, train, n - train, seed);
}

DatasetSplit split_by_count(std::span<const int> ids, int train_count, int test_count, std::uint64_t seed) {
    std::vector<int> shuffled(ids.begin(), ids.end());
    Rng rng(derive_seed(seed, "dataset-split"));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    DatasetSplit split;
    split.seed = seed;
    const auto total = static_cast<int>(shuffled.size());
    const int train = std::clamp(train_count, 0, total);
    const int test = std::clamp(test_count, 0, total - train);
    split.train.assign(shuffled.begin(), shuffled.begin() + train);
    split.test.assign(shuffled.begin() + train, shuffled.begin() + train + test);
    return split;
}

}  // namespace crossrl
