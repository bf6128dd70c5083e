#pragma once

// Helpers shared by the unit tests and the acceptance binary. The crossing
// oracle here is written independently of the library predicate.

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "crossrl/geometry.hpp"
#include "crossrl/graph.hpp"
#include "crossrl/rng.hpp"

namespace testing_support {

using crossrl::Drawing;
using crossrl::Edge;
using crossrl::Graph;
using crossrl::Point;

inline Graph make_graph(int n, std::initializer_list<std::pair<int, int>> edges) {
    std::vector<Edge> es;
    for (auto [a, b] : edges) es.emplace_back(a, b);
    return Graph(n, std::move(es));
}

inline Graph complete_graph(int n) {
    std::vector<Edge> es;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) es.emplace_back(i, j);
    return Graph(n, std::move(es));
}

inline Graph cycle_graph(int n) {
    std::vector<Edge> es;
    for (int i = 0; i < n; ++i) es.emplace_back(i, (i + 1) % n);
    return Graph(n, std::move(es));
}

inline Graph path_graph(int n) {
    std::vector<Edge> es;
    for (int i = 0; i + 1 < n; ++i) es.emplace_back(i, i + 1);
    return Graph(n, std::move(es));
}

/// Erdos-Renyi style graph with a spanning path so it is connected.
inline Graph random_connected_graph(int n, double p, std::mt19937_64& rng) {
    std::set<Edge> es;
    for (int i = 0; i + 1 < n; ++i) es.emplace(i, i + 1);
    std::bernoulli_distribution coin(p);
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j)
            if (coin(rng)) es.emplace(i, j);
    return Graph(n, std::vector<Edge>(es.begin(), es.end()));
}

inline std::vector<Point> random_positions(int n, std::mt19937_64& rng, double span = 10.0) {
    std::uniform_real_distribution<double> u(0.0, span);
    std::vector<Point> ps;
    for (int i = 0; i < n; ++i) ps.push_back({u(rng), u(rng)});
    return ps;
}

inline std::vector<Point> convex_positions(int n, double radius = 1.0) {
    std::vector<Point> ps;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / n;
        ps.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    return ps;
}

// Orientation in long double with a plain parametric test.
inline bool oracle_cross(Point a, Point b, Point c, Point d) {
    auto orient = [](Point p, Point q, Point r) {
        const long double v = static_cast<long double>(q.x - p.x) * (r.y - p.y) -
                              static_cast<long double>(q.y - p.y) * (r.x - p.x);
        return v > 0 ? 1 : (v < 0 ? -1 : 0);
    };
    const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

/// Per-edge crossing counts by brute force.
inline std::vector<int> oracle_counts(const Drawing& d) {
    const Graph& g = d.graph();
    std::vector<int> counts(static_cast<std::size_t>(g.num_edges()), 0);
    for (int e = 0; e < g.num_edges(); ++e) {
        for (int f = e + 1; f < g.num_edges(); ++f) {
            const Edge& a = g.edge(e);
            const Edge& b = g.edge(f);
            if (a.u == b.u || a.u == b.v || a.v == b.u || a.v == b.v) continue;
            if (oracle_cross(d.position(a.u), d.position(a.v), d.position(b.u), d.position(b.v))) {
                ++counts[static_cast<std::size_t>(e)];
                ++counts[static_cast<std::size_t>(f)];
            }
        }
    }
    return counts;
}

inline long oracle_total(const std::vector<int>& counts) {
    long s = 0;
    for (int c : counts) s += c;
    return s / 2;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("crossrl-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace testing_support
