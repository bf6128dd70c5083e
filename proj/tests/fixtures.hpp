#pragma once

// Constructed drawings shared by the unit tests and the acceptance binary.

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "crossrl/env.hpp"
#include "crossrl/geometry.hpp"
#include "crossrl/graph.hpp"

namespace testing_support {

/// Star-like drawing around vertex 0 reproducing the Fig. 1 counts:
/// neighbors per octant (1,2,0,0,2,1,0,4) and crossings on the edges of
/// vertex 0 per octant (1,2,0,0,1,3,0,10). Each crossing is a short edge
/// between two extra vertices laid across one of vertex 0's edges.
struct FigureOneDrawing {
    std::unique_ptr<crossrl::Graph> graph;
    std::unique_ptr<crossrl::Drawing> drawing;

    static constexpr std::array<int, 8> neighbors{1, 2, 0, 0, 2, 1, 0, 4};
    static constexpr std::array<int, 8> crossings{1, 2, 0, 0, 1, 3, 0, 10};
    /// Max crossings on a single edge per octant under this construction.
    static constexpr std::array<int, 8> local{1, 2, 0, 0, 1, 3, 0, 4};

    FigureOneDrawing() {
        using crossrl::Point;
        // crossings carried by each neighbor edge, per octant
        const std::vector<std::vector<int>> per_edge{{1}, {2, 0}, {}, {}, {1, 0}, {3}, {}, {4, 3, 2, 1}};
        const double pi = 3.14159265358979323846;
        std::vector<Point> pos{{0.0, 0.0}};
        std::vector<crossrl::Edge> edges;
        struct Pending {
            double bearing;
            int count;
        };
        std::vector<Pending> crossers;
        for (int k = 0; k < 8; ++k) {
            const auto& list = per_edge[static_cast<std::size_t>(k)];
            const int c = static_cast<int>(list.size());
            for (int i = 0; i < c; ++i) {
                const double spread = c == 1 ? 0.0 : (c == 2 ? (i == 0 ? -8.0 : 8.0) : -15.0 + 10.0 * i);
                const double bearing = (45.0 * k + 22.5 + spread) * pi / 180.0;
                const int u = static_cast<int>(pos.size());
                pos.push_back({20.0 * std::sin(bearing), 20.0 * std::cos(bearing)});
                edges.emplace_back(0, u);
                crossers.push_back({bearing, list[static_cast<std::size_t>(i)]});
            }
        }
        for (const auto& cr : crossers) {
            const Point dir{std::sin(cr.bearing), std::cos(cr.bearing)};
            const Point perp{dir.y, -dir.x};
            for (int j = 0; j < cr.count; ++j) {
                const Point mid = (3.0 + 2.0 * j) * dir;
                const int a = static_cast<int>(pos.size());
                pos.push_back(mid + 0.2 * perp);
                pos.push_back(mid - 0.2 * perp);
                edges.emplace_back(a, a + 1);
            }
        }
        graph = std::make_unique<crossrl::Graph>(static_cast<int>(pos.size()), edges);
        drawing = std::make_unique<crossrl::Drawing>(*graph, pos);
    }
};

/// Clockwise rotation by `eighths` * 45 degrees about `center`, optionally
/// followed by a reflection across the vertical line through `center`.
inline crossrl::Point symmetry(crossrl::Point p, crossrl::Point center, int eighths, bool mirror) {
    static const double h = std::sqrt(0.5);
    static const double cs[8] = {1, h, 0, -h, -1, -h, 0, h};
    static const double sn[8] = {0, h, 1, h, 0, -h, -1, -h};
    const double c = cs[eighths % 8], s = sn[eighths % 8];
    const double dx = p.x - center.x, dy = p.y - center.y;
    double rx = dx * c + dy * s;
    const double ry = -dx * s + dy * c;
    if (mirror) rx = -rx;
    return {center.x + rx, center.y + ry};
}

/// True when the frame choice for these crossings does not depend on a
/// tie-break: unique maximum, unique second maximum, and the second
/// maximum not diametrically opposite the first.
inline bool decisive_frame(const crossrl::Observation& world) {
    const double* c = world.data() + crossrl::obs::crossings;
    int top = 0;
    for (int i = 1; i < 8; ++i)
        if (c[i] > c[top]) top = i;
    for (int i = 0; i < 8; ++i)
        if (i != top && c[i] == c[top]) return false;
    int second = -1;
    for (int j = 1; j < 8; ++j) {
        const int w = (j + top) % 8;
        if (second < 0 || c[w] > c[(second + top) % 8]) second = j;
    }
    for (int j = 1; j < 8; ++j)
        if (j != second && c[(j + top) % 8] == c[(second + top) % 8]) return false;
    return second != 4;
}

}  // namespace testing_support
