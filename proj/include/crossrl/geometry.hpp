#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crossrl/graph.hpp"
#include "crossrl/rng.hpp"

namespace crossrl {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point, Point) = default;
};

inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Distance from p to the closed segment [a, b].
double point_segment_distance(Point p, Point a, Point b);

/// Orientation threshold for the strict crossing test.
inline constexpr double kOrientationEpsilon = 1e-12;
/// Vertices closer than this to another vertex or a non-incident edge are perturbed.
inline constexpr double kDegeneracyTolerance = 1e-9;
inline constexpr double kPerturbationMagnitude = 1e-6;
/// Ray hits closer than this to the ray origin are ignored.
inline constexpr double kMinRayDistance = 1e-9;

/// True iff the open segments p1p2 and q1q2 meet in exactly one interior
/// point. Shared endpoints, touching and collinear overlap are not crossings.
bool segments_cross(Point p1, Point p2, Point q1, Point q2);

/// Straight-line drawing: one position per vertex of a graph the caller keeps alive.
class Drawing {
public:
    Drawing() = default;
    Drawing(const Graph& graph, std::vector<Point> positions);

    const Graph& graph() const { return *graph_; }
    int num_vertices() const { return static_cast<int>(positions_.size()); }

    Point position(int v) const { return positions_[static_cast<std::size_t>(v)]; }
    void set_position(int v, Point p) { positions_[static_cast<std::size_t>(v)] = p; }
    std::span<const Point> positions() const { return positions_; }

    /// Endpoint positions of edge e.
    std::pair<Point, Point> segment(int e) const;

    double average_edge_length() const;
    /// Length of the bounding-box diagonal.
    double bounding_diagonal() const;

private:
    const Graph* graph_ = nullptr;
    std::vector<Point> positions_;
};

/// Per-edge crossing partners of a drawing; totals are derived from the sets.
class CrossingIndex {
public:
    CrossingIndex() = default;
    explicit CrossingIndex(int edge_count) : partners_(static_cast<std::size_t>(edge_count)) {}

    int edge_count() const { return static_cast<int>(partners_.size()); }
    /// cr(Γ, e)
    int crossings_on(int e) const { return static_cast<int>(partners_[static_cast<std::size_t>(e)].size()); }
    std::span<const int> partners(int e) const { return partners_[static_cast<std::size_t>(e)]; }
    /// cr(Γ)
    long total() const { return total_; }
    /// lcr(Γ)
    int local_crossing_number() const;
    /// Number of edges carrying exactly lcr(Γ) crossings.
    int edges_at_local_crossing_number() const;

    void add_crossing(int e, int f);
    void clear_edge(int e);

    /// Compares per-edge partner sets, ignoring their storage order.
    bool same_crossings(const CrossingIndex& other) const;

private:
    std::vector<std::vector<int>> partners_;
    long total_ = 0;
};

/// Exhaustive test over all pairs of non-adjacent edges.
CrossingIndex build_index(const Drawing& d);

inline int local_crossing_number(const CrossingIndex& idx) { return idx.local_crossing_number(); }

/// True when v sits within tolerance of another vertex or a non-incident
/// edge, or one of v's edges passes within tolerance of another vertex.
bool vertex_is_degenerate(const Drawing& d, int v);

/// Moves v to new_pos (perturbing it while degenerate) and retests only
/// the pairs that involve edges incident to v.
void move_vertex(Drawing& d, CrossingIndex& idx, int v, Point new_pos, Rng& rng);

/// Perturbs every degenerate vertex until the drawing is in general position.
void ensure_general_position(Drawing& d, Rng& rng);

/// Unit direction of compass index k (bearing k * 22.5 degrees clockwise
/// from north, y axis pointing up).
Point compass_direction(int k);

/// Smallest t > kMinRayDistance such that position(v) + t * dir lies on an
/// edge segment of the drawing; nullopt if the ray hits nothing.
std::optional<double> first_ray_hit(const Drawing& d, int v, Point dir);
inline std::optional<double> first_ray_hit(const Drawing& d, int v, int compass_index) {
    return first_ray_hit(d, v, compass_direction(compass_index));
}

/// Translates to the centroid and scales so the average edge length is 1.
void normalize_scale(Drawing& d);

/// {"vertex_id": [x, y], ...}
std::string drawing_to_json(const Drawing& d);
Drawing drawing_from_json(const Graph& g, const std::string& text);
void save_drawing(const Drawing& d, const std::filesystem::path& path);
Drawing load_drawing(const Graph& g, const std::filesystem::path& path);

}  // namespace crossrl
