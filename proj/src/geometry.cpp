#include "crossrl/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace crossrl {

double point_segment_distance(Point p, Point a, Point b) {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) {
        return distance(p, a);
    }
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

namespace {

int orientation(Point a, Point b, Point c) {
    const double o = cross(b - a, c - a);
    if (o > kOrientationEpsilon) {
        return 1;
    }
    if (o < -kOrientationEpsilon) {
        return -1;
    }
    return 0;
}

}  // namespace

bool segments_cross(Point p1, Point p2, Point q1, Point q2) {
    if (p1 == q1 || p1 == q2 || p2 == q1 || p2 == q2) {
        return false;
    }
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

Drawing::Drawing(const Graph& graph, std::vector<Point> positions)
    : graph_(&graph), positions_(std::move(positions)) {
    if (static_cast<int>(positions_.size()) != graph.num_vertices()) {
        throw std::invalid_argument("drawing needs one position per vertex");
    }
    for (const Point& p : positions_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw std::invalid_argument("drawing positions must be finite");
        }
    }
}

std::pair<Point, Point> Drawing::segment(int e) const {
    const Edge& edge = graph_->edge(e);
    return {position(edge.u), position(edge.v)};
}

double Drawing::average_edge_length() const {
    const int m = graph_->num_edges();
    if (m == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (int e = 0; e < m; ++e) {
        auto [a, b] = segment(e);
        sum += distance(a, b);
    }
    return sum / m;
}

double Drawing::bounding_diagonal() const {
    if (positions_.empty()) {
        return 0.0;
    }
    double x0 = positions_[0].x, x1 = x0, y0 = positions_[0].y, y1 = y0;
    for (const Point& p : positions_) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    return std::hypot(x1 - x0, y1 - y0);
}

int CrossingIndex::local_crossing_number() const {
    int best = 0;
    for (const auto& p : partners_) {
        best = std::max(best, static_cast<int>(p.size()));
    }
    return best;
}

int CrossingIndex::edges_at_local_crossing_number() const {
    const int k = local_crossing_number();
    return static_cast<int>(std::count_if(partners_.begin(), partners_.end(),
                                          [k](const auto& p) { return static_cast<int>(p.size()) == k; }));
}

void CrossingIndex::add_crossing(int e, int f) {
    partners_[static_cast<std::size_t>(e)].push_back(f);
    partners_[static_cast<std::size_t>(f)].push_back(e);
    ++total_;
}

void CrossingIndex::clear_edge(int e) {
    auto& mine = partners_[static_cast<std::size_t>(e)];
    for (int f : mine) {
        auto& theirs = partners_[static_cast<std::size_t>(f)];
        auto it = std::find(theirs.begin(), theirs.end(), e);
        *it = theirs.back();
        theirs.pop_back();
        --total_;
    }
    mine.clear();
}

bool CrossingIndex::same_crossings(const CrossingIndex& other) const {
    if (partners_.size() != other.partners_.size() || total_ != other.total_) {
        return false;
    }
    for (std::size_t e = 0; e < partners_.size(); ++e) {
        auto a = partners_[e];
        auto b = other.partners_[e];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) {
            return false;
        }
    }
    return true;
}

CrossingIndex build_index(const Drawing& d) {
    const Graph& g = d.graph();
    const int m = g.num_edges();
    CrossingIndex idx(m);
    for (int e = 0; e < m; ++e) {
        auto [a, b] = d.segment(e);
        for (int f = e + 1; f < m; ++f) {
            if (g.edge(e).shares_endpoint(g.edge(f))) {
                continue;
            }
            auto [c, dd] = d.segment(f);
            if (segments_cross(a, b, c, dd)) {
                idx.add_crossing(e, f);
            }
        }
    }
    return idx;
}

bool vertex_is_degenerate(const Drawing& d, int v) {
    const Graph& g = d.graph();
    const Point p = d.position(v);
    for (int w = 0; w < d.num_vertices(); ++w) {
        if (w != v && distance(p, d.position(w)) < kDegeneracyTolerance) {
            return true;
        }
    }
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& edge = g.edge(e);
        if (edge.touches(v)) {
            // other vertices must stay off v's own edges
            const Point q = d.position(edge.other(v));
            for (int w = 0; w < d.num_vertices(); ++w) {
                if (!edge.touches(w) && point_segment_distance(d.position(w), p, q) < kDegeneracyTolerance) {
                    return true;
                }
            }
            continue;
        }
        auto [a, b] = d.segment(e);
        if (point_segment_distance(p, a, b) < kDegeneracyTolerance) {
            return true;
        }
    }
    return false;
}

namespace {

void perturb_until_general(Drawing& d, int v, Rng& rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    while (vertex_is_degenerate(d, v)) {
        const double a = angle(rng);
        d.set_position(v, d.position(v) + kPerturbationMagnitude * Point{std::cos(a), std::sin(a)});
    }
}

}  // namespace

void move_vertex(Drawing& d, CrossingIndex& idx, int v, Point new_pos, Rng& rng) {
    if (!std::isfinite(new_pos.x) || !std::isfinite(new_pos.y)) {
        throw std::invalid_argument("move_vertex: non-finite target position");
    }
    d.set_position(v, new_pos);
    perturb_until_general(d, v, rng);

    const Graph& g = d.graph();
    const auto incident = g.incident_edges(v);
    for (int e : incident) {
        idx.clear_edge(e);
    }
    for (int e : incident) {
        const Edge& ee = g.edge(e);
        auto [a, b] = d.segment(e);
        for (int f = 0; f < g.num_edges(); ++f) {
            const Edge& ff = g.edge(f);
            // pairs of v's own edges share v and never cross
            if (ee.shares_endpoint(ff)) {
                continue;
            }
            auto [c, dd] = d.segment(f);
            if (segments_cross(a, b, c, dd)) {
                idx.add_crossing(e, f);
            }
        }
    }
}

void ensure_general_position(Drawing& d, Rng& rng) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < d.num_vertices(); ++v) {
            if (vertex_is_degenerate(d, v)) {
                perturb_until_general(d, v, rng);
                changed = true;
            }
        }
    }
}

Point compass_direction(int k) {
    k = ((k % 16) + 16) % 16;
    // exact table for the axis and diagonal directions
    static const double h = std::sqrt(0.5);
    static const double s = std::sin(std::numbers::pi / 8.0);
    static const double c = std::cos(std::numbers::pi / 8.0);
    static const Point table[16] = {
        {0, 1},   {s, c},   {h, h},   {c, s},   {1, 0},   {c, -s},  {h, -h},  {s, -c},
        {0, -1},  {-s, -c}, {-h, -h}, {-c, -s}, {-1, 0},  {-c, s},  {-h, h},  {-s, c},
    };
    return table[k];
}

std::optional<double> first_ray_hit(const Drawing& d, int v, Point dir) {
    const Point origin = d.position(v);
    std::optional<double> best;
    const Graph& g = d.graph();
    for (int e = 0; e < g.num_edges(); ++e) {
        auto [a, b] = d.segment(e);
        const Point ab = b - a;
        const double denom = cross(dir, ab);
        if (denom == 0.0) {
            continue;  // parallel, measure zero under general position
        }
        const Point ao = a - origin;
        const double t = cross(ao, ab) / denom;
        const double s = cross(ao, dir) / denom;
        if (s < 0.0 || s > 1.0 || t < kMinRayDistance) {
            continue;
        }
        if (!best || t < *best) {
            best = t;
        }
    }
    return best;
}

void normalize_scale(Drawing& d) {
    const int n = d.num_vertices();
    if (n == 0) {
        return;
    }
    Point centroid{};
    for (const Point& p : d.positions()) {
        centroid = centroid + p;
    }
    centroid = (1.0 / n) * centroid;
    const double avg = d.average_edge_length();
    const double scale = avg > 0.0 ? 1.0 / avg : 1.0;
    for (int v = 0; v < n; ++v) {
        d.set_position(v, scale * (d.position(v) - centroid));
    }
}

std::string drawing_to_json(const Drawing& d) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (int v = 0; v < d.num_vertices(); ++v) {
        j[std::to_string(v)] = {d.position(v).x, d.position(v).y};
    }
    return j.dump(1);
}

Drawing drawing_from_json(const Graph& g, const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<Point> pos(static_cast<std::size_t>(g.num_vertices()));
    std::vector<char> seen(pos.size(), 0);
    for (const auto& [key, value] : j.items()) {
        const int v = std::stoi(key);
        if (v < 0 || v >= g.num_vertices() || !value.is_array() || value.size() != 2) {
            throw std::runtime_error("drawing JSON: bad entry for vertex " + key);
        }
        pos[static_cast<std::size_t>(v)] = {value[0].get<double>(), value[1].get<double>()};
        seen[static_cast<std::size_t>(v)] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw std::runtime_error("drawing JSON: missing vertex positions");
    }
    return Drawing(g, std::move(pos));
}

void save_drawing(const Drawing& d, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << drawing_to_json(d) << '\n';
}

Drawing load_drawing(const Graph& g, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return drawing_from_json(g, ss.str());
}

}  // namespace crossrl
