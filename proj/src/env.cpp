#include "crossrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crossrl {

std::string to_string(Objective objective) {
    return objective == Objective::global ? "gc" : "lc";
}

Objective objective_from_string(const std::string& text) {
    if (text == "gc" || text == "global") {
        return Objective::global;
    }
    if (text == "lc" || text == "local") {
        return Objective::local;
    }
    throw std::invalid_argument("unknown objective '" + text + "' (expected gc or lc)");
}

int octant_of(Point center, Point other) {
    const double dx = other.x - center.x;
    const double dy = other.y - center.y;
    const double ax = std::abs(dx);
    const double ay = std::abs(dy);
    // exact comparisons so that dividing rays land deterministically
    if (dx > 0.0 && dy > 0.0) {
        return dx <= dy ? 0 : 1;
    }
    if (dx > 0.0 && dy == 0.0) {
        return 1;
    }
    if (dx > 0.0 && dy < 0.0) {
        return ay <= ax ? 2 : 3;
    }
    if (dx == 0.0 && dy < 0.0) {
        return 3;
    }
    if (dx < 0.0 && dy < 0.0) {
        return ax <= ay ? 4 : 5;
    }
    if (dx < 0.0 && dy == 0.0) {
        return 5;
    }
    if (dx < 0.0 && dy > 0.0) {
        return ay <= ax ? 6 : 7;
    }
    return 7;  // due north (dx == 0, dy > 0)
}

namespace {

int mod(int a, int m) {
    return ((a % m) + m) % m;
}

}  // namespace

int FrameTransform::frame_octant(int world_octant) const {
    return mirrored ? mod(rotation - world_octant, kOctants) : mod(world_octant - rotation, kOctants);
}

int FrameTransform::world_octant(int frame_octant) const {
    return mirrored ? mod(rotation - frame_octant, kOctants) : mod(frame_octant + rotation, kOctants);
}

int FrameTransform::world_direction(int action) const {
    return mirrored ? mod(2 * rotation + 2 - action, kActions) : mod(action + 2 * rotation, kActions);
}

int FrameTransform::frame_direction(int world_direction) const {
    return mirrored ? mod(2 * rotation + 2 - world_direction, kActions) : mod(world_direction - 2 * rotation, kActions);
}

FrameTransform choose_frame(std::span<const double, kOctants> crossings) {
    FrameTransform frame;
    int top = 0;
    for (int i = 1; i < kOctants; ++i) {
        if (crossings[static_cast<std::size_t>(i)] > crossings[static_cast<std::size_t>(top)]) {
            top = i;
        }
    }
    frame.rotation = top;
    int second = 1;
    for (int j = 2; j < kOctants; ++j) {
        if (crossings[static_cast<std::size_t>(mod(j + top, kOctants))] >
            crossings[static_cast<std::size_t>(mod(second + top, kOctants))]) {
            second = j;
        }
    }
    frame.mirrored = mod(kOctants - second, kOctants) < second;
    return frame;
}

Observation apply_frame(const Observation& world, const FrameTransform& frame) {
    Observation out = world;
    for (int block = 0; block < obs::octant_blocks; ++block) {
        const int base = block * kOctants;
        for (int j = 0; j < kOctants; ++j) {
            out[static_cast<std::size_t>(base + j)] = world[static_cast<std::size_t>(base + frame.world_octant(j))];
        }
    }
    return out;
}

FramedObservation normalize_frame(const Observation& world) {
    FramedObservation out;
    out.frame = choose_frame(std::span<const double, kOctants>(world.data() + obs::crossings, kOctants));
    out.values = apply_frame(world, out.frame);
    return out;
}

namespace {

// Distances carry float precision so that symmetric drawings whose
// coordinates differ by rounding map to identical observations.
double quantize(double x) {
    return static_cast<double>(static_cast<float>(x));
}

}  // namespace

Observation world_observation(const Drawing& d, const CrossingIndex& idx, const StructuralEmbedding& embedding, int v) {
    Observation o{};
    const Graph& g = d.graph();
    const int n = g.num_vertices();
    const int m = g.num_edges();
    const Point pv = d.position(v);

    std::array<int, kOctants> nbr_count{};
    std::array<int, kOctants> vtx_count{};
    std::array<double, kOctants> nbr_dist{};
    std::array<double, kOctants> vtx_dist{};
    std::array<double, kOctants> cr_sum{};
    std::array<int, kOctants> cr_max{};
    nbr_dist.fill(std::numeric_limits<double>::infinity());
    vtx_dist.fill(std::numeric_limits<double>::infinity());

    double farthest = 0.0;
    for (int w = 0; w < n; ++w) {
        if (w == v) {
            continue;
        }
        const Point pw = d.position(w);
        const auto k = static_cast<std::size_t>(octant_of(pv, pw));
        const double dist = distance(pv, pw);
        ++vtx_count[k];
        vtx_dist[k] = std::min(vtx_dist[k], dist);
        farthest = std::max(farthest, dist);
    }
    const auto nbrs = g.neighbors(v);
    const auto inc = g.incident_edges(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const Point pu = d.position(nbrs[i]);
        const auto k = static_cast<std::size_t>(octant_of(pv, pu));
        ++nbr_count[k];
        nbr_dist[k] = std::min(nbr_dist[k], distance(pv, pu));
        const int c = idx.crossings_on(inc[i]);
        cr_sum[k] += c;
        cr_max[k] = std::max(cr_max[k], c);
    }

    const double deg = static_cast<double>(nbrs.size());
    const double max_cr = *std::max_element(cr_sum.begin(), cr_sum.end());
    const int lcr = idx.local_crossing_number();
    const double lcr_norm = lcr > 0 ? lcr : 1.0;
    for (int k = 0; k < kOctants; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        o[static_cast<std::size_t>(obs::neighbors + k)] = deg > 0 ? nbr_count[uk] / deg : 0.0;
        o[static_cast<std::size_t>(obs::vertices + k)] = static_cast<double>(vtx_count[uk]) / n;
        o[static_cast<std::size_t>(obs::closest_neighbor + k)] =
            nbr_count[uk] > 0 && farthest > 0.0 ? quantize(nbr_dist[uk] / farthest) : 0.0;
        o[static_cast<std::size_t>(obs::closest_vertex + k)] =
            vtx_count[uk] > 0 && farthest > 0.0 ? quantize(vtx_dist[uk] / farthest) : 0.0;
        o[static_cast<std::size_t>(obs::crossings + k)] = max_cr > 0.0 ? cr_sum[uk] / max_cr : 0.0;
        o[static_cast<std::size_t>(obs::local_crossings + k)] = cr_max[uk] / lcr_norm;
    }
    const double pairs = 0.5 * static_cast<double>(m) * (m - 1);
    o[obs::global_cr] = pairs > 0.0 ? static_cast<double>(idx.total()) / pairs : 0.0;
    o[obs::local_cr] = m > 1 ? static_cast<double>(lcr) / (m - 1) : 0.0;
    if (v < static_cast<int>(embedding.rows.size())) {
        for (int f = 0; f < kEmbeddingDim; ++f) {
            o[static_cast<std::size_t>(obs::embedding + f)] = embedding[v][static_cast<std::size_t>(f)];
        }
    }
    return o;
}

FramedObservation build_observation(const Drawing& d, const CrossingIndex& idx, const StructuralEmbedding& embedding,
                                    int v) {
    return normalize_frame(world_observation(d, idx, embedding, v));
}

double reward_gc(long cr_before, long cr_after) {
    if (cr_before != cr_after) {
        return static_cast<double>(cr_before - cr_after);
    }
    return -0.001;
}

double reward_lc(const CrossingSummary& before, const CrossingSummary& after, int m) {
    if (m < 1) {
        throw std::invalid_argument("reward_lc needs m >= 1");
    }
    const double cr_term = static_cast<double>(before.cr - after.cr) / m;
    if (before.lcr != after.lcr) {
        return 10.0 * (before.lcr - after.lcr) + cr_term;
    }
    if (before.mstar != after.mstar || before.cr != after.cr) {
        return 0.1 * (before.mstar - after.mstar) + cr_term;
    }
    return -0.001;
}

double weight_gc(const Graph& g, const CrossingIndex& idx, int v) {
    const int deg = g.degree(v);
    if (deg == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (int e : g.incident_edges(v)) {
        sum += idx.crossings_on(e);
    }
    return sum / deg;
}

std::vector<int> lc_eligible_vertices(const Graph& g, const CrossingIndex& idx) {
    const int k = idx.local_crossing_number();
    std::vector<char> mark(static_cast<std::size_t>(g.num_vertices()), 0);
    if (k == 0) {
        return {};
    }
    for (int e = 0; e < g.num_edges(); ++e) {
        if (idx.crossings_on(e) != k) {
            continue;
        }
        mark[static_cast<std::size_t>(g.edge(e).u)] = 1;
        mark[static_cast<std::size_t>(g.edge(e).v)] = 1;
        for (int f : idx.partners(e)) {
            mark[static_cast<std::size_t>(g.edge(f).u)] = 1;
            mark[static_cast<std::size_t>(g.edge(f).v)] = 1;
        }
    }
    std::vector<int> out;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (mark[static_cast<std::size_t>(v)]) {
            out.push_back(v);
        }
    }
    return out;
}

int select_vertex_gc(const Graph& g, const CrossingIndex& idx, Rng& rng) {
    if (idx.total() == 0) {
        throw std::logic_error("select_vertex_gc: drawing has no crossings");
    }
    std::vector<double> weights(static_cast<std::size_t>(g.num_vertices()));
    for (int v = 0; v < g.num_vertices(); ++v) {
        weights[static_cast<std::size_t>(v)] = weight_gc(g, idx, v);
    }
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    return pick(rng);
}

int select_vertex_lc(const Graph& g, const CrossingIndex& idx, Rng& rng) {
    if (idx.local_crossing_number() == 0) {
        throw std::logic_error("select_vertex_lc: drawing has no crossings");
    }
    const std::vector<int> eligible = lc_eligible_vertices(g, idx);
    std::vector<double> weights;
    weights.reserve(eligible.size());
    for (int v : eligible) {
        weights.push_back(1.0 / g.degree(v));
    }
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    return eligible[pick(rng)];
}

Environment::Environment(const Graph& graph, Drawing initial, const StructuralEmbedding& embedding, EnvConfig config,
                         std::uint64_t seed)
    : graph_(&graph),
      embedding_(&embedding),
      config_(config),
      rng_(derive_seed(seed, "environment")),
      drawing_(std::move(initial)) {
    ensure_general_position(drawing_, rng_);
    index_ = build_index(drawing_);
    best_drawing_ = drawing_;
    best_index_ = index_;
}

long Environment::objective_of(const CrossingIndex& idx) const {
    return config_.objective == Objective::global ? idx.total() : idx.local_crossing_number();
}

bool Environment::done() const {
    return objective() == 0 || steps_ >= config_.step_cap;
}

int Environment::select_vertex() {
    return config_.objective == Objective::global ? select_vertex_gc(*graph_, index_, rng_)
                                                  : select_vertex_lc(*graph_, index_, rng_);
}

FramedObservation Environment::observe(int v) const {
    return build_observation(drawing_, index_, *embedding_, v);
}

StepResult Environment::apply_action(int v, int action, const FrameTransform& frame) {
    if (action < 0 || action >= kActions) {
        throw std::out_of_range("action index must be in 0..15");
    }
    StepResult result;
    result.vertex = v;
    result.action = action;
    result.world_direction = frame.world_direction(action);

    const Point dir = compass_direction(result.world_direction);
    const Point from = drawing_.position(v);
    double travel = 1.0;
    if (auto hit = first_ray_hit(drawing_, v, dir)) {
        const double eps = std::uniform_real_distribution<double>(config_.eps_min, config_.eps_max)(rng_);
        travel = *hit * (1.0 + eps);
    }

    const CrossingSummary before = CrossingSummary::of(index_);
    move_vertex(drawing_, index_, v, from + travel * dir, rng_);
    const CrossingSummary after = CrossingSummary::of(index_);
    result.displacement = drawing_.position(v) - from;
    result.reward = config_.objective == Objective::global ? reward_gc(before.cr, after.cr)
                                                           : reward_lc(before, after, graph_->num_edges());

    ++steps_;
    if (objective() < best_objective()) {
        best_drawing_ = drawing_;
        best_index_ = index_;
        since_improvement_ = 0;
        result.improved = true;
    } else if (++since_improvement_ >= config_.reset_patience) {
        drawing_ = best_drawing_;
        index_ = best_index_;
        since_improvement_ = 0;
        ++resets_;
        result.reset_to_best = true;
    }
    result.done = done();
    return result;
}

StepResult Environment::step(const ActionChooser& choose) {
    const int v = select_vertex();
    const FramedObservation o = observe(v);
    return apply_action(v, choose(o.values), o.frame);
}

int Environment::run(const ActionChooser& choose) {
    int taken = 0;
    while (!done()) {
        step(choose);
        ++taken;
    }
    return taken;
}

}  // namespace crossrl
