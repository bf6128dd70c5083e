#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crossrl/embedding.hpp"
#include "crossrl/geometry.hpp"
#include "crossrl/graph.hpp"
#include "crossrl/rng.hpp"

namespace crossrl {

enum class Objective { global, local };

std::string to_string(Objective objective);
Objective objective_from_string(const std::string& text);

inline constexpr int kOctants = 8;
inline constexpr int kActions = 16;
inline constexpr int kObservationSize = 54;

using Observation = std::array<double, kObservationSize>;

/// Offsets of the blocks inside an Observation.
namespace obs {
inline constexpr int neighbors = 0;
inline constexpr int vertices = 8;
inline constexpr int closest_neighbor = 16;
inline constexpr int closest_vertex = 24;
inline constexpr int crossings = 32;
inline constexpr int local_crossings = 40;
inline constexpr int global_cr = 48;
inline constexpr int local_cr = 49;
inline constexpr int embedding = 50;
inline constexpr int octant_blocks = 6;
}  // namespace obs

/// Octant 0..7 (I..VIII) of `other` around `center`. Octant I starts at the
/// upward ray and octants proceed clockwise; a point on a dividing ray
/// belongs to the clockwise predecessor octant, so due north is octant VIII.
int octant_of(Point center, Point other);

/// Rotation by whole octants followed by an optional mirror that keeps
/// octant I in place. Maps world octants/directions to the agent's frame.
struct FrameTransform {
    int rotation = 0;
    bool mirrored = false;

    int frame_octant(int world_octant) const;
    int world_octant(int frame_octant) const;
    /// World compass index (0..15) of action `action` given in the frame.
    int world_direction(int action) const;
    int frame_direction(int world_direction) const;

    friend bool operator==(const FrameTransform&, const FrameTransform&) = default;
};

/// Rotation puts the most-crossed octant first (smallest index on ties);
/// the mirror is applied iff it gives the second-most-crossed octant a
/// smaller index. All-zero input yields the identity.
FrameTransform choose_frame(std::span<const double, kOctants> crossings);

/// Reorders every octant-indexed block; the scalar tail is untouched.
Observation apply_frame(const Observation& world, const FrameTransform& frame);

struct FramedObservation {
    Observation values{};
    FrameTransform frame;
};

FramedObservation normalize_frame(const Observation& world);

/// Observation of vertex v in world orientation (before frame normalization).
Observation world_observation(const Drawing& d, const CrossingIndex& idx, const StructuralEmbedding& embedding, int v);

FramedObservation build_observation(const Drawing& d, const CrossingIndex& idx, const StructuralEmbedding& embedding,
                                    int v);

double reward_gc(long cr_before, long cr_after);

struct CrossingSummary {
    long cr = 0;
    int lcr = 0;
    /// Number of edges carrying exactly lcr crossings.
    int mstar = 0;

    static CrossingSummary of(const CrossingIndex& idx) {
        return {idx.total(), idx.local_crossing_number(), idx.edges_at_local_crossing_number()};
    }
};

double reward_lc(const CrossingSummary& before, const CrossingSummary& after, int m);

/// Σ_{e ∈ inc(v)} cr(Γ, e) / deg(v)
double weight_gc(const Graph& g, const CrossingIndex& idx, int v);

/// Vertices with an incident edge carrying lcr crossings or crossing such an edge.
std::vector<int> lc_eligible_vertices(const Graph& g, const CrossingIndex& idx);

/// Throws std::logic_error on a crossing-free drawing.
int select_vertex_gc(const Graph& g, const CrossingIndex& idx, Rng& rng);
int select_vertex_lc(const Graph& g, const CrossingIndex& idx, Rng& rng);

struct EnvConfig {
    Objective objective = Objective::global;
    int step_cap = 2000;
    int reset_patience = 400;
    double eps_min = 0.01;
    double eps_max = 0.1;
};

struct StepResult {
    int vertex = -1;
    int action = -1;
    int world_direction = -1;
    Point displacement;
    double reward = 0.0;
    bool improved = false;
    bool reset_to_best = false;
    bool done = false;
};

/// One graph as an episodic environment. Owns its drawing; never shared.
class Environment {
public:
    /// Maps an observation to an action index in the observation's frame.
    using ActionChooser = std::function<int(const Observation&)>;

    Environment(const Graph& graph, Drawing initial, const StructuralEmbedding& embedding, EnvConfig config,
                std::uint64_t seed);

    const EnvConfig& config() const { return config_; }
    const Graph& graph() const { return *graph_; }
    const Drawing& drawing() const { return drawing_; }
    const CrossingIndex& index() const { return index_; }
    const Drawing& best_drawing() const { return best_drawing_; }
    const CrossingIndex& best_index() const { return best_index_; }

    long objective() const { return objective_of(index_); }
    long best_objective() const { return objective_of(best_index_); }
    int steps() const { return steps_; }
    int steps_since_improvement() const { return since_improvement_; }
    int resets() const { return resets_; }
    bool done() const;

    int select_vertex();
    FramedObservation observe(int v) const;
    /// Moves v in the world direction decoded from `action` through `frame`.
    StepResult apply_action(int v, int action, const FrameTransform& frame);
    /// Select vertex, observe, choose, apply.
    StepResult step(const ActionChooser& choose);
    /// Steps until done(); returns the number of steps taken.
    int run(const ActionChooser& choose);

    Rng& rng() { return rng_; }

private:
    long objective_of(const CrossingIndex& idx) const;

    const Graph* graph_;
    const StructuralEmbedding* embedding_;
    EnvConfig config_;
    Rng rng_;
    Drawing drawing_;
    CrossingIndex index_;
    Drawing best_drawing_;
    CrossingIndex best_index_;
    int steps_ = 0;
    int since_improvement_ = 0;
    int resets_ = 0;
};

}  // namespace crossrl
