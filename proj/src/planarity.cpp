#include "crossrl/geometry.hpp"
#include "crossrl/graph.hpp"
#include "crossrl/layout.hpp"

namespace crossrl {

bool judged_nonplanar(const Graph& g, const PlanarityFilterOptions& options) {
    const int n = g.num_vertices();
    const int m = g.num_edges();
    if (n >= 3 && m > 3 * n - 6) {
        return true;
    }
    Drawing d = layout_kamada_kawai(g, options.seed);
    CrossingIndex idx = build_index(d);
    if (idx.total() == 0) {
        return false;
    }
    VertexMovementOptions vm;
    vm.samples_per_vertex = options.samples_per_vertex;
    vm.sweeps = options.vm_sweeps;
    vm.seed = derive_seed(options.seed, "planarity-filter");
    sampled_vertex_movement(d, idx, vm);
    return idx.total() > 0;
}

}  // namespace crossrl
