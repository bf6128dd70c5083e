#include "crossrl/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "crossrl/rng.hpp"

namespace crossrl {

DistanceMatrix::DistanceMatrix(const Graph& g) : n_(g.num_vertices()) {
    const auto n = static_cast<std::size_t>(n_);
    d_.assign(n * n, -1);
    std::vector<int> queue(n);
    for (int s = 0; s < n_; ++s) {
        int* row = d_.data() + static_cast<std::size_t>(s) * n;
        row[s] = 0;
        std::size_t head = 0, tail = 0;
        queue[tail++] = s;
        while (head < tail) {
            const int v = queue[head++];
            for (int w : g.neighbors(v)) {
                if (row[w] < 0) {
                    row[w] = row[v] + 1;
                    queue[tail++] = w;
                }
            }
        }
    }
}

int DistanceMatrix::eccentricity(int v) const {
    int best = 0;
    for (int w = 0; w < n_; ++w) {
        best = std::max(best, (*this)(v, w));
    }
    return best;
}

double stress(const Drawing& d, const DistanceMatrix& dist) {
    double s = 0.0;
    const int n = d.num_vertices();
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            const int duv = dist(u, v);
            if (duv <= 0) {
                continue;
            }
            const double diff = distance(d.position(u), d.position(v)) - duv;
            s += diff * diff / (static_cast<double>(duv) * duv);
        }
    }
    return s;
}

namespace {

void finish_layout(Drawing& d, std::uint64_t seed) {
    normalize_scale(d);
    Rng rng(derive_seed(seed, "layout-perturb"));
    ensure_general_position(d, rng);
}

}  // namespace

Drawing layout_kamada_kawai(const Graph& g, std::uint64_t seed, const KamadaKawaiOptions& options,
                            std::vector<double>* stress_trace, std::stop_token stop) {
    const int n = g.num_vertices();
    const DistanceMatrix dist(g);
    Rng rng(derive_seed(seed, "kamada-kawai"));
    const double side = std::sqrt(static_cast<double>(std::max(n, 1)));
    std::uniform_real_distribution<double> coord(0.0, side);
    std::vector<Point> pos(static_cast<std::size_t>(n));
    for (auto& p : pos) {
        p = {coord(rng), coord(rng)};
    }
    Drawing d(g, std::move(pos));
    if (n < 2) {
        finish_layout(d, seed);
        return d;
    }

    double current = stress(d, dist);
    if (stress_trace) {
        stress_trace->push_back(current);
    }
    for (int sweep = 0; sweep < options.max_sweeps && !stop.stop_requested(); ++sweep) {
        for (int i = 0; i < n; ++i) {
            const Point xi = d.position(i);
            Point numerator{};
            double weight_sum = 0.0;
            for (int j = 0; j < n; ++j) {
                const int dij = dist(i, j);
                if (j == i || dij <= 0) {
                    continue;
                }
                const double w = 1.0 / (static_cast<double>(dij) * dij);
                const Point xj = d.position(j);
                const double len = distance(xi, xj);
                Point target = xj;
                if (len > 0.0) {
                    target = target + (dij / len) * (xi - xj);
                }
                numerator = numerator + w * target;
                weight_sum += w;
            }
            if (weight_sum > 0.0) {
                d.set_position(i, (1.0 / weight_sum) * numerator);
            }
        }
        const double next = stress(d, dist);
        if (stress_trace) {
            stress_trace->push_back(next);
        }
        const bool converged = current <= 0.0 || (current - next) / current < options.tolerance;
        current = next;
        if (converged) {
            break;
        }
    }
    finish_layout(d, seed);
    return d;
}

Drawing layout_fruchterman_reingold(const Graph& g, std::uint64_t seed, int iterations, std::stop_token stop) {
    const int n = g.num_vertices();
    Rng rng(derive_seed(seed, "fruchterman-reingold"));
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::vector<Point> pos(static_cast<std::size_t>(n));
    for (auto& p : pos) {
        p = {coord(rng), coord(rng)};
    }
    const double k = std::sqrt(1.0 / std::max(n, 1));
    const double t0 = 0.1;
    std::vector<Point> disp(static_cast<std::size_t>(n));
    for (int it = 0; it < iterations && !stop.stop_requested(); ++it) {
        std::fill(disp.begin(), disp.end(), Point{});
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                Point delta = pos[static_cast<std::size_t>(u)] - pos[static_cast<std::size_t>(v)];
                double len = norm(delta);
                if (len < 1e-9) {
                    delta = {1e-9, 0.0};
                    len = 1e-9;
                }
                const Point f = (k * k / (len * len)) * delta;
                disp[static_cast<std::size_t>(u)] = disp[static_cast<std::size_t>(u)] + f;
                disp[static_cast<std::size_t>(v)] = disp[static_cast<std::size_t>(v)] - f;
            }
        }
        for (const Edge& e : g.edges()) {
            const Point delta = pos[static_cast<std::size_t>(e.u)] - pos[static_cast<std::size_t>(e.v)];
            const double len = norm(delta);
            const Point f = (len / k) * delta;
            disp[static_cast<std::size_t>(e.u)] = disp[static_cast<std::size_t>(e.u)] - f;
            disp[static_cast<std::size_t>(e.v)] = disp[static_cast<std::size_t>(e.v)] + f;
        }
        const double temperature = t0 * (1.0 - static_cast<double>(it) / iterations);
        for (int v = 0; v < n; ++v) {
            const Point dv = disp[static_cast<std::size_t>(v)];
            const double len = norm(dv);
            if (len > 0.0) {
                pos[static_cast<std::size_t>(v)] = pos[static_cast<std::size_t>(v)] + (std::min(len, temperature) / len) * dv;
            }
        }
    }
    Drawing d(g, std::move(pos));
    finish_layout(d, seed);
    return d;
}

void sampled_vertex_movement(Drawing& d, CrossingIndex& idx, const VertexMovementOptions& options,
                             std::vector<long>* sweep_totals, std::stop_token stop) {
    const int n = d.num_vertices();
    Rng rng(derive_seed(options.seed, "sampled-vertex-movement"));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int sweep = 0; sweep < options.sweeps; ++sweep) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int v : order) {
            if (idx.total() == 0 || stop.stop_requested()) {
                break;
            }
            double x0 = d.position(0).x, x1 = x0, y0 = d.position(0).y, y1 = y0;
            for (const Point& p : d.positions()) {
                x0 = std::min(x0, p.x);
                x1 = std::max(x1, p.x);
                y0 = std::min(y0, p.y);
                y1 = std::max(y1, p.y);
            }
            std::uniform_real_distribution<double> ux(x0, x1);
            std::uniform_real_distribution<double> uy(y0, y1);
            const Point original = d.position(v);
            const long original_total = idx.total();
            Point best = original;
            long best_total = original_total;
            for (int s = 0; s < options.samples_per_vertex; ++s) {
                const Point candidate{ux(rng), uy(rng)};
                move_vertex(d, idx, v, candidate, rng);
                if (idx.total() < best_total) {
                    best_total = idx.total();
                    best = d.position(v);
                }
            }
            move_vertex(d, idx, v, best, rng);
            // a perturbation on the final move could in principle differ from the sampled state
            if (idx.total() > original_total) {
                move_vertex(d, idx, v, original, rng);
            }
        }
        if (sweep_totals) {
            sweep_totals->push_back(idx.total());
        }
        if (idx.total() == 0 || stop.stop_requested()) {
            break;
        }
    }
}

}  // namespace crossrl
