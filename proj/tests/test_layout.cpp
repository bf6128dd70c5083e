#include <doctest.h>

#include "crossrl/layout.hpp"
#include "support.hpp"

using namespace crossrl;
using namespace testing_support;

TEST_SUITE("layouts") {

TEST_CASE("distance matrix by BFS") {
    const DistanceMatrix dm(cycle_graph(6));
    CHECK(dm(0, 3) == 3);
    CHECK(dm(0, 5) == 1);
    CHECK(dm.eccentricity(2) == 3);
}

TEST_CASE("KK: triangle is near-equilateral") {
    const Drawing d = layout_kamada_kawai(cycle_graph(3), 1);
    const double a = distance(d.position(0), d.position(1));
    const double b = distance(d.position(1), d.position(2));
    const double c = distance(d.position(2), d.position(0));
    const double lo = std::min({a, b, c}), hi = std::max({a, b, c});
    CHECK(hi / lo < 1.05);
}

TEST_CASE("KK: C6 comes out crossing-free") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CHECK(build_index(layout_kamada_kawai(cycle_graph(6), seed)).total() == 0);
    }
}

TEST_CASE("KK: stress never increases across sweeps") {
    std::mt19937_64 gen(3);
    const Graph g = random_connected_graph(30, 0.1, gen);
    std::vector<double> trace;
    layout_kamada_kawai(g, 4, {}, &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] * (1 + 1e-12));
    CHECK(trace.back() <= trace.front());
    CHECK(std::isfinite(trace.back()));
}

TEST_CASE("KK and FR are deterministic and normalized") {
    std::mt19937_64 gen(5);
    const Graph g = random_connected_graph(25, 0.15, gen);
    const Drawing a = layout_kamada_kawai(g, 9), b = layout_kamada_kawai(g, 9);
    const Drawing c = layout_fruchterman_reingold(g, 9), e = layout_fruchterman_reingold(g, 9);
    for (int v = 0; v < g.num_vertices(); ++v) {
        CHECK(a.position(v) == b.position(v));
        CHECK(c.position(v) == e.position(v));
    }
    CHECK(a.average_edge_length() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.average_edge_length() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("FR: single edge and triangle") {
    const Drawing d = layout_fruchterman_reingold(path_graph(2), 1);
    CHECK(distance(d.position(0), d.position(1)) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(build_index(layout_fruchterman_reingold(cycle_graph(3), 1)).total() == 0);
}

TEST_CASE("FR tends to more crossings than KK on a Rome-like graph") {
    Graph g;
    for (std::uint64_t s = 0;; ++s) {
        auto r = preprocess(generate_rome_like(sample_rome_like_params(s)));
        if (auto* kept = std::get_if<Graph>(&r); kept && kept->num_vertices() >= 30) {
            g = *kept;
            break;
        }
    }
    double kk = 0, fr = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        kk += static_cast<double>(build_index(layout_kamada_kawai(g, seed)).total());
        fr += static_cast<double>(build_index(layout_fruchterman_reingold(g, seed)).total());
    }
    CHECK(fr >= kk);
}

TEST_CASE("sampled VM: planar drawing stays at zero") {
    const Graph g = cycle_graph(7);
    Drawing d(g, convex_positions(7));
    auto idx = build_index(d);
    sampled_vertex_movement(d, idx, {50, 3, 1});
    CHECK(idx.total() == 0);
}

TEST_CASE("sampled VM: untangles K4 within two sweeps") {
    const Graph g = complete_graph(4);
    Drawing d(g, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    auto idx = build_index(d);
    REQUIRE(idx.total() == 1);
    sampled_vertex_movement(d, idx, {100, 2, 3});
    CHECK(idx.total() == 0);
    CHECK(idx.same_crossings(build_index(d)));
}

TEST_CASE("sampled VM never increases crossings, sweep by sweep") {
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 5; ++trial) {
        const Graph g = random_connected_graph(25, 0.2, gen);
        Drawing d(g, random_positions(25, gen));
        Rng rng(1);
        ensure_general_position(d, rng);
        auto idx = build_index(d);
        const long start = idx.total();
        std::vector<long> sweeps;
        sampled_vertex_movement(d, idx, {30, 3, static_cast<std::uint64_t>(trial)}, &sweeps);
        long prev = start;
        for (long s : sweeps) {
            CHECK(s <= prev);
            prev = s;
        }
        CHECK(idx.same_crossings(build_index(d)));
    }
}

TEST_CASE("layouts honor a stop request") {
    std::mt19937_64 gen(7);
    const Graph g = random_connected_graph(40, 0.1, gen);
    std::stop_source src;
    src.request_stop();
    const Drawing d = layout_kamada_kawai(g, 1, {}, nullptr, src.get_token());
    CHECK(d.num_vertices() == 40);
}

}  // TEST_SUITE
