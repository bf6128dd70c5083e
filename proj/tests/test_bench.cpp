#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include "crossrl/bench.hpp"
#include "crossrl/embedding.hpp"
#include "crossrl/layout.hpp"
#include "crossrl/pipeline.hpp"
#include "support.hpp"

using namespace crossrl;
using namespace testing_support;

namespace {

RunRecord ok(const std::string& graph, const std::string& algo, long gcn, int lcn = 1) {
    RunRecord r;
    r.graph_id = graph;
    r.algorithm = algo;
    r.gcn = gcn;
    r.lcn = lcn;
    r.runtime_seconds = 0.5;
    return r;
}

RunRecord timed_out(const std::string& graph, const std::string& algo) {
    RunRecord r;
    r.graph_id = graph;
    r.algorithm = algo;
    r.status = RunStatus::timeout;
    r.runtime_seconds = 900;
    return r;
}

// Two-sided exact p by enumerating every sign assignment, with average ranks
// computed by counting.
double brute_force_p(const std::vector<double>& d) {
    const std::size_t n = d.size();
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        int less = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            less += std::abs(d[j]) < std::abs(d[i]);
            equal += std::abs(d[j]) == std::abs(d[i]);
        }
        rank[i] = 1.0 + less + (equal - 1) / 2.0;
    }
    double observed = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] > 0) observed += rank[i];
    long lower = 0, upper = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double w = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) w += rank[i];
        lower += w <= observed + 1e-9;
        upper += w >= observed - 1e-9;
    }
    return std::min(1.0, 2.0 * static_cast<double>(std::min(lower, upper)) / static_cast<double>(1u << n));
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("quantile uses linear interpolation") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(v, 0.75) == doctest::Approx(3.25));
    CHECK(quantile(v, 1.0) == 4.0);
}

TEST_CASE("summary: five numbers and mean per algorithm") {
    std::vector<RunRecord> recs{ok("a", "kk", 4), ok("b", "kk", 1), ok("c", "kk", 3), ok("d", "kk", 2),
                                ok("a", "fr", 10), timed_out("b", "fr")};
    const auto s = summarize(recs, Metric::gcn);
    REQUIRE(s.rows.size() == 2);
    const Summary& kk = s.rows[1].algorithm == "kk" ? s.rows[1] : s.rows[0];
    CHECK(kk.count == 4);
    CHECK(kk.min == 1);
    CHECK(kk.q1 == doctest::Approx(1.75));
    CHECK(kk.median == doctest::Approx(2.5));
    CHECK(kk.mean == doctest::Approx(2.5));
    CHECK(kk.q3 == doctest::Approx(3.25));
    CHECK(kk.max == 4);

    std::reverse(recs.begin(), recs.end());
    const auto again = summarize(recs, Metric::gcn);
    CHECK(again.rows[0].median == s.rows[0].median);
    CHECK(again.rows[1].q3 == s.rows[1].q3);
}

TEST_CASE("summary warns about algorithms with no finished runs") {
    const std::vector<RunRecord> recs{ok("a", "kk", 4), timed_out("a", "svm")};
    const auto s = summarize(recs, Metric::gcn);
    CHECK(s.rows.size() == 1);
    CHECK(s.warnings.size() == 1);
}

TEST_CASE("commonly solved keeps graphs every algorithm finished") {
    const std::vector<RunRecord> recs{ok("g1", "a", 1), ok("g1", "b", 2), ok("g2", "a", 3), timed_out("g2", "b")};
    const std::vector<std::string> algos{"a", "b"};
    const auto kept = commonly_solved(recs, algos);
    CHECK(kept.size() == 2);
    for (const auto& r : kept) CHECK(r.graph_id == "g1");
}

TEST_CASE("pairwise: win, loss and tie shares") {
    const std::vector<RunRecord> recs{ok("g1", "a", 1), ok("g1", "b", 2), ok("g2", "a", 5),
                                      ok("g2", "b", 4), ok("g3", "a", 3), ok("g3", "b", 3)};
    const auto c = compare_pair(recs, "a", "b", Metric::gcn);
    CHECK(c.graphs == 3);
    CHECK(c.win == doctest::Approx(100.0 / 3));
    CHECK(c.loss == doctest::Approx(100.0 / 3));
    CHECK(c.tie == doctest::Approx(100.0 / 3));
}

TEST_CASE("pairwise: a timeout loses, two timeouts tie") {
    const std::vector<RunRecord> recs{timed_out("g1", "a"), ok("g1", "b", 50), timed_out("g2", "a"), timed_out("g2", "b")};
    const auto c = compare_pair(recs, "a", "b", Metric::gcn);
    CHECK(c.loss == doctest::Approx(50.0));
    CHECK(c.tie == doctest::Approx(50.0));
    CHECK(c.win == 0.0);
}

TEST_CASE("pairwise: antisymmetry and sums over a random table") {
    std::mt19937_64 rng(1);
    std::vector<RunRecord> recs;
    const std::vector<std::string> algos{"kk", "fr", "svm", "rl-gc"};
    for (int g = 0; g < 30; ++g) {
        for (const auto& a : algos) {
            if (rng() % 7 == 0) recs.push_back(timed_out("g" + std::to_string(g), a));
            else recs.push_back(ok("g" + std::to_string(g), a, static_cast<long>(rng() % 5)));
        }
    }
    const auto t = pairwise_wins(recs, Metric::gcn);
    for (const auto& a : algos) {
        for (const auto& b : algos) {
            if (a == b) continue;
            const auto& ab = t.at(a, b);
            const auto& ba = t.at(b, a);
            CHECK(ab.win == doctest::Approx(ba.loss));
            CHECK(ab.tie == doctest::Approx(ba.tie));
            CHECK(ab.win + ab.loss + ab.tie == doctest::Approx(100.0));
        }
    }
}

TEST_CASE("pairwise: disjoint graph sets are an error") {
    const std::vector<RunRecord> recs{ok("g1", "a", 1), ok("g2", "b", 2)};
    CHECK_THROWS_AS(compare_pair(recs, "a", "b", Metric::gcn), std::invalid_argument);
}

TEST_CASE("wilcoxon: identical samples are degenerate with p = 1") {
    const std::vector<double> x{1, 2, 3};
    const auto r = wilcoxon_signed_rank(x, x);
    CHECK(r.degenerate);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("wilcoxon: all six differences positive") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6}, y(6, 0.0);
    const auto r = wilcoxon_signed_rank(x, y);
    CHECK(r.exact);
    CHECK(r.w_plus == 21);
    CHECK(r.w_minus == 0);
    CHECK(r.p_value == doctest::Approx(2.0 / 64).epsilon(1e-12));
}

TEST_CASE("wilcoxon: one negative rank 4 among six") {
    const std::vector<double> x{1, 2, 3, -4, 5, 6}, y(6, 0.0);
    const auto r = wilcoxon_signed_rank(x, y);
    CHECK(r.w_minus == 4);
    CHECK(r.p_value == doctest::Approx(14.0 / 64).epsilon(1e-12));
}

TEST_CASE("wilcoxon: exact p agrees with brute-force enumeration, ties included") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 8);
        std::vector<double> x, y, d;
        for (int i = 0; i < n; ++i) {
            const double a = static_cast<double>(rng() % 6), b = static_cast<double>(rng() % 6);
            x.push_back(a);
            y.push_back(b);
            if (a != b) d.push_back(a - b);
        }
        const auto r = wilcoxon_signed_rank(x, y);
        if (d.empty()) {
            CHECK(r.degenerate);
            continue;
        }
        CHECK(r.p_value == doctest::Approx(brute_force_p(d)).epsilon(1e-9));
    }
}

TEST_CASE("wilcoxon: normal approximation tracks the exact test near n = 25") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.3, 1.0);
    for (int n = 20; n <= 25; ++n) {
        std::vector<double> x, y;
        for (int i = 0; i < n; ++i) {
            x.push_back(g(rng));
            y.push_back(0.0);
        }
        const auto exact = wilcoxon_signed_rank(x, y, true);
        const auto approx = wilcoxon_signed_rank(x, y, false);
        CHECK_FALSE(approx.exact);
        CHECK(std::abs(exact.p_value - approx.p_value) < 0.01);
    }
}

TEST_CASE("wilcoxon: unequal lengths are rejected") {
    const std::vector<double> x{1, 2}, y{1};
    CHECK_THROWS_AS(wilcoxon_signed_rank(x, y), std::invalid_argument);
}

TEST_CASE("holm adjustment") {
    const std::vector<double> p{0.01, 0.04};
    const auto a = holm_adjust(p);
    CHECK(a[0] == doctest::Approx(0.02));
    CHECK(a[1] == doctest::Approx(0.04));
    const std::vector<double> q{0.04, 0.01, 0.03};
    const auto b = holm_adjust(q);
    CHECK(b[1] == doctest::Approx(0.03));
    CHECK(b[2] == doctest::Approx(0.06));
    CHECK(b[0] == doctest::Approx(0.06));
    CHECK(holm_adjust(std::vector<double>{0.6, 0.7})[0] == 1.0);
}

TEST_CASE("wilcoxon_holm compares on graphs both finished") {
    std::vector<RunRecord> recs;
    for (int g = 0; g < 8; ++g) {
        recs.push_back(ok("g" + std::to_string(g), "a", g));
        recs.push_back(ok("g" + std::to_string(g), "b", g + 1 + g % 3));
    }
    recs.push_back(timed_out("g8", "a"));
    recs.push_back(ok("g8", "b", 0));
    const std::vector<std::pair<std::string, std::string>> pairs{{"a", "b"}};
    const auto t = wilcoxon_holm(recs, Metric::gcn, pairs);
    REQUIRE(t.size() == 1);
    CHECK(t[0].test.n == 8);
    CHECK(t[0].test.p_value == doctest::Approx(2.0 / 256));
    CHECK(t[0].adjusted_p == t[0].test.p_value);
}

TEST_CASE("SVG: triangle has three lines and three circles") {
    const Graph g = cycle_graph(3);
    const Drawing d(g, convex_positions(3));
    const std::string svg = render_svg(d, {"tri", 1.25});
    auto count = [&](const std::string& needle) {
        std::size_t c = 0;
        for (auto pos = svg.find(needle); pos != std::string::npos; pos = svg.find(needle, pos + 1)) ++c;
        return c;
    };
    CHECK(count("<line") == 3);
    CHECK(count("<circle") == 3);
    CHECK(count("lcr-max") == 0);
    CHECK(svg.find("GCN=0 LCN=0") != std::string::npos);
    CHECK(svg.find("runtime=1.25s") != std::string::npos);
    CHECK(svg == render_svg(d, {"tri", 1.25}));
}

TEST_CASE("SVG: edges at the local crossing number are highlighted") {
    const Graph g = complete_graph(4);
    const Drawing d(g, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const std::string svg = render_svg(d);
    std::size_t hot = 0;
    for (auto pos = svg.find("lcr-max"); pos != std::string::npos; pos = svg.find("lcr-max", pos + 1)) ++hot;
    CHECK(hot == 2);
    CHECK(svg.find("GCN=1 LCN=1") != std::string::npos);
}

TEST_CASE("run_one: a stuck algorithm is stopped and recorded as a timeout") {
    const Graph g = cycle_graph(5);
    const Drawing init(g, convex_positions(5));
    const BenchGraph bg{"c5", &g, &init, nullptr};
    const AlgorithmEntry stub{"stuck", [](const AlgorithmInput& in) {
                                  while (!in.stop.stop_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
                                  return in.initial;
                              }};
    const auto t0 = std::chrono::steady_clock::now();
    const RunRecord r = run_one(stub, bg, 0.2, 1);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.status == RunStatus::timeout);
    CHECK_FALSE(r.gcn.has_value());
    CHECK(r.runtime_seconds == 0.2);
    CHECK(wall < 1.0);
}

TEST_CASE("run_one: an exception becomes a failed row") {
    const Graph g = cycle_graph(5);
    const Drawing init(g, convex_positions(5));
    const BenchGraph bg{"c5", &g, &init, nullptr};
    const AlgorithmEntry bad{"bad", [](const AlgorithmInput&) -> Drawing { throw std::runtime_error("boom"); }};
    const RunRecord r = run_one(bad, bg, 5.0, 1);
    CHECK(r.status == RunStatus::failed);
    CHECK(r.message == "boom");
}

TEST_CASE("results CSV is written incrementally and reads back") {
    TempDir dir("csv");
    const auto path = dir.path / "r.csv";
    const Graph g = complete_graph(5);
    const Drawing init = layout_kamada_kawai(g, 1);
    const BenchGraph graphs[] = {{"k5a", &g, &init, nullptr}, {"k5b", &g, &init, nullptr}};
    int calls = 0;
    const AlgorithmEntry entry{"id", [&](const AlgorithmInput& in) {
                                   if (calls++ == 1) {
                                       // the first record must already be on disk
                                       CHECK(read_results(path).size() == 1);
                                   }
                                   return in.initial;
                               }};
    SuiteOptions opt;
    opt.results_csv = path;
    const auto recs = run_suite(std::span<const AlgorithmEntry>(&entry, 1), graphs, opt);
    const auto back = read_results(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].graph_id == "k5a");
    CHECK(back[1].gcn == recs[1].gcn);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == kResultsHeader);
}

TEST_CASE("registry: post-processing never worsens the shared KK start") {
    std::mt19937_64 gen(4);
    const Graph g = random_connected_graph(18, 0.25, gen);
    const Drawing init = layout_kamada_kawai(g, layout_seed_for(3));
    const auto emb = structural_embedding(g);
    const long start = build_index(init).total();
    const Policy policy(PolicyShape{}, 1);
    RegistryOptions opt;
    opt.policy_gc = &policy;
    opt.policy_lc = &policy;
    opt.env.step_cap = 300;
    opt.vm = {20, 2, 0};
    const BenchGraph bg{"g", &g, &init, &emb};
    for (const std::string name : {"kk", "svm", "rl-gc"}) {
        const RunRecord a = run_one(make_algorithm(name, opt), bg, 60, 3);
        const RunRecord b = run_one(make_algorithm(name, opt), bg, 60, 3);
        REQUIRE(a.status == RunStatus::ok);
        CHECK(*a.gcn <= start);
        CHECK(a.gcn == b.gcn);
        CHECK(a.lcn == b.lcn);
        CHECK((*a.gcn == 0) == (*a.lcn == 0));
    }
    CHECK_THROWS_AS(make_algorithm("nope", opt), std::invalid_argument);
    CHECK_THROWS_AS(make_algorithm("rl-gc", RegistryOptions{}), std::invalid_argument);
}

}  // TEST_SUITE
