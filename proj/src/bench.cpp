#include "crossrl/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace crossrl {

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::ok: return "ok";
        case RunStatus::timeout: return "timeout";
        case RunStatus::failed: return "failed";
    }
    return "failed";
}

RunStatus run_status_from_string(const std::string& text) {
    if (text == "ok") return RunStatus::ok;
    if (text == "timeout") return RunStatus::timeout;
    if (text == "failed") return RunStatus::failed;
    throw std::invalid_argument("unknown run status '" + text + "'");
}

Metric metric_from_string(const std::string& text) {
    if (text == "gcn") return Metric::gcn;
    if (text == "lcn") return Metric::lcn;
    throw std::invalid_argument("unknown metric '" + text + "' (expected gcn or lcn)");
}

std::string to_string(Metric metric) {
    return metric == Metric::gcn ? "gcn" : "lcn";
}

std::optional<double> metric_value(const RunRecord& r, Metric metric) {
    if (r.status != RunStatus::ok) {
        return std::nullopt;
    }
    if (metric == Metric::gcn && r.gcn) {
        return static_cast<double>(*r.gcn);
    }
    if (metric == Metric::lcn && r.lcn) {
        return static_cast<double>(*r.lcn);
    }
    return std::nullopt;
}

RunRecord run_one(const AlgorithmEntry& algorithm, const BenchGraph& graph, double time_limit_seconds,
                  std::uint64_t seed) {
    RunRecord record;
    record.graph_id = graph.id;
    record.algorithm = algorithm.name;
    record.seed = seed;

    struct Outcome {
        CrossingIndex index;
        double seconds = 0.0;
    };
    std::promise<Outcome> promise;
    std::future<Outcome> future = promise.get_future();
    std::jthread worker([&algorithm, &graph, seed, p = std::move(promise)](std::stop_token stop) mutable {
        try {
            const auto t0 = std::chrono::steady_clock::now();
            Drawing out = algorithm.run(AlgorithmInput{*graph.graph, *graph.initial, graph.embedding, seed, stop});
            const auto t1 = std::chrono::steady_clock::now();
            Outcome o;
            o.seconds = std::chrono::duration<double>(t1 - t0).count();
            o.index = build_index(out);
            p.set_value(std::move(o));
        } catch (...) {
            p.set_exception(std::current_exception());
        }
    });

    const auto limit = std::chrono::duration<double>(time_limit_seconds);
    if (future.wait_for(limit) != std::future_status::ready) {
        worker.request_stop();
        record.status = RunStatus::timeout;
        record.runtime_seconds = time_limit_seconds;
        return record;  // jthread joins once the algorithm notices the stop request
    }
    try {
        Outcome o = future.get();
        if (o.seconds > time_limit_seconds) {
            record.status = RunStatus::timeout;
            record.runtime_seconds = time_limit_seconds;
            return record;
        }
        record.gcn = o.index.total();
        record.lcn = o.index.local_crossing_number();
        record.runtime_seconds = o.seconds;
    } catch (const std::exception& e) {
        record.status = RunStatus::failed;
        record.message = e.what();
    }
    return record;
}

std::vector<RunRecord> run_suite(std::span<const AlgorithmEntry> algorithms, std::span<const BenchGraph> graphs,
                                 const SuiteOptions& options) {
    std::vector<RunRecord> records;
    if (options.results_csv && !std::filesystem::exists(*options.results_csv)) {
        std::ofstream(*options.results_csv) << kResultsHeader << '\n';
    }
    for (const BenchGraph& g : graphs) {
        for (const AlgorithmEntry& a : algorithms) {
            RunRecord r = run_one(a, g, options.time_limit_seconds, options.seed);
            if (options.results_csv) {
                append_record(*options.results_csv, r);
            }
            records.push_back(std::move(r));
        }
    }
    return records;
}

std::string to_csv_row(const RunRecord& r) {
    return fmt::format("{},{},{},{},{},{:.6f},{}", r.graph_id, r.algorithm, to_string(r.status),
                       r.gcn ? std::to_string(*r.gcn) : "", r.lcn ? std::to_string(*r.lcn) : "", r.runtime_seconds,
                       r.seed);
}

void append_record(const std::filesystem::path& path, const RunRecord& r) {
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw std::runtime_error("cannot append to " + path.string());
    }
    out << to_csv_row(r) << '\n';
    out.flush();
}

std::vector<RunRecord> read_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<RunRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.rfind("graph_id,", 0) == 0) {
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cols.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cols.emplace_back();
        }
        if (cols.size() != 7) {
            throw std::runtime_error(fmt::format("{}:{}: expected 7 columns", path.string(), lineno));
        }
        RunRecord r;
        r.graph_id = cols[0];
        r.algorithm = cols[1];
        r.status = run_status_from_string(cols[2]);
        if (!cols[3].empty()) r.gcn = std::stol(cols[3]);
        if (!cols[4].empty()) r.lcn = std::stoi(cols[4]);
        r.runtime_seconds = std::stod(cols[5]);
        r.seed = std::stoull(cols[6]);
        out.push_back(std::move(r));
    }
    return out;
}

double quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile of empty sample");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryResult summarize(std::span<const RunRecord> records, Metric metric) {
    std::map<std::string, std::vector<double>> values;
    std::set<std::string> names;
    for (const RunRecord& r : records) {
        names.insert(r.algorithm);
        if (auto v = metric_value(r, metric)) {
            values[r.algorithm].push_back(*v);
        }
    }
    SummaryResult out;
    for (const std::string& name : names) {
        auto it = values.find(name);
        if (it == values.end() || it->second.empty()) {
            out.warnings.push_back(fmt::format("algorithm '{}' has no finished runs; omitted", name));
            continue;
        }
        auto& v = it->second;
        std::sort(v.begin(), v.end());
        Summary s;
        s.algorithm = name;
        s.count = v.size();
        s.min = v.front();
        s.max = v.back();
        s.q1 = quantile(v, 0.25);
        s.median = quantile(v, 0.5);
        s.q3 = quantile(v, 0.75);
        // sorted accumulation keeps the mean independent of record order
        double sum = 0.0;
        for (double x : v) {
            sum += x;
        }
        s.mean = sum / static_cast<double>(v.size());
        out.rows.push_back(s);
    }
    return out;
}

std::vector<RunRecord> commonly_solved(std::span<const RunRecord> records, std::span<const std::string> algorithms) {
    std::map<std::string, std::set<std::string>> finished;
    for (const RunRecord& r : records) {
        if (r.status == RunStatus::ok) {
            finished[r.graph_id].insert(r.algorithm);
        }
    }
    std::vector<RunRecord> out;
    for (const RunRecord& r : records) {
        const auto& done = finished[r.graph_id];
        const bool all = std::all_of(algorithms.begin(), algorithms.end(),
                                     [&](const std::string& a) { return done.count(a) > 0; });
        if (all && std::find(algorithms.begin(), algorithms.end(), r.algorithm) != algorithms.end()) {
            out.push_back(r);
        }
    }
    return out;
}

const WinCell& PairwiseWinTable::at(const std::string& a, const std::string& b) const {
    const auto i = std::find(algorithms.begin(), algorithms.end(), a) - algorithms.begin();
    const auto j = std::find(algorithms.begin(), algorithms.end(), b) - algorithms.begin();
    if (i == static_cast<long>(algorithms.size()) || j == static_cast<long>(algorithms.size())) {
        throw std::out_of_range("algorithm not in win table");
    }
    return cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
}

WinCell compare_pair(std::span<const RunRecord> records, const std::string& a, const std::string& b, Metric metric) {
    std::map<std::string, std::optional<double>> va, vb;
    for (const RunRecord& r : records) {
        if (r.algorithm == a) {
            va[r.graph_id] = metric_value(r, metric);
        }
        if (r.algorithm == b) {
            vb[r.graph_id] = metric_value(r, metric);
        }
    }
    std::set<std::string> graphs;
    for (const auto& [g, _] : va) graphs.insert(g);
    for (const auto& [g, _] : vb) graphs.insert(g);
    bool overlap = false;
    for (const auto& [g, _] : va) {
        overlap = overlap || vb.count(g) > 0;
    }
    if (!overlap) {
        throw std::invalid_argument(fmt::format("algorithms '{}' and '{}' share no graph", a, b));
    }
    std::size_t win = 0, loss = 0, tie = 0;
    for (const std::string& g : graphs) {
        const auto ia = va.find(g);
        const auto ib = vb.find(g);
        const std::optional<double> x = ia != va.end() ? ia->second : std::nullopt;
        const std::optional<double> y = ib != vb.end() ? ib->second : std::nullopt;
        if (x && y) {
            if (*x < *y) ++win;
            else if (*y < *x) ++loss;
            else ++tie;
        } else if (x) {
            ++win;
        } else if (y) {
            ++loss;
        } else {
            ++tie;
        }
    }
    WinCell c;
    c.graphs = graphs.size();
    const double total = static_cast<double>(graphs.size());
    c.win = 100.0 * static_cast<double>(win) / total;
    c.loss = 100.0 * static_cast<double>(loss) / total;
    c.tie = 100.0 * static_cast<double>(tie) / total;
    return c;
}

PairwiseWinTable pairwise_wins(std::span<const RunRecord> records, Metric metric) {
    std::set<std::string> names;
    for (const RunRecord& r : records) {
        names.insert(r.algorithm);
    }
    PairwiseWinTable t;
    t.algorithms.assign(names.begin(), names.end());
    const std::size_t k = t.algorithms.size();
    t.cells.assign(k, std::vector<WinCell>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            t.cells[i][j] = compare_pair(records, t.algorithms[i], t.algorithms[j], metric);
        }
    }
    return t;
}

namespace {

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    std::optional<bool> force_exact) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("wilcoxon: samples must be paired");
    }
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != y[i]) {
            d.push_back(x[i] - y[i]);
        }
    }
    WilcoxonResult res;
    res.n = d.size();
    if (d.empty()) {
        res.degenerate = true;
        res.p_value = 1.0;
        return res;
    }
    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
    // doubled average ranks stay integral
    std::vector<long> rank2(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) {
            ++j;
        }
        const long r2 = static_cast<long>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) {
            rank2[order[k]] = r2;
        }
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    long w2_plus = 0;
    long w2_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        w2_total += rank2[i];
        if (d[i] > 0) {
            w2_plus += rank2[i];
        }
    }
    res.w_plus = w2_plus / 2.0;
    res.w_minus = (w2_total - w2_plus) / 2.0;

    res.exact = force_exact.value_or(n <= 25);
    if (res.exact) {
        // counts[s] = number of sign assignments whose doubled positive rank sum is s
        std::vector<double> counts(static_cast<std::size_t>(w2_total) + 1, 0.0);
        counts[0] = 1.0;
        long reach = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (long s = reach; s >= 0; --s) {
                counts[static_cast<std::size_t>(s + rank2[i])] += counts[static_cast<std::size_t>(s)];
            }
            reach += rank2[i];
        }
        const double all = std::ldexp(1.0, static_cast<int>(n));
        double lower = 0.0, upper = 0.0;
        for (long s = 0; s <= w2_total; ++s) {
            if (s <= w2_plus) lower += counts[static_cast<std::size_t>(s)];
            if (s >= w2_plus) upper += counts[static_cast<std::size_t>(s)];
        }
        res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    } else {
        const double nn = static_cast<double>(n);
        const double mean = nn * (nn + 1.0) / 4.0;
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        if (var <= 0.0) {
            res.p_value = 1.0;
            return res;
        }
        const double dev = std::max(0.0, std::abs(res.w_plus - mean) - 0.5);
        res.p_value = std::min(1.0, 2.0 * normal_sf(dev / std::sqrt(var)));
    }
    return res;
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
    const std::size_t k = p_values.size();
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adjusted(k);
    double running = 0.0;
    for (std::size_t rank = 0; rank < k; ++rank) {
        const double scaled = std::min(1.0, static_cast<double>(k - rank) * p_values[order[rank]]);
        running = std::max(running, scaled);
        adjusted[order[rank]] = running;
    }
    return adjusted;
}

std::vector<PairTest> wilcoxon_holm(std::span<const RunRecord> records, Metric metric,
                                    std::span<const std::pair<std::string, std::string>> pairs) {
    std::vector<PairTest> out;
    std::vector<double> raw;
    for (const auto& [a, b] : pairs) {
        std::map<std::string, double> va, vb;
        for (const RunRecord& r : records) {
            if (auto v = metric_value(r, metric)) {
                if (r.algorithm == a) va[r.graph_id] = *v;
                if (r.algorithm == b) vb[r.graph_id] = *v;
            }
        }
        std::vector<double> xs, ys;
        for (const auto& [g, v] : va) {
            auto it = vb.find(g);
            if (it != vb.end()) {
                xs.push_back(v);
                ys.push_back(it->second);
            }
        }
        PairTest t{a, b, wilcoxon_signed_rank(xs, ys), 1.0};
        raw.push_back(t.test.p_value);
        out.push_back(std::move(t));
    }
    const auto adjusted = holm_adjust(raw);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].adjusted_p = adjusted[i];
    }
    return out;
}

std::string render_svg(const Drawing& d, const SvgAnnotations& notes) {
    const CrossingIndex idx = build_index(d);
    const int lcr = idx.local_crossing_number();
    const Graph& g = d.graph();
    constexpr double size = 600.0;
    constexpr double margin = 20.0;
    constexpr double caption = 40.0;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (d.num_vertices() > 0) {
        x0 = x1 = d.position(0).x;
        y0 = y1 = d.position(0).y;
        for (const Point& p : d.positions()) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
    }
    const double span = std::max({x1 - x0, y1 - y0, 1e-9});
    const double scale = (size - 2 * margin) / span;
    auto sx = [&](double x) { return margin + (x - x0) * scale; };
    auto sy = [&](double y) { return margin + (y1 - y) * scale; };  // y axis points up in layout space

    std::string out;
    out += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
                       size, size + caption, size, size + caption);
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (int e = 0; e < g.num_edges(); ++e) {
        auto [a, b] = d.segment(e);
        const bool hot = lcr > 0 && idx.crossings_on(e) == lcr;
        out += fmt::format("<line class=\"{}\" x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"{}\" stroke-width=\"{}\"/>\n",
                           hot ? "edge lcr-max" : "edge", sx(a.x), sy(a.y), sx(b.x), sy(b.y),
                           hot ? "#d62728" : "#555555", hot ? "2.5" : "1");
    }
    for (int v = 0; v < d.num_vertices(); ++v) {
        out += fmt::format("<circle class=\"vertex\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"3.5\" fill=\"#1f77b4\"/>\n",
                           sx(d.position(v).x), sy(d.position(v).y));
    }
    std::string text = fmt::format("GCN={} LCN={}", idx.total(), lcr);
    if (notes.runtime_seconds) {
        text += fmt::format(" runtime={:.2f}s", *notes.runtime_seconds);
    }
    if (!notes.title.empty()) {
        text = notes.title + "  " + text;
    }
    out += fmt::format("<text x=\"{:.0f}\" y=\"{:.0f}\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", margin,
                       size + caption / 2.0, text);
    out += "</svg>\n";
    return out;
}

}  // namespace crossrl
