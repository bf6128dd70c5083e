#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "crossrl/embedding.hpp"
#include "crossrl/geometry.hpp"
#include "crossrl/graph.hpp"

namespace crossrl {

enum class RunStatus { ok, timeout, failed };

std::string to_string(RunStatus status);
RunStatus run_status_from_string(const std::string& text);

struct RunRecord {
    std::string graph_id;
    std::string algorithm;
    RunStatus status = RunStatus::ok;
    /// Present iff status == ok.
    std::optional<long> gcn;
    std::optional<int> lcn;
    double runtime_seconds = 0.0;
    std::uint64_t seed = 0;
    std::string message;
};

enum class Metric { gcn, lcn };

Metric metric_from_string(const std::string& text);
std::string to_string(Metric metric);
std::optional<double> metric_value(const RunRecord& r, Metric metric);

/// Inputs handed to a benchmarked algorithm. `initial` is the KK layout
/// shared by the post-processing algorithms.
struct AlgorithmInput {
    const Graph& graph;
    const Drawing& initial;
    /// Precomputed; may be null for algorithms that do not need it.
    const StructuralEmbedding* embedding;
    std::uint64_t seed;
    std::stop_token stop;
};

/// Returns the final drawing. Long-running algorithms must poll `stop`.
using AlgorithmFn = std::function<Drawing(const AlgorithmInput&)>;

struct AlgorithmEntry {
    std::string name;
    AlgorithmFn run;
};

struct BenchGraph {
    std::string id;
    const Graph* graph = nullptr;
    const Drawing* initial = nullptr;
    const StructuralEmbedding* embedding = nullptr;
};

inline constexpr double kDefaultTimeLimitSeconds = 900.0;

struct SuiteOptions {
    double time_limit_seconds = kDefaultTimeLimitSeconds;
    std::uint64_t seed = 0;
    /// When set, each record is appended (and flushed) as soon as it exists.
    std::optional<std::filesystem::path> results_csv;
};

/// Runs every algorithm once on every graph on a single worker. A run that
/// exceeds the limit is asked to stop and recorded as a timeout; an
/// exception is recorded as a failed row. Runtime covers the call only.
std::vector<RunRecord> run_suite(std::span<const AlgorithmEntry> algorithms, std::span<const BenchGraph> graphs,
                                 const SuiteOptions& options);

/// Same record for one (graph, algorithm) pair.
RunRecord run_one(const AlgorithmEntry& algorithm, const BenchGraph& graph, double time_limit_seconds,
                  std::uint64_t seed);

inline constexpr const char* kResultsHeader = "graph_id,algo,status,gcn,lcn,runtime_s,seed";

std::string to_csv_row(const RunRecord& r);
void append_record(const std::filesystem::path& path, const RunRecord& r);
std::vector<RunRecord> read_results(const std::filesystem::path& path);

struct Summary {
    std::string algorithm;
    std::size_t count = 0;
    double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};

/// Linear-interpolation quantile of sorted values (numpy default).
double quantile(std::span<const double> sorted, double q);

struct SummaryResult {
    std::vector<Summary> rows;
    std::vector<std::string> warnings;
};

/// Five-number summary plus mean over ok records, per algorithm (sorted by name).
SummaryResult summarize(std::span<const RunRecord> records, Metric metric);

/// Keeps only graphs on which every listed algorithm finished.
std::vector<RunRecord> commonly_solved(std::span<const RunRecord> records, std::span<const std::string> algorithms);

struct WinCell {
    double win = 0.0;
    double loss = 0.0;
    double tie = 0.0;
    std::size_t graphs = 0;
};

struct PairwiseWinTable {
    std::vector<std::string> algorithms;
    /// cells[i][j]: row algorithm i against column algorithm j, in percent.
    std::vector<std::vector<WinCell>> cells;

    const WinCell& at(const std::string& a, const std::string& b) const;
};

/// Outcome of one pair over the union of graphs either ran on. Lower metric
/// wins; a run that did not finish loses to one that did; two unfinished
/// runs tie. Throws std::invalid_argument when the pair shares no graph.
WinCell compare_pair(std::span<const RunRecord> records, const std::string& a, const std::string& b, Metric metric);

PairwiseWinTable pairwise_wins(std::span<const RunRecord> records, Metric metric);

struct WilcoxonResult {
    std::size_t n = 0;  // nonzero differences
    double w_plus = 0.0;
    double w_minus = 0.0;
    double p_value = 1.0;
    bool exact = true;
    /// Set when no nonzero difference remained.
    bool degenerate = false;
};

/// Paired two-sided Wilcoxon signed-rank test. Zero differences are dropped,
/// ties get average ranks. Exact null distribution for n <= 25, normal
/// approximation with tie-corrected variance and continuity correction above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    std::optional<bool> force_exact = std::nullopt);

/// Holm step-down adjustment, same order as the input.
std::vector<double> holm_adjust(std::span<const double> p_values);

struct PairTest {
    std::string a;
    std::string b;
    WilcoxonResult test;
    double adjusted_p = 1.0;
};

/// Pairs are compared on graphs where both finished; Holm runs over all pairs.
std::vector<PairTest> wilcoxon_holm(std::span<const RunRecord> records, Metric metric,
                                    std::span<const std::pair<std::string, std::string>> pairs);

struct SvgAnnotations {
    std::string title;
    std::optional<double> runtime_seconds;
};

/// Vertices as circles, edges as lines; edges carrying lcr crossings use
/// the highlight stroke. Caption reports GCN, LCN and runtime.
std::string render_svg(const Drawing& d, const SvgAnnotations& notes = {});

}  // namespace crossrl
