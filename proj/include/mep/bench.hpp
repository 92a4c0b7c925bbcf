#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mep/config.hpp"
#include "mep/dataset.hpp"
#include "mep/engine.hpp"

namespace mep {

/// Seed of run `run` in a benchmark: splitmix64(splitmix64(master) + run).
std::uint64_t run_seed(std::uint64_t master, std::size_t run);

struct Stats {
    double best = 0.0;
    double average = 0.0;
    double stddev = 0.0;
};

/// Best (minimum), mean and standard deviation. Population deviation divides
/// by n, sample deviation by n - 1 (0 when n = 1).
Stats compute_stats(std::span<const double> values, StddevMode mode = StddevMode::Population);

/// Cuts (does not round) `v` after the second decimal: 2.628 -> "2.62".
/// Decimal rounding noise is removed first, so 2.62 stored as 2.6199999... stays "2.62".
std::string truncate2(double v);

/// Signed difference in percent between result `a` and reference `b`:
/// (b - a) / max(a, b) * 100. Positive means `a` is smaller (better).
/// Throws InputError unless both are positive.
double format_delta(double a, double b);

/// format_delta truncated after two decimals, without trailing zeros, signed:
/// "+23.56", "-0.9", "0".
std::string render_delta(double a, double b);

/// One finished run of one (problem, strategy) cell.
struct RunRecord {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double train_error = 0.0;
    double valid_error = 0.0;
    double test_error = 0.0;
    double seconds = 0.0;
};

struct BenchCell {
    std::string problem;
    Strategy strategy = Strategy::Bat;
    std::vector<RunRecord> runs;      // ordered by run index
    std::optional<std::string> na;    // reason the cell does not apply
    Stats test{};
};

struct BenchmarkResult {
    std::vector<std::string> problems;
    std::vector<Strategy> strategies;
    std::vector<BenchCell> cells; // problem-major

    const BenchCell* find(std::string_view problem, Strategy strategy) const;
};

struct BenchProblem {
    std::string name;
    SplitResult data;
};

struct BenchmarkPlan {
    std::vector<BenchProblem> problems;
    std::vector<Strategy> strategies;
    EvolutionConfig evolution;  // master_seed is the benchmark master seed
    std::size_t runs = 30;
    unsigned threads = 1;       // runs executed concurrently
    StddevMode stddev = StddevMode::Population;
    std::ostream* progress = nullptr; // one line per finished run
};

/// Runs every (problem, strategy, run) job. Each run is single-threaded and
/// seeded from run_seed, so the result does not depend on `threads`.
BenchmarkResult run_benchmark(const BenchmarkPlan& plan);

/// Best/Avg/Dev of test error per strategy, one row per problem; values
/// truncated after two decimals, "N/A" where a strategy does not apply.
std::string render_table(const BenchmarkResult& result);

/// Columns problem,strategy,run,seed,train_err,valid_err,test_err,seconds.
void write_raw_csv(std::ostream& out, const BenchmarkResult& result);

/// Published average test errors used by the comparison report.
std::optional<double> lgp_reference(std::string_view problem);
std::optional<double> ann_reference(std::string_view problem);

/// Compares the best strategy average of each problem with the LGP and ANN
/// references. Problems without references are listed with "-".
std::string render_delta_report(const BenchmarkResult& result);

} // namespace mep
