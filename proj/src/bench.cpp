#include "mep/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "mep/error.hpp"
#include "mep/random.hpp"

namespace mep {

namespace {

struct Reference {
    std::string_view problem;
    double value;
};

// LGP average test error (percent) on the PROBEN1 permutations
constexpr Reference lgp_table[] = {
    {"cancer1", 2.18},   {"cancer2", 5.72},   {"cancer3", 4.93},   {"diabetes1", 23.96}, {"diabetes2", 27.85},
    {"diabetes3", 23.09}, {"gene1", 12.97},   {"gene2", 11.95},    {"gene3", 13.84},     {"heartc1", 21.12},
    {"heartc2", 7.31},   {"heartc3", 13.98},  {"horse1", 30.55},   {"horse2", 36.12},    {"horse3", 35.44},
    {"thyroid1", 1.91},  {"thyroid2", 2.31},  {"thyroid3", 1.88},
};

// ANN average test error, permutations 1..3
struct AnnReference {
    std::string_view base;
    double value[3];
};
constexpr AnnReference ann_table[] = {
    {"cancer", {1.38, 4.77, 3.70}},    {"card", {14.05, 18.91, 18.84}},  {"diabetes", {24.10, 26.42, 22.59}},
    {"gene", {16.67, 18.41, 21.82}},   {"glass", {32.70, 55.57, 58.40}}, {"heart", {19.72, 17.52, 24.08}},
    {"heartc", {20.82, 5.13, 15.40}},  {"horse", {29.19, 35.86, 34.16}}, {"soybean", {29.40, 5.14, 11.54}},
    {"thyroid", {2.38, 1.91, 2.27}},
};

std::string strip_zeros(std::string s)
{
    if (s.find('.') == std::string::npos)
        return s;
    while (!s.empty() && s.back() == '0')
        s.pop_back();
    if (!s.empty() && s.back() == '.')
        s.pop_back();
    return s;
}

std::string na_reason(const std::string& message)
{
    return message.rfind("N/A", 0) == 0 ? message : "N/A: " + message;
}

} // namespace

std::uint64_t run_seed(std::uint64_t master, std::size_t run)
{
    return splitmix64(splitmix64(master) + run);
}

Stats compute_stats(std::span<const double> values, StddevMode mode)
{
    Stats s;
    if (values.empty())
        return s;
    s.best = *std::min_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values)
        sum += v;
    s.average = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values)
        sq += (v - s.average) * (v - s.average);
    const std::size_t n = values.size();
    const double denom = mode == StddevMode::Sample ? static_cast<double>(n - 1) : static_cast<double>(n);
    s.stddev = denom > 0.0 ? std::sqrt(sq / denom) : 0.0;
    return s;
}

std::string truncate2(double v)
{
    // 9 decimals absorb binary representation noise before the cut
    std::string s = fmt::format("{:.9f}", v);
    const auto dot = s.find('.');
    if (dot != std::string::npos)
        s.resize(dot + 3);
    if (s == "-0.00")
        s = "0.00";
    return s;
}

double format_delta(double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw InputError(fmt::format("delta needs two positive values, got {} and {}", a, b));
    return (b - a) / std::max(a, b) * 100.0;
}

std::string render_delta(double a, double b)
{
    const double d = format_delta(a, b);
    std::string s = strip_zeros(truncate2(d));
    if (s == "0" || s == "-0")
        return "0";
    if (d > 0.0)
        s.insert(s.begin(), '+');
    return s;
}

const BenchCell* BenchmarkResult::find(std::string_view problem, Strategy strategy) const
{
    for (const auto& c : cells)
        if (c.problem == problem && c.strategy == strategy)
            return &c;
    return nullptr;
}

BenchmarkResult run_benchmark(const BenchmarkPlan& plan)
{
    if (plan.runs < 1)
        throw ConfigError("number of runs must be at least 1");
    BenchmarkResult result;
    result.strategies = plan.strategies;
    for (const auto& p : plan.problems) {
        result.problems.push_back(p.name);
        for (Strategy s : plan.strategies) {
            BenchCell cell;
            cell.problem = p.name;
            cell.strategy = s;
            cell.runs.resize(plan.runs);
            const std::size_t classes = p.data.train.num_classes();
            if (is_binary_only(s) && classes != 2)
                cell.na = fmt::format("N/A: strategy {} requires 2 classes", strategy_name(s));
            result.cells.push_back(std::move(cell));
        }
    }

    struct Job {
        std::size_t cell;
        std::size_t problem;
        std::size_t run;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < result.cells.size(); ++c)
        if (!result.cells[c].na)
            for (std::size_t r = 0; r < plan.runs; ++r)
                jobs.push_back({c, c / plan.strategies.size(), r});

    std::vector<std::optional<std::string>> failures(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::exception_ptr fatal;

    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const Job& job = jobs[j];
            BenchCell& cell = result.cells[job.cell];
            const BenchProblem& problem = plan.problems[job.problem];
            EvolutionConfig config = plan.evolution;
            config.strategy.strategy = cell.strategy;
            config.master_seed = run_seed(plan.evolution.master_seed, job.run);
            config.threads = 1;
            config.progress = nullptr;
            try {
                const RunResult r = run(config, problem.data.train, problem.data.validation, problem.data.test);
                cell.runs[job.run] = {job.run, config.master_seed, r.training_error, r.validation_error,
                                      r.test_error, r.seconds};
                if (plan.progress) {
                    std::lock_guard lock(log_mutex);
                    *plan.progress << fmt::format("{} {} run {}: test {:.2f}% ({:.1f}s)\n", problem.name,
                                                  strategy_name(cell.strategy), job.run, r.test_error, r.seconds)
                                   << std::flush;
                }
            } catch (const InputError& e) {
                failures[j] = e.what();
            } catch (const ConfigError& e) {
                failures[j] = e.what();
            } catch (...) {
                std::lock_guard lock(log_mutex);
                if (!fatal)
                    fatal = std::current_exception();
                next = jobs.size();
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(plan.threads, jobs.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }
    if (fatal)
        std::rethrow_exception(fatal);

    // the first failing run (by job order) decides the cell's N/A reason
    for (std::size_t j = 0; j < jobs.size(); ++j)
        if (failures[j] && !result.cells[jobs[j].cell].na)
            result.cells[jobs[j].cell].na = na_reason(*failures[j]);

    for (auto& cell : result.cells) {
        if (cell.na) {
            cell.runs.clear();
            continue;
        }
        std::vector<double> test;
        for (const auto& r : cell.runs)
            test.push_back(r.test_error);
        cell.test = compute_stats(test, plan.stddev);
    }
    return result;
}

std::string render_table(const BenchmarkResult& result)
{
    std::size_t name_width = 8;
    for (const auto& p : result.problems)
        name_width = std::max(name_width, p.size() + 1);

    std::string out = fmt::format("{:<{}}", "Problem", name_width);
    for (Strategy s : result.strategies)
        out += fmt::format("| {:<21}", strategy_name(s));
    out += '\n';
    out += fmt::format("{:<{}}", "", name_width);
    for (std::size_t k = 0; k < result.strategies.size(); ++k)
        out += fmt::format("| {:>6} {:>6} {:>6} ", "Best", "Avg", "Dev");
    out += '\n';

    std::set<std::string> reasons;
    for (const auto& p : result.problems) {
        out += fmt::format("{:<{}}", p, name_width);
        for (Strategy s : result.strategies) {
            const BenchCell* cell = result.find(p, s);
            if (!cell || cell->na) {
                out += fmt::format("| {:>6} {:>6} {:>6} ", "N/A", "N/A", "N/A");
                if (cell && cell->na)
                    reasons.insert(fmt::format("{} {}: {}", p, strategy_name(s), *cell->na));
            } else {
                out += fmt::format("| {:>6} {:>6} {:>6} ", truncate2(cell->test.best), truncate2(cell->test.average),
                                   truncate2(cell->test.stddev));
            }
        }
        out += '\n';
    }
    for (const auto& r : reasons)
        out += r + '\n';
    return out;
}

void write_raw_csv(std::ostream& out, const BenchmarkResult& result)
{
    out << "problem,strategy,run,seed,train_err,valid_err,test_err,seconds\n";
    for (const auto& cell : result.cells)
        for (const auto& r : cell.runs)
            out << fmt::format("{},{},{},{},{},{},{},{:.3f}\n", cell.problem, strategy_name(cell.strategy), r.run,
                               r.seed, r.train_error, r.valid_error, r.test_error, r.seconds);
}

std::optional<double> lgp_reference(std::string_view problem)
{
    for (const auto& r : lgp_table)
        if (r.problem == problem)
            return r.value;
    return std::nullopt;
}

std::optional<double> ann_reference(std::string_view problem)
{
    if (problem.empty())
        return std::nullopt;
    const char last = problem.back();
    if (last < '1' || last > '3')
        return std::nullopt;
    const std::string_view base = problem.substr(0, problem.size() - 1);
    for (const auto& r : ann_table)
        if (r.base == base)
            return r.value[last - '1'];
    return std::nullopt;
}

std::string render_delta_report(const BenchmarkResult& result)
{
    std::string out = fmt::format("{:<12}{:>9}{:>9}{:>10}{:>9}{:>10}\n", "Problem", "MEP avg", "LGP", "Delta", "ANN",
                                  "Delta");
    auto cell_text = [](double mep, std::optional<double> ref) -> std::pair<std::string, std::string> {
        if (!ref)
            return {"-", "-"};
        std::string delta = "n/a";
        if (mep > 0.0)
            delta = render_delta(mep, *ref);
        return {truncate2(*ref), delta};
    };
    for (const auto& p : result.problems) {
        std::optional<double> best;
        for (Strategy s : result.strategies) {
            const BenchCell* cell = result.find(p, s);
            if (cell && !cell->na && (!best || cell->test.average < *best))
                best = cell->test.average;
        }
        if (!best) {
            out += fmt::format("{:<12}{:>9}\n", p, "N/A");
            continue;
        }
        const auto [lgp, lgp_delta] = cell_text(*best, lgp_reference(p));
        const auto [ann, ann_delta] = cell_text(*best, ann_reference(p));
        out += fmt::format("{:<12}{:>9}{:>9}{:>10}{:>9}{:>10}\n", p, truncate2(*best), lgp, lgp_delta, ann, ann_delta);
    }
    return out;
}

} // namespace mep
