// Acceptance checks: prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
//
// The benchmark datasets are read from data/proben1 in the source tree, or
// from $MEP_PROBEN1_DIR when set.

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "mep/bench.hpp"
#include "mep/config.hpp"
#include "mep/error.hpp"
#include "support.hpp"

using namespace mep;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void fail(std::string why)
    {
        if (ok)
            detail = std::move(why);
        ok = false;
    }
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Check oracle_equivalence()
{
    Check c;
    Rng rng(1001);
    const PrimitiveSet ps = testing::all_functions(5, 4);
    std::size_t invalid = 0;
    for (int t = 0; t < 1000 && c.ok; ++t) {
        const Chromosome ch = new_random(ps, 1 + rng.index(64), {-2.0, 2.0}, rng);
        const DataMatrix d = testing::tricky_data(rng, 1 + rng.index(50), 5);
        const EvalMatrix m = evaluate(ch, d);
        const auto o = testing::oracle_evaluate(ch, d);
        for (std::size_t i = 0; i < ch.length(); ++i) {
            if (m.valid(i) != o.valid[i]) {
                c.fail(fmt::format("instance {}: gene {} validity differs", t, i));
                break;
            }
            if (!m.valid(i)) {
                ++invalid;
                continue;
            }
            for (std::size_t r = 0; r < d.rows(); ++r)
                if (!same_bits(m.at(i, r), o.values[i][r]))
                    c.fail(fmt::format("instance {}: gene {} row {} differs", t, i, r));
        }
    }
    if (c.ok)
        c.detail = fmt::format("1000 chromosomes, {} invalid genes cross-checked", invalid);
    return c;
}

Check bat_optimality()
{
    Check c;
    Rng rng(2002);
    for (int t = 0; t < 500 && c.ok; ++t) {
        const std::size_t n = 1 + rng.index(200);
        std::vector<double> v(n);
        const bool coarse = t % 2 == 0; // half the instances with many ties
        for (double& x : v)
            x = coarse ? static_cast<double>(rng.index(10)) : rng.uniform(-100, 100);
        const auto y = testing::random_labels(rng, n, 2);
        const std::size_t got = fit_bat(testing::make_eval({v}), y).misclassified;
        const std::size_t want = testing::exhaustive_threshold_errors(v, y);
        if (got != want)
            c.fail(fmt::format("instance {}: {} errors, exhaustive {}", t, got, want));
    }
    if (c.ok)
        c.detail = "500 instances match exhaustive search";
    return c;
}

Check wta_d_correctness()
{
    Check c;
    Rng rng(3003);
    for (int t = 0; t < 500 && c.ok; ++t) {
        const std::size_t classes = 2 + rng.index(2);
        const std::size_t genes = classes + rng.index(9 - classes);
        const std::size_t rows = classes + rng.index(21 - classes);
        std::vector<std::vector<double>> g(genes, std::vector<double>(rows));
        for (auto& gene : g)
            for (double& x : gene)
                x = static_cast<double>(rng.index(5));
        std::vector<std::uint8_t> valid(genes, 1);
        for (auto& f : valid)
            f = rng.index(6) != 0;
        const EvalMatrix ev = testing::make_eval(g, valid);
        const auto y = testing::random_labels(rng, rows, classes);
        const auto b = build_output_matrix(ev, y);
        const auto oracle = testing::brute_force_b(ev, y);
        for (std::size_t i = 0; i < genes; ++i)
            for (std::size_t k = 0; k < classes; ++k)
                if (b.at(i, k) != oracle[i][k])
                    c.fail(fmt::format("instance {}: B({}, {}) = {}, recount {}", t, i, k, b.at(i, k), oracle[i][k]));
        if (ev.count_valid() < classes)
            continue;
        const std::size_t bound = testing::exhaustive_assignment(oracle, valid, classes);
        for (auto mode : {AssignmentMode::GreedyPerClass, AssignmentMode::GlobalMin}) {
            const auto rep = fit_wta_d(ev, y, mode);
            if (!rep.decoder) {
                c.fail(fmt::format("instance {}: no assignment", t));
                continue;
            }
            auto genes_used = rep.decoder->assigned_genes;
            std::sort(genes_used.begin(), genes_used.end());
            if (std::adjacent_find(genes_used.begin(), genes_used.end()) != genes_used.end())
                c.fail(fmt::format("instance {}: repeated output gene", t));
            if (rep.fitness < static_cast<double>(bound))
                c.fail(fmt::format("instance {}: fitness {} below exhaustive minimum {}", t, rep.fitness, bound));
        }
    }
    if (c.ok)
        c.detail = "500 instances, B exact, both assignments distinct and bounded";
    return c;
}

Check predict_round_trip()
{
    Check c;
    Rng rng(4004);
    const PrimitiveSet ps = testing::all_functions(4, 3);
    std::size_t checked = 0;
    for (int t = 0; t < 200 && c.ok; ++t) {
        const Chromosome ch = new_random(ps, 4 + rng.index(30), {0.0, 1.0}, rng);
        const DataMatrix d = testing::tricky_data(rng, 5 + rng.index(40), 4);
        const EvalMatrix ev = evaluate(ch, d);
        for (Strategy s : {Strategy::Regression, Strategy::Bet, Strategy::Bat, Strategy::WtaF, Strategy::WtaS,
                           Strategy::WtaD, Strategy::Cc}) {
            const std::size_t classes = is_binary_only(s) ? 2 : 2 + rng.index(3);
            const auto y = testing::random_labels(rng, d.rows(), classes);
            const auto mode = rng.coin() ? AssignmentMode::GlobalMin : AssignmentMode::GreedyPerClass;
            const auto rep = fit({s, mode}, ch, ev, y);
            if (!rep.decoder)
                continue;
            const ClassifierModel m{ch, *rep.decoder, 4, {}, {}};
            const ClassifierModel loaded = parse_model(model_to_text(m));
            std::size_t wrong = 0;
            const auto preds = predict_all(loaded, d);
            for (std::size_t r = 0; r < d.rows(); ++r)
                wrong += preds[r].label != y[r];
            ++checked;
            if (wrong != rep.misclassified)
                c.fail(fmt::format("instance {}, {}: {} re-predicted errors, fitness report {}", t, strategy_name(s),
                                   wrong, rep.misclassified));
        }
    }
    if (c.ok)
        c.detail = fmt::format("{} fitted models re-predicted through saved files", checked);
    return c;
}

Dataset synthetic(std::size_t rows, std::size_t features, std::size_t classes, std::uint64_t seed)
{
    Rng rng(seed);
    return Dataset{testing::uniform_data(rng, rows, features), testing::random_labels(rng, rows, classes), {}, {}};
}

bool same_run(const RunResult& a, const RunResult& b)
{
    return a.best_model == b.best_model && a.trace == b.trace && a.training_error == b.training_error &&
           a.validation_error == b.validation_error && a.test_error == b.test_error &&
           a.best_generation == b.best_generation && a.training_fitness == b.training_fitness;
}

Check engine_properties()
{
    Check c;
    const SplitResult parts = split(synthetic(120, 4, 3, 5005), SplitSpec{});
    for (Strategy s : {Strategy::WtaD, Strategy::Cc, Strategy::WtaS}) {
        EvolutionConfig cfg = default_evolution();
        cfg.subpop_size = 21; // odd, so the last step drops one child
        cfg.num_subpops = 3;
        cfg.chromosome_length = 16;
        cfg.num_generations = 12;
        cfg.strategy.strategy = s;
        cfg.master_seed = 77;

        cfg.threads = 1;
        const RunResult one = run(cfg, parts.train, parts.validation, parts.test);
        cfg.threads = 4;
        const RunResult four = run(cfg, parts.train, parts.validation, parts.test);
        if (!same_run(one, four))
            c.fail(fmt::format("{}: 1 and 4 threads differ", strategy_name(s)));
        if (!same_run(one, run(cfg, parts.train, parts.validation, parts.test)))
            c.fail(fmt::format("{}: repeated run differs", strategy_name(s)));

        if (one.trace.size() != cfg.num_generations + 1)
            c.fail("trace length");
        for (std::size_t g = 1; g < one.trace.size(); ++g)
            if (one.trace[g] > one.trace[g - 1])
                c.fail(fmt::format("{}: trace rises at generation {}", strategy_name(s), g));

        // offspring quota, counted through evaluated cells
        cfg.threads = 1;
        Evolution evo(cfg, parts.train, parts.validation);
        evo.initialize();
        for (int g = 0; g < 3; ++g) {
            const std::uint64_t before = evaluated_cells();
            evo.advance();
            const std::uint64_t cells = evaluated_cells() - before;
            const std::uint64_t expected = cfg.num_subpops * cfg.subpop_size * cfg.chromosome_length * parts.train.rows() +
                                           cfg.chromosome_length * parts.validation.rows();
            if (cells != expected || evo.history().back().offspring_per_subpop != cfg.subpop_size)
                c.fail(fmt::format("{}: {} cells evaluated, quota implies {}", strategy_name(s), cells, expected));
        }
    }
    if (c.ok)
        c.detail = "trace non-increasing, quota exact, 1 and 4 threads identical";
    return c;
}

std::filesystem::path proben1_dir()
{
    if (const char* env = std::getenv("MEP_PROBEN1_DIR"))
        return env;
    return std::filesystem::path(MEP_SOURCE_DIR) / "data" / "proben1";
}

Check split_sizes_check()
{
    Check c;
    const auto cancer = split_sizes(699, SplitSpec{});
    const auto gene = split_sizes(3175, SplitSpec{});
    if (cancer != std::array<std::size_t, 3>{350, 175, 174})
        c.fail(fmt::format("cancer sizes {}+{}+{}", cancer[0], cancer[1], cancer[2]));
    if (gene != std::array<std::size_t, 3>{1588, 794, 793})
        c.fail(fmt::format("gene sizes {}+{}+{}", gene[0], gene[1], gene[2]));

    const SplitResult g = split(synthetic(3175, 3, 3, 6006), SplitSpec{});
    if (g.train.rows() != 1588 || g.validation.rows() != 794 || g.test.rows() != 793)
        c.fail("gene-sized split differs from split_sizes");

    const auto path = proben1_dir() / "cancer1.dt";
    try {
        const Dataset d = load_dataset(path);
        const SplitResult s = split(d, SplitSpec{});
        if (s.train.rows() != 350 || s.validation.rows() != 175 || s.test.rows() != 174)
            c.fail(fmt::format("{} splits {}+{}+{}", path.string(), s.train.rows(), s.validation.rows(), s.test.rows()));
    } catch (const std::exception& e) {
        c.fail(e.what());
    }
    if (c.ok)
        c.detail = "350+175+174 and 1588+794+793";
    return c;
}

Check scaled_benchmark()
{
    Check c;
    struct Target {
        const char* problem;
        Strategy strategy;
        double limit;
    };
    std::vector<std::string> lines;
    for (const Target& t : {Target{"cancer1", Strategy::Bat, 6.0}, Target{"diabetes1", Strategy::Cc, 30.0}}) {
        BenchmarkPlan plan;
        try {
            plan.problems.push_back({t.problem, split(load_dataset(proben1_dir() / (std::string(t.problem) + ".dt")),
                                                      SplitSpec{})});
        } catch (const std::exception& e) {
            lines.push_back(e.what());
            c.ok = false;
            continue;
        }
        plan.strategies = {t.strategy};
        plan.evolution = default_evolution();
        plan.evolution.num_subpops = 2;
        plan.evolution.subpop_size = 100;
        plan.evolution.chromosome_length = 64;
        plan.evolution.num_generations = 100;
        plan.evolution.master_seed = 2024;
        plan.runs = 10;
        plan.threads = std::max(1u, std::thread::hardware_concurrency());
        const auto start = std::chrono::steady_clock::now();
        const BenchmarkResult r = run_benchmark(plan);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const BenchCell* cell = r.find(t.problem, t.strategy);
        if (!cell || cell->na) {
            lines.push_back(fmt::format("{} {}: not applicable", t.problem, strategy_name(t.strategy)));
            c.ok = false;
            continue;
        }
        lines.push_back(fmt::format("{} {} avg {}% (limit {}%, best {}%, dev {}, {:.0f}s)", t.problem,
                                    strategy_name(t.strategy), truncate2(cell->test.average), t.limit,
                                    truncate2(cell->test.best), truncate2(cell->test.stddev), seconds));
        if (cell->test.average > t.limit)
            c.ok = false;
    }
    // report both problems whatever the outcome
    for (const auto& line : lines)
        c.detail += (c.detail.empty() ? "" : "; ") + line;
    return c;
}

Check delta_values()
{
    Check c;
    const std::string a = render_delta(1.46, 1.91);
    const std::string b = render_delta(2.2, 2.18);
    if (a != "+23.56")
        c.fail("(1.46, 1.91) gave " + a);
    if (b != "-0.9")
        c.fail("(2.2, 2.18) gave " + b);
    if (c.ok)
        c.detail = "+23.56 and -0.9";
    return c;
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
        {"evaluation matches recursive oracle", oracle_equivalence},
        {"automatic threshold is optimal", bat_optimality},
        {"dynamic winner-takes-all matrix and assignment", wta_d_correctness},
        {"prediction reproduces fitness errors", predict_round_trip},
        {"engine trace, quota and determinism", engine_properties},
        {"split sizes", split_sizes_check},
        {"scaled benchmark error bands", scaled_benchmark},
        {"delta formatting", delta_values},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Check c;
        try {
            c = criteria[k].second();
        } catch (const std::exception& e) {
            c.fail(std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << fmt::format("criterion {} {}: {} ({}; {:.1f}s)", k + 1, c.ok ? "PASS" : "FAIL", criteria[k].first,
                                 c.detail, seconds)
                  << std::endl;
        failed += c.ok ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
