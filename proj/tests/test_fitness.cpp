#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mep/error.hpp"
#include "support.hpp"

using namespace mep;
using testing::make_eval;

namespace {

LabelVector labels(std::vector<std::uint32_t> v, std::size_t classes) { return LabelVector(std::move(v), classes); }

// misclassifications of the fitted decoder, recomputed through decide() row by row
std::size_t redecide(const OutputDecoder& d, const EvalMatrix& ev, const LabelVector& y)
{
    std::size_t wrong = 0;
    std::vector<double> row(ev.num_genes);
    for (std::size_t r = 0; r < ev.num_rows; ++r) {
        for (std::size_t i = 0; i < ev.num_genes; ++i)
            row[i] = ev.at(i, r);
        wrong += decide(d, row, ev.gene_valid).label != y[r];
    }
    return wrong;
}

} // namespace

TEST_CASE("label vector")
{
    CHECK_THROWS_AS(LabelVector({0, 1}, 1), InputError);
    CHECK_THROWS_AS(LabelVector({0, 2}, 2), InputError);
    const LabelVector y({0, 1, 1, 2}, 3);
    CHECK(y.class_counts() == std::vector<std::size_t>{1, 2, 1});
}

TEST_CASE("strategy names")
{
    for (Strategy s : {Strategy::Regression, Strategy::Bet, Strategy::Bat, Strategy::WtaF, Strategy::WtaS,
                       Strategy::WtaD, Strategy::Cc})
        CHECK(parse_strategy(strategy_name(s)) == s);
    CHECK(strategy_name(Strategy::WtaD) == "wta-d");
    CHECK_FALSE(parse_strategy("svm"));
    CHECK(is_binary_only(Strategy::Bet));
    CHECK(is_binary_only(Strategy::Bat));
    CHECK_FALSE(is_binary_only(Strategy::Cc));
}

TEST_CASE("regression")
{
    const std::vector<double> targets{1.0, 2.0, 3.0};
    SUBCASE("exact gene wins")
    {
        const auto r = fit_regression(make_eval({{0, 0, 0}, {1, 2, 3}}), targets);
        CHECK(r.fitness == 0.0);
        CHECK(r.decoder->output_gene == 1);
    }
    SUBCASE("minimum over genes")
    {
        // errors 5 and 2
        const auto r = fit_regression(make_eval({{3, 4, 2}, {1, 2, 5}}), targets);
        CHECK(r.fitness == 2.0);
        CHECK(r.decoder->output_gene == 1);
    }
    SUBCASE("invalid genes are skipped")
    {
        const auto r = fit_regression(make_eval({{1, 2, 3}, {1, 2, 4}}, {0, 1}), targets);
        CHECK(r.fitness == 1.0);
        CHECK(r.decoder->output_gene == 1);
    }
    SUBCASE("no valid gene")
    {
        const auto r = fit_regression(make_eval({{1, 2, 3}}, {0}), targets);
        CHECK_FALSE(r.decoder);
        CHECK(r.fitness == worst_fitness(Strategy::Regression, 3, 2));
    }
    SUBCASE("matches per-gene absolute error sums")
    {
        Rng rng(5);
        for (int t = 0; t < 50; ++t) {
            std::vector<std::vector<double>> genes(1 + rng.index(6), std::vector<double>(8));
            std::vector<double> y(8);
            for (auto& g : genes)
                for (double& v : g)
                    v = rng.uniform(-3, 3);
            for (double& v : y)
                v = rng.uniform(-3, 3);
            double best = INFINITY;
            std::size_t arg = 0;
            for (std::size_t i = 0; i < genes.size(); ++i) {
                double e = 0;
                for (std::size_t r = 0; r < 8; ++r)
                    e += std::abs(genes[i][r] - y[r]);
                if (e < best) {
                    best = e;
                    arg = i;
                }
            }
            const auto rep = fit_regression(make_eval(genes), y);
            CHECK(rep.fitness == best);
            CHECK(rep.decoder->output_gene == arg);
        }
    }
}

TEST_CASE("evolved threshold")
{
    const auto y = labels({0, 1}, 2);
    CHECK(fit_bet(make_eval({{0.1, 0.9}}), y, 0.5).fitness == 0.0);
    // threshold below every value: everything is class 1
    CHECK(fit_bet(make_eval({{0.1, 0.9}}), y, 0.0).misclassified == 1);
    // equal to the threshold means class 0
    CHECK(fit_bet(make_eval({{0.5, 0.9}}), y, 0.5).fitness == 0.0);
    CHECK_THROWS_AS(fit_bet(make_eval({{0, 1, 2}}), labels({0, 1, 2}, 3), 0.5), ConfigError);
}

TEST_CASE("automatic threshold")
{
    SUBCASE("separable")
    {
        const auto t = best_threshold(std::vector<double>{1, 2, 3, 4}, labels({0, 0, 1, 1}, 2));
        CHECK(t.threshold == 2.0);
        CHECK(t.errors == 0);
    }
    SUBCASE("all class 1: below the minimum")
    {
        const auto t = best_threshold(std::vector<double>{3, 1, 2}, labels({1, 1, 1}, 2));
        CHECK(t.errors == 0);
        CHECK(t.threshold < 1.0);
    }
    SUBCASE("all class 0: the maximum")
    {
        const auto t = best_threshold(std::vector<double>{3, 1, 2}, labels({0, 0, 0}, 2));
        CHECK(t.errors == 0);
        CHECK(t.threshold == 3.0);
    }
    SUBCASE("huge values still get a threshold below the minimum")
    {
        const auto t = best_threshold(std::vector<double>{1e300, 2e300}, labels({1, 1}, 2));
        CHECK(t.errors == 0);
        CHECK(t.threshold < 1e300);
    }
    SUBCASE("ties keep the smallest threshold")
    {
        // thresholds 1 and 3 both give one error
        const auto t = best_threshold(std::vector<double>{1, 2, 3}, labels({0, 1, 0}, 2));
        CHECK(t.errors == 1);
        CHECK(t.threshold == 1.0);
    }
    SUBCASE("equal values move together")
    {
        const auto t = best_threshold(std::vector<double>{1, 1, 2}, labels({0, 1, 1}, 2));
        CHECK(t.errors == 1);
    }
    SUBCASE("optimal against exhaustive search")
    {
        Rng rng(77);
        for (int t = 0; t < 300; ++t) {
            const std::size_t n = 1 + rng.index(40);
            std::vector<double> v(n);
            for (double& x : v)
                x = static_cast<double>(rng.index(8)) * 0.5; // many ties
            const auto y = testing::random_labels(rng, n, 2);
            const auto fit = best_threshold(v, y);
            CHECK(fit.errors == testing::exhaustive_threshold_errors(v, y));
            CHECK(testing::threshold_errors(v, y, fit.threshold) == fit.errors);
        }
    }
    SUBCASE("fit_bat takes the best gene")
    {
        const auto rep = fit_bat(make_eval({{4, 3, 2, 1}, {1, 2, 3, 4}}), labels({0, 0, 1, 1}, 2));
        CHECK(rep.fitness == 0.0);
        CHECK(rep.decoder->output_gene == 1);
        CHECK(rep.decoder->threshold == 2.0);
    }
}

TEST_CASE("winner takes all, fixed")
{
    SUBCASE("argmax address mod classes")
    {
        const auto y = labels({1}, 2);
        const auto rep = fit_wta_f(make_eval({{0.3}, {0.7}, {0.5}, {0.2}}), y);
        CHECK(rep.misclassified == 0);
    }
    SUBCASE("ties: first occurrence")
    {
        const auto rep = fit_wta_f(make_eval({{1.0}, {1.0}, {1.0}}), labels({0}, 3));
        CHECK(rep.misclassified == 0);
        const auto rep2 = fit_wta_f(make_eval({{1.0}, {1.0}, {1.0}}), labels({1}, 3));
        CHECK(rep2.misclassified == 1);
    }
    SUBCASE("three classes, address 4 serves class 1")
    {
        const auto rep = fit_wta_f(make_eval({{0}, {0}, {0}, {0}, {9}, {0}}), labels({1}, 3));
        CHECK(rep.misclassified == 0);
    }
    SUBCASE("invalid genes never win")
    {
        const auto rep = fit_wta_f(make_eval({{0.1}, {9.0}}, {1, 0}), labels({0}, 2));
        CHECK(rep.misclassified == 0);
        CHECK(rep.decoder->excluded_genes == std::vector<std::size_t>{1});
    }
    SUBCASE("chromosome shorter than the class count")
    {
        CHECK_THROWS_AS(fit_wta_f(make_eval({{0.1, 0.2, 0.3}, {0.2, 0.1, 0.0}}), labels({0, 1, 2}, 3)), ConfigError);
    }
    SUBCASE("strictly increasing transforms keep the prediction")
    {
        Rng rng(12);
        for (int t = 0; t < 100; ++t) {
            std::vector<std::vector<double>> g(6, std::vector<double>(5)), h = g;
            for (std::size_t i = 0; i < 6; ++i)
                for (std::size_t r = 0; r < 5; ++r) {
                    g[i][r] = rng.uniform(-2, 2);
                    h[i][r] = std::exp(g[i][r]) * 3 + 1;
                }
            const auto y = testing::random_labels(rng, 5, 3);
            CHECK(fit_wta_f(make_eval(g), y).misclassified == fit_wta_f(make_eval(h), y).misclassified);
        }
    }
}

TEST_CASE("winner takes all, smoothed")
{
    SUBCASE("clear winners add no penalty")
    {
        // genes 0, 2 -> class 0; genes 1, 3 -> class 1; rows labelled 0, 1
        const auto ev = make_eval({{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.2}, {0.2, 0.5}});
        const auto y = labels({0, 1}, 2);
        const auto rep = fit_wta_s(ev, y);
        CHECK(rep.fitness == fit_wta_f(ev, y).fitness);
        CHECK(rep.fitness == 0.0);
    }
    SUBCASE("a tie with one wrong class costs exactly 1")
    {
        // class 0 genes {0, 2} span [0, 1]; class 1 genes {1, 3} span [0, 1]
        const auto ev = make_eval({{1.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}});
        const auto y = labels({0, 1}, 2);
        const auto rep = fit_wta_s(ev, y);
        // row 0: m0 = 1, m1 = 1 -> first occurrence is gene 0, correct, penalty 1
        // row 1: m0 = 0, m1 = 1 -> correct, no penalty
        CHECK(rep.misclassified == 0);
        CHECK(rep.fitness == 1.0);
    }
    SUBCASE("penalty grows with the gap")
    {
        const auto ev = make_eval({{0.0, 1.0}, {1.0, 0.0}});
        const auto y = labels({0, 1}, 2);
        const auto rep = fit_wta_s(ev, y);
        // row 0: m0 = 0, m1 = 1 -> wrong, penalty 1 + 1; row 1: m0 = 1, m1 = 0 -> wrong, penalty 2
        CHECK(rep.misclassified == 2);
        CHECK(rep.fitness == 2.0 + 4.0);
    }
    SUBCASE("large raw outputs are scaled into [0, 1]")
    {
        const auto ev = make_eval({{10.0, 1000.0, 500.0}, {0.2, 0.1, 0.9}});
        const auto y = labels({0, 0, 1}, 2);
        const auto rep = fit_wta_s(ev, y);
        REQUIRE(rep.decoder);
        CHECK(rep.decoder->scale_min[0] == 10.0);
        CHECK(rep.decoder->scale_max[0] == 1000.0);
        // row 2: class 0 scaled (500 - 10) / 990 < class 1 scaled 1.0
        CHECK(rep.misclassified == 1);
        CHECK(rep.fitness < worst_fitness(Strategy::WtaS, 3, 2));
    }
}

TEST_CASE("winner takes all, dynamic")
{
    SUBCASE("gene attaining every class-k maximum has B = 0")
    {
        const auto ev = make_eval({{5, 0, 5}, {0, 5, 0}, {1, 1, 1}});
        const auto y = labels({0, 1, 0}, 2);
        const auto b = build_output_matrix(ev, y);
        CHECK(b.at(0, 0) == 0);
        CHECK(b.at(1, 1) == 0);
        CHECK(b.at(0, 1) == 1);
        CHECK(b.at(2, 0) == 2);
        const auto rep = fit_wta_d(ev, y, AssignmentMode::GreedyPerClass);
        CHECK(rep.fitness == 0.0);
        CHECK(rep.decoder->assigned_genes == std::vector<std::size_t>{0, 1});
        CHECK(rep.misclassified == 0);
    }
    SUBCASE("ties count as attaining the maximum")
    {
        const auto ev = make_eval({{2}, {2}});
        const auto b = build_output_matrix(ev, labels({0}, 2));
        CHECK(b.at(0, 0) == 0);
        CHECK(b.at(1, 0) == 0);
    }
    SUBCASE("assigned genes are distinct")
    {
        // both modes must hand out distinct genes
        const auto ev = make_eval({{1, 1}, {1, 0}, {0, 1}});
        const auto y = labels({0, 1}, 2);
        for (auto mode : {AssignmentMode::GreedyPerClass, AssignmentMode::GlobalMin}) {
            const auto rep = fit_wta_d(ev, y, mode);
            CHECK(rep.decoder->assigned_genes[0] != rep.decoder->assigned_genes[1]);
        }
    }
    SUBCASE("fewer valid genes than classes")
    {
        const auto rep = fit_wta_d(make_eval({{1}, {2}, {3}}, {1, 0, 0}), labels({0}, 2), AssignmentMode::GlobalMin);
        CHECK_FALSE(rep.decoder);
        CHECK(rep.fitness == worst_fitness(Strategy::WtaD, 1, 2));
    }
    SUBCASE("random instances against brute force")
    {
        Rng rng(31);
        for (int t = 0; t < 200; ++t) {
            const std::size_t classes = 2 + rng.index(2);
            const std::size_t genes = classes + rng.index(9 - classes);
            const std::size_t rows = 1 + rng.index(20);
            std::vector<std::vector<double>> g(genes, std::vector<double>(rows));
            for (auto& gene : g)
                for (double& v : gene)
                    v = static_cast<double>(rng.index(4));
            std::vector<std::uint8_t> valid(genes);
            for (auto& f : valid)
                f = rng.index(5) != 0;
            const auto ev = make_eval(g, valid);
            const auto y = testing::random_labels(rng, rows, classes);
            const auto b = build_output_matrix(ev, y);
            const auto oracle = testing::brute_force_b(ev, y);
            for (std::size_t i = 0; i < genes; ++i)
                for (std::size_t k = 0; k < classes; ++k)
                    REQUIRE(b.at(i, k) == oracle[i][k]);
            const std::size_t valid_count = ev.count_valid();
            for (auto mode : {AssignmentMode::GreedyPerClass, AssignmentMode::GlobalMin}) {
                const auto rep = fit_wta_d(ev, y, mode);
                if (valid_count < classes) {
                    CHECK_FALSE(rep.decoder);
                    continue;
                }
                REQUIRE(rep.decoder);
                CHECK(rep.fitness >= static_cast<double>(testing::exhaustive_assignment(oracle, valid, classes)));
                CHECK(redecide(*rep.decoder, ev, y) == rep.misclassified);
            }
        }
    }
}

TEST_CASE("closest center")
{
    SUBCASE("hand computed centers")
    {
        const auto rep = fit_cc(make_eval({{0.0, 0.2, 1.0, 1.2}}), labels({0, 0, 1, 1}, 2));
        CHECK(rep.misclassified == 0);
        CHECK(rep.decoder->centers[0] == doctest::Approx(0.1));
        CHECK(rep.decoder->centers[1] == doctest::Approx(1.1));
    }
    SUBCASE("equidistant goes to the lowest class")
    {
        OutputDecoder d;
        d.strategy = Strategy::Cc;
        d.num_classes = 2;
        d.centers = {0.0, 1.0};
        const std::vector<double> v{0.5};
        const std::vector<std::uint8_t> ok{1};
        CHECK(decide(d, v, ok).label == 0);
    }
    SUBCASE("identical values: everything is class 0")
    {
        const auto rep = fit_cc(make_eval({{3.0, 3.0, 3.0}}), labels({0, 1, 1}, 2));
        CHECK(rep.misclassified == 2);
    }
    SUBCASE("empty class")
    {
        CHECK_THROWS_AS(fit_cc(make_eval({{1.0, 2.0}}), labels({0, 0}, 3)), InputError);
    }
    SUBCASE("translation shifts centers and keeps the error count")
    {
        Rng rng(8);
        for (int t = 0; t < 100; ++t) {
            const std::size_t rows = 3 + rng.index(20);
            std::vector<double> g(rows);
            // dyadic values keep the shifted sums exact
            for (double& v : g)
                v = static_cast<double>(rng.index(64)) / 8.0;
            const double shift = static_cast<double>(rng.index(64)) / 4.0 - 8.0;
            std::vector<double> h = g;
            for (double& v : h)
                v += shift;
            const auto y = testing::random_labels(rng, rows, 3);
            const auto a = fit_cc(make_eval({g}), y);
            const auto b = fit_cc(make_eval({h}), y);
            CHECK(a.misclassified == b.misclassified);
            for (std::size_t c = 0; c < 3; ++c)
                CHECK(b.decoder->centers[c] == doctest::Approx(a.decoder->centers[c] + shift));
        }
    }
}

TEST_CASE("fitness values are non-negative and bounded by the worst value")
{
    Rng rng(55);
    const PrimitiveSet ps = testing::all_functions(3, 2);
    for (int t = 0; t < 100; ++t) {
        const std::size_t classes = 2 + rng.index(2);
        const Chromosome c = new_random(ps, 12, {0.0, 1.0}, rng);
        const DataMatrix d = testing::tricky_data(rng, 15, 3);
        const auto y = testing::random_labels(rng, 15, classes);
        const EvalMatrix ev = evaluate(c, d);
        for (Strategy s : {Strategy::WtaF, Strategy::WtaS, Strategy::WtaD, Strategy::Cc, Strategy::Regression}) {
            const auto rep = fit({s, AssignmentMode::GreedyPerClass}, c, ev, y);
            CHECK(rep.fitness >= 0.0);
            CHECK(rep.fitness <= worst_fitness(s, 15, classes));
            CHECK(rep.misclassified <= 15);
        }
    }
}

TEST_CASE("binary strategies reject more classes")
{
    const Chromosome c = testing::identity_chromosome(1);
    const auto ev = make_eval({{0, 1, 2}});
    try {
        fit({Strategy::Bat, AssignmentMode::GreedyPerClass}, c, ev, labels({0, 1, 2}, 3));
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("N/A") != std::string::npos);
    }
}

TEST_CASE("prediction reproduces the training error for every strategy")
{
    Rng rng(404);
    const PrimitiveSet ps = testing::all_functions(4, 2);
    for (int t = 0; t < 60; ++t) {
        const Chromosome c = new_random(ps, 16, {0.0, 1.0}, rng);
        const DataMatrix d = testing::tricky_data(rng, 20, 4);
        const EvalMatrix ev = evaluate(c, d);
        for (Strategy s : {Strategy::Regression, Strategy::Bet, Strategy::Bat, Strategy::WtaF, Strategy::WtaS,
                           Strategy::WtaD, Strategy::Cc}) {
            const std::size_t classes = is_binary_only(s) ? 2 : 2 + rng.index(3);
            const auto y = testing::random_labels(rng, 20, classes);
            for (auto mode : {AssignmentMode::GreedyPerClass, AssignmentMode::GlobalMin}) {
                const auto rep = fit({s, mode}, c, ev, y);
                if (!rep.decoder)
                    continue;
                ClassifierModel m{c, *rep.decoder, 4, {}, {}};
                std::size_t wrong = 0;
                const auto preds = predict_all(m, d);
                for (std::size_t r = 0; r < d.rows(); ++r)
                    wrong += preds[r].label != y[r];
                CHECK(wrong == rep.misclassified);
            }
        }
    }
}

TEST_CASE("invalid rows are flagged at prediction time")
{
    // gene 2 = x0 / x1 is fine on the training rows
    Chromosome c;
    c.genes = {Gene::variable(0), Gene::variable(1), Gene::function(Op::Div, {0, 1})};
    OutputDecoder d;
    d.strategy = Strategy::Bat;
    d.output_gene = 2;
    d.threshold = 1.0;
    const ClassifierModel m{c, d, 2, {}, {}};
    const auto ok = predict(m, std::vector<double>{3.0, 1.0});
    CHECK(ok.label == 1);
    CHECK_FALSE(ok.invalid);
    const auto bad = predict(m, std::vector<double>{3.0, 0.0});
    CHECK(bad.label == 0);
    CHECK(bad.invalid);
    CHECK_THROWS_AS(predict(m, std::vector<double>{1.0}), InputError);
}

TEST_CASE("model files")
{
    Rng rng(9);
    const PrimitiveSet ps = testing::all_functions(3, 4);
    for (int t = 0; t < 40; ++t) {
        const Chromosome c = new_random(ps, 12, {0.0, 1.0}, rng);
        const DataMatrix d = testing::uniform_data(rng, 10, 3);
        const EvalMatrix ev = evaluate(c, d);
        for (Strategy s : {Strategy::Regression, Strategy::Bet, Strategy::Bat, Strategy::WtaF, Strategy::WtaS,
                           Strategy::WtaD, Strategy::Cc}) {
            const std::size_t classes = is_binary_only(s) ? 2 : 3;
            const auto y = testing::random_labels(rng, 10, classes);
            const auto rep = fit({s, AssignmentMode::GlobalMin}, c, ev, y);
            REQUIRE(rep.decoder);
            ClassifierModel m{c, *rep.decoder, 3, {}, {"f0", "f1", "f2"}};
            if (t % 2)
                for (std::size_t k = 0; k < classes; ++k)
                    m.class_names.push_back("class" + std::to_string(k));
            const std::string text = model_to_text(m);
            const ClassifierModel back = parse_model(text);
            CHECK(back == m);
            CHECK(model_to_text(back) == text);
        }
    }

    SUBCASE("corrupt files")
    {
        const Chromosome c = testing::identity_chromosome(2);
        OutputDecoder d;
        d.strategy = Strategy::WtaD;
        d.num_classes = 2;
        d.assigned_genes = {0, 1};
        const std::string good = model_to_text({c, d, 2, {}, {}});
        CHECK_NOTHROW(parse_model(good));

        auto replaced = [&](std::string_view from, std::string_view to) {
            std::string s = good;
            s.replace(s.find(from), from.size(), to);
            return s;
        };
        CHECK_THROWS_AS(parse_model(replaced("assigned_genes: 0 1", "assigned_genes: 1 1")), InputError);
        CHECK_THROWS_AS(parse_model(replaced("assigned_genes: 0 1", "assigned_genes: 0 7")), InputError);
        CHECK_THROWS_AS(parse_model(replaced("assigned_genes: 0 1", "assigned_genes: 0")), InputError);
        CHECK_THROWS_AS(parse_model(replaced("strategy: wta-d", "strategy: magic")), InputError);
        CHECK_THROWS_AS(parse_model(replaced("features: 2\n", "")), InputError);
        CHECK_THROWS_AS(parse_model(good + "classes: 2\n"), InputError);
        CHECK_THROWS_AS(parse_model(""), InputError);
    }
}
