#include "mep/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "mep/error.hpp"

namespace mep {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

void require_rows(const EvalMatrix& ev, std::size_t rows, std::string_view what)
{
    if (ev.num_rows != rows)
        throw InputError(fmt::format("{} has {} rows, evaluation has {}", what, rows, ev.num_rows));
}

void require_binary(const LabelVector& labels, std::string_view strategy)
{
    if (labels.num_classes() != 2)
        throw ConfigError(fmt::format("N/A: strategy {} requires 2 classes, data has {}", strategy,
                                      labels.num_classes()));
}

void require_length(const EvalMatrix& ev, const LabelVector& labels, std::string_view strategy)
{
    if (ev.num_genes < labels.num_classes())
        throw ConfigError(fmt::format("strategy {} needs at least {} genes (one per class), chromosome has {}",
                                      strategy, labels.num_classes(), ev.num_genes));
}

FitnessReport worst_report(Strategy s, std::size_t rows, std::size_t classes)
{
    return {worst_fitness(s, rows, classes), rows, std::nullopt};
}

std::vector<std::size_t> invalid_genes(const EvalMatrix& ev)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ev.num_genes; ++i)
        if (!ev.valid(i))
            out.push_back(i);
    return out;
}

std::uint32_t nearest_center(double value, std::span<const double> centers)
{
    std::uint32_t best = 0;
    double best_distance = std::abs(value - centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = std::abs(value - centers[c]);
        if (d < best_distance) {
            best_distance = d;
            best = static_cast<std::uint32_t>(c);
        }
    }
    return best;
}

std::uint32_t nearest_class(double value, std::size_t num_classes)
{
    const double top = static_cast<double>(num_classes - 1);
    if (!(value > 0.0))
        return 0;
    if (value >= top)
        return static_cast<std::uint32_t>(num_classes - 1);
    return static_cast<std::uint32_t>(std::lround(value));
}

double scaled(double value, double lo, double hi) { return hi > lo ? (value - lo) / (hi - lo) : 0.0; }

} // namespace

LabelVector::LabelVector(std::vector<std::uint32_t> labels, std::size_t num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes)
{
    if (num_classes_ < 2)
        throw InputError(fmt::format("classification needs at least 2 classes, got {}", num_classes_));
    for (std::size_t r = 0; r < labels_.size(); ++r)
        if (labels_[r] >= num_classes_)
            throw InputError(fmt::format("row {}: class {} out of range [0, {})", r, labels_[r], num_classes_));
}

std::vector<std::size_t> LabelVector::class_counts() const
{
    std::vector<std::size_t> counts(num_classes_, 0);
    for (auto y : labels_)
        ++counts[y];
    return counts;
}

LabelVector LabelVector::select(std::span<const std::size_t> indices) const
{
    LabelVector out;
    out.num_classes_ = num_classes_;
    out.labels_.reserve(indices.size());
    for (auto r : indices)
        out.labels_.push_back(labels_[r]);
    return out;
}

std::string_view strategy_name(Strategy s)
{
    switch (s) {
    case Strategy::Regression: return "regression";
    case Strategy::Bet: return "bet";
    case Strategy::Bat: return "bat";
    case Strategy::WtaF: return "wta-f";
    case Strategy::WtaS: return "wta-s";
    case Strategy::WtaD: return "wta-d";
    case Strategy::Cc: return "cc";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name)
{
    for (auto s : {Strategy::Regression, Strategy::Bet, Strategy::Bat, Strategy::WtaF, Strategy::WtaS,
                   Strategy::WtaD, Strategy::Cc})
        if (strategy_name(s) == name)
            return s;
    return std::nullopt;
}

bool is_binary_only(Strategy s) { return s == Strategy::Bet || s == Strategy::Bat; }

std::string_view assignment_name(AssignmentMode m)
{
    return m == AssignmentMode::GreedyPerClass ? "greedy" : "global-min";
}

std::optional<AssignmentMode> parse_assignment(std::string_view name)
{
    if (name == "greedy" || name == "greedy_per_class")
        return AssignmentMode::GreedyPerClass;
    if (name == "global-min" || name == "global_min")
        return AssignmentMode::GlobalMin;
    return std::nullopt;
}

double worst_fitness(Strategy s, std::size_t rows, std::size_t classes)
{
    switch (s) {
    case Strategy::Regression:
        return std::numeric_limits<double>::max();
    case Strategy::WtaS:
        // one miss plus at most (classes - 1) penalties of 1 + 2 per row
        return static_cast<double>(rows * (3 * std::max<std::size_t>(classes, 1) - 2) + 1);
    default:
        return static_cast<double>(rows + 1);
    }
}

FitnessReport fit_regression(const EvalMatrix& ev, std::span<const double> targets)
{
    require_rows(ev, targets.size(), "target vector");
    FitnessReport report = worst_report(Strategy::Regression, ev.num_rows, 2);
    for (std::size_t i = 0; i < ev.num_genes; ++i) {
        if (!ev.valid(i))
            continue;
        const auto values = ev.gene(i);
        double error = 0.0;
        for (std::size_t r = 0; r < values.size(); ++r)
            error += std::abs(values[r] - targets[r]);
        if (!report.decoder || error < report.fitness) {
            report.fitness = error;
            OutputDecoder d;
            d.strategy = Strategy::Regression;
            d.output_gene = i;
            report.decoder = d;
        }
    }
    if (report.decoder)
        report.misclassified = 0;
    return report;
}

FitnessReport fit_bet(const EvalMatrix& ev, const LabelVector& labels, double threshold)
{
    require_binary(labels, "bet");
    require_rows(ev, labels.size(), "label vector");
    FitnessReport report = worst_report(Strategy::Bet, ev.num_rows, 2);
    for (std::size_t i = 0; i < ev.num_genes; ++i) {
        if (!ev.valid(i))
            continue;
        const auto values = ev.gene(i);
        std::size_t errors = 0;
        for (std::size_t r = 0; r < values.size(); ++r)
            errors += (values[r] <= threshold ? 0u : 1u) != labels[r];
        if (!report.decoder || static_cast<double>(errors) < report.fitness) {
            report.fitness = static_cast<double>(errors);
            report.misclassified = errors;
            OutputDecoder d;
            d.strategy = Strategy::Bet;
            d.output_gene = i;
            d.threshold = threshold;
            report.decoder = d;
        }
    }
    return report;
}

ThresholdFit best_threshold(std::span<const double> values, const LabelVector& labels)
{
    if (values.empty())
        return {};
    std::vector<std::pair<double, std::uint32_t>> sorted(values.size());
    for (std::size_t r = 0; r < values.size(); ++r)
        sorted[r] = {values[r], labels[r]};
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Threshold below every value: all rows go to class 1, so every class-0 row is wrong.
    std::size_t errors = 0;
    for (const auto& [v, y] : sorted)
        errors += y == 0;

    const double min_value = sorted.front().first;
    double below = min_value - 1.0;
    if (!(below < min_value))
        below = std::nextafter(min_value, neg_inf);
    ThresholdFit best{below, errors};

    std::size_t k = 0;
    while (k < sorted.size()) {
        const double v = sorted[k].first;
        // every row with this value moves to class 0 together
        for (; k < sorted.size() && sorted[k].first == v; ++k) {
            if (sorted[k].second == 0)
                --errors;
            else
                ++errors;
        }
        if (errors < best.errors)
            best = {v, errors};
    }
    return best;
}

FitnessReport fit_bat(const EvalMatrix& ev, const LabelVector& labels)
{
    require_binary(labels, "bat");
    require_rows(ev, labels.size(), "label vector");
    FitnessReport report = worst_report(Strategy::Bat, ev.num_rows, 2);
    for (std::size_t i = 0; i < ev.num_genes; ++i) {
        if (!ev.valid(i))
            continue;
        const ThresholdFit t = best_threshold(ev.gene(i), labels);
        if (!report.decoder || static_cast<double>(t.errors) < report.fitness) {
            report.fitness = static_cast<double>(t.errors);
            report.misclassified = t.errors;
            OutputDecoder d;
            d.strategy = Strategy::Bat;
            d.output_gene = i;
            d.threshold = t.threshold;
            report.decoder = d;
        }
    }
    return report;
}

FitnessReport fit_wta_f(const EvalMatrix& ev, const LabelVector& labels)
{
    require_rows(ev, labels.size(), "label vector");
    require_length(ev, labels, "wta-f");
    const std::size_t classes = labels.num_classes();
    if (ev.count_valid() == 0)
        return worst_report(Strategy::WtaF, ev.num_rows, classes);

    std::vector<double> best(ev.num_rows, neg_inf);
    std::vector<std::size_t> winner(ev.num_rows, 0);
    for (std::size_t i = 0; i < ev.num_genes; ++i) {
        if (!ev.valid(i))
            continue;
        const auto values = ev.gene(i);
        for (std::size_t r = 0; r < ev.num_rows; ++r) {
            if (values[r] > best[r]) {
                best[r] = values[r];
                winner[r] = i;
            }
        }
    }
    std::size_t errors = 0;
    for (std::size_t r = 0; r < ev.num_rows; ++r)
        errors += winner[r] % classes != labels[r];

    OutputDecoder d;
    d.strategy = Strategy::WtaF;
    d.num_classes = classes;
    d.excluded_genes = invalid_genes(ev);
    return {static_cast<double>(errors), errors, std::move(d)};
}

FitnessReport fit_wta_s(const EvalMatrix& ev, const LabelVector& labels)
{
    require_rows(ev, labels.size(), "label vector");
    require_length(ev, labels, "wta-s");
    const std::size_t classes = labels.num_classes();
    const std::size_t rows = ev.num_rows;
    if (ev.count_valid() == 0)
        return worst_report(Strategy::WtaS, rows, classes);

    std::vector<double> lo(classes, std::numeric_limits<double>::infinity());
    std::vector<double> hi(classes, neg_inf);
    std::vector<bool> present(classes, false);
    for (std::size_t i = 0; i < ev.num_genes; ++i) {
        if (!ev.valid(i))
            continue;
        const std::size_t c = i % classes;
        present[c] = true;
        for (double v : ev.gene(i)) {
            lo[c] = std::min(lo[c], v);
            hi[c] = std::max(hi[c], v);
        }
    }

    // per row: highest scaled value of each class, and the first gene attaining the overall maximum
    std::vector<double> class_max(rows * classes, neg_inf);
    std::vector<double> best(rows, neg_inf);
    std::vector<std::size_t> winner(rows, 0);
    for (std::size_t i = 0; i < ev.num_genes; ++i) {
        if (!ev.valid(i))
            continue;
        const std::size_t c = i % classes;
        const auto values = ev.gene(i);
        for (std::size_t r = 0; r < rows; ++r) {
            const double s = scaled(values[r], lo[c], hi[c]);
            class_max[r * classes + c] = std::max(class_max[r * classes + c], s);
            if (s > best[r]) {
                best[r] = s;
                winner[r] = i;
            }
        }
    }

    std::size_t errors = 0;
    double penalty = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = labels[r];
        errors += winner[r] % classes != t;
        // a class with no usable genes sits below every scaled value
        const double own = present[t] ? class_max[r * classes + t] : -1.0;
        for (std::size_t c = 0; c < classes; ++c) {
            if (c == t || !present[c])
                continue;
            const double other = class_max[r * classes + c];
            if (other >= own)
                penalty += 1.0 + (other - own);
        }
    }

    OutputDecoder d;
    d.strategy = Strategy::WtaS;
    d.num_classes = classes;
    d.excluded_genes = invalid_genes(ev);
    d.scale_min.resize(classes);
    d.scale_max.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        d.scale_min[c] = present[c] ? lo[c] : 0.0;
        d.scale_max[c] = present[c] ? hi[c] : 0.0;
    }
    return {static_cast<double>(errors) + penalty, errors, std::move(d)};
}

OutputMatrix build_output_matrix(const EvalMatrix& ev, const LabelVector& labels)
{
    require_rows(ev, labels.size(), "label vector");
    const std::size_t classes = labels.num_classes();
    OutputMatrix b{ev.num_genes, classes, std::vector<std::size_t>(ev.num_genes * classes, 0)};

    std::vector<double> row_max(ev.num_rows, neg_inf);
    for (std::size_t i = 0; i < ev.num_genes; ++i) {
        if (!ev.valid(i))
            continue;
        const auto values = ev.gene(i);
        for (std::size_t r = 0; r < ev.num_rows; ++r)
            row_max[r] = std::max(row_max[r], values[r]);
    }
    for (std::size_t i = 0; i < ev.num_genes; ++i) {
        if (!ev.valid(i))
            continue;
        const auto values = ev.gene(i);
        std::size_t* cell = b.cells.data() + i * classes;
        for (std::size_t r = 0; r < ev.num_rows; ++r)
            cell[labels[r]] += values[r] != row_max[r];
    }
    return b;
}

std::vector<std::size_t> assign_outputs(const OutputMatrix& b, std::span<const std::uint8_t> gene_valid,
                                        AssignmentMode mode)
{
    const std::size_t classes = b.num_classes;
    const auto valid_count = static_cast<std::size_t>(std::count(gene_valid.begin(), gene_valid.end(), 1));
    if (valid_count < classes)
        return {};

    std::vector<bool> used(b.num_genes, false);
    std::vector<std::size_t> assigned(classes, 0);
    if (mode == AssignmentMode::GreedyPerClass) {
        for (std::size_t k = 0; k < classes; ++k) {
            std::size_t pick = b.num_genes;
            for (std::size_t i = 0; i < b.num_genes; ++i) {
                if (!gene_valid[i] || used[i])
                    continue;
                if (pick == b.num_genes || b.at(i, k) < b.at(pick, k))
                    pick = i;
            }
            used[pick] = true;
            assigned[k] = pick;
        }
        return assigned;
    }

    std::vector<bool> done(classes, false);
    for (std::size_t step = 0; step < classes; ++step) {
        std::size_t pick_gene = b.num_genes;
        std::size_t pick_class = classes;
        for (std::size_t k = 0; k < classes; ++k) {
            if (done[k])
                continue;
            for (std::size_t i = 0; i < b.num_genes; ++i) {
                if (!gene_valid[i] || used[i])
                    continue;
                if (pick_gene == b.num_genes || b.at(i, k) < b.at(pick_gene, pick_class)) {
                    pick_gene = i;
                    pick_class = k;
                }
            }
        }
        used[pick_gene] = true;
        done[pick_class] = true;
        assigned[pick_class] = pick_gene;
    }
    return assigned;
}

FitnessReport fit_wta_d(const EvalMatrix& ev, const LabelVector& labels, AssignmentMode mode)
{
    const std::size_t classes = labels.num_classes();
    const OutputMatrix b = build_output_matrix(ev, labels);
    std::vector<std::size_t> assigned = assign_outputs(b, ev.gene_valid, mode);
    if (assigned.empty())
        return worst_report(Strategy::WtaD, ev.num_rows, classes);

    std::size_t total = 0;
    for (std::size_t k = 0; k < classes; ++k)
        total += b.at(assigned[k], k);

    std::size_t errors = 0;
    for (std::size_t r = 0; r < ev.num_rows; ++r) {
        std::size_t predicted = 0;
        double best = ev.at(assigned[0], r);
        for (std::size_t k = 1; k < classes; ++k) {
            const double v = ev.at(assigned[k], r);
            if (v > best) {
                best = v;
                predicted = k;
            }
        }
        errors += predicted != labels[r];
    }

    OutputDecoder d;
    d.strategy = Strategy::WtaD;
    d.num_classes = classes;
    d.assigned_genes = std::move(assigned);
    return {static_cast<double>(total), errors, std::move(d)};
}

FitnessReport fit_cc(const EvalMatrix& ev, const LabelVector& labels)
{
    require_rows(ev, labels.size(), "label vector");
    const std::size_t classes = labels.num_classes();
    const std::vector<std::size_t> counts = labels.class_counts();
    for (std::size_t c = 0; c < classes; ++c)
        if (counts[c] == 0)
            throw InputError(fmt::format("class {} has no training rows; closest-center needs every class", c));

    FitnessReport report = worst_report(Strategy::Cc, ev.num_rows, classes);
    std::vector<double> centers(classes);
    for (std::size_t i = 0; i < ev.num_genes; ++i) {
        if (!ev.valid(i))
            continue;
        const auto values = ev.gene(i);
        std::fill(centers.begin(), centers.end(), 0.0);
        for (std::size_t r = 0; r < values.size(); ++r)
            centers[labels[r]] += values[r];
        for (std::size_t c = 0; c < classes; ++c)
            centers[c] /= static_cast<double>(counts[c]);

        std::size_t errors = 0;
        for (std::size_t r = 0; r < values.size(); ++r)
            errors += nearest_center(values[r], centers) != labels[r];
        if (!report.decoder || static_cast<double>(errors) < report.fitness) {
            report.fitness = static_cast<double>(errors);
            report.misclassified = errors;
            OutputDecoder d;
            d.strategy = Strategy::Cc;
            d.num_classes = classes;
            d.output_gene = i;
            d.centers = centers;
            report.decoder = std::move(d);
        }
    }
    return report;
}

FitnessReport fit(const StrategyOptions& options, const Chromosome& c, const EvalMatrix& ev,
                  const LabelVector& labels)
{
    switch (options.strategy) {
    case Strategy::Regression: {
        std::vector<double> targets(labels.labels().begin(), labels.labels().end());
        FitnessReport report = fit_regression(ev, targets);
        if (report.decoder) {
            report.decoder->num_classes = labels.num_classes();
            std::size_t errors = 0;
            const auto values = ev.gene(report.decoder->output_gene);
            for (std::size_t r = 0; r < values.size(); ++r)
                errors += nearest_class(values[r], labels.num_classes()) != labels[r];
            report.misclassified = errors;
        } else {
            report.misclassified = ev.num_rows;
        }
        return report;
    }
    case Strategy::Bet:
        return fit_bet(ev, labels, c.threshold);
    case Strategy::Bat:
        return fit_bat(ev, labels);
    case Strategy::WtaF:
        return fit_wta_f(ev, labels);
    case Strategy::WtaS:
        return fit_wta_s(ev, labels);
    case Strategy::WtaD:
        return fit_wta_d(ev, labels, options.assignment);
    case Strategy::Cc:
        return fit_cc(ev, labels);
    }
    throw ConfigError("unknown strategy");
}

Prediction decide(const OutputDecoder& d, std::span<const double> values, std::span<const std::uint8_t> valid)
{
    const std::size_t genes = values.size();
    auto needs = [&](std::size_t gene) {
        if (gene >= genes)
            throw InputError(fmt::format("decoder references gene {} but chromosome has {}", gene, genes));
    };

    switch (d.strategy) {
    case Strategy::Regression:
    case Strategy::Bet:
    case Strategy::Bat:
    case Strategy::Cc: {
        needs(d.output_gene);
        if (!valid[d.output_gene])
            return {0, true};
        const double v = values[d.output_gene];
        if (d.strategy == Strategy::Regression)
            return {nearest_class(v, d.num_classes), false};
        if (d.strategy == Strategy::Cc)
            return {nearest_center(v, d.centers), false};
        return {v <= d.threshold ? 0u : 1u, false};
    }
    case Strategy::WtaF:
    case Strategy::WtaS: {
        std::vector<bool> excluded(genes, false);
        for (auto g : d.excluded_genes)
            if (g < genes)
                excluded[g] = true;
        const bool smooth = d.strategy == Strategy::WtaS;
        double best = neg_inf;
        std::size_t winner = 0;
        bool any = false;
        for (std::size_t i = 0; i < genes; ++i) {
            if (excluded[i])
                continue;
            if (!valid[i])
                return {0, true};
            const std::size_t c = i % d.num_classes;
            const double v = smooth ? scaled(values[i], d.scale_min[c], d.scale_max[c]) : values[i];
            if (!any || v > best) {
                best = v;
                winner = i;
                any = true;
            }
        }
        if (!any)
            return {0, true};
        return {static_cast<std::uint32_t>(winner % d.num_classes), false};
    }
    case Strategy::WtaD: {
        std::uint32_t predicted = 0;
        double best = neg_inf;
        for (std::size_t k = 0; k < d.assigned_genes.size(); ++k) {
            const std::size_t g = d.assigned_genes[k];
            needs(g);
            if (!valid[g])
                return {0, true};
            if (k == 0 || values[g] > best) {
                best = values[g];
                predicted = static_cast<std::uint32_t>(k);
            }
        }
        return {predicted, false};
    }
    }
    return {0, true};
}

Prediction predict(const OutputDecoder& decoder, const Chromosome& c, std::span<const double> row)
{
    const EvalMatrix ev = evaluate_row(c, row);
    return decide(decoder, ev.values, ev.gene_valid);
}

Prediction predict(const ClassifierModel& model, std::span<const double> row)
{
    if (row.size() != model.num_features)
        throw InputError(fmt::format("row has {} features, model expects {}", row.size(), model.num_features));
    return predict(model.decoder, model.chromosome, row);
}

std::vector<Prediction> predict_all(const ClassifierModel& model, const DataMatrix& data)
{
    if (data.cols() != model.num_features)
        throw InputError(fmt::format("data has {} features, model expects {}", data.cols(), model.num_features));
    std::vector<Prediction> out;
    out.reserve(data.rows());
    for (std::size_t r = 0; r < data.rows(); ++r)
        out.push_back(predict(model.decoder, model.chromosome, data.row(r)));
    return out;
}

double error_percent(std::span<const Prediction> predictions, const LabelVector& labels)
{
    if (predictions.size() != labels.size())
        throw InputError(fmt::format("{} predictions for {} labels", predictions.size(), labels.size()));
    if (predictions.empty())
        return 0.0;
    std::size_t wrong = 0;
    for (std::size_t r = 0; r < predictions.size(); ++r)
        wrong += predictions[r].label != labels[r];
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

} // namespace mep
