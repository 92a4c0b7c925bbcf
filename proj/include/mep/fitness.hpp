#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mep/evaluator.hpp"
#include "mep/genome.hpp"

namespace mep {

/// Class index per row. Every label is below num_classes.
class LabelVector {
public:
    LabelVector() = default;
    /// Throws InputError when a label is out of range or num_classes < 2.
    LabelVector(std::vector<std::uint32_t> labels, std::size_t num_classes);

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    std::size_t num_classes() const { return num_classes_; }
    std::uint32_t operator[](std::size_t r) const { return labels_[r]; }
    std::span<const std::uint32_t> labels() const { return labels_; }

    /// Rows per class.
    std::vector<std::size_t> class_counts() const;
    LabelVector select(std::span<const std::size_t> indices) const;

    friend bool operator==(const LabelVector&, const LabelVector&) = default;

private:
    std::vector<std::uint32_t> labels_;
    std::size_t num_classes_ = 0;
};

enum class Strategy : std::uint8_t { Regression, Bet, Bat, WtaF, WtaS, WtaD, Cc };

/// CLI names: regression, bet, bat, wta-f, wta-s, wta-d, cc.
std::string_view strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);
bool is_binary_only(Strategy s);

/// How WTA-D picks one distinct output gene per class from matrix B.
enum class AssignmentMode : std::uint8_t {
    GreedyPerClass, // classes in index order, each takes its best unused gene
    GlobalMin,      // repeatedly take the smallest remaining cell of B
};

std::string_view assignment_name(AssignmentMode m);
std::optional<AssignmentMode> parse_assignment(std::string_view name);

struct StrategyOptions {
    Strategy strategy = Strategy::Bat;
    AssignmentMode assignment = AssignmentMode::GreedyPerClass;
};

/// Decoded phenotype: which genes produce the answer and how their values map
/// to a class. Fields not used by `strategy` stay empty.
struct OutputDecoder {
    Strategy strategy = Strategy::Bat;
    std::size_t num_classes = 2;
    std::size_t output_gene = 0;               // regression, BET, BAT, CC
    double threshold = 0.0;                    // BET, BAT
    std::vector<std::size_t> assigned_genes;   // WTA-D, one per class
    std::vector<double> centers;               // CC, one per class
    std::vector<double> scale_min, scale_max;  // WTA-S, one pair per class
    std::vector<std::size_t> excluded_genes;   // WTA-F, WTA-S: genes invalid during fitting

    friend bool operator==(const OutputDecoder&, const OutputDecoder&) = default;
};

/// Result of scoring one chromosome. `fitness` is minimized; for BET, BAT,
/// WTA-F and CC it equals `misclassified`.
struct FitnessReport {
    double fitness = 0.0;
    std::size_t misclassified = 0;
    std::optional<OutputDecoder> decoder; // empty when no gene is usable

    friend bool operator==(const FitnessReport&, const FitnessReport&) = default;
};

/// Fitness assigned when no usable gene exists. Worse than any attainable value.
double worst_fitness(Strategy s, std::size_t num_rows, std::size_t num_classes);

/// Sum of absolute errors per gene, minimum over valid genes (ties: lowest address).
FitnessReport fit_regression(const EvalMatrix& ev, std::span<const double> targets);
FitnessReport fit_bet(const EvalMatrix& ev, const LabelVector& labels, double threshold);
FitnessReport fit_bat(const EvalMatrix& ev, const LabelVector& labels);
FitnessReport fit_wta_f(const EvalMatrix& ev, const LabelVector& labels);
FitnessReport fit_wta_s(const EvalMatrix& ev, const LabelVector& labels);
FitnessReport fit_wta_d(const EvalMatrix& ev, const LabelVector& labels, AssignmentMode mode);
FitnessReport fit_cc(const EvalMatrix& ev, const LabelVector& labels);

/// Dispatches on the strategy. Regression uses the labels as real targets.
FitnessReport fit(const StrategyOptions& options, const Chromosome& c, const EvalMatrix& ev,
                  const LabelVector& labels);

/// Optimal threshold for one gene's values: the candidate (MIN - 1 or a data
/// value) with fewest errors, smallest on ties.
struct ThresholdFit {
    double threshold = 0.0;
    std::size_t errors = 0;
};
ThresholdFit best_threshold(std::span<const double> values, const LabelVector& labels);

/// WTA-D matrix: cell (i, k) counts class-k rows where gene i does not attain
/// the row maximum over valid genes. Rows of invalid genes are left at zero.
struct OutputMatrix {
    std::size_t num_genes = 0;
    std::size_t num_classes = 0;
    std::vector<std::size_t> cells; // gene-major

    std::size_t at(std::size_t gene, std::size_t cls) const { return cells[gene * num_classes + cls]; }
};
OutputMatrix build_output_matrix(const EvalMatrix& ev, const LabelVector& labels);

/// Distinct valid genes, one per class. Empty if there are fewer valid genes than classes.
std::vector<std::size_t> assign_outputs(const OutputMatrix& b, std::span<const std::uint8_t> gene_valid,
                                        AssignmentMode mode);

struct Prediction {
    std::uint32_t label = 0;
    bool invalid = false; // a gene the decoder needs failed on this row; label is 0
};

/// Applies the decision rule to one row's gene values. `gene_valid` marks
/// which genes evaluated successfully on that row.
Prediction decide(const OutputDecoder& decoder, std::span<const double> gene_values,
                  std::span<const std::uint8_t> gene_valid);

/// A chromosome together with its decoder; everything needed to classify new rows.
struct ClassifierModel {
    Chromosome chromosome;
    OutputDecoder decoder;
    std::size_t num_features = 0;
    std::vector<std::string> class_names;   // optional, for reporting
    std::vector<std::string> feature_names; // optional

    friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;
};

/// Evaluates the chromosome on one row and applies the decision rule.
Prediction predict(const OutputDecoder& decoder, const Chromosome& c, std::span<const double> row);
/// Checks the row width first. Throws InputError on mismatch.
Prediction predict(const ClassifierModel& model, std::span<const double> row);

/// Predicts every row of `data`.
std::vector<Prediction> predict_all(const ClassifierModel& model, const DataMatrix& data);

/// Percent of rows whose prediction differs from the label.
double error_percent(std::span<const Prediction> predictions, const LabelVector& labels);

// Model files: the chromosome listing followed by a strategy block, e.g.
//
//   features: 9
//   <chromosome listing>
//   strategy: bat
//   classes: 2
//   output_gene: 17
//   threshold: 0.42
//
// WTA-D writes `assigned_genes:`, CC `centers:`, WTA-S `scale_min:`/`scale_max:`,
// WTA-F and WTA-S `excluded_genes:`. Optional `class_names:` and `feature_names:`
// lines carry labels for reporting.
void write_model(std::ostream& out, const ClassifierModel& model);
std::string model_to_text(const ClassifierModel& model);
ClassifierModel read_model(std::istream& in);
ClassifierModel parse_model(std::string_view text);

} // namespace mep
