#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mep/evaluator.hpp"
#include "mep/fitness.hpp"

namespace mep {

/// Features plus class labels. An unlabeled dataset has empty `labels`.
struct Dataset {
    DataMatrix features;
    LabelVector labels;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names; // index -> original label text, when known

    std::size_t rows() const { return features.rows(); }
    std::size_t num_features() const { return features.cols(); }
    std::size_t num_classes() const { return labels.num_classes(); }
    bool has_labels() const { return !labels.empty(); }

    /// Rows picked by index, in the given order.
    Dataset select(std::span<const std::size_t> indices) const;
};

struct CsvOptions {
    /// Column holding the label; negative counts from the end (-1 = last).
    /// nullopt reads every column as a feature.
    std::optional<int> label_column = -1;
    bool header = false;
    char delimiter = ',';
    /// Known label texts (e.g. from a model file). When set, labels map to
    /// these indices; a label matching no name is read as a class index, and
    /// anything else is an error.
    std::vector<std::string> class_names;
};

/// Loads a delimited text file. Labels that are all non-negative integers are
/// used as class indices directly; any other labels are numbered in order of
/// first appearance. Throws InputError with the offending line number.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset read_csv(std::istream& in, const CsvOptions& options = {});
void write_csv(std::ostream& out, const Dataset& data, char delimiter = ',');

/// Index of the single entry equal to 1 in a 0/1 vector. Throws InputError otherwise.
std::uint32_t one_of_m_decode(std::span<const double> outputs);

/// Header counts declared by a PROBEN1 file. Keys ending in `_in`, `_out` and
/// `_examples` are summed; other keys are ignored.
struct Proben1Header {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::size_t examples = 0;
    std::array<std::size_t, 3> declared_split{}; // training, validation, test
};

/// Loads a PROBEN1 `.dt` file: `key=value` header lines followed by one
/// example per line (inputs then a 1-of-m output vector).
Dataset load_proben1(const std::filesystem::path& path, Proben1Header* header = nullptr);
Dataset read_proben1(std::istream& in, Proben1Header* header = nullptr);

struct SplitSpec {
    double train = 0.5;
    double validation = 0.25;
    double test = 0.25;
    std::optional<std::uint64_t> permutation_seed; // absent keeps file order
};

/// Throws ConfigError unless the fractions are non-negative and sum to 1.
void check_split(const SplitSpec& spec);

/// Rows per part: floor of each fraction, remaining rows handed out to
/// train, then validation, then test.
std::array<std::size_t, 3> split_sizes(std::size_t rows, const SplitSpec& spec);

/// Row order after the optional seeded shuffle.
std::vector<std::size_t> split_order(std::size_t rows, const SplitSpec& spec);

struct SplitResult {
    Dataset train;
    Dataset validation;
    Dataset test;
    std::vector<std::string> warnings; // e.g. a part with no rows of some class
};

SplitResult split(const Dataset& data, const SplitSpec& spec);

/// Per-feature min-max scaling to [0, 1]. Constant features map to 0.
class MinMaxScaler {
public:
    void fit(const DataMatrix& data);
    DataMatrix transform(const DataMatrix& data) const;
    Dataset transform(const Dataset& data) const;

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
};

/// Summary line in the style "cancer1  9  2  699  350+175+174".
std::string summary_line(const std::string& name, const Dataset& data, const std::array<std::size_t, 3>& sizes);

} // namespace mep
