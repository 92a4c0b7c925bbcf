#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mep/bench.hpp"
#include "mep/config.hpp"
#include "mep/engine.hpp"

namespace mep {

struct TrainOptions {
    ExperimentConfig config;
    std::filesystem::path model_out = "model.mep";
    std::optional<std::filesystem::path> report_out; // report goes to the report stream when absent
    std::optional<std::filesystem::path> split_dir;  // writes train.csv, validation.csv, test.csv
    bool verbose = false;
};

/// Evolves one model and writes it to `model_out`. The report (expression and
/// split errors) goes to `report_out` if set, else to `report`. Progress lines
/// go to `log` when verbose.
RunResult cmd_train(const TrainOptions& options, std::ostream& report, std::ostream& log);

/// Human-readable summary of a finished run.
std::string train_report(const ExperimentConfig& config, const Dataset& data, const SplitResult& parts,
                         const RunResult& result);

struct PredictOptions {
    std::filesystem::path model;
    std::filesystem::path data;
    bool header = false;
    char delimiter = ',';
    std::optional<std::filesystem::path> out; // predictions go to the output stream when absent
};

struct PredictSummary {
    std::size_t rows = 0;
    std::size_t invalid_rows = 0;
    std::optional<double> error_percent; // only for labeled input
    std::size_t misclassified = 0;
};

/// One line per row ("class" or "class,invalid"), then a summary on `log`.
/// A file with one column more than the model's features is read as labeled.
PredictSummary cmd_predict(const PredictOptions& options, std::ostream& out, std::ostream& log);

struct BenchmarkOptions {
    ExperimentConfig config;
    std::vector<std::filesystem::path> datasets; // empty: the config's dataset
    unsigned threads = 1;
    std::optional<std::filesystem::path> raw_csv_out;
    bool verbose = false;
};

/// Table of Best/Avg/Dev test error plus the comparison report on `out`.
BenchmarkResult cmd_benchmark(const BenchmarkOptions& options, std::ostream& out, std::ostream& log);

struct SummaryOptions {
    std::vector<std::filesystem::path> datasets;
    DataFormat format = DataFormat::Auto;
    CsvOptions csv{};
    SplitSpec split{};
};

/// Prints one line per dataset: name, inputs, classes, examples, split sizes.
void cmd_summary(const SummaryOptions& options, std::ostream& out);

} // namespace mep
