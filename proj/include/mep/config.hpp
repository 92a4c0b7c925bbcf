#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mep/dataset.hpp"
#include "mep/engine.hpp"
#include "mep/fitness.hpp"

namespace mep {

enum class DataFormat { Auto, Csv, Proben1 };

enum class StddevMode { Population, Sample };

/// Standard MEP settings: 10 x 500 ring, length 256, 250 generations,
/// all eight functions, 10 constants in [0, 1].
EvolutionConfig default_evolution();

/// Everything one experiment needs: where the data lives, how to split it and
/// how to evolve on it.
struct ExperimentConfig {
    std::filesystem::path dataset;
    DataFormat format = DataFormat::Auto; // Auto: `.dt` means PROBEN1, anything else CSV
    CsvOptions csv{};
    std::string problem;         // defaults to the dataset file stem
    SplitSpec split{};
    EvolutionConfig evolution = default_evolution();
    std::vector<Strategy> strategies{Strategy::Bat};
    std::size_t runs = 1;
    StddevMode stddev = StddevMode::Population;
};

/// Parses flat `key = value` text. Keys follow the usual MEP parameter names,
/// e.g. `sub_population_size = 500`; `#` starts a comment. Relative dataset
/// paths are resolved against `base_dir`. Throws ConfigError naming the line.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError on values no run can use.
void check_experiment(const ExperimentConfig& config);

/// Writes every key with its current value, in a form parse_config reads back.
void write_config(std::ostream& out, const ExperimentConfig& config);

std::string problem_name(const ExperimentConfig& config);

/// Loads the configured dataset; throws InputError on parse failures.
Dataset load_dataset(const ExperimentConfig& config);

/// Loads by path, guessing the format from the extension.
Dataset load_dataset(const std::filesystem::path& path, DataFormat format = DataFormat::Auto,
                     const CsvOptions& csv = {});

} // namespace mep
