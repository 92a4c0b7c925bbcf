#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mep/dataset.hpp"
#include "mep/fitness.hpp"
#include "mep/genome.hpp"
#include "mep/random.hpp"

namespace mep {

struct EvolutionConfig {
    std::size_t subpop_size = 500;
    std::size_t num_subpops = 10;
    std::size_t migration_rate = 1; // individuals per subpopulation per generation
    std::size_t chromosome_length = 256;
    std::size_t num_generations = 250;
    std::size_t tournament_size = 2;
    StrategyOptions strategy{};
    VariationParams variation{};
    PrimitiveSet primitives{}; // num_variables is taken from the data
    std::uint64_t master_seed = 0;
    unsigned threads = 1;
    std::ostream* progress = nullptr; // per-generation TSV lines when set
};

/// Throws ConfigError on an unusable configuration.
void check_config(const EvolutionConfig& config);

struct Individual {
    Chromosome chromosome;
    FitnessReport report;
};

struct Subpopulation {
    std::vector<Individual> members;
    Rng rng;
};

struct PopulationState {
    std::vector<Subpopulation> subpops;
    std::size_t generation = 0;
};

/// Lowest fitness, first on ties.
std::size_t best_index(std::span<const Individual> members);
/// Highest fitness, first on ties.
std::size_t worst_index(std::span<const Individual> members);

/// Samples `size` members uniformly with replacement and returns the index of
/// the fittest, keeping the earliest sample on ties.
std::size_t tournament_select(std::span<const Individual> members, std::size_t size, Rng& rng);

/// Ring migration, `rate` rounds. In each round every subpopulation s sends a
/// copy of its best member to (s + 1) mod n, where it replaces the worst
/// member if strictly better. Emigrants are chosen before any replacement.
void migrate(PopulationState& state, std::size_t rate);

/// What happened in one generation.
struct GenerationRecord {
    std::size_t generation = 0;
    double best_training_fitness = 0.0;
    std::vector<double> subpop_best;
    double validation_error = 0.0; // percent, of the training-best individual
    std::size_t offspring_per_subpop = 0;
};

struct RunResult {
    ClassifierModel best_model;
    double training_error = 0.0;   // percent
    double validation_error = 0.0; // percent
    double test_error = 0.0;       // percent
    double training_fitness = 0.0;
    std::size_t best_generation = 0;
    std::vector<double> trace; // best training fitness after each generation, starting with generation 0
    std::vector<GenerationRecord> generations;
    double seconds = 0.0;
    std::uint64_t seed = 0;
};

/// Steady-state island evolution with stepwise control.
///
/// Every subpopulation owns its generator, seeded from the master seed and its
/// index, so results do not depend on the number of threads.
class Evolution {
public:
    Evolution(EvolutionConfig config, const Dataset& train, const Dataset& validation);

    /// Random population, fully evaluated (generation 0).
    void initialize();
    /// One generation: subpop_size offspring per subpopulation, then migration.
    void advance();

    const PopulationState& state() const { return state_; }
    PopulationState& mutable_state() { return state_; }
    const EvolutionConfig& config() const { return config_; }
    const std::vector<GenerationRecord>& history() const { return history_; }

    /// Current best by validation error (ties: training fitness, then earlier generation).
    const Individual& retained() const { return retained_; }
    std::size_t retained_generation() const { return retained_generation_; }
    double retained_validation_error() const { return retained_validation_; }

    /// Scores a chromosome on the training split.
    FitnessReport score(const Chromosome& c, EvalMatrix& workspace) const;

    ClassifierModel to_model(const Individual& ind) const;

private:
    void evolve_subpop(Subpopulation& sp, EvalMatrix& workspace);
    void record_generation(std::size_t offspring);

    EvolutionConfig config_;
    const Dataset& train_;
    const Dataset& validation_;
    PopulationState state_;
    std::vector<GenerationRecord> history_;
    Individual retained_;
    std::size_t retained_generation_ = 0;
    double retained_validation_ = 0.0;
    bool have_retained_ = false;
};

/// Full run: evolve on `train`, keep the best model by validation error and
/// report its error on all three splits. Throws InputError on incompatible splits.
RunResult run(const EvolutionConfig& config, const Dataset& train, const Dataset& validation,
              const Dataset& test);

} // namespace mep
