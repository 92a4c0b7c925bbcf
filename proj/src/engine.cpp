#include "mep/engine.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <numeric>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "mep/error.hpp"

namespace mep {

namespace {

// Runs fn(task, workspace) for every task in [0, n). Task t goes to worker
// t % workers; each worker owns one evaluation workspace.
template <typename Fn>
void for_each_task(std::size_t n, unsigned threads, Fn&& fn)
{
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (workers == 1) {
        EvalMatrix workspace;
        for (std::size_t t = 0; t < n; ++t)
            fn(t, workspace);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    EvalMatrix workspace;
                    for (std::size_t t = w; t < n; t += workers)
                        fn(t, workspace);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

void check_splits(const Dataset& train, const Dataset& validation, const Dataset* test)
{
    if (train.rows() == 0 || validation.rows() == 0 || (test && test->rows() == 0))
        throw InputError("training, validation and test splits must all be non-empty");
    if (!train.has_labels() || !validation.has_labels() || (test && !test->has_labels()))
        throw InputError("evolution needs labeled data");
    auto compatible = [&](const Dataset& d) {
        return d.num_features() == train.num_features() && d.num_classes() == train.num_classes();
    };
    if (!compatible(validation) || (test && !compatible(*test)))
        throw InputError("splits differ in feature count or class count");
}

} // namespace

void check_config(const EvolutionConfig& c)
{
    if (c.subpop_size < 2)
        throw ConfigError("sub population size must be at least 2");
    if (c.num_subpops < 1)
        throw ConfigError("need at least one sub population");
    if (c.tournament_size < 1 || c.tournament_size > c.subpop_size)
        throw ConfigError("tournament size must lie in [1, sub population size]");
    if (c.chromosome_length < 1)
        throw ConfigError("chromosome length must be at least 1");
    check_variation(c.variation);
}

std::size_t best_index(std::span<const Individual> members)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < members.size(); ++i)
        if (members[i].report.fitness < members[best].report.fitness)
            best = i;
    return best;
}

std::size_t worst_index(std::span<const Individual> members)
{
    std::size_t worst = 0;
    for (std::size_t i = 1; i < members.size(); ++i)
        if (members[i].report.fitness > members[worst].report.fitness)
            worst = i;
    return worst;
}

std::size_t tournament_select(std::span<const Individual> members, std::size_t size, Rng& rng)
{
    std::size_t pick = rng.index(members.size());
    for (std::size_t k = 1; k < size; ++k) {
        const std::size_t candidate = rng.index(members.size());
        if (members[candidate].report.fitness < members[pick].report.fitness)
            pick = candidate;
    }
    return pick;
}

void migrate(PopulationState& state, std::size_t rate)
{
    const std::size_t n = state.subpops.size();
    if (n < 2)
        return;
    for (std::size_t round = 0; round < rate; ++round) {
        std::vector<Individual> emigrants;
        emigrants.reserve(n);
        for (const auto& sp : state.subpops)
            emigrants.push_back(sp.members[best_index(sp.members)]);
        for (std::size_t s = 0; s < n; ++s) {
            auto& target = state.subpops[(s + 1) % n].members;
            const std::size_t w = worst_index(target);
            if (emigrants[s].report.fitness < target[w].report.fitness)
                target[w] = emigrants[s];
        }
    }
}

Evolution::Evolution(EvolutionConfig config, const Dataset& train, const Dataset& validation)
    : config_(std::move(config)), train_(train), validation_(validation)
{
    check_config(config_);
    check_splits(train_, validation_, nullptr);
    config_.primitives.num_variables = train_.num_features();
    check_primitives(config_.primitives);

    const Strategy s = config_.strategy.strategy;
    const std::size_t classes = train_.num_classes();
    if (is_binary_only(s) && classes != 2)
        throw ConfigError(fmt::format("N/A: strategy {} requires 2 classes, data has {}", strategy_name(s), classes));
    if ((s == Strategy::WtaF || s == Strategy::WtaS || s == Strategy::WtaD) && config_.chromosome_length < classes)
        throw ConfigError(fmt::format("strategy {} needs chromosome length >= {} classes", strategy_name(s), classes));
    if (s == Strategy::Cc) {
        const auto counts = train_.labels.class_counts();
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (counts[c] == 0)
                throw InputError(fmt::format("training split has no rows of class {}", c));
    }
}

FitnessReport Evolution::score(const Chromosome& c, EvalMatrix& workspace) const
{
    evaluate_into(c, train_.features, workspace);
    return fit(config_.strategy, c, workspace, train_.labels);
}

ClassifierModel Evolution::to_model(const Individual& ind) const
{
    ClassifierModel model;
    model.chromosome = ind.chromosome;
    model.num_features = train_.num_features();
    model.class_names = train_.class_names;
    model.feature_names = train_.feature_names;
    if (ind.report.decoder) {
        model.decoder = *ind.report.decoder;
    } else {
        // only WTA-D can leave an individual undecodable (fewer valid genes than classes)
        model.decoder.strategy = config_.strategy.strategy;
        model.decoder.num_classes = train_.num_classes();
        model.decoder.assigned_genes.resize(train_.num_classes());
        std::iota(model.decoder.assigned_genes.begin(), model.decoder.assigned_genes.end(), std::size_t{0});
    }
    return model;
}

void Evolution::initialize()
{
    const std::size_t n = config_.num_subpops;
    state_ = PopulationState{};
    state_.subpops.resize(n);
    history_.clear();
    have_retained_ = false;

    for_each_task(n, config_.threads, [&](std::size_t s, EvalMatrix& workspace) {
        Subpopulation& sp = state_.subpops[s];
        sp.rng = Rng(derive_seed(config_.master_seed, s));
        sp.members.clear();
        sp.members.reserve(config_.subpop_size);
        for (std::size_t i = 0; i < config_.subpop_size; ++i) {
            Individual ind;
            ind.chromosome = new_random(config_.primitives, config_.chromosome_length,
                                        config_.variation.constants_interval, sp.rng);
            ind.report = score(ind.chromosome, workspace);
            sp.members.push_back(std::move(ind));
        }
    });
    record_generation(0);
}

void Evolution::evolve_subpop(Subpopulation& sp, EvalMatrix& workspace)
{
    const VariationParams& var = config_.variation;
    const std::size_t quota = config_.subpop_size;
    auto insert = [&](Individual&& offspring) {
        const std::size_t w = worst_index(sp.members);
        if (offspring.report.fitness < sp.members[w].report.fitness)
            sp.members[w] = std::move(offspring);
    };

    for (std::size_t produced = 0; produced < quota;) {
        const std::size_t p1 = tournament_select(sp.members, config_.tournament_size, sp.rng);
        const std::size_t p2 = tournament_select(sp.members, config_.tournament_size, sp.rng);
        const Chromosome& a = sp.members[p1].chromosome;
        const Chromosome& b = sp.members[p2].chromosome;

        std::pair<Chromosome, Chromosome> children;
        if (sp.rng.bernoulli(var.p_crossover))
            children = crossover(a, b, var.crossover_mode, sp.rng);
        else
            children = {a, b};

        Individual o1{mutate(children.first, var, config_.primitives, sp.rng), {}};
        Individual o2{mutate(children.second, var, config_.primitives, sp.rng), {}};

        o1.report = score(o1.chromosome, workspace);
        insert(std::move(o1));
        ++produced;
        // with an odd quota the second child of the last step is dropped
        if (produced < quota) {
            o2.report = score(o2.chromosome, workspace);
            insert(std::move(o2));
            ++produced;
        }
    }
}

void Evolution::advance()
{
    for_each_task(state_.subpops.size(), config_.threads,
                  [&](std::size_t s, EvalMatrix& workspace) { evolve_subpop(state_.subpops[s], workspace); });
    migrate(state_, config_.migration_rate);
    ++state_.generation;
    record_generation(config_.subpop_size);
}

void Evolution::record_generation(std::size_t offspring)
{
    GenerationRecord rec;
    rec.generation = state_.generation;
    rec.offspring_per_subpop = offspring;

    const Individual* best = nullptr;
    for (const auto& sp : state_.subpops) {
        const Individual& b = sp.members[best_index(sp.members)];
        rec.subpop_best.push_back(b.report.fitness);
        if (!best || b.report.fitness < best->report.fitness)
            best = &b;
    }
    rec.best_training_fitness = best->report.fitness;

    const ClassifierModel model = to_model(*best);
    const auto predictions = predict_all(model, validation_.features);
    rec.validation_error = error_percent(predictions, validation_.labels);

    const bool better = !have_retained_ || rec.validation_error < retained_validation_ ||
                        (rec.validation_error == retained_validation_ &&
                         best->report.fitness < retained_.report.fitness);
    if (better) {
        retained_ = *best;
        retained_generation_ = state_.generation;
        retained_validation_ = rec.validation_error;
        have_retained_ = true;
    }

    if (config_.progress) {
        std::string line = fmt::format("{}", rec.generation);
        for (double f : rec.subpop_best)
            line += fmt::format("\t{}", f);
        line += fmt::format("\t{}\n", rec.validation_error);
        *config_.progress << line << std::flush;
    }
    history_.push_back(std::move(rec));
}

RunResult run(const EvolutionConfig& config, const Dataset& train, const Dataset& validation, const Dataset& test)
{
    check_splits(train, validation, &test);
    const auto start = std::chrono::steady_clock::now();

    Evolution evo(config, train, validation);
    evo.initialize();
    for (std::size_t g = 0; g < config.num_generations; ++g)
        evo.advance();

    RunResult result;
    result.best_model = evo.to_model(evo.retained());
    result.training_fitness = evo.retained().report.fitness;
    result.best_generation = evo.retained_generation();
    result.training_error = error_percent(predict_all(result.best_model, train.features), train.labels);
    result.validation_error = evo.retained_validation_error();
    result.test_error = error_percent(predict_all(result.best_model, test.features), test.labels);
    result.generations = evo.history();
    for (const auto& rec : result.generations)
        result.trace.push_back(rec.best_training_fitness);
    result.seed = config.master_seed;
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace mep
