#include "mep/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "mep/error.hpp"
#include "text_util.hpp"

namespace mep {

namespace {

struct Field {
    std::string_view value;
    std::size_t line;

    [[noreturn]] void fail(std::string_view what) const
    {
        throw ConfigError(fmt::format("line {}: {} (got '{}')", line, what, value));
    }

    std::uint64_t u64() const
    {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size())
            fail("expected a non-negative integer");
        return v;
    }

    std::size_t count() const { return static_cast<std::size_t>(u64()); }

    double real() const
    {
        double v = 0.0;
        if (!detail::try_parse_real(value, v))
            fail("expected a finite number");
        return v;
    }

    bool flag() const
    {
        if (value == "yes" || value == "true" || value == "1")
            return true;
        if (value == "no" || value == "false" || value == "0")
            return false;
        fail("expected yes or no");
    }

    // "a b c", "a, b, c" and "[a, b]" all give {a, b, c}
    std::vector<std::string_view> list() const
    {
        std::string_view v = value;
        if (v.size() >= 2 && v.front() == '[' && v.back() == ']')
            v = v.substr(1, v.size() - 2);
        std::vector<std::string_view> out;
        for (auto piece : detail::split_on(v, ','))
            for (auto token : detail::split_whitespace(piece))
                out.push_back(token);
        return out;
    }

    std::vector<double> reals() const
    {
        std::vector<double> out;
        for (auto token : list()) {
            double v = 0.0;
            if (!detail::try_parse_real(token, v))
                fail("expected a list of numbers");
            out.push_back(v);
        }
        return out;
    }
};

using Setter = std::function<void(ExperimentConfig&, const Field&)>;

const std::map<std::string, Setter, std::less<>>& setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        // evolution
        {"sub_population_size", [](auto& c, const Field& f) { c.evolution.subpop_size = f.count(); }},
        {"number_of_sub_populations", [](auto& c, const Field& f) { c.evolution.num_subpops = f.count(); }},
        {"sub_populations_architecture",
         [](auto&, const Field& f) {
             if (f.value != "ring")
                 f.fail("only the ring architecture is supported");
         }},
        {"migration_rate", [](auto& c, const Field& f) { c.evolution.migration_rate = f.count(); }},
        {"chromosome_length", [](auto& c, const Field& f) { c.evolution.chromosome_length = f.count(); }},
        {"number_of_generations", [](auto& c, const Field& f) { c.evolution.num_generations = f.count(); }},
        {"tournament_size", [](auto& c, const Field& f) { c.evolution.tournament_size = f.count(); }},
        {"crossover_probability", [](auto& c, const Field& f) { c.evolution.variation.p_crossover = f.real(); }},
        {"crossover_type",
         [](auto& c, const Field& f) {
             if (f.value == "one-point" || f.value == "one_point")
                 c.evolution.variation.crossover_mode = CrossoverMode::OnePoint;
             else if (f.value == "uniform")
                 c.evolution.variation.crossover_mode = CrossoverMode::Uniform;
             else
                 f.fail("crossover type is one-point or uniform");
         }},
        {"mutation_probability", [](auto& c, const Field& f) { c.evolution.variation.p_mutation = f.real(); }},
        {"functions_probability", [](auto& c, const Field& f) { c.evolution.primitives.p_function = f.real(); }},
        {"variables_probability", [](auto& c, const Field& f) { c.evolution.primitives.p_variable = f.real(); }},
        {"constants_probability", [](auto& c, const Field& f) { c.evolution.primitives.p_constant = f.real(); }},
        {"mathematical_functions",
         [](auto& c, const Field& f) {
             std::vector<Op> ops;
             for (auto token : f.list()) {
                 Op op{};
                 if (!parse_op(token, op))
                     f.fail(fmt::format("unknown function '{}'", token));
                 if (std::find(ops.begin(), ops.end(), op) == ops.end())
                     ops.push_back(op);
             }
             c.evolution.primitives.functions = std::move(ops);
         }},
        {"number_of_constants", [](auto& c, const Field& f) { c.evolution.primitives.num_constants = f.count(); }},
        {"constants_initial_interval",
         [](auto& c, const Field& f) {
             const auto v = f.reals();
             if (v.size() != 2)
                 f.fail("interval needs two numbers");
             c.evolution.variation.constants_interval = {v[0], v[1]};
         }},
        {"constants_can_evolve", [](auto& c, const Field& f) { c.evolution.variation.constants_can_evolve = f.flag(); }},
        {"constants_can_evolve_outside_initial_interval",
         [](auto& c, const Field& f) { c.evolution.variation.constants_may_leave_interval = f.flag(); }},
        {"constants_delta", [](auto& c, const Field& f) { c.evolution.variation.constant_delta = f.real(); }},
        {"threshold_delta", [](auto& c, const Field& f) { c.evolution.variation.threshold_delta = f.real(); }},
        {"wta_d_assignment",
         [](auto& c, const Field& f) {
             const auto m = parse_assignment(f.value);
             if (!m)
                 f.fail("assignment is greedy or global-min");
             c.evolution.strategy.assignment = *m;
         }},
        {"seed", [](auto& c, const Field& f) { c.evolution.master_seed = f.u64(); }},
        {"threads", [](auto& c, const Field& f) { c.evolution.threads = static_cast<unsigned>(f.count()); }},
        // experiment
        {"strategy",
         [](auto& c, const Field& f) {
             c.strategies.clear();
             for (auto token : f.list()) {
                 const auto s = parse_strategy(token);
                 if (!s)
                     f.fail(fmt::format("unknown strategy '{}'", token));
                 c.strategies.push_back(*s);
             }
             if (c.strategies.empty())
                 f.fail("no strategy given");
         }},
        {"number_of_runs", [](auto& c, const Field& f) { c.runs = f.count(); }},
        {"standard_deviation",
         [](auto& c, const Field& f) {
             if (f.value == "population")
                 c.stddev = StddevMode::Population;
             else if (f.value == "sample")
                 c.stddev = StddevMode::Sample;
             else
                 f.fail("standard deviation is population or sample");
         }},
        // data
        {"dataset", [](auto& c, const Field& f) { c.dataset = std::string{f.value}; }},
        {"problem", [](auto& c, const Field& f) { c.problem = std::string{f.value}; }},
        {"dataset_format",
         [](auto& c, const Field& f) {
             if (f.value == "auto")
                 c.format = DataFormat::Auto;
             else if (f.value == "csv")
                 c.format = DataFormat::Csv;
             else if (f.value == "proben1")
                 c.format = DataFormat::Proben1;
             else
                 f.fail("format is auto, csv or proben1");
         }},
        {"label_column",
         [](auto& c, const Field& f) {
             if (f.value == "none") {
                 c.csv.label_column.reset();
                 return;
             }
             int v = 0;
             auto [ptr, ec] = std::from_chars(f.value.data(), f.value.data() + f.value.size(), v);
             if (f.value.empty() || ec != std::errc{} || ptr != f.value.data() + f.value.size())
                 f.fail("label column is an integer (negative counts from the end) or none");
             c.csv.label_column = v;
         }},
        {"csv_header", [](auto& c, const Field& f) { c.csv.header = f.flag(); }},
        {"csv_delimiter",
         [](auto& c, const Field& f) {
             if (f.value == "tab")
                 c.csv.delimiter = '\t';
             else if (f.value.size() == 1)
                 c.csv.delimiter = f.value[0];
             else
                 f.fail("delimiter is a single character or 'tab'");
         }},
        {"split",
         [](auto& c, const Field& f) {
             const auto v = f.reals();
             if (v.size() != 3)
                 f.fail("split needs three fractions");
             c.split.train = v[0];
             c.split.validation = v[1];
             c.split.test = v[2];
         }},
        {"permutation_seed",
         [](auto& c, const Field& f) {
             if (f.value == "none")
                 c.split.permutation_seed.reset();
             else
                 c.split.permutation_seed = f.u64();
         }},
    };
    return table;
}

std::string_view format_name(DataFormat f)
{
    switch (f) {
    case DataFormat::Csv: return "csv";
    case DataFormat::Proben1: return "proben1";
    case DataFormat::Auto: break;
    }
    return "auto";
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

} // namespace

EvolutionConfig default_evolution()
{
    EvolutionConfig c;
    c.primitives.num_constants = 10;
    return c;
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir)
{
    ExperimentConfig config;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = raw;
        if (auto hash = text.find('#'); hash != std::string_view::npos)
            text = text.substr(0, hash);
        text = detail::trim(text);
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("line {}: expected 'key = value'", line));
        const auto key = detail::trim(text.substr(0, eq));
        const Field field{detail::trim(text.substr(eq + 1)), line};
        const auto& table = setters();
        auto it = table.find(key);
        if (it == table.end())
            throw ConfigError(fmt::format("line {}: unknown key '{}'", line, key));
        it->second(config, field);
    }
    if (!config.dataset.empty() && config.dataset.is_relative() && !base_dir.empty())
        config.dataset = base_dir / config.dataset;
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    try {
        return parse_config(in, path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void check_experiment(const ExperimentConfig& config)
{
    if (config.runs < 1)
        throw ConfigError("number of runs must be at least 1");
    if (config.strategies.empty())
        throw ConfigError("no strategy selected");
    check_split(config.split);
    check_config(config.evolution);
    PrimitiveSet ps = config.evolution.primitives;
    ps.num_variables = 1; // the data decides; only the rest is checked here
    check_primitives(ps);
}

void write_config(std::ostream& out, const ExperimentConfig& c)
{
    const EvolutionConfig& e = c.evolution;
    const VariationParams& v = e.variation;
    const PrimitiveSet& p = e.primitives;
    std::vector<std::string_view> fns;
    for (Op op : p.functions)
        fns.push_back(op_symbol(op));
    std::vector<std::string_view> strategies;
    for (Strategy s : c.strategies)
        strategies.push_back(strategy_name(s));

    out << fmt::format("sub_population_size = {}\n", e.subpop_size);
    out << fmt::format("number_of_sub_populations = {}\n", e.num_subpops);
    out << "sub_populations_architecture = ring\n";
    out << fmt::format("migration_rate = {}\n", e.migration_rate);
    out << fmt::format("chromosome_length = {}\n", e.chromosome_length);
    out << fmt::format("crossover_probability = {}\n", v.p_crossover);
    out << fmt::format("crossover_type = {}\n", v.crossover_mode == CrossoverMode::Uniform ? "uniform" : "one-point");
    out << fmt::format("mutation_probability = {}\n", v.p_mutation);
    out << fmt::format("tournament_size = {}\n", e.tournament_size);
    out << fmt::format("functions_probability = {}\n", p.p_function);
    out << fmt::format("variables_probability = {}\n", p.p_variable);
    out << fmt::format("constants_probability = {}\n", p.p_constant);
    out << fmt::format("number_of_generations = {}\n", e.num_generations);
    out << fmt::format("mathematical_functions = {}\n", fmt::join(fns, " "));
    out << fmt::format("number_of_constants = {}\n", p.num_constants);
    out << fmt::format("constants_initial_interval = [{}, {}]\n", v.constants_interval.lo, v.constants_interval.hi);
    out << fmt::format("constants_can_evolve = {}\n", yes_no(v.constants_can_evolve));
    out << fmt::format("constants_can_evolve_outside_initial_interval = {}\n", yes_no(v.constants_may_leave_interval));
    out << fmt::format("constants_delta = {}\n", v.constant_delta);
    out << fmt::format("threshold_delta = {}\n", v.threshold_delta);
    out << fmt::format("wta_d_assignment = {}\n", assignment_name(e.strategy.assignment));
    out << fmt::format("seed = {}\n", e.master_seed);
    out << fmt::format("threads = {}\n", e.threads);
    out << fmt::format("strategy = {}\n", fmt::join(strategies, ", "));
    out << fmt::format("number_of_runs = {}\n", c.runs);
    out << fmt::format("standard_deviation = {}\n", c.stddev == StddevMode::Sample ? "sample" : "population");
    if (!c.dataset.empty())
        out << fmt::format("dataset = {}\n", c.dataset.string());
    if (!c.problem.empty())
        out << fmt::format("problem = {}\n", c.problem);
    out << fmt::format("dataset_format = {}\n", format_name(c.format));
    out << fmt::format("label_column = {}\n", c.csv.label_column ? std::to_string(*c.csv.label_column) : "none");
    out << fmt::format("csv_header = {}\n", yes_no(c.csv.header));
    out << fmt::format("csv_delimiter = {}\n", c.csv.delimiter == '\t' ? std::string{"tab"} : std::string(1, c.csv.delimiter));
    out << fmt::format("split = {} {} {}\n", c.split.train, c.split.validation, c.split.test);
    out << fmt::format("permutation_seed = {}\n",
                       c.split.permutation_seed ? std::to_string(*c.split.permutation_seed) : "none");
}

std::string problem_name(const ExperimentConfig& config)
{
    if (!config.problem.empty())
        return config.problem;
    return config.dataset.stem().string();
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format, const CsvOptions& csv)
{
    if (format == DataFormat::Auto)
        format = path.extension() == ".dt" ? DataFormat::Proben1 : DataFormat::Csv;
    if (format == DataFormat::Proben1)
        return load_proben1(path);
    return load_csv(path, csv);
}

Dataset load_dataset(const ExperimentConfig& config)
{
    if (config.dataset.empty())
        throw ConfigError("no dataset given");
    return load_dataset(config.dataset, config.format, config.csv);
}

} // namespace mep
