#include "mep/commands.hpp"

#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "mep/error.hpp"
#include "text_util.hpp"

namespace mep {

namespace {

// longer expressions are summarized instead of printed
constexpr std::size_t max_expression_chars = 20000;

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError(fmt::format("cannot write '{}'", path.string()));
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    auto out = open_output(path);
    out << text;
    if (!out)
        throw InputError(fmt::format("failed writing '{}'", path.string()));
}

std::string expression_line(const ClassifierModel& model, std::size_t gene)
{
    const auto& names = model.feature_names;
    const std::size_t len = expression_length(model.chromosome, gene, names);
    if (len > max_expression_chars)
        return fmt::format("<{} characters, omitted>", len);
    return gene_to_expression(model.chromosome, gene, names);
}

std::string class_label(const ClassifierModel& model, std::size_t k)
{
    return k < model.class_names.size() ? model.class_names[k] : std::to_string(k);
}

std::string output_section(const ClassifierModel& model)
{
    const OutputDecoder& d = model.decoder;
    std::string out;
    switch (d.strategy) {
    case Strategy::Regression:
        out += fmt::format("output gene: {}\n", d.output_gene);
        out += fmt::format("expression: {}\n", expression_line(model, d.output_gene));
        out += "decision: nearest class index to the output\n";
        break;
    case Strategy::Bet:
    case Strategy::Bat:
        out += fmt::format("output gene: {}\n", d.output_gene);
        out += fmt::format("expression: {}\n", expression_line(model, d.output_gene));
        out += fmt::format("decision: class {} if output <= {}, else class {}\n", class_label(model, 0),
                           detail::format_real(d.threshold), class_label(model, 1));
        break;
    case Strategy::Cc:
        out += fmt::format("output gene: {}\n", d.output_gene);
        out += fmt::format("expression: {}\n", expression_line(model, d.output_gene));
        for (std::size_t k = 0; k < d.centers.size(); ++k)
            out += fmt::format("center {}: {}\n", class_label(model, k), detail::format_real(d.centers[k]));
        out += "decision: class of the nearest center\n";
        break;
    case Strategy::WtaD:
        for (std::size_t k = 0; k < d.assigned_genes.size(); ++k)
            out += fmt::format("class {} gene {}: {}\n", class_label(model, k), d.assigned_genes[k],
                               expression_line(model, d.assigned_genes[k]));
        out += "decision: class of the largest output\n";
        break;
    case Strategy::WtaF:
    case Strategy::WtaS: {
        for (std::size_t i = 0; i < model.chromosome.length(); ++i) {
            if (std::find(d.excluded_genes.begin(), d.excluded_genes.end(), i) != d.excluded_genes.end())
                continue;
            out += fmt::format("class {} gene {}: {}\n", class_label(model, i % d.num_classes), i,
                               expression_line(model, i));
        }
        out += d.strategy == Strategy::WtaS ? "decision: class of the largest scaled output\n"
                                            : "decision: class of the largest output\n";
        break;
    }
    }
    return out;
}

std::size_t first_row_width(const std::string& text, char delimiter)
{
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!detail::trim(line).empty())
            return detail::split_on(line, delimiter).size();
    throw InputError("no data rows");
}

} // namespace

std::string train_report(const ExperimentConfig& config, const Dataset& data, const SplitResult& parts,
                         const RunResult& result)
{
    const EvolutionConfig& e = config.evolution;
    std::string out;
    out += fmt::format("problem: {}\n", problem_name(config));
    out += fmt::format("strategy: {}\n", strategy_name(result.best_model.decoder.strategy));
    out += fmt::format("seed: {}\n", result.seed);
    out += fmt::format("data: {} rows, {} features, {} classes, split {}+{}+{}\n", data.rows(), data.num_features(),
                       data.num_classes(), parts.train.rows(), parts.validation.rows(), parts.test.rows());
    out += fmt::format("population: {} x {}, length {}, {} generations\n", e.num_subpops, e.subpop_size,
                       e.chromosome_length, e.num_generations);
    out += fmt::format("best generation: {}\n", result.best_generation);
    out += fmt::format("training fitness: {}\n", result.training_fitness);
    out += fmt::format("train error: {}%\n", result.training_error);
    out += fmt::format("validation error: {}%\n", result.validation_error);
    out += fmt::format("test error: {}%\n", result.test_error);
    out += fmt::format("seconds: {:.3f}\n", result.seconds);
    out += output_section(result.best_model);
    return out;
}

RunResult cmd_train(const TrainOptions& options, std::ostream& report, std::ostream& log)
{
    ExperimentConfig config = options.config;
    check_experiment(config);
    if (config.strategies.size() != 1)
        throw ConfigError("train needs exactly one strategy");
    config.evolution.strategy.strategy = config.strategies.front();

    const Dataset data = load_dataset(config);
    if (!data.has_labels())
        throw InputError("training data has no labels");
    const Strategy s = config.strategies.front();
    if (is_binary_only(s) && data.num_classes() != 2)
        throw ConfigError(fmt::format("N/A: strategy {} requires 2 classes, data has {}", strategy_name(s),
                                      data.num_classes()));

    const SplitResult parts = split(data, config.split);
    for (const auto& w : parts.warnings)
        log << "warning: " << w << '\n';
    if (options.split_dir) {
        std::filesystem::create_directories(*options.split_dir);
        const std::pair<const char*, const Dataset*> files[] = {
            {"train.csv", &parts.train}, {"validation.csv", &parts.validation}, {"test.csv", &parts.test}};
        for (const auto& [name, part] : files) {
            auto out = open_output(*options.split_dir / name);
            write_csv(out, *part);
        }
    }

    if (options.verbose)
        config.evolution.progress = &log;
    const RunResult result = run(config.evolution, parts.train, parts.validation, parts.test);

    write_file(options.model_out, model_to_text(result.best_model));
    const std::string text = train_report(config, data, parts, result);
    if (options.report_out)
        write_file(*options.report_out, text);
    else
        report << text;
    return result;
}

PredictSummary cmd_predict(const PredictOptions& options, std::ostream& out, std::ostream& log)
{
    ClassifierModel model;
    {
        std::ifstream in(options.model, std::ios::binary);
        if (!in)
            throw InputError(fmt::format("cannot open model '{}'", options.model.string()));
        try {
            model = read_model(in);
        } catch (const InputError& e) {
            throw InputError(fmt::format("{}: {}", options.model.string(), e.what()));
        }
    }

    Dataset data;
    if (options.data.extension() == ".dt") {
        data = load_proben1(options.data);
    } else {
        std::ifstream in(options.data, std::ios::binary);
        if (!in)
            throw InputError(fmt::format("cannot open '{}'", options.data.string()));
        const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        const std::size_t width = first_row_width(text, options.delimiter);
        CsvOptions csv;
        csv.header = options.header;
        csv.delimiter = options.delimiter;
        if (width == model.num_features + 1) {
            csv.label_column = -1;
            csv.class_names = model.class_names;
        } else if (width == model.num_features) {
            csv.label_column.reset();
        } else {
            throw InputError(fmt::format("{}: rows have {} columns, model expects {} features (plus an optional label)",
                                         options.data.string(), width, model.num_features));
        }
        std::istringstream stream(text);
        try {
            data = read_csv(stream, csv);
        } catch (const InputError& e) {
            throw InputError(fmt::format("{}: {}", options.data.string(), e.what()));
        }
    }
    if (data.num_features() != model.num_features)
        throw InputError(fmt::format("data has {} features, model expects {}", data.num_features(), model.num_features));
    if (data.has_labels() && data.num_classes() > model.decoder.num_classes)
        throw InputError(fmt::format("data has {} classes, model knows {}", data.num_classes(),
                                     model.decoder.num_classes));

    const auto predictions = predict_all(model, data.features);

    std::ofstream file;
    std::ostream* sink = &out;
    if (options.out) {
        file = open_output(*options.out);
        sink = &file;
    }
    std::string lines;
    for (const auto& p : predictions) {
        lines += class_label(model, p.label);
        if (p.invalid)
            lines += ",invalid";
        lines += '\n';
    }
    *sink << lines << std::flush;

    PredictSummary summary;
    summary.rows = predictions.size();
    for (const auto& p : predictions)
        summary.invalid_rows += p.invalid ? 1 : 0;
    log << fmt::format("rows: {}\n", summary.rows);
    log << fmt::format("invalid rows: {}\n", summary.invalid_rows);
    if (data.has_labels()) {
        for (std::size_t r = 0; r < predictions.size(); ++r)
            summary.misclassified += predictions[r].label != data.labels[r] ? 1 : 0;
        summary.error_percent = error_percent(predictions, data.labels);
        log << fmt::format("error: {}% ({} of {} rows misclassified)\n", *summary.error_percent,
                           summary.misclassified, summary.rows);
    }
    return summary;
}

BenchmarkResult cmd_benchmark(const BenchmarkOptions& options, std::ostream& out, std::ostream& log)
{
    const ExperimentConfig& config = options.config;
    check_experiment(config);

    std::vector<std::filesystem::path> paths = options.datasets;
    if (paths.empty()) {
        if (config.dataset.empty())
            throw ConfigError("no dataset given");
        paths.push_back(config.dataset);
    }

    BenchmarkPlan plan;
    for (const auto& path : paths) {
        Dataset data = load_dataset(path, config.format, config.csv);
        if (!data.has_labels())
            throw InputError(fmt::format("{}: benchmark data needs labels", path.string()));
        BenchProblem problem;
        problem.name = paths.size() == 1 && !config.problem.empty() ? config.problem : path.stem().string();
        problem.data = split(data, config.split);
        for (const auto& w : problem.data.warnings)
            log << fmt::format("warning: {}: {}\n", problem.name, w);
        plan.problems.push_back(std::move(problem));
    }
    plan.strategies = config.strategies;
    plan.evolution = config.evolution;
    plan.runs = config.runs;
    plan.threads = options.threads;
    plan.stddev = config.stddev;
    if (options.verbose)
        plan.progress = &log;

    BenchmarkResult result = run_benchmark(plan);
    out << render_table(result) << '\n' << render_delta_report(result);
    if (options.raw_csv_out) {
        auto file = open_output(*options.raw_csv_out);
        write_raw_csv(file, result);
    }
    return result;
}

void cmd_summary(const SummaryOptions& options, std::ostream& out)
{
    if (options.datasets.empty())
        throw ConfigError("no dataset given");
    check_split(options.split);
    out << fmt::format("{:<12} {:>8} {:>8} {:>9}   {}\n", "Problem", "Inputs", "Classes", "Examples",
                       "Train+Valid+Test");
    for (const auto& path : options.datasets) {
        const Dataset data = load_dataset(path, options.format, options.csv);
        out << summary_line(path.stem().string(), data, split_sizes(data.rows(), options.split)) << '\n';
    }
}

} // namespace mep
