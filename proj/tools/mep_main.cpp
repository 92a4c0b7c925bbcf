// mep: train, apply and benchmark Multi Expression Programming classifiers.
//
// Exit codes: 0 success, 1 input error (data, model files), 2 configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mep/commands.hpp"
#include "mep/error.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> strategies;
    std::optional<std::size_t> runs;
    std::optional<unsigned> threads;
    std::optional<std::size_t> generations;
    bool verbose = false;
};

mep::ExperimentConfig build_config(const CommonFlags& f, const std::vector<std::string>& data)
{
    mep::ExperimentConfig c = f.config.empty() ? mep::ExperimentConfig{} : mep::load_config(f.config);
    if (!data.empty())
        c.dataset = data.front();
    if (f.seed)
        c.evolution.master_seed = *f.seed;
    if (!f.strategies.empty()) {
        c.strategies.clear();
        for (const auto& name : f.strategies) {
            const auto s = mep::parse_strategy(name);
            if (!s)
                throw mep::ConfigError("unknown strategy '" + name + "'");
            c.strategies.push_back(*s);
        }
    }
    if (f.runs)
        c.runs = *f.runs;
    if (f.threads)
        c.evolution.threads = *f.threads;
    if (f.generations)
        c.evolution.num_generations = *f.generations;
    return c;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_runs)
{
    cmd->add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--strategy", f.strategies, "bet, bat, wta-f, wta-s, wta-d, cc or regression")->delimiter(',');
    if (with_runs)
        cmd->add_option("--runs", f.runs, "independent runs per problem and strategy");
    cmd->add_option("--threads", f.threads, "worker threads");
    cmd->add_option("--generations", f.generations, "number of generations");
    cmd->add_flag("--verbose", f.verbose, "progress lines on standard error");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi Expression Programming classifiers"};
    app.require_subcommand(1);

    CommonFlags train_flags;
    std::vector<std::string> train_data;
    std::string model_out = "model.mep";
    std::string report_out;
    std::string split_dir;
    bool train_header = false;
    auto* train = app.add_subcommand("train", "evolve a model and write it with a report");
    add_common(train, train_flags, false);
    train->add_option("--data", train_data, "dataset (CSV, or PROBEN1 .dt)")->check(CLI::ExistingFile);
    train->add_option("--out", model_out, "model file to write");
    train->add_option("--report", report_out, "write the report here instead of standard output");
    train->add_option("--split-dir", split_dir, "also write train/validation/test CSV files here");
    train->add_flag("--header", train_header, "CSV data has a header row");

    mep::PredictOptions predict_opts;
    std::string predict_out;
    std::string predict_model;
    std::string predict_data;
    auto* predict = app.add_subcommand("predict", "classify rows with a saved model");
    predict->add_option("--model", predict_model, "model file")->required()->check(CLI::ExistingFile);
    predict->add_option("--data", predict_data, "rows to classify")->required()->check(CLI::ExistingFile);
    predict->add_option("--out", predict_out, "write predictions here instead of standard output");
    predict->add_flag("--header", predict_opts.header, "CSV data has a header row");

    CommonFlags bench_flags;
    std::vector<std::string> bench_data;
    std::string bench_out;
    auto* bench = app.add_subcommand("benchmark", "repeated runs with Best/Avg/Dev test error");
    add_common(bench, bench_flags, true);
    bench->add_option("--data", bench_data, "one or more datasets")->check(CLI::ExistingFile);
    bench->add_option("--out", bench_out, "raw per-run results CSV");

    std::vector<std::string> summary_data;
    std::string summary_config;
    auto* summary = app.add_subcommand("summary", "inputs, classes, examples and split sizes per dataset");
    summary->add_option("--data", summary_data, "datasets")->required()->check(CLI::ExistingFile);
    summary->add_option("--config", summary_config, "configuration with split and CSV settings")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*train) {
            mep::TrainOptions o;
            o.config = build_config(train_flags, train_data);
            if (train_header)
                o.config.csv.header = true;
            o.model_out = model_out;
            if (!report_out.empty())
                o.report_out = report_out;
            if (!split_dir.empty())
                o.split_dir = split_dir;
            o.verbose = train_flags.verbose;
            mep::cmd_train(o, std::cout, std::cerr);
        } else if (*predict) {
            predict_opts.model = predict_model;
            predict_opts.data = predict_data;
            if (!predict_out.empty())
                predict_opts.out = predict_out;
            mep::cmd_predict(predict_opts, std::cout, std::cerr);
        } else if (*bench) {
            mep::BenchmarkOptions o;
            o.config = build_config(bench_flags, {});
            o.datasets.assign(bench_data.begin(), bench_data.end());
            o.threads = o.config.evolution.threads;
            o.config.evolution.threads = 1;
            if (!bench_out.empty())
                o.raw_csv_out = bench_out;
            o.verbose = bench_flags.verbose;
            mep::cmd_benchmark(o, std::cout, std::cerr);
        } else if (*summary) {
            mep::SummaryOptions o;
            if (!summary_config.empty()) {
                const auto c = mep::load_config(summary_config);
                o.format = c.format;
                o.csv = c.csv;
                o.split = c.split;
            }
            o.datasets.assign(summary_data.begin(), summary_data.end());
            mep::cmd_summary(o, std::cout);
        }
    } catch (const mep::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const mep::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
