#include <algorithm>
#include <charconv>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "mep/error.hpp"
#include "mep/fitness.hpp"
#include "text_util.hpp"

namespace mep {

namespace {

std::string join_sizes(const std::vector<std::size_t>& v)
{
    return fmt::format("{}", fmt::join(v, " "));
}

std::string join_reals(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k)
            s += ' ';
        s += detail::format_real(v[k]);
    }
    return s;
}

std::string join_names(const std::vector<std::string>& names)
{
    std::string s;
    for (std::size_t k = 0; k < names.size(); ++k) {
        std::string name = names[k];
        std::replace_if(name.begin(), name.end(), [](char ch) { return ch == ' ' || ch == '\t'; }, '_');
        if (k)
            s += ' ';
        s += name;
    }
    return s;
}

std::size_t parse_count(std::string_view token, std::size_t line)
{
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
        throw InputError(fmt::format("line {}: '{}' is not a non-negative integer", line, token));
    return value;
}

std::vector<std::size_t> parse_counts(std::string_view value, std::size_t line)
{
    std::vector<std::size_t> out;
    for (auto token : detail::split_whitespace(value))
        out.push_back(parse_count(token, line));
    return out;
}

std::vector<double> parse_reals(std::string_view value, std::size_t line)
{
    std::vector<double> out;
    for (auto token : detail::split_whitespace(value))
        out.push_back(detail::parse_real(token, line));
    return out;
}

bool is_gene_key(std::string_view key)
{
    return !key.empty() && std::all_of(key.begin(), key.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
}

[[noreturn]] void corrupt(const std::string& why) { throw InputError("corrupt model: " + why); }

void check_decoder(const OutputDecoder& d, const Chromosome& c)
{
    const std::size_t genes = c.genes.size();
    if (d.num_classes < 2)
        corrupt("needs at least 2 classes");
    switch (d.strategy) {
    case Strategy::Regression:
    case Strategy::Bet:
    case Strategy::Bat:
        if (d.output_gene >= genes)
            corrupt(fmt::format("output gene {} beyond chromosome length {}", d.output_gene, genes));
        if (d.strategy != Strategy::Regression && d.num_classes != 2)
            corrupt("threshold strategies are binary");
        break;
    case Strategy::Cc:
        if (d.output_gene >= genes)
            corrupt(fmt::format("output gene {} beyond chromosome length {}", d.output_gene, genes));
        if (d.centers.size() != d.num_classes)
            corrupt("one center per class required");
        break;
    case Strategy::WtaD: {
        if (d.assigned_genes.size() != d.num_classes)
            corrupt("one assigned gene per class required");
        std::set<std::size_t> seen(d.assigned_genes.begin(), d.assigned_genes.end());
        if (seen.size() != d.assigned_genes.size())
            corrupt("assigned genes must be distinct");
        if (!seen.empty() && *seen.rbegin() >= genes)
            corrupt("assigned gene beyond chromosome length");
        break;
    }
    case Strategy::WtaS:
        if (d.scale_min.size() != d.num_classes || d.scale_max.size() != d.num_classes)
            corrupt("one scale_min/scale_max pair per class required");
        [[fallthrough]];
    case Strategy::WtaF:
        if (genes < d.num_classes)
            corrupt("chromosome shorter than the class count");
        for (auto g : d.excluded_genes)
            if (g >= genes)
                corrupt("excluded gene beyond chromosome length");
        break;
    }
}

} // namespace

void write_model(std::ostream& out, const ClassifierModel& model)
{
    const OutputDecoder& d = model.decoder;
    out << "features: " << model.num_features << '\n';
    if (!model.feature_names.empty())
        out << "feature_names: " << join_names(model.feature_names) << '\n';
    if (!model.class_names.empty())
        out << "class_names: " << join_names(model.class_names) << '\n';
    write_chromosome(out, model.chromosome);
    out << "strategy: " << strategy_name(d.strategy) << '\n';
    out << "classes: " << d.num_classes << '\n';
    switch (d.strategy) {
    case Strategy::Regression:
        out << "output_gene: " << d.output_gene << '\n';
        break;
    case Strategy::Bet:
    case Strategy::Bat:
        out << "output_gene: " << d.output_gene << '\n';
        out << "threshold: " << detail::format_real(d.threshold) << '\n';
        break;
    case Strategy::Cc:
        out << "output_gene: " << d.output_gene << '\n';
        out << "centers: " << join_reals(d.centers) << '\n';
        break;
    case Strategy::WtaD:
        out << "assigned_genes: " << join_sizes(d.assigned_genes) << '\n';
        break;
    case Strategy::WtaS:
        out << "scale_min: " << join_reals(d.scale_min) << '\n';
        out << "scale_max: " << join_reals(d.scale_max) << '\n';
        out << "excluded_genes: " << join_sizes(d.excluded_genes) << '\n';
        break;
    case Strategy::WtaF:
        out << "excluded_genes: " << join_sizes(d.excluded_genes) << '\n';
        break;
    }
}

std::string model_to_text(const ClassifierModel& model)
{
    std::ostringstream out;
    write_model(out, model);
    return out.str();
}

ClassifierModel read_model(std::istream& in)
{
    ClassifierModel model;
    std::size_t line = 0;
    std::string raw;
    bool have_features = false;

    // header lines up to the first gene
    std::string chromosome_text;
    std::size_t chromosome_first_line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = detail::trim(raw);
        if (text.empty())
            continue;
        const auto colon = text.find(':');
        if (colon == std::string_view::npos)
            throw InputError(fmt::format("line {}: expected 'key: value'", line));
        const std::string_view key = detail::trim(text.substr(0, colon));
        const std::string_view value = detail::trim(text.substr(colon + 1));
        if (is_gene_key(key)) {
            chromosome_text = raw + '\n';
            chromosome_first_line = line;
            break;
        }
        if (key == "features") {
            model.num_features = parse_count(value, line);
            have_features = true;
        } else if (key == "feature_names") {
            for (auto t : detail::split_whitespace(value))
                model.feature_names.emplace_back(t);
        } else if (key == "class_names") {
            for (auto t : detail::split_whitespace(value))
                model.class_names.emplace_back(t);
        } else {
            throw InputError(fmt::format("line {}: unexpected key '{}' before the chromosome", line, key));
        }
    }
    if (!have_features)
        corrupt("missing 'features:' line");
    if (chromosome_text.empty())
        corrupt("no chromosome listing");

    chromosome_text.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    std::istringstream rest{chromosome_text};
    std::size_t chromosome_line = chromosome_first_line - 1;
    model.chromosome = read_chromosome(rest, chromosome_line);
    line = chromosome_line;

    std::map<std::string, std::pair<std::string, std::size_t>, std::less<>> fields;
    while (std::getline(rest, raw)) {
        ++line;
        const std::string_view text = detail::trim(raw);
        if (text.empty())
            continue;
        const auto colon = text.find(':');
        if (colon == std::string_view::npos)
            throw InputError(fmt::format("line {}: expected 'key: value'", line));
        std::string key{detail::trim(text.substr(0, colon))};
        if (fields.count(key))
            throw InputError(fmt::format("line {}: duplicate key '{}'", line, key));
        fields[key] = {std::string{detail::trim(text.substr(colon + 1))}, line};
    }

    auto field = [&](std::string_view key) -> const std::pair<std::string, std::size_t>& {
        auto it = fields.find(key);
        if (it == fields.end())
            corrupt(fmt::format("missing '{}:' line", key));
        return it->second;
    };

    OutputDecoder& d = model.decoder;
    const auto& [strategy_text, strategy_line] = field("strategy");
    const auto strategy = parse_strategy(strategy_text);
    if (!strategy)
        throw InputError(fmt::format("line {}: unknown strategy '{}'", strategy_line, strategy_text));
    d.strategy = *strategy;
    {
        const auto& [v, l] = field("classes");
        d.num_classes = parse_count(v, l);
    }

    switch (d.strategy) {
    case Strategy::Bet:
    case Strategy::Bat: {
        const auto& [v, l] = field("threshold");
        d.threshold = detail::parse_real(v, l);
        [[fallthrough]];
    }
    case Strategy::Regression: {
        const auto& [v, l] = field("output_gene");
        d.output_gene = parse_count(v, l);
        break;
    }
    case Strategy::Cc: {
        const auto& [g, gl] = field("output_gene");
        d.output_gene = parse_count(g, gl);
        const auto& [v, l] = field("centers");
        d.centers = parse_reals(v, l);
        break;
    }
    case Strategy::WtaD: {
        const auto& [v, l] = field("assigned_genes");
        d.assigned_genes = parse_counts(v, l);
        break;
    }
    case Strategy::WtaS: {
        const auto& [lo, lol] = field("scale_min");
        d.scale_min = parse_reals(lo, lol);
        const auto& [hi, hil] = field("scale_max");
        d.scale_max = parse_reals(hi, hil);
        [[fallthrough]];
    }
    case Strategy::WtaF: {
        const auto& [v, l] = field("excluded_genes");
        d.excluded_genes = parse_counts(v, l);
        break;
    }
    }
    check_decoder(d, model.chromosome);
    if (!model.class_names.empty() && model.class_names.size() != d.num_classes)
        corrupt("class_names count differs from classes");
    return model;
}

ClassifierModel parse_model(std::string_view text)
{
    std::istringstream in{std::string{text}};
    return read_model(in);
}

} // namespace mep
