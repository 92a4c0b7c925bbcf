#include "mep/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "mep/error.hpp"
#include "mep/random.hpp"
#include "text_util.hpp"

namespace mep {

namespace {

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError(fmt::format("cannot open '{}'", path.string()));
    return in;
}

bool is_class_index(std::string_view s, std::uint32_t& value)
{
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
        return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool ends_with(std::string_view s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

void require_all_classes(const LabelVector& labels, std::string_view source)
{
    const auto counts = labels.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] == 0)
            throw InputError(fmt::format("{}: class {} never occurs", source, c));
}

} // namespace

Dataset Dataset::select(std::span<const std::size_t> indices) const
{
    Dataset out;
    out.features = features.select_rows(indices);
    if (has_labels())
        out.labels = labels.select(indices);
    out.feature_names = feature_names;
    out.class_names = class_names;
    return out;
}

Dataset read_csv(std::istream& in, const CsvOptions& options)
{
    Dataset data;
    std::vector<double> values;
    std::vector<std::pair<std::string, std::size_t>> raw_labels; // text, line
    std::size_t width = 0;
    std::size_t label_index = 0;
    bool first = true;
    std::size_t line = 0;
    std::size_t rows = 0;
    std::string raw;

    auto resolve_label_column = [&](std::size_t columns) {
        if (!options.label_column)
            return;
        const int col = *options.label_column;
        const long resolved = col < 0 ? static_cast<long>(columns) + col : col;
        if (resolved < 0 || resolved >= static_cast<long>(columns))
            throw InputError(fmt::format("line {}: label column {} outside {} columns", line, col, columns));
        label_index = static_cast<std::size_t>(resolved);
    };

    while (std::getline(in, raw)) {
        ++line;
        if (detail::trim(raw).empty())
            continue;
        const auto cells = detail::split_on(raw, options.delimiter);
        if (first) {
            width = cells.size();
            resolve_label_column(width);
            first = false;
            if (options.header) {
                for (std::size_t k = 0; k < cells.size(); ++k)
                    if (!options.label_column || k != label_index)
                        data.feature_names.emplace_back(detail::trim(cells[k]));
                continue;
            }
        }
        if (cells.size() != width)
            throw InputError(fmt::format("line {}: ragged row with {} fields, expected {}", line, cells.size(), width));
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const std::string_view cell = detail::trim(cells[k]);
            if (options.label_column && k == label_index) {
                raw_labels.emplace_back(std::string{cell}, line);
                continue;
            }
            double v = 0.0;
            if (!detail::try_parse_real(cell, v) || !std::isfinite(v))
                throw InputError(fmt::format("line {}, field {}: '{}' is not a finite number", line, k + 1, cell));
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0)
        throw InputError("no data rows");

    const std::size_t cols = options.label_column ? width - 1 : width;
    data.features = DataMatrix(rows, cols, std::move(values));
    if (!options.label_column)
        return data;

    std::vector<std::uint32_t> labels;
    labels.reserve(rows);
    if (!options.class_names.empty()) {
        for (const auto& [text, at] : raw_labels) {
            auto it = std::find(options.class_names.begin(), options.class_names.end(), text);
            if (it != options.class_names.end()) {
                labels.push_back(static_cast<std::uint32_t>(it - options.class_names.begin()));
                continue;
            }
            // write_csv stores class indices, so an index is accepted when no name matches
            std::uint32_t index = 0;
            if (!is_class_index(text, index) || index >= options.class_names.size())
                throw InputError(fmt::format("line {}: unknown label '{}'", at, text));
            labels.push_back(index);
        }
        data.class_names = options.class_names;
        data.labels = LabelVector(std::move(labels), options.class_names.size());
        return data;
    }

    std::uint32_t index = 0;
    const bool numeric = std::all_of(raw_labels.begin(), raw_labels.end(),
                                     [&](const auto& l) { return is_class_index(l.first, index); });
    if (numeric) {
        std::uint32_t top = 0;
        for (const auto& [text, at] : raw_labels) {
            is_class_index(text, index);
            labels.push_back(index);
            top = std::max(top, index);
        }
        for (std::uint32_t c = 0; c <= top; ++c)
            data.class_names.push_back(std::to_string(c));
    } else {
        std::map<std::string, std::uint32_t, std::less<>> seen;
        for (const auto& [text, at] : raw_labels) {
            auto [it, inserted] = seen.try_emplace(text, static_cast<std::uint32_t>(seen.size()));
            if (inserted)
                data.class_names.push_back(text);
            labels.push_back(it->second);
        }
    }
    data.labels = LabelVector(std::move(labels), data.class_names.size());
    require_all_classes(data.labels, "labels");
    return data;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options)
{
    auto in = open_input(path);
    try {
        return read_csv(in, options);
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_csv(std::ostream& out, const Dataset& data, char delimiter)
{
    if (!data.feature_names.empty()) {
        for (const auto& name : data.feature_names)
            out << name << delimiter;
        out << "class\n";
    }
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (double v : data.features.row(r))
            out << fmt::format("{}", v) << delimiter;
        out << (data.has_labels() ? data.labels[r] : 0u) << '\n';
    }
}

std::uint32_t one_of_m_decode(std::span<const double> outputs)
{
    std::size_t ones = 0;
    std::uint32_t index = 0;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        if (outputs[k] == 1.0) {
            ++ones;
            index = static_cast<std::uint32_t>(k);
        } else if (outputs[k] != 0.0) {
            throw InputError(fmt::format("output value {} is not 0 or 1 (real-valued outputs are not classes)",
                                         outputs[k]));
        }
    }
    if (ones == 0)
        throw InputError("ambiguous class encoding: no output is 1");
    if (ones > 1)
        throw InputError("ambiguous class encoding: more than one output is 1");
    return index;
}

Dataset read_proben1(std::istream& in, Proben1Header* header_out)
{
    Proben1Header header;
    bool in_header = true;
    std::vector<double> values;
    std::vector<std::uint32_t> labels;
    std::vector<double> outputs;
    std::size_t line = 0;
    std::size_t rows = 0;
    std::string raw;

    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = detail::trim(raw);
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        if (in_header && eq != std::string_view::npos) {
            const std::string_view key = detail::trim(text.substr(0, eq));
            const std::string_view value = detail::trim(text.substr(eq + 1));
            std::size_t n = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
            if (ec != std::errc{} || ptr != value.data() + value.size())
                throw InputError(fmt::format("line {}: header value '{}' is not a count", line, value));
            if (ends_with(key, "_in"))
                header.inputs += n;
            else if (ends_with(key, "_out"))
                header.outputs += n;
            else if (ends_with(key, "_examples")) {
                header.examples += n;
                if (starts_with(key, "train"))
                    header.declared_split[0] = n;
                else if (starts_with(key, "valid"))
                    header.declared_split[1] = n;
                else if (starts_with(key, "test"))
                    header.declared_split[2] = n;
            }
            continue;
        }
        if (in_header) {
            in_header = false;
            if (header.inputs == 0 || header.outputs < 2)
                throw InputError(fmt::format("line {}: header must declare inputs and at least 2 outputs", line));
        }

        const auto tokens = detail::split_whitespace(text);
        if (tokens.size() != header.inputs + header.outputs)
            throw InputError(fmt::format("line {}: {} values, header declares {} inputs + {} outputs", line,
                                         tokens.size(), header.inputs, header.outputs));
        for (std::size_t k = 0; k < header.inputs; ++k)
            values.push_back(detail::parse_real(tokens[k], line));
        outputs.clear();
        for (std::size_t k = header.inputs; k < tokens.size(); ++k)
            outputs.push_back(detail::parse_real(tokens[k], line));
        try {
            labels.push_back(one_of_m_decode(outputs));
        } catch (const InputError& e) {
            throw InputError(fmt::format("line {}: {}", line, e.what()));
        }
        ++rows;
    }
    if (rows == 0)
        throw InputError("no examples");
    if (header.examples != 0 && header.examples != rows)
        throw InputError(fmt::format("header declares {} examples, file has {}", header.examples, rows));

    Dataset data;
    data.features = DataMatrix(rows, header.inputs, std::move(values));
    data.labels = LabelVector(std::move(labels), header.outputs);
    require_all_classes(data.labels, "outputs");
    if (header_out)
        *header_out = header;
    return data;
}

Dataset load_proben1(const std::filesystem::path& path, Proben1Header* header)
{
    auto in = open_input(path);
    try {
        return read_proben1(in, header);
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void check_split(const SplitSpec& spec)
{
    for (double f : {spec.train, spec.validation, spec.test})
        if (!std::isfinite(f) || f < 0.0)
            throw ConfigError("split fractions must be non-negative");
    if (std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-9)
        throw ConfigError(fmt::format("split fractions sum to {}, expected 1",
                                      spec.train + spec.validation + spec.test));
}

std::array<std::size_t, 3> split_sizes(std::size_t rows, const SplitSpec& spec)
{
    check_split(spec);
    const std::array<double, 3> fractions{spec.train, spec.validation, spec.test};
    std::array<std::size_t, 3> sizes{};
    std::size_t used = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        sizes[k] = static_cast<std::size_t>(std::floor(static_cast<double>(rows) * fractions[k] + 1e-9));
        used += sizes[k];
    }
    std::size_t remainder = rows - std::min(used, rows);
    for (std::size_t k = 0; remainder > 0; k = (k + 1) % 3) {
        if (fractions[k] > 0.0) {
            ++sizes[k];
            --remainder;
        }
    }
    return sizes;
}

std::vector<std::size_t> split_order(std::size_t rows, const SplitSpec& spec)
{
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (spec.permutation_seed && rows > 1) {
        Rng rng(*spec.permutation_seed);
        for (std::size_t i = rows - 1; i > 0; --i)
            std::swap(order[i], order[rng.index(i + 1)]);
    }
    return order;
}

SplitResult split(const Dataset& data, const SplitSpec& spec)
{
    const auto sizes = split_sizes(data.rows(), spec);
    const auto order = split_order(data.rows(), spec);
    std::span<const std::size_t> all(order);

    SplitResult out;
    out.train = data.select(all.subspan(0, sizes[0]));
    out.validation = data.select(all.subspan(sizes[0], sizes[1]));
    out.test = data.select(all.subspan(sizes[0] + sizes[1], sizes[2]));

    if (data.has_labels()) {
        const std::array<std::pair<const char*, const Dataset*>, 3> parts{
            {{"training", &out.train}, {"validation", &out.validation}, {"test", &out.test}}};
        for (const auto& [name, part] : parts) {
            if (part->rows() == 0)
                continue;
            const auto counts = part->labels.class_counts();
            for (std::size_t c = 0; c < counts.size(); ++c)
                if (counts[c] == 0)
                    out.warnings.push_back(fmt::format("{} split has no rows of class {}", name, c));
        }
    }
    return out;
}

void MinMaxScaler::fit(const DataMatrix& data)
{
    lo_.assign(data.cols(), std::numeric_limits<double>::infinity());
    hi_.assign(data.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            lo_[c] = std::min(lo_[c], data.at(r, c));
            hi_[c] = std::max(hi_[c], data.at(r, c));
        }
    }
}

DataMatrix MinMaxScaler::transform(const DataMatrix& data) const
{
    if (data.cols() != lo_.size())
        throw InputError(fmt::format("scaler fitted on {} columns, data has {}", lo_.size(), data.cols()));
    std::vector<double> out;
    out.reserve(data.rows() * data.cols());
    for (std::size_t r = 0; r < data.rows(); ++r)
        for (std::size_t c = 0; c < data.cols(); ++c)
            out.push_back(hi_[c] > lo_[c] ? (data.at(r, c) - lo_[c]) / (hi_[c] - lo_[c]) : 0.0);
    return DataMatrix(data.rows(), data.cols(), std::move(out));
}

Dataset MinMaxScaler::transform(const Dataset& data) const
{
    Dataset out = data;
    out.features = transform(data.features);
    return out;
}

std::string summary_line(const std::string& name, const Dataset& data, const std::array<std::size_t, 3>& sizes)
{
    return fmt::format("{:<12} {:>8} {:>8} {:>9}   {}+{}+{}", name, data.num_features(),
                       data.has_labels() ? data.num_classes() : 0, data.rows(), sizes[0], sizes[1], sizes[2]);
}

} // namespace mep
