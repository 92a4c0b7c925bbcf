#include "mep/genome.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "mep/error.hpp"
#include "text_util.hpp"

namespace mep {

namespace {

constexpr std::array<std::string_view, 8> op_symbols{"+", "-", "*", "/", "sin", "exp", "ln", "ifless"};

bool probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

Gene sample_terminal(const PrimitiveSet& ps, Rng& rng)
{
    double pv = ps.num_variables > 0 ? ps.p_variable : 0.0;
    double pc = ps.num_constants > 0 ? ps.p_constant : 0.0;
    if (pv + pc <= 0.0) {
        // configured bias excludes terminals; fall back to whatever is available
        pv = ps.num_variables > 0 ? 1.0 : 0.0;
        pc = ps.num_constants > 0 ? 1.0 : 0.0;
    }
    if (rng.unit() * (pv + pc) < pv)
        return Gene::variable(static_cast<std::uint32_t>(rng.index(ps.num_variables)));
    return Gene::constant(static_cast<std::uint32_t>(rng.index(ps.num_constants)));
}

Gene sample_gene(const PrimitiveSet& ps, std::size_t position, Rng& rng)
{
    if (position == 0)
        return sample_terminal(ps, rng);

    const double pf = ps.functions.empty() ? 0.0 : ps.p_function;
    const double pv = ps.num_variables > 0 ? ps.p_variable : 0.0;
    const double pc = ps.num_constants > 0 ? ps.p_constant : 0.0;
    const double total = pf + pv + pc;
    if (total <= 0.0)
        return sample_terminal(ps, rng);

    const double u = rng.unit() * total;
    if (u < pf) {
        Gene g;
        g.kind = Gene::Kind::Function;
        g.op = ps.functions[rng.index(ps.functions.size())];
        g.num_args = static_cast<std::uint8_t>(arity(g.op));
        for (std::size_t k = 0; k < g.num_args; ++k)
            g.args[k] = static_cast<std::uint32_t>(rng.index(position));
        return g;
    }
    if (u < pf + pv)
        return Gene::variable(static_cast<std::uint32_t>(rng.index(ps.num_variables)));
    return Gene::constant(static_cast<std::uint32_t>(rng.index(ps.num_constants)));
}

void check_same_shape(const Chromosome& a, const Chromosome& b)
{
    if (a.genes.size() != b.genes.size() || a.constants.size() != b.constants.size())
        throw ConfigError(fmt::format("crossover parents differ in shape ({}/{} genes, {}/{} constants)",
                                      a.genes.size(), b.genes.size(), a.constants.size(),
                                      b.constants.size()));
}

} // namespace

std::string_view op_symbol(Op op) { return op_symbols[static_cast<std::size_t>(op)]; }

bool parse_op(std::string_view symbol, Op& out)
{
    for (std::size_t k = 0; k < op_symbols.size(); ++k) {
        if (op_symbols[k] == symbol) {
            out = static_cast<Op>(k);
            return true;
        }
    }
    if (symbol == "a<b?c:d") {
        out = Op::IfLess;
        return true;
    }
    return false;
}

Gene Gene::variable(std::uint32_t feature)
{
    Gene g;
    g.kind = Kind::Variable;
    g.index = feature;
    return g;
}

Gene Gene::constant(std::uint32_t slot)
{
    Gene g;
    g.kind = Kind::Constant;
    g.index = slot;
    return g;
}

Gene Gene::function(Op op, std::initializer_list<std::uint32_t> arguments)
{
    Gene g;
    g.kind = Kind::Function;
    g.op = op;
    g.num_args = static_cast<std::uint8_t>(std::min<std::size_t>(arguments.size(), 4));
    std::copy_n(arguments.begin(), g.num_args, g.args.begin());
    return g;
}

void check_primitives(const PrimitiveSet& ps)
{
    if (ps.num_variables + ps.num_constants == 0)
        throw ConfigError("primitive set has no terminals (no variables and no constants)");
    for (double p : {ps.p_function, ps.p_variable, ps.p_constant})
        if (!std::isfinite(p) || p < 0.0)
            throw ConfigError(fmt::format("symbol probability {} is negative or not finite", p));
    if (ps.p_function + ps.p_variable + ps.p_constant <= 0.0)
        throw ConfigError("symbol probabilities sum to zero");
}

void check_variation(const VariationParams& v)
{
    if (!probability(v.p_crossover) || !probability(v.p_mutation))
        throw ConfigError("crossover and mutation probabilities must lie in [0, 1]");
    if (!(v.constant_delta > 0.0) || !std::isfinite(v.constant_delta))
        throw ConfigError("constants delta must be positive");
    if (!(v.threshold_delta >= 0.0) || !std::isfinite(v.threshold_delta))
        throw ConfigError("threshold delta must be non-negative");
    if (!(v.constants_interval.lo <= v.constants_interval.hi))
        throw ConfigError("constants interval is empty");
}

Chromosome new_random(const PrimitiveSet& ps, std::size_t length, const Interval& constants_interval,
                      Rng& rng)
{
    if (length == 0)
        throw ConfigError("chromosome length must be at least 1");
    check_primitives(ps);
    if (!(constants_interval.lo <= constants_interval.hi))
        throw ConfigError("constants interval is empty");

    Chromosome c;
    c.constants.resize(ps.num_constants);
    for (double& v : c.constants)
        v = rng.uniform(constants_interval.lo, constants_interval.hi);
    c.genes.reserve(length);
    for (std::size_t i = 0; i < length; ++i)
        c.genes.push_back(sample_gene(ps, i, rng));
    c.threshold = rng.unit();
    return c;
}

Chromosome mutate(const Chromosome& c, const VariationParams& params, const PrimitiveSet& ps, Rng& rng)
{
    Chromosome out = c;
    for (std::size_t i = 0; i < out.genes.size(); ++i)
        if (rng.bernoulli(params.p_mutation))
            out.genes[i] = sample_gene(ps, i, rng);

    if (params.constants_can_evolve) {
        const Interval& range = params.constants_interval;
        for (double& v : out.constants) {
            if (!rng.bernoulli(params.p_mutation))
                continue;
            v += rng.uniform(-params.constant_delta, params.constant_delta);
            if (!params.constants_may_leave_interval)
                v = std::clamp(v, range.lo, range.hi);
        }
    }

    if (rng.bernoulli(params.p_mutation))
        out.threshold += rng.uniform(-params.threshold_delta, params.threshold_delta);
    return out;
}

std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& a, const Chromosome& b,
                                               std::size_t gene_cut, std::size_t constant_cut,
                                               bool swap_thresholds)
{
    check_same_shape(a, b);
    gene_cut = std::min(gene_cut, a.genes.size());
    constant_cut = std::min(constant_cut, a.constants.size());

    Chromosome x = a;
    Chromosome y = b;
    std::swap_ranges(x.genes.begin() + static_cast<std::ptrdiff_t>(gene_cut), x.genes.end(),
                     y.genes.begin() + static_cast<std::ptrdiff_t>(gene_cut));
    std::swap_ranges(x.constants.begin() + static_cast<std::ptrdiff_t>(constant_cut), x.constants.end(),
                     y.constants.begin() + static_cast<std::ptrdiff_t>(constant_cut));
    if (swap_thresholds)
        std::swap(x.threshold, y.threshold);
    return {std::move(x), std::move(y)};
}

std::pair<Chromosome, Chromosome> crossover_masked(const Chromosome& a, const Chromosome& b,
                                                   const std::vector<bool>& gene_mask,
                                                   const std::vector<bool>& constant_mask,
                                                   bool threshold_from_a)
{
    check_same_shape(a, b);
    if (gene_mask.size() != a.genes.size() || constant_mask.size() != a.constants.size())
        throw ConfigError("crossover mask does not match chromosome shape");

    Chromosome x = a;
    Chromosome y = b;
    for (std::size_t i = 0; i < gene_mask.size(); ++i)
        if (!gene_mask[i])
            std::swap(x.genes[i], y.genes[i]);
    for (std::size_t i = 0; i < constant_mask.size(); ++i)
        if (!constant_mask[i])
            std::swap(x.constants[i], y.constants[i]);
    if (!threshold_from_a)
        std::swap(x.threshold, y.threshold);
    return {std::move(x), std::move(y)};
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, CrossoverMode mode,
                                            Rng& rng)
{
    check_same_shape(a, b);
    if (mode == CrossoverMode::OnePoint) {
        // cuts fall between genes: length + 1 boundaries including both ends
        const std::size_t gene_cut = rng.index(a.genes.size() + 1);
        const std::size_t constant_cut = rng.index(a.constants.size() + 1);
        const bool swap_thresholds = rng.coin();
        return crossover_at(a, b, gene_cut, constant_cut, swap_thresholds);
    }

    std::vector<bool> gene_mask(a.genes.size());
    for (std::size_t i = 0; i < gene_mask.size(); ++i)
        gene_mask[i] = rng.coin();
    std::vector<bool> constant_mask(a.constants.size());
    for (std::size_t i = 0; i < constant_mask.size(); ++i)
        constant_mask[i] = rng.coin();
    const bool threshold_from_a = rng.coin();
    return crossover_masked(a, b, gene_mask, constant_mask, threshold_from_a);
}

std::vector<std::string> validate(const Chromosome& c, const PrimitiveSet& ps)
{
    std::vector<std::string> issues;
    if (c.genes.empty())
        issues.emplace_back("empty chromosome");
    else if (!c.genes[0].is_terminal())
        issues.emplace_back("first gene not terminal");

    if (c.constants.size() != ps.num_constants)
        issues.push_back(fmt::format("constant pool has {} values, expected {}", c.constants.size(),
                                     ps.num_constants));
    for (std::size_t j = 0; j < c.constants.size(); ++j)
        if (!std::isfinite(c.constants[j]))
            issues.push_back(fmt::format("constant {} is not finite", j));

    for (std::size_t i = 0; i < c.genes.size(); ++i) {
        const Gene& g = c.genes[i];
        switch (g.kind) {
        case Gene::Kind::Variable:
            if (g.index >= ps.num_variables)
                issues.push_back(fmt::format("gene {}: variable index {} out of range", i, g.index));
            break;
        case Gene::Kind::Constant:
            if (g.index >= ps.num_constants)
                issues.push_back(fmt::format("gene {}: constant index {} out of range", i, g.index));
            break;
        case Gene::Kind::Function:
            if (std::find(ps.functions.begin(), ps.functions.end(), g.op) == ps.functions.end())
                issues.push_back(fmt::format("gene {}: function '{}' not enabled", i, op_symbol(g.op)));
            if (g.num_args != arity(g.op))
                issues.push_back(fmt::format("gene {}: '{}' takes {} arguments, has {}", i, op_symbol(g.op),
                                             arity(g.op), g.num_args));
            for (std::size_t k = 0; k < std::min<std::size_t>(g.num_args, 4); ++k)
                if (g.args[k] >= i)
                    issues.push_back(fmt::format("gene {}: forward reference to gene {}", i, g.args[k]));
            break;
        }
    }
    return issues;
}

std::string format_gene(const Gene& g)
{
    switch (g.kind) {
    case Gene::Kind::Variable:
        return fmt::format("x{}", g.index);
    case Gene::Kind::Constant:
        return fmt::format("c{}", g.index);
    case Gene::Kind::Function:
        break;
    }
    std::string s{op_symbol(g.op)};
    for (std::size_t k = 0; k < g.num_args; ++k)
        s += fmt::format("{}{}", k == 0 ? " " : ", ", g.args[k]);
    return s;
}

void write_chromosome(std::ostream& out, const Chromosome& c)
{
    for (std::size_t i = 0; i < c.genes.size(); ++i)
        out << i << ": " << format_gene(c.genes[i]) << '\n';
    out << "constants:";
    for (double v : c.constants)
        out << ' ' << detail::format_real(v);
    out << '\n' << "threshold: " << detail::format_real(c.threshold) << '\n';
}

std::string to_text(const Chromosome& c)
{
    std::ostringstream out;
    write_chromosome(out, c);
    return out.str();
}

namespace {

std::uint32_t parse_address(std::string_view token, std::size_t line)
{
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw InputError(fmt::format("line {}: bad gene address '{}'", line, token));
    return value;
}

Gene parse_gene_body(std::string_view body, std::size_t line)
{
    std::string cleaned{body};
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    const auto tokens = detail::split_whitespace(cleaned);
    if (tokens.empty())
        throw InputError(fmt::format("line {}: empty gene", line));

    const std::string_view head = tokens[0];
    if (tokens.size() == 1 && head.size() > 1 && (head[0] == 'x' || head[0] == 'c')) {
        const std::uint32_t index = parse_address(head.substr(1), line);
        return head[0] == 'x' ? Gene::variable(index) : Gene::constant(index);
    }

    Op op{};
    if (!parse_op(head, op))
        throw InputError(fmt::format("line {}: unknown symbol '{}'", line, head));
    if (tokens.size() - 1 != arity(op))
        throw InputError(fmt::format("line {}: '{}' expects {} arguments, got {}", line, head, arity(op),
                                     tokens.size() - 1));
    Gene g;
    g.kind = Gene::Kind::Function;
    g.op = op;
    g.num_args = static_cast<std::uint8_t>(arity(op));
    for (std::size_t k = 0; k < g.num_args; ++k)
        g.args[k] = parse_address(tokens[k + 1], line);
    return g;
}

} // namespace

Chromosome read_chromosome(std::istream& in, std::size_t& line_number)
{
    Chromosome c;
    bool have_constants = false;
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_number;
        const std::string_view line = detail::trim(raw);
        if (line.empty())
            continue;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos)
            throw InputError(fmt::format("line {}: expected 'key: value'", line_number));
        const std::string_view key = detail::trim(line.substr(0, colon));
        const std::string_view value = detail::trim(line.substr(colon + 1));

        if (key == "constants") {
            for (auto token : detail::split_whitespace(value))
                c.constants.push_back(detail::parse_real(token, line_number));
            have_constants = true;
        } else if (key == "threshold") {
            if (!have_constants)
                throw InputError(fmt::format("line {}: 'threshold' before 'constants'", line_number));
            c.threshold = detail::parse_real(value, line_number);
            return c;
        } else {
            if (have_constants)
                throw InputError(fmt::format("line {}: gene listed after constants", line_number));
            const std::uint32_t address = parse_address(key, line_number);
            if (address != c.genes.size())
                throw InputError(fmt::format("line {}: expected gene {}, found {}", line_number,
                                             c.genes.size(), address));
            c.genes.push_back(parse_gene_body(value, line_number));
        }
    }
    throw InputError(fmt::format("line {}: chromosome ends without a 'threshold' line", line_number));
}

Chromosome parse_chromosome(std::string_view text)
{
    std::istringstream in{std::string{text}};
    std::size_t line = 0;
    return read_chromosome(in, line);
}

} // namespace mep
