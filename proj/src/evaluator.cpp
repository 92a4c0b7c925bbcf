#include "mep/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "mep/error.hpp"

namespace mep {

namespace {

thread_local std::uint64_t cell_counter = 0;

std::size_t saturating_add(std::size_t a, std::size_t b)
{
    return a > std::numeric_limits<std::size_t>::max() - b ? std::numeric_limits<std::size_t>::max() : a + b;
}

std::string constant_text(double v) { return fmt::format("{}", v); }

std::string variable_text(std::size_t index, std::span<const std::string> names)
{
    if (index < names.size())
        return names[index];
    return fmt::format("x{}", index);
}

// Applies a function gene to already computed argument rows. Returns false if
// any row fails its domain check or yields a non-finite value.
bool apply(const Gene& g, const EvalMatrix& m, std::size_t rows, double* out)
{
    auto arg = [&](std::size_t k) { return m.values.data() + static_cast<std::size_t>(g.args[k]) * rows; };
    bool ok = true;
    switch (g.op) {
    case Op::Add: {
        const double *a = arg(0), *b = arg(1);
        for (std::size_t r = 0; r < rows; ++r)
            out[r] = a[r] + b[r];
        break;
    }
    case Op::Sub: {
        const double *a = arg(0), *b = arg(1);
        for (std::size_t r = 0; r < rows; ++r)
            out[r] = a[r] - b[r];
        break;
    }
    case Op::Mul: {
        const double *a = arg(0), *b = arg(1);
        for (std::size_t r = 0; r < rows; ++r)
            out[r] = a[r] * b[r];
        break;
    }
    case Op::Div: {
        const double *a = arg(0), *b = arg(1);
        for (std::size_t r = 0; r < rows; ++r) {
            ok &= b[r] != 0.0;
            out[r] = a[r] / b[r];
        }
        break;
    }
    case Op::Sin: {
        const double* a = arg(0);
        for (std::size_t r = 0; r < rows; ++r)
            out[r] = std::sin(a[r]);
        break;
    }
    case Op::Exp: {
        const double* a = arg(0);
        for (std::size_t r = 0; r < rows; ++r)
            out[r] = std::exp(a[r]);
        break;
    }
    case Op::Ln: {
        const double* a = arg(0);
        for (std::size_t r = 0; r < rows; ++r) {
            ok &= a[r] > 0.0;
            out[r] = a[r] > 0.0 ? std::log(a[r]) : 0.0;
        }
        break;
    }
    case Op::IfLess: {
        const double *a = arg(0), *b = arg(1), *c = arg(2), *d = arg(3);
        for (std::size_t r = 0; r < rows; ++r)
            out[r] = a[r] < b[r] ? c[r] : d[r];
        break;
    }
    }
    for (std::size_t r = 0; r < rows; ++r)
        ok &= std::isfinite(out[r]);
    return ok;
}

} // namespace

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values))
{
    if (values_.size() != rows_ * cols_)
        throw InputError(fmt::format("data matrix {}x{} given {} values", rows_, cols_, values_.size()));
    for (std::size_t k = 0; k < values_.size(); ++k)
        if (!std::isfinite(values_[k]))
            throw InputError(fmt::format("row {}, column {}: value is not finite", k / cols_, k % cols_));
}

DataMatrix DataMatrix::select_rows(std::span<const std::size_t> indices) const
{
    DataMatrix out;
    out.rows_ = indices.size();
    out.cols_ = cols_;
    out.values_.reserve(indices.size() * cols_);
    for (std::size_t r : indices) {
        auto src = row(r);
        out.values_.insert(out.values_.end(), src.begin(), src.end());
    }
    return out;
}

std::size_t EvalMatrix::count_valid() const
{
    return static_cast<std::size_t>(std::count(gene_valid.begin(), gene_valid.end(), std::uint8_t{1}));
}

void evaluate_into(const Chromosome& c, const DataMatrix& data, EvalMatrix& m)
{
    const std::size_t rows = data.rows();
    m.num_genes = c.genes.size();
    m.num_rows = rows;
    m.values.resize(m.num_genes * rows);
    m.gene_valid.assign(m.num_genes, 1);

    for (std::size_t i = 0; i < c.genes.size(); ++i) {
        const Gene& g = c.genes[i];
        double* out = m.values.data() + i * rows;
        switch (g.kind) {
        case Gene::Kind::Variable:
            if (g.index >= data.cols())
                throw InputError(fmt::format("gene {} reads feature {} but the data has {} columns", i, g.index,
                                             data.cols()));
            for (std::size_t r = 0; r < rows; ++r)
                out[r] = data.at(r, g.index);
            break;
        case Gene::Kind::Constant:
            if (g.index >= c.constants.size())
                throw InputError(fmt::format("gene {} reads constant {} but the pool has {}", i, g.index,
                                             c.constants.size()));
            std::fill_n(out, rows, c.constants[g.index]);
            m.gene_valid[i] = std::isfinite(c.constants[g.index]) ? 1 : 0;
            break;
        case Gene::Kind::Function: {
            bool args_ok = true;
            for (std::size_t k = 0; k < g.num_args; ++k)
                args_ok = args_ok && m.gene_valid[g.args[k]] != 0;
            if (!args_ok || !apply(g, m, rows, out))
                m.gene_valid[i] = 0;
            break;
        }
        }
        if (!m.gene_valid[i])
            std::fill_n(out, rows, 0.0);
        cell_counter += rows;
    }
}

EvalMatrix evaluate(const Chromosome& c, const DataMatrix& data)
{
    EvalMatrix m;
    evaluate_into(c, data, m);
    return m;
}

EvalMatrix evaluate_row(const Chromosome& c, std::span<const double> row)
{
    DataMatrix single(1, row.size(), std::vector<double>(row.begin(), row.end()));
    return evaluate(c, single);
}

std::uint64_t evaluated_cells() { return cell_counter; }

namespace {

std::string render(const Chromosome& c, std::size_t i, std::span<const std::string> names,
                   std::vector<std::optional<std::string>>& memo)
{
    if (memo[i])
        return *memo[i];
    const Gene& g = c.genes[i];
    std::string s;
    switch (g.kind) {
    case Gene::Kind::Variable:
        s = variable_text(g.index, names);
        break;
    case Gene::Kind::Constant:
        s = g.index < c.constants.size() ? constant_text(c.constants[g.index]) : fmt::format("c{}", g.index);
        break;
    case Gene::Kind::Function: {
        auto a = [&](std::size_t k) { return render(c, g.args[k], names, memo); };
        switch (arity(g.op)) {
        case 1:
            s = fmt::format("{}({})", op_symbol(g.op), a(0));
            break;
        case 2:
            s = fmt::format("({} {} {})", a(0), op_symbol(g.op), a(1));
            break;
        default:
            s = fmt::format("({}<{} ? {} : {})", a(0), a(1), a(2), a(3));
            break;
        }
        break;
    }
    }
    memo[i] = s;
    return s;
}

} // namespace

std::string gene_to_expression(const Chromosome& c, std::size_t i, std::span<const std::string> names)
{
    if (i >= c.genes.size())
        throw ConfigError(fmt::format("gene {} out of range (length {})", i, c.genes.size()));
    std::vector<std::optional<std::string>> memo(i + 1);
    return render(c, i, names, memo);
}

std::size_t expression_length(const Chromosome& c, std::size_t i, std::span<const std::string> names)
{
    if (i >= c.genes.size())
        throw ConfigError(fmt::format("gene {} out of range (length {})", i, c.genes.size()));
    std::vector<std::size_t> len(i + 1, 0);
    for (std::size_t k = 0; k <= i; ++k) {
        const Gene& g = c.genes[k];
        switch (g.kind) {
        case Gene::Kind::Variable:
            len[k] = variable_text(g.index, names).size();
            break;
        case Gene::Kind::Constant:
            len[k] = g.index < c.constants.size() ? constant_text(c.constants[g.index]).size()
                                                  : fmt::format("c{}", g.index).size();
            break;
        case Gene::Kind::Function: {
            // punctuation: "sin(" + ")", "(" + " + " + ")", "(" + "<" + " ? " + " : " + ")"
            std::size_t total = arity(g.op) == 1 ? op_symbol(g.op).size() + 2
                              : arity(g.op) == 2 ? op_symbol(g.op).size() + 4
                                                 : 9;
            for (std::size_t a = 0; a < g.num_args; ++a)
                total = saturating_add(total, len[g.args[a]]);
            len[k] = total;
            break;
        }
        }
    }
    return len[i];
}

} // namespace mep
