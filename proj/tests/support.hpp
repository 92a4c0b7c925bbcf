// Shared fixtures and independent reference implementations for the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "mep/dataset.hpp"
#include "mep/evaluator.hpp"
#include "mep/fitness.hpp"
#include "mep/genome.hpp"
#include "mep/random.hpp"

namespace testing {

using namespace mep;

inline PrimitiveSet all_functions(std::size_t vars, std::size_t consts)
{
    PrimitiveSet ps;
    ps.num_variables = vars;
    ps.num_constants = consts;
    ps.p_function = 0.6;
    ps.p_variable = 0.3;
    ps.p_constant = 0.1;
    return ps;
}

/// Data that regularly trips the protected operators: zeros, negatives and
/// values large enough to overflow exp.
inline DataMatrix tricky_data(Rng& rng, std::size_t rows, std::size_t cols)
{
    std::vector<double> v(rows * cols);
    for (double& x : v) {
        switch (rng.index(5)) {
        case 0: x = static_cast<double>(static_cast<int>(rng.index(7)) - 3); break;
        case 1: x = rng.uniform(-5.0, 5.0); break;
        case 2: x = rng.uniform(0.0, 1.0); break;
        case 3: x = rng.uniform(300.0, 800.0); break;
        default: x = rng.uniform(-1e-3, 1e-3); break;
        }
    }
    return DataMatrix(rows, cols, std::move(v));
}

inline DataMatrix uniform_data(Rng& rng, std::size_t rows, std::size_t cols)
{
    std::vector<double> v(rows * cols);
    for (double& x : v)
        x = rng.unit();
    return DataMatrix(rows, cols, std::move(v));
}

inline LabelVector random_labels(Rng& rng, std::size_t rows, std::size_t classes)
{
    // every class appears at least once when rows allow it
    std::vector<std::uint32_t> l(rows);
    for (std::size_t r = 0; r < rows; ++r)
        l[r] = r < classes ? static_cast<std::uint32_t>(r) : static_cast<std::uint32_t>(rng.index(classes));
    for (std::size_t r = rows; r > 1; --r)
        std::swap(l[r - 1], l[rng.index(r)]);
    return LabelVector(std::move(l), classes);
}

/// Straightforward recursive evaluation of one gene on one row. Returns
/// nullopt when the gene or anything it depends on fails on this row.
class RecursiveOracle {
public:
    RecursiveOracle(const Chromosome& c, std::span<const double> row) : c_(c), row_(row), memo_(c.genes.size()) {}

    std::optional<double> value(std::size_t i)
    {
        if (!memo_[i])
            memo_[i] = compute(i);
        return *memo_[i];
    }

private:
    std::optional<double> compute(std::size_t i)
    {
        const Gene& g = c_.genes[i];
        if (g.kind == Gene::Kind::Variable)
            return row_[g.index];
        if (g.kind == Gene::Kind::Constant) {
            const double v = c_.constants[g.index];
            return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
        }
        std::optional<double> a[4];
        for (std::size_t k = 0; k < g.num_args; ++k) {
            a[k] = value(g.args[k]);
            if (!a[k])
                return std::nullopt;
        }
        double r = 0.0;
        switch (g.op) {
        case Op::Add: r = *a[0] + *a[1]; break;
        case Op::Sub: r = *a[0] - *a[1]; break;
        case Op::Mul: r = *a[0] * *a[1]; break;
        case Op::Div:
            if (*a[1] == 0.0)
                return std::nullopt;
            r = *a[0] / *a[1];
            break;
        case Op::Sin: r = std::sin(*a[0]); break;
        case Op::Exp: r = std::exp(*a[0]); break;
        case Op::Ln:
            if (*a[0] <= 0.0)
                return std::nullopt;
            r = std::log(*a[0]);
            break;
        case Op::IfLess: r = *a[0] < *a[1] ? *a[2] : *a[3]; break;
        }
        if (!std::isfinite(r))
            return std::nullopt;
        return r;
    }

    const Chromosome& c_;
    std::span<const double> row_;
    std::vector<std::optional<std::optional<double>>> memo_;
};

/// Per-gene validity and values over a whole dataset from the recursive oracle.
struct OracleResult {
    std::vector<bool> valid;
    std::vector<std::vector<double>> values; // [gene][row], meaningful when valid
};

inline OracleResult oracle_evaluate(const Chromosome& c, const DataMatrix& data)
{
    OracleResult out;
    out.valid.assign(c.genes.size(), true);
    out.values.assign(c.genes.size(), std::vector<double>(data.rows(), 0.0));
    for (std::size_t r = 0; r < data.rows(); ++r) {
        RecursiveOracle o(c, data.row(r));
        for (std::size_t i = 0; i < c.genes.size(); ++i) {
            const auto v = o.value(i);
            if (v)
                out.values[i][r] = *v;
            else
                out.valid[i] = false;
        }
    }
    return out;
}

/// Errors of "value <= t means class 0" for threshold t.
inline std::size_t threshold_errors(std::span<const double> values, const LabelVector& labels, double t)
{
    std::size_t e = 0;
    for (std::size_t r = 0; r < values.size(); ++r) {
        const std::uint32_t predicted = values[r] <= t ? 0u : 1u;
        e += predicted != labels[r] ? 1 : 0;
    }
    return e;
}

/// Exhaustive search: every distinct value, every midpoint and a point below the minimum.
inline std::size_t exhaustive_threshold_errors(std::span<const double> values, const LabelVector& labels)
{
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t best = threshold_errors(values, labels, sorted.front() - 1.0);
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        best = std::min(best, threshold_errors(values, labels, sorted[k]));
        if (k + 1 < sorted.size())
            best = std::min(best, threshold_errors(values, labels, sorted[k] + (sorted[k + 1] - sorted[k]) / 2));
    }
    return best;
}

/// B(i, k) recounted row by row; rows of invalid genes stay zero.
inline std::vector<std::vector<std::size_t>> brute_force_b(const EvalMatrix& ev, const LabelVector& labels)
{
    std::vector<std::vector<std::size_t>> b(ev.num_genes, std::vector<std::size_t>(labels.num_classes(), 0));
    for (std::size_t r = 0; r < ev.num_rows; ++r) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ev.num_genes; ++i)
            if (ev.valid(i))
                row_max = std::max(row_max, ev.at(i, r));
        for (std::size_t i = 0; i < ev.num_genes; ++i)
            if (ev.valid(i) && ev.at(i, r) != row_max)
                ++b[i][labels[r]];
    }
    return b;
}

/// Minimum of sum_k B(g_k, k) over every assignment of distinct valid genes.
inline std::size_t exhaustive_assignment(const std::vector<std::vector<std::size_t>>& b,
                                         const std::vector<std::uint8_t>& valid, std::size_t classes)
{
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::vector<bool> used(b.size(), false);
    auto rec = [&](auto&& self, std::size_t k, std::size_t sum) -> void {
        if (k == classes) {
            best = std::min(best, sum);
            return;
        }
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (used[i] || !valid[i])
                continue;
            used[i] = true;
            self(self, k + 1, sum + b[i][k]);
            used[i] = false;
        }
    };
    rec(rec, 0, 0);
    return best;
}

/// Builds an EvalMatrix directly from values, for fitness tests that do not need a chromosome.
inline EvalMatrix make_eval(const std::vector<std::vector<double>>& genes, std::vector<std::uint8_t> valid = {})
{
    EvalMatrix m;
    m.num_genes = genes.size();
    m.num_rows = genes.empty() ? 0 : genes.front().size();
    for (const auto& g : genes)
        m.values.insert(m.values.end(), g.begin(), g.end());
    m.gene_valid = valid.empty() ? std::vector<std::uint8_t>(genes.size(), 1) : std::move(valid);
    return m;
}

/// A chromosome that simply exposes variable k at gene k, so that a model
/// built on it predicts from raw feature values.
inline Chromosome identity_chromosome(std::size_t vars)
{
    Chromosome c;
    for (std::size_t k = 0; k < vars; ++k)
        c.genes.push_back(Gene::variable(static_cast<std::uint32_t>(k)));
    return c;
}

} // namespace testing
