#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mep/genome.hpp"

namespace mep {

/// Row-major matrix of finite feature values.
class DataMatrix {
public:
    DataMatrix() = default;
    /// Throws InputError if `values.size() != rows * cols` or a value is not finite.
    DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> values() const { return values_; }

    /// Rows picked by index, in the given order.
    DataMatrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Value of every gene on every row, stored gene-major.
///
/// An invalid gene failed on at least one row (division by zero, log of a
/// non-positive value, a non-finite result) or reads an invalid gene. Its
/// values are zero-filled and must not be used.
struct EvalMatrix {
    std::size_t num_genes = 0;
    std::size_t num_rows = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> gene_valid;

    std::span<const double> gene(std::size_t i) const { return {values.data() + i * num_rows, num_rows}; }
    double at(std::size_t gene, std::size_t row) const { return values[gene * num_rows + row]; }
    bool valid(std::size_t gene) const { return gene_valid[gene] != 0; }
    std::size_t count_valid() const;
};

/// Evaluates all genes bottom-up over all rows. Throws InputError when a
/// variable gene reads a feature the data does not have.
EvalMatrix evaluate(const Chromosome& c, const DataMatrix& data);

/// Same as evaluate(), reusing the storage of `out`.
void evaluate_into(const Chromosome& c, const DataMatrix& data, EvalMatrix& out);

/// Evaluates the chromosome on a single row. Validity is judged on that row only.
EvalMatrix evaluate_row(const Chromosome& c, std::span<const double> row);

/// Number of (gene, row) cells computed by the calling thread so far.
std::uint64_t evaluated_cells();

/// Fully parenthesized infix form of gene `i`, e.g. "((x0 + x1) * x3)".
/// Variables use `names` when given, otherwise x0..x{n-1}.
std::string gene_to_expression(const Chromosome& c, std::size_t i,
                               std::span<const std::string> names = {});

/// Length gene_to_expression would produce, saturating at SIZE_MAX. Shared
/// subexpressions are repeated in the rendering, so this can grow exponentially.
std::size_t expression_length(const Chromosome& c, std::size_t i,
                              std::span<const std::string> names = {});

} // namespace mep
