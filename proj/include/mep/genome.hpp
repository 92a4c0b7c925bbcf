#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mep/random.hpp"

namespace mep {

enum class Op : std::uint8_t { Add, Sub, Mul, Div, Sin, Exp, Ln, IfLess };

inline constexpr std::array<Op, 8> all_ops{Op::Add, Op::Sub, Op::Mul, Op::Div,
                                           Op::Sin, Op::Exp, Op::Ln,  Op::IfLess};

constexpr std::size_t arity(Op op)
{
    switch (op) {
    case Op::Sin:
    case Op::Exp:
    case Op::Ln:
        return 1;
    case Op::IfLess:
        return 4;
    default:
        return 2;
    }
}

/// Symbol used in the chromosome listing: "+", "-", "*", "/", "sin", "exp", "ln", "ifless".
std::string_view op_symbol(Op op);

/// Inverse of op_symbol. Also accepts "a<b?c:d" for the conditional.
bool parse_op(std::string_view symbol, Op& out);

/// One chromosome entry: an input variable, a constant-pool slot, or a
/// function applied to the values of earlier genes.
struct Gene {
    enum class Kind : std::uint8_t { Variable, Constant, Function };

    Kind kind = Kind::Variable;
    Op op = Op::Add;
    std::uint8_t num_args = 0;
    std::uint32_t index = 0; // feature or constant index for terminals
    std::array<std::uint32_t, 4> args{};

    static Gene variable(std::uint32_t feature);
    static Gene constant(std::uint32_t slot);
    static Gene function(Op op, std::initializer_list<std::uint32_t> arguments);

    bool is_terminal() const { return kind != Kind::Function; }

    friend bool operator==(const Gene&, const Gene&) = default;
};

/// Fixed-length linear genome. Every gene is a candidate output expression.
struct Chromosome {
    std::vector<Gene> genes;
    std::vector<double> constants;
    double threshold = 0.0; // used by the evolved-threshold classifier only

    std::size_t length() const { return genes.size(); }

    friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

struct PrimitiveSet {
    std::vector<Op> functions{all_ops.begin(), all_ops.end()};
    std::size_t num_variables = 0;
    std::size_t num_constants = 0;
    double p_function = 0.5;
    double p_variable = 0.4;
    double p_constant = 0.01;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

enum class CrossoverMode : std::uint8_t { OnePoint, Uniform };

struct VariationParams {
    CrossoverMode crossover_mode = CrossoverMode::OnePoint;
    double p_crossover = 0.9;
    double p_mutation = 0.005;
    double constant_delta = 0.1;
    Interval constants_interval{};
    bool constants_can_evolve = true;
    bool constants_may_leave_interval = true;
    double threshold_delta = 0.1;
};

/// Throws ConfigError when the primitive set cannot produce a valid chromosome.
void check_primitives(const PrimitiveSet& primitives);
void check_variation(const VariationParams& params);

/// Random chromosome of the given length. Throws ConfigError on invalid parameters.
Chromosome new_random(const PrimitiveSet& primitives, std::size_t length,
                      const Interval& constants_interval, Rng& rng);

Chromosome mutate(const Chromosome& c, const VariationParams& params,
                  const PrimitiveSet& primitives, Rng& rng);

/// Recombines two parents of identical shape. Throws ConfigError otherwise.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            CrossoverMode mode, Rng& rng);

/// One-point crossover with explicit cut positions. A gene cut of k keeps
/// genes [0, k) and swaps [k, length); the constant cut works the same way.
std::pair<Chromosome, Chromosome> crossover_at(const Chromosome& a, const Chromosome& b,
                                               std::size_t gene_cut, std::size_t constant_cut,
                                               bool swap_thresholds);

/// Uniform crossover with explicit masks: `true` means offspring one takes the
/// slot from `a` (and offspring two from `b`).
std::pair<Chromosome, Chromosome> crossover_masked(const Chromosome& a, const Chromosome& b,
                                                   const std::vector<bool>& gene_mask,
                                                   const std::vector<bool>& constant_mask,
                                                   bool threshold_from_a);

/// Lists every structural violation; an empty result means the chromosome is valid.
std::vector<std::string> validate(const Chromosome& c, const PrimitiveSet& primitives);

// Text form, one gene per line with 0-based addresses:
//
//   0: x0
//   1: c3
//   2: + 0, 1
//   3: sin 2
//   constants: 0.25 0.5
//   threshold: 0.5
//
// Reals are written with 17 significant digits so parsing restores them exactly.
std::string format_gene(const Gene& g);
void write_chromosome(std::ostream& out, const Chromosome& c);
std::string to_text(const Chromosome& c);

/// Parses the text form. Reads gene lines until `threshold:` (inclusive).
/// `line_number` is advanced and used in InputError messages.
Chromosome read_chromosome(std::istream& in, std::size_t& line_number);
Chromosome parse_chromosome(std::string_view text);

} // namespace mep
