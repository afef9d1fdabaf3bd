#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpomdp {

/// Probability vectors read from text input (CPT rows, beliefs, shift
/// targets) must sum to 1 within this tolerance; they are renormalized
/// exactly on load and the adjustment is reported.
inline constexpr double kInputTol = 1e-9;

/// Shift-matrix rows must be stochastic within this tolerance at
/// construction time.
inline constexpr double kShiftRowTol = 1e-12;

/// Tolerance for stochasticity checks on quantities produced by
/// floating-point arithmetic (matrix products, pushforwards, filters).
inline constexpr double kArithTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input text does not match the expected file layout.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally well-formed input violates a model or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Operands have incompatible dimensions.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A name or index does not refer to anything.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A filter step conditioned on an observation whose predicted
/// likelihood is zero under every tracked domain.
class ImpossibleObservation : public Error {
 public:
  ImpossibleObservation(const std::string& what, double likelihood,
                        std::ptrdiff_t step = -1)
      : Error(what), likelihood_(likelihood), step_(step) {}

  /// Predicted likelihood of the offending observation.
  double likelihood() const { return likelihood_; }
  /// Zero-based index of the offending trace step, or -1 if unknown.
  std::ptrdiff_t step() const { return step_; }

 private:
  double likelihood_;
  std::ptrdiff_t step_;
};

/// An exhaustive search exceeded its node budget.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::size_t expanded,
                 std::size_t budget)
      : Error(what), expanded_(expanded), budget_(budget) {}

  std::size_t expanded() const { return expanded_; }
  std::size_t budget() const { return budget_; }

 private:
  std::size_t expanded_;
  std::size_t budget_;
};

/// Mixed-radix index of `digits` under `radices`, first digit most
/// significant. This is the canonical state indexing everywhere: the
/// first declared variable varies slowest.
inline std::size_t pack_index(std::span<const std::size_t> digits,
                              std::span<const std::size_t> radices) {
  std::size_t index = 0;
  for (std::size_t i = 0; i < radices.size(); ++i) {
    index = index * radices[i] + digits[i];
  }
  return index;
}

/// Inverse of pack_index; writes one digit per radix into `out`.
inline void unpack_index(std::size_t index,
                         std::span<const std::size_t> radices,
                         std::span<std::size_t> out) {
  for (std::size_t i = radices.size(); i-- > 0;) {
    out[i] = index % radices[i];
    index /= radices[i];
  }
}

/// Conditional probability table for one variable under one action.
/// Row r is the distribution over the variable's values given the
/// parent assignment with mixed-radix index r (parents in declared
/// order, previous-slice parents before current-slice ones).
struct ConditionalTable {
  std::size_t arity = 0;
  std::vector<double> p;  // rows() x arity, row-major

  ConditionalTable() = default;
  ConditionalTable(std::size_t arity_, std::vector<double> p_)
      : arity(arity_), p(std::move(p_)) {
    if (arity == 0 || p.size() % arity != 0) {
      throw SizeError("conditional table shape does not match arity");
    }
  }

  std::size_t rows() const { return arity == 0 ? 0 : p.size() / arity; }

  double at(std::size_t row, std::size_t value) const {
    return p[row * arity + value];
  }

  const double* row(std::size_t r) const { return p.data() + r * arity; }
  double* row(std::size_t r) { return p.data() + r * arity; }

  friend bool operator==(const ConditionalTable&,
                         const ConditionalTable&) = default;
};

}  // namespace cpomdp
