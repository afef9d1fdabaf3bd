#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpomdp/core.hpp"

namespace cpomdp {

/// Row-stochastic square matrix describing a stochastic shift of one
/// variable: entry (i, j) is the probability that value i is remapped
/// to value j. Pushing a distribution p through the shift yields
/// q_j = sum_i p_i * A_ij.
class ShiftMatrix {
 public:
  ShiftMatrix() = default;

  /// Validates shape and row stochasticity within `tol`
  /// (kShiftRowTol for hand-built matrices, kArithTol for matrices
  /// produced by arithmetic). Rows are stored exactly as given.
  static ShiftMatrix from_rows(const std::vector<std::vector<double>>& rows,
                               double tol = kShiftRowTol) {
    ShiftMatrix a;
    a.m_ = rows.size();
    if (a.m_ == 0) throw SizeError("shift matrix must be non-empty");
    a.data_.reserve(a.m_ * a.m_);
    for (std::size_t i = 0; i < a.m_; ++i) {
      if (rows[i].size() != a.m_) {
        throw SizeError("shift matrix row " + std::to_string(i) +
                        " has length " + std::to_string(rows[i].size()) +
                        ", expected " + std::to_string(a.m_));
      }
      double sum = 0.0;
      for (double v : rows[i]) {
        if (v < 0.0 || v > 1.0 || !std::isfinite(v)) {
          throw ValidationError("shift matrix row " + std::to_string(i) +
                                " has entry outside [0, 1]");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol) {
        throw ValidationError("shift matrix row " + std::to_string(i) +
                              " sums to " + std::to_string(sum));
      }
      a.data_.insert(a.data_.end(), rows[i].begin(), rows[i].end());
    }
    return a;
  }

  /// Builds without any stochasticity check. Used by loaders that
  /// collect validation findings instead of throwing.
  static ShiftMatrix unchecked(std::size_t m, std::vector<double> rowMajor) {
    ShiftMatrix a;
    a.m_ = m;
    a.data_ = std::move(rowMajor);
    if (m == 0 || a.data_.size() != m * m) {
      throw SizeError("shift matrix data does not form a square matrix");
    }
    return a;
  }

  static ShiftMatrix identity(std::size_t m) {
    ShiftMatrix a;
    if (m == 0) throw SizeError("shift matrix must be non-empty");
    a.m_ = m;
    a.data_.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) a.data_[i * m + i] = 1.0;
    return a;
  }

  std::size_t size() const { return m_; }
  double at(std::size_t i, std::size_t j) const { return data_[i * m_ + j]; }
  const double* row(std::size_t i) const { return data_.data() + i * m_; }
  const std::vector<double>& data() const { return data_; }

  bool is_identity(double tol = 0.0) const {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        double expect = i == j ? 1.0 : 0.0;
        if (std::abs(at(i, j) - expect) > tol) return false;
      }
    }
    return true;
  }

  friend bool operator==(const ShiftMatrix&, const ShiftMatrix&) = default;

 private:
  std::size_t m_ = 0;
  std::vector<double> data_;  // row-major m_ x m_
};

inline ShiftMatrix identity_shift(std::size_t m) {
  return ShiftMatrix::identity(m);
}

/// Pushforward of a distribution through a shift: q_j = sum_i p_i A_ij.
inline std::vector<double> apply_shift(const ShiftMatrix& a,
                                       std::span<const double> p) {
  if (p.size() != a.size()) {
    throw SizeError("distribution length " + std::to_string(p.size()) +
                    " does not match shift size " + std::to_string(a.size()));
  }
  std::vector<double> q(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (p[i] == 0.0) continue;
    const double* row = a.row(i);
    for (std::size_t j = 0; j < a.size(); ++j) q[j] += p[i] * row[j];
  }
  return q;
}

/// Shift whose rows all equal `target`; it maps every source
/// distribution to `target`, so every target is reachable by some
/// shift.
inline ShiftMatrix shift_to_target(std::span<const double> target) {
  std::vector<std::vector<double>> rows(
      target.size(), std::vector<double>(target.begin(), target.end()));
  return ShiftMatrix::from_rows(rows, kInputTol);
}

/// Composition: applying `first` then `second` equals applying
/// compose(first, second), i.e. the ordinary matrix product.
inline ShiftMatrix compose(const ShiftMatrix& first,
                           const ShiftMatrix& second) {
  if (first.size() != second.size()) {
    throw SizeError("cannot compose shifts of sizes " +
                    std::to_string(first.size()) + " and " +
                    std::to_string(second.size()));
  }
  std::size_t m = first.size();
  std::vector<std::vector<double>> rows(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      double f = first.at(i, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) rows[i][j] += f * second.at(k, j);
    }
  }
  return ShiftMatrix::from_rows(rows, kArithTol);
}

/// Applies a shift to every row of a conditional table: each
/// conditional distribution is pushed through the shift.
inline ConditionalTable shifted_cpt(const ConditionalTable& t,
                                    const ShiftMatrix& a) {
  if (t.arity != a.size()) {
    throw SizeError("table arity " + std::to_string(t.arity) +
                    " does not match shift size " + std::to_string(a.size()));
  }
  ConditionalTable out;
  out.arity = t.arity;
  out.p.assign(t.p.size(), 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double* src = t.row(r);
    double* dst = out.row(r);
    for (std::size_t i = 0; i < t.arity; ++i) {
      if (src[i] == 0.0) continue;
      const double* arow = a.row(i);
      for (std::size_t j = 0; j < t.arity; ++j) dst[j] += src[i] * arow[j];
    }
  }
  return out;
}

/// One candidate environment: a named bundle of per-variable shifts.
/// Variables without an entry are unshifted. An empty bundle is the
/// identity domain (the unintervened environment).
struct DomainSpec {
  std::string name;
  std::map<std::string, ShiftMatrix> shifts;

  bool is_identity() const {
    for (const auto& [var, a] : shifts) {
      if (!a.is_identity()) return false;
    }
    return true;
  }

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

/// Finite hypothesis set of domains tracked by a filter or planner.
class DomainSet {
 public:
  DomainSet() = default;

  explicit DomainSet(std::vector<DomainSpec> domains)
      : domains_(std::move(domains)) {
    if (domains_.empty()) {
      throw ValidationError("domain set must be non-empty");
    }
    for (std::size_t i = 0; i < domains_.size(); ++i) {
      if (domains_[i].name.empty()) {
        throw ValidationError("domain " + std::to_string(i) +
                              " has an empty name");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (domains_[j].name == domains_[i].name) {
          throw ValidationError("duplicate domain name \"" +
                                domains_[i].name + "\"");
        }
      }
    }
  }

  std::size_t size() const { return domains_.size(); }
  const DomainSpec& operator[](std::size_t i) const { return domains_[i]; }
  const std::vector<DomainSpec>& all() const { return domains_; }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < domains_.size(); ++i) {
      if (domains_[i].name == name) return i;
    }
    throw LookupError("unknown domain \"" + name + "\"");
  }

  bool contains_identity() const {
    for (const auto& d : domains_) {
      if (d.is_identity()) return true;
    }
    return false;
  }

  friend bool operator==(const DomainSet&, const DomainSet&) = default;

 private:
  std::vector<DomainSpec> domains_;
};

}  // namespace cpomdp
