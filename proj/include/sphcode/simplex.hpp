#pragma once

// Dense two-phase tableau simplex with Bland's rule, generic over an ordered
// field. Over Rational or Quad every pivot decision is exact.
//
//   maximize c.x  subject to  A_eq x = b_eq,  A_le x <= b_le,  x >= 0

#include <cmath>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "sphcode/field.hpp"

namespace sphcode {

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <class T>
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<T> objective;
  std::vector<std::vector<T>> eq_rows;
  std::vector<T> eq_rhs;
  std::vector<std::vector<T>> le_rows;
  std::vector<T> le_rhs;

  explicit LinearProgram(std::size_t n = 0) : num_vars(n), objective(n, T(0)) {}

  void add_eq(std::vector<T> row, T rhs) {
    eq_rows.push_back(std::move(row));
    eq_rhs.push_back(std::move(rhs));
  }
  void add_le(std::vector<T> row, T rhs) {
    le_rows.push_back(std::move(row));
    le_rhs.push_back(std::move(rhs));
  }
};

template <class T>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  T value{0};
  std::vector<T> x;
  std::size_t pivots = 0;
};

namespace detail {

inline constexpr double kPivotTol = 1e-9;
inline constexpr double kSnapTol = 1e-13;

template <class T>
class Tableau {
 public:
  // rows: constraint rows with b >= 0 in the last column; basis: basic var per row.
  Tableau(Matrix<T> body, std::vector<std::size_t> basis)
      : t_(std::move(body)), basis_(std::move(basis)) {}

  std::size_t rows() const { return t_.rows() - 1; }
  std::size_t cols() const { return t_.cols() - 1; }
  Matrix<T>& raw() { return t_; }
  std::vector<std::size_t>& basis() { return basis_; }

  // Objective row is the last row, holding reduced costs for a minimization
  // (entering column has negative reduced cost).
  void set_objective(const std::vector<T>& cost, std::size_t allowed_cols) {
    const std::size_t z = rows();
    for (std::size_t j = 0; j <= cols(); ++j) t_(z, j) = T(0);
    for (std::size_t j = 0; j < cost.size(); ++j) t_(z, j) = cost[j];
    for (std::size_t r = 0; r < rows(); ++r) {
      const T cb = t_(z, basis_[r]);
      if (field_is_zero(cb)) continue;
      for (std::size_t j = 0; j <= cols(); ++j) t_(z, j) -= cb * t_(r, j);
    }
    allowed_ = allowed_cols;
  }

  // Returns false when unbounded.
  bool optimize(std::size_t& pivots) {
    const std::size_t z = rows();
    while (true) {
      std::size_t enter = allowed_;
      for (std::size_t j = 0; j < allowed_; ++j)
        if (field_sign(t_(z, j)) < 0) {
          enter = j;
          break;
        }
      if (enter == allowed_) return true;
      std::size_t leave = rows();
      T best{0};
      for (std::size_t r = 0; r < rows(); ++r) {
        if constexpr (std::is_floating_point_v<T>) {
          if (t_(r, enter) <= kPivotTol) continue;
        } else {
          if (field_sign(t_(r, enter)) <= 0) continue;
        }
        T ratio = t_(r, cols()) / t_(r, enter);
        bool take = leave == rows();
        if (!take) {
          const int cmp = field_sign(T(ratio - best));
          // Floating ties go to the larger pivot element.
          if constexpr (std::is_floating_point_v<T>)
            take = cmp < 0 || (cmp == 0 && t_(r, enter) > t_(leave, enter));
          else
            take = cmp < 0 || (cmp == 0 && basis_[r] < basis_[leave]);
        }
        if (take) {
          best = ratio;
          leave = r;
        }
      }
      if (leave == rows()) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    T inv = T(1) / t_(r, c);
    for (std::size_t j = 0; j <= cols(); ++j) t_(r, j) *= inv;
    for (std::size_t i = 0; i <= rows(); ++i) {
      if (i == r || field_is_zero(t_(i, c))) continue;
      T f = t_(i, c);
      for (std::size_t j = 0; j <= cols(); ++j) {
        t_(i, j) -= f * t_(r, j);
        if constexpr (std::is_floating_point_v<T>)
          if (std::abs(t_(i, j)) < kSnapTol) t_(i, j) = T(0);
      }
    }
    basis_[r] = c;
  }

 private:
  Matrix<T> t_;
  std::vector<std::size_t> basis_;
  std::size_t allowed_ = 0;
};

}  // namespace detail

template <class T>
LpResult<T> solve_lp(const LinearProgram<T>& lp) {
  const std::size_t n = lp.num_vars;
  const std::size_t n_eq = lp.eq_rows.size();
  const std::size_t n_le = lp.le_rows.size();
  const std::size_t m = n_eq + n_le;
  // Columns: original vars, one slack per <= row, one artificial per row, rhs.
  const std::size_t slack0 = n;
  const std::size_t art0 = n + n_le;
  const std::size_t width = art0 + m;

  Matrix<T> body(m + 1, width + 1);
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    const bool is_eq = r < n_eq;
    const auto& row = is_eq ? lp.eq_rows[r] : lp.le_rows[r - n_eq];
    const T& rhs = is_eq ? lp.eq_rhs[r] : lp.le_rhs[r - n_eq];
    if (row.size() != n) throw DomainError("LP row has wrong length");
    const bool flip = field_sign(rhs) < 0;
    for (std::size_t j = 0; j < n; ++j) body(r, j) = flip ? T(-row[j]) : row[j];
    if (!is_eq) body(r, slack0 + (r - n_eq)) = flip ? T(-1) : T(1);
    body(r, art0 + r) = T(1);
    body(r, width) = flip ? T(-rhs) : rhs;
    basis[r] = art0 + r;
  }

  detail::Tableau<T> tab(std::move(body), std::move(basis));
  LpResult<T> result;

  // Phase I: minimize the sum of artificials.
  std::vector<T> phase1(width, T(0));
  for (std::size_t r = 0; r < m; ++r) phase1[art0 + r] = T(1);
  tab.set_objective(phase1, width);
  tab.optimize(result.pivots);
  if (field_sign(tab.raw()(m, width)) != 0) {
    result.status = LpStatus::Infeasible;
    return result;
  }
  // Drive remaining artificials out of the basis where possible.
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis()[r] < art0) continue;
    for (std::size_t j = 0; j < art0; ++j)
      if (!field_is_zero(tab.raw()(r, j))) {
        tab.pivot(r, j);
        ++result.pivots;
        break;
      }
  }

  // Phase II: minimize -c.x over the non-artificial columns.
  std::vector<T> phase2(width, T(0));
  for (std::size_t j = 0; j < n; ++j) phase2[j] = -lp.objective[j];
  for (std::size_t r = 0; r < m; ++r)
    if (tab.basis()[r] >= art0) phase2[tab.basis()[r]] = T(0);
  tab.set_objective(phase2, art0);
  if (!tab.optimize(result.pivots)) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x.assign(n, T(0));
  for (std::size_t r = 0; r < m; ++r)
    if (tab.basis()[r] < n) result.x[tab.basis()[r]] = tab.raw()(r, width);
  result.value = T(0);
  for (std::size_t j = 0; j < n; ++j) result.value += lp.objective[j] * result.x[j];
  return result;
}

}  // namespace sphcode
