#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "rational.hpp"

namespace holant {

/// Equality-form feasibility problem: find x >= 0 with A x = b.
struct LinearSystem {
  std::size_t num_vars = 0;
  std::vector<std::vector<Rational>> rows;  // each of length num_vars
  std::vector<Rational> rhs;
};

/// A vector y with y.b > 0 and y.A_j <= 0 for every column j; its existence
/// refutes feasibility, and checking it is a handful of dot products.
struct FarkasCertificate {
  std::vector<Rational> y;
};

struct FeasibilityResult {
  bool feasible = false;
  std::vector<Rational> solution;     // when feasible
  FarkasCertificate farkas;           // when infeasible
};

inline bool verify_farkas(const LinearSystem& sys, const FarkasCertificate& cert) {
  if (cert.y.size() != sys.rows.size()) return false;
  Rational yb = 0;
  for (std::size_t i = 0; i < sys.rows.size(); ++i) yb += cert.y[i] * sys.rhs[i];
  if (yb <= 0) return false;
  for (std::size_t j = 0; j < sys.num_vars; ++j) {
    Rational col = 0;
    for (std::size_t i = 0; i < sys.rows.size(); ++i) col += cert.y[i] * sys.rows[i][j];
    if (col > 0) return false;
  }
  return true;
}

/*
 * Phase-1 simplex over exact rationals.
 *
 * The tableau has one artificial variable per row; minimizing their sum
 * either reaches zero (feasible, read off the basic solution) or stops at a
 * positive optimum, in which case the simplex multipliers give a Farkas
 * vector. Entering and leaving variables are chosen by lowest index
 * (Bland's rule), so the method terminates on every input.
 */
inline FeasibilityResult solve_equality_feasibility(const LinearSystem& sys) {
  const std::size_t m = sys.rows.size();
  const std::size_t n = sys.num_vars;
  for (const auto& row : sys.rows)
    if (row.size() != n) throw std::invalid_argument("simplex: ragged row");
  if (sys.rhs.size() != m) throw std::invalid_argument("simplex: rhs size mismatch");

  // Tableau columns: n structural, m artificial, then the rhs.
  std::vector<std::vector<Rational>> t(m, std::vector<Rational>(n + m + 1, Rational(0)));
  std::vector<int> row_sign(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    int sign = (sys.rhs[i] < 0) ? -1 : 1;
    row_sign[i] = sign;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = sign * sys.rows[i][j];
    t[i][n + i] = 1;
    t[i][n + m] = sign * sys.rhs[i];
  }
  // Objective row: reduced costs for minimizing the sum of artificials.
  std::vector<Rational> obj(n + m + 1, Rational(0));
  for (std::size_t j = 0; j <= n + m; ++j) {
    for (std::size_t i = 0; i < m; ++i) obj[j] -= t[i][j];
  }
  for (std::size_t i = 0; i < m; ++i) obj[n + i] += 1;  // cost of artificials

  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  while (true) {
    // Bland: lowest-index structural column with negative reduced cost.
    std::size_t enter = n + m;
    for (std::size_t j = 0; j < n; ++j) {
      if (obj[j] < 0) {
        enter = j;
        break;
      }
    }
    if (enter == n + m) break;

    // Ratio test, ties broken by lowest basis index.
    std::size_t leave = m;
    Rational best;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= 0) continue;
      Rational ratio = t[i][n + m] / t[i][enter];
      if (leave == m || ratio < best ||
          (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m)
      throw std::logic_error("simplex: unbounded phase-1 objective");

    // Pivot.
    Rational piv = t[leave][enter];
    for (auto& v : t[leave]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      Rational factor = t[i][enter];
      for (std::size_t j = 0; j <= n + m; ++j) t[i][j] -= factor * t[leave][j];
    }
    if (obj[enter] != 0) {
      Rational factor = obj[enter];
      for (std::size_t j = 0; j <= n + m; ++j) obj[j] -= factor * t[leave][j];
    }
    basis[leave] = enter;
  }

  FeasibilityResult res;
  Rational optimum = -obj[n + m];
  if (optimum == 0) {
    res.feasible = true;
    res.solution.assign(n, Rational(0));
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) res.solution[basis[i]] = t[i][n + m];
    return res;
  }

  // Simplex multipliers: y_i = c_i - reduced cost of artificial i, with the
  // original row sign folded back in.
  res.feasible = false;
  res.farkas.y.assign(m, Rational(0));
  for (std::size_t i = 0; i < m; ++i)
    res.farkas.y[i] = row_sign[i] * (Rational(1) - obj[n + i]);
  if (!verify_farkas(sys, res.farkas))
    throw std::logic_error("simplex: produced an invalid Farkas certificate");
  return res;
}

}  // namespace holant
