#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "l2tower/poly.hpp"

namespace l2t {

/// M = coker(F_p[[X]]^r -> F_p[[X]]^s, x -> x A) for a polynomial matrix A over F_p[X_1..X_d].
struct ModulePresentation {
  std::uint64_t p = 2;
  int d = 1;
  std::size_t rows = 0;  // r
  std::size_t cols = 1;  // s
  std::vector<LaurentPoly> entries;  // row-major, nonnegative exponents

  const LaurentPoly& operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }

  /// Cyclic module coker(a).
  static ModulePresentation cyclic(std::uint64_t p, int d, const LaurentPoly& a);
  /// Free module of rank s (0 x s presentation).
  static ModulePresentation free(std::uint64_t p, int d, std::size_t s);

  void validate() const;
};

struct IwasawaOptions {
  /// Cap on the materialized matrix dimension max(r, s) * p^{id}.
  std::size_t max_dimension = std::size_t{1} << 17;
  LaurentRankOptions rank;
};

/// dim_{F_p} M / I_i M with I_i = (X_1^{p^i}, ..., X_d^{p^i}), via the monomial basis.
std::size_t truncated_codim(const ModulePresentation& m, int level, const IwasawaOptions& opts = {});

/// Rank over F_p[[X]]: s - rank of A over F_p(t) after X_j = t_j - 1.
std::size_t iwasawa_rank(const ModulePresentation& m, const IwasawaOptions& opts = {});

/// A with X_j replaced by t_j - 1.
LaurentMatrix shifted_laurent_matrix(const ModulePresentation& m);

struct HarrisReport {
  std::uint64_t p = 2;
  int d = 1;
  std::size_t rank = 0;
  std::vector<int> levels;
  std::vector<std::size_t> codims;
  std::vector<std::int64_t> residuals;  // codim - rank * p^{id}
  std::vector<double> ratios;           // residual / p^{i(d-1)}
  std::vector<bool> included;           // level 1 is excluded when p = 2
  double sup_ratio = 0.0;
  bool pass = false;
};

/// Computes residuals for levels 1..L and applies the bounded-ratio rule.
HarrisReport harris_check(const ModulePresentation& m, int levels, const IwasawaOptions& opts = {});

/// C(d + mp^i - 1, d) - C(d + mp^i - s - 1, d).
mpz_class binomial_dim_formula(int d, std::uint64_t m, std::uint64_t s, int i, std::uint64_t p);

}  // namespace l2t
