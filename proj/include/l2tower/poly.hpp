#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace l2t {

using Exponent = std::vector<int>;

/// Multivariate Laurent polynomial with integer coefficients. No zero terms are stored.
class LaurentPoly {
public:
  LaurentPoly() = default;
  explicit LaurentPoly(int num_vars) : num_vars_(num_vars) {}

  static LaurentPoly constant(int num_vars, std::int64_t c);
  static LaurentPoly monomial(const Exponent& e, std::int64_t c = 1);

  int num_vars() const { return num_vars_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Exponent, std::int64_t>& terms() const { return terms_; }

  void add_term(const Exponent& e, std::int64_t c);

  LaurentPoly& operator+=(const LaurentPoly& o);
  LaurentPoly& operator-=(const LaurentPoly& o);
  friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
  friend LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) { return a -= b; }
  friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b);
  friend bool operator==(const LaurentPoly& a, const LaurentPoly& b) = default;

  /// Coefficients reduced into [0, p); zero terms dropped.
  LaurentPoly mod(std::uint64_t p) const;

  /// Per-variable exponent span summed over variables.
  int degree_span() const;
  bool has_negative_exponent() const;

  /// Substitutes a common exponent-vector map: variable j -> t^{weights[j]} in a single variable.
  LaurentPoly specialize(const std::vector<int>& weights) const;

  std::string to_string(const std::vector<std::string>& names = {}) const;

private:
  int num_vars_ = 0;
  std::map<Exponent, std::int64_t> terms_;
};

/// Rectangular matrix of Laurent polynomials in a fixed number of variables.
struct LaurentMatrix {
  int num_vars = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<LaurentPoly> entries;  // row-major

  LaurentMatrix() = default;
  LaurentMatrix(int vars, std::size_t r, std::size_t c)
      : num_vars(vars), rows(r), cols(c), entries(r * c, LaurentPoly(vars)) {}

  LaurentPoly& operator()(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
  const LaurentPoly& operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }

  LaurentMatrix mod(std::uint64_t p) const;
  /// Max over rows of the summed per-variable exponent span of that row.
  int row_degree_bound() const;
};

// ---------------------------------------------------------------------------
// Univariate polynomials

/// Dense univariate polynomial over F_p, lowest degree first, no trailing zeros.
struct FpPoly {
  std::uint64_t p = 2;
  std::vector<std::uint64_t> c;

  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const { return c.empty(); }
  void trim();
};

FpPoly fp_mul(const FpPoly& a, const FpPoly& b);
FpPoly fp_sub(const FpPoly& a, const FpPoly& b);
/// Quotient and remainder; b nonzero.
std::pair<FpPoly, FpPoly> fp_divmod(const FpPoly& a, const FpPoly& b);
FpPoly fp_gcd(FpPoly a, FpPoly b);

/// Dense univariate polynomial over Q, lowest degree first.
struct QPoly {
  std::vector<mpq_class> c;

  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const { return c.empty(); }
  void trim();
  mpq_class eval(const mpq_class& x) const;
};

QPoly q_mul(const QPoly& a, const QPoly& b);
QPoly q_sub(const QPoly& a, const QPoly& b);
std::pair<QPoly, QPoly> q_divmod(const QPoly& a, const QPoly& b);
QPoly q_gcd(QPoly a, QPoly b);

/// Integer content 1, positive leading coefficient, lowest exponent shifted to 0.
std::vector<mpz_class> normalize_primitive(const QPoly& f);

/// Univariate Laurent polynomial (one variable) as a shifted QPoly.
QPoly to_qpoly(const LaurentPoly& f);

// ---------------------------------------------------------------------------
// Finite extension fields and randomized rank

/// GF(p^e) as F_p[x]/(f) with f the first monic irreducible polynomial in lexicographic order.
class ExtensionField {
public:
  using Element = std::vector<std::uint64_t>;  // length e

  ExtensionField(std::uint64_t p, int degree);

  std::uint64_t characteristic() const { return p_; }
  int degree() const { return e_; }
  const FpPoly& modulus() const { return modulus_; }

  Element zero() const { return Element(static_cast<std::size_t>(e_), 0); }
  Element one() const;
  Element from_int(std::int64_t v) const;
  bool is_zero(const Element& a) const;

  Element add(const Element& a, const Element& b) const;
  Element sub(const Element& a, const Element& b) const;
  Element mul(const Element& a, const Element& b) const;
  Element inv(const Element& a) const;
  Element pow(const Element& a, std::int64_t k) const;
  Element random_nonzero(std::mt19937_64& rng) const;

private:
  std::uint64_t p_;
  int e_;
  FpPoly modulus_;
};

/// True when f (monic, degree >= 1) is irreducible over F_p.
bool is_irreducible(const FpPoly& f);

struct LaurentRankOptions {
  int trials = 4;
  /// 0 selects the smallest admissible extension degree.
  int ext_degree = 0;
  std::uint64_t seed = 0xB3771;
};

/// Smallest e with p^e > 4 * degree bound * max(rows, cols).
int admissible_ext_degree(const LaurentMatrix& m, std::uint64_t p);

/// Rank over F_p(t_1..t_d) by evaluation at random points of GF(p^e); never exceeds the true rank.
std::size_t rank_laurent(const LaurentMatrix& m, std::uint64_t p, const LaurentRankOptions& opts = {});

/// Exact rank over F_p(t) for a one-variable matrix via fraction-free elimination in F_p[t].
std::size_t rank_laurent_univariate(const LaurentMatrix& m, std::uint64_t p);

}  // namespace l2t
