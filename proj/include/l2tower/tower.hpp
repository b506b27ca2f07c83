#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "l2tower/chain.hpp"
#include "l2tower/fpgroup.hpp"

namespace l2t {

/// Exact nonnegative-friendly rational with 64-bit parts; always reduced, den > 0.
class Rational {
public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::int64_t floor() const;
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, std::int64_t k);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

struct TowerOptions {
  bool field_q = true;
  bool field_fp = true;
  QuotientOptions quotient;
  BettiOptions betti;
  /// Empty disables the on-disk cache.
  std::string cache_dir;
  unsigned jobs = 1;
};

struct BettiRow {
  std::size_t k = 0;
  int level = 0;
  std::uint64_t index = 1;
  std::optional<std::size_t> b_q, b_fp, coker_q, coker_fp;
};

struct BettiTable {
  std::uint64_t p = 2;
  std::size_t top_degree = 0;
  std::vector<BettiRow> rows;  // ordered by level, then k
  std::vector<std::pair<int, std::uint64_t>> indices;
  std::optional<int> failed_level;
  std::string failure;
  bool certified = true;
  std::string cache_key;
  std::size_t cache_hits = 0;

  /// (level, index, b) for degree k over the chosen field.
  std::vector<std::tuple<int, std::uint64_t, std::size_t>> column(std::size_t k, bool fp) const;
};

/// Computes Betti rows for levels 1..levels. Budget failures yield a partial table with failed_level set.
BettiTable run_tower(const GroupPresentation& pres, const PadicRep& rep, const EquivariantComplex& complex, int levels,
                     const TowerOptions& opts = {});

enum class LimitMode { Fp, Q };

struct LimitEstimate {
  Rational estimate;
  Rational lower;
  Rational upper;
  std::vector<Rational> normalized;
  std::vector<Rational> differences;  // forward differences of normalized values
  bool stabilized = false;
};

/// Bracketed limit of b/index from computed levels only; never extrapolates.
LimitEstimate estimate_limit(const std::vector<std::pair<std::uint64_t, std::size_t>>& column, LimitMode mode);

enum class Verdict { Consistent, TriviallyConsistent, Inconsistent, Inconclusive };

std::string to_string(Verdict v);

struct ExponentFit {
  std::vector<double> residuals;
  std::optional<double> slope;
  double bound = 0.0;  // 1 - 1/d + slack
  Verdict verdict = Verdict::Inconclusive;
};

inline constexpr double kExponentSlack = 0.15;

/// Least-squares slope of log residual against log index; CONSISTENT iff slope <= 1 - 1/d + 0.15.
ExponentFit fit_error_exponent(const std::vector<std::pair<std::uint64_t, std::size_t>>& column, const Rational& beta,
                               double d_hat);

struct MonotonicityResult {
  bool applicable = true;  // relative indices are p-powers
  bool pass = true;
  int base_level = 1;
  std::vector<Rational> normalized;  // b_i / [Gamma_b : Gamma_i]
};

/// b(X_i; F_p) / [Gamma_b : Gamma_i] must be non-increasing for i >= base_level.
MonotonicityResult check_monotonicity(const std::vector<std::tuple<int, std::uint64_t, std::size_t>>& column,
                                      int base_level, std::uint64_t p);

/// Throws MonotonicityViolated on an applicable failing result.
void require_monotone(const MonotonicityResult& r);

struct DegreeReport {
  std::size_t k = 0;
  std::optional<LimitEstimate> q, fp;
  std::optional<ExponentFit> fit_q, fit_fp;
  std::optional<MonotonicityResult> monotonicity;
};

struct TowerReport {
  std::uint64_t p = 2;
  std::optional<DimEstimate> d_hat;
  std::optional<int> user_d;
  std::vector<DegreeReport> degrees;
  int monotonicity_base = 1;
  bool pass = true;
};

TowerReport make_report(const BettiTable& table, std::optional<int> user_d = std::nullopt, int monotonicity_base = 1);

}  // namespace l2t
