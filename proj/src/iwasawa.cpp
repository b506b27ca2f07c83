#include "l2tower/iwasawa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "l2tower/errors.hpp"
#include "l2tower/exactla.hpp"

namespace l2t {

ModulePresentation ModulePresentation::cyclic(std::uint64_t p, int d, const LaurentPoly& a) {
  ModulePresentation m;
  m.p = p;
  m.d = d;
  m.rows = 1;
  m.cols = 1;
  m.entries = {a};
  return m;
}

ModulePresentation ModulePresentation::free(std::uint64_t p, int d, std::size_t s) {
  ModulePresentation m;
  m.p = p;
  m.d = d;
  m.rows = 0;
  m.cols = s;
  return m;
}

void ModulePresentation::validate() const {
  if (!is_prime(p)) throw InputError("module: p = " + std::to_string(p) + " is not prime");
  if (d < 1) throw InputError("module: d must be >= 1");
  if (entries.size() != rows * cols) throw InputError("module: presentation matrix has the wrong number of entries");
  for (const auto& e : entries) {
    if (e.num_vars() != d) throw InputError("module: entry has the wrong number of variables");
    if (e.has_negative_exponent()) throw InputError("module: entries must be polynomials (nonnegative exponents)");
  }
}

namespace {

std::uint64_t ipow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int k = 0; k < exp; ++k) out *= base;
  return out;
}

}  // namespace

std::size_t truncated_codim(const ModulePresentation& m, int level, const IwasawaOptions& opts) {
  m.validate();
  if (level < 0) throw InputError("truncated_codim: level must be >= 0");
  const long double n_real = std::pow(static_cast<long double>(m.p), static_cast<long double>(level * m.d));
  if (n_real * static_cast<long double>(std::max<std::size_t>({m.rows, m.cols, 1})) >
      static_cast<long double>(opts.max_dimension))
    throw BudgetExceeded("truncated_codim: p^{id} * max(r, s) exceeds the budget at level " + std::to_string(level));

  const std::uint64_t side = ipow(m.p, level);
  const std::uint64_t basis = ipow(side, m.d);
  const std::size_t cols = m.cols * basis;
  const LaurentPoly reduced_zero(m.d);

  // Monomial u <-> mixed-radix index with radix p^i per variable.
  std::vector<SparseRow> rows;
  rows.reserve(m.rows * basis);
  std::vector<int> u(static_cast<std::size_t>(m.d));
  for (std::size_t a = 0; a < m.rows; ++a) {
    for (std::uint64_t ui = 0; ui < basis; ++ui) {
      std::uint64_t rest = ui;
      for (int j = 0; j < m.d; ++j) {
        u[static_cast<std::size_t>(j)] = static_cast<int>(rest % side);
        rest /= side;
      }
      SparseRow row;
      for (std::size_t b = 0; b < m.cols; ++b) {
        for (const auto& [e, c] : m(a, b).terms()) {
          const std::uint64_t v = reduce(c, m.p);
          if (v == 0) continue;
          std::uint64_t idx = 0, scale = 1;
          bool truncated = false;
          for (int j = 0; j < m.d; ++j) {
            const auto x = static_cast<std::uint64_t>(u[static_cast<std::size_t>(j)] + e[static_cast<std::size_t>(j)]);
            if (x >= side) {
              truncated = true;
              break;
            }
            idx += x * scale;
            scale *= side;
          }
          if (!truncated) row.emplace_back(static_cast<std::uint32_t>(b * basis + idx), v);
        }
      }
      std::sort(row.begin(), row.end());
      rows.push_back(std::move(row));
    }
  }
  return cols - rank_fp_sparse(rows, cols, m.p);
}

LaurentMatrix shifted_laurent_matrix(const ModulePresentation& m) {
  LaurentMatrix out(m.d, m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) {
      LaurentPoly acc(m.d);
      for (const auto& [e, c] : m(i, j).terms()) {
        LaurentPoly term = LaurentPoly::constant(m.d, c);
        for (int v = 0; v < m.d; ++v) {
          Exponent tv(static_cast<std::size_t>(m.d), 0);
          tv[static_cast<std::size_t>(v)] = 1;
          const LaurentPoly shift = LaurentPoly::monomial(tv) - LaurentPoly::constant(m.d, 1);
          for (int k = 0; k < e[static_cast<std::size_t>(v)]; ++k) term = (term * shift).mod(m.p);
        }
        acc += term;
      }
      out(i, j) = acc.mod(m.p);
    }
  return out;
}

std::size_t iwasawa_rank(const ModulePresentation& m, const IwasawaOptions& opts) {
  m.validate();
  if (m.rows == 0) return m.cols;
  return m.cols - rank_laurent(shifted_laurent_matrix(m), m.p, opts.rank);
}

HarrisReport harris_check(const ModulePresentation& m, int levels, const IwasawaOptions& opts) {
  if (levels < 1) throw InsufficientLevels("harris_check: need at least one level");
  HarrisReport r;
  r.p = m.p;
  r.d = m.d;
  r.rank = iwasawa_rank(m, opts);
  bool nonnegative = true;
  for (int i = 1; i <= levels; ++i) {
    const std::size_t codim = truncated_codim(m, i, opts);
    const auto full = static_cast<std::int64_t>(r.rank * ipow(m.p, i * m.d));
    const std::int64_t e = static_cast<std::int64_t>(codim) - full;
    r.levels.push_back(i);
    r.codims.push_back(codim);
    r.residuals.push_back(e);
    r.ratios.push_back(static_cast<double>(e) / static_cast<double>(ipow(m.p, i * (m.d - 1))));
    r.included.push_back(!(m.p == 2 && i == 1));
    if (e < 0) nonnegative = false;
  }
  std::vector<double> kept;
  for (std::size_t k = 0; k < r.ratios.size(); ++k)
    if (r.included[k]) kept.push_back(r.ratios[k]);
  r.sup_ratio = kept.empty() ? 0.0 : *std::max_element(kept.begin(), kept.end());
  bool bounded = true;
  if (kept.size() >= 2) {
    const double earlier = *std::max_element(kept.begin(), kept.end() - 1);
    bounded = kept.back() <= 2.0 * earlier;
  }
  r.pass = nonnegative && bounded;
  return r;
}

mpz_class binomial_dim_formula(int d, std::uint64_t m, std::uint64_t s, int i, std::uint64_t p) {
  if (d < 1 || m < 1) throw InputError("binomial_dim_formula: need d >= 1 and m >= 1");
  mpz_class top;
  mpz_ui_pow_ui(top.get_mpz_t(), p, static_cast<unsigned long>(i));
  top *= m;  // m p^i
  if (s > top) throw InputError("binomial_dim_formula: need s <= m p^i");
  auto binom = [d](const mpz_class& n) {
    mpz_class out;
    mpz_bin_ui(out.get_mpz_t(), n.get_mpz_t(), static_cast<unsigned long>(d));
    return out;
  };
  return binom(top + d - 1) - binom(top + d - 1 - s);
}

}  // namespace l2t
