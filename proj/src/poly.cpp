#include "l2tower/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "l2tower/errors.hpp"
#include "l2tower/exactla.hpp"

namespace l2t {

LaurentPoly LaurentPoly::constant(int num_vars, std::int64_t c) {
  LaurentPoly f(num_vars);
  f.add_term(Exponent(static_cast<std::size_t>(num_vars), 0), c);
  return f;
}

LaurentPoly LaurentPoly::monomial(const Exponent& e, std::int64_t c) {
  LaurentPoly f(static_cast<int>(e.size()));
  f.add_term(e, c);
  return f;
}

void LaurentPoly::add_term(const Exponent& e, std::int64_t c) {
  if (static_cast<int>(e.size()) != num_vars_) throw Error("LaurentPoly: exponent arity mismatch");
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
  LaurentPoly out(a.num_vars_);
  Exponent e(static_cast<std::size_t>(a.num_vars_));
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t j = 0; j < e.size(); ++j) e[j] = ea[j] + eb[j];
      out.add_term(e, ca * cb);
    }
  return out;
}

LaurentPoly LaurentPoly::mod(std::uint64_t p) const {
  LaurentPoly out(num_vars_);
  for (const auto& [e, c] : terms_) out.add_term(e, static_cast<std::int64_t>(reduce(c, p)));
  return out;
}

int LaurentPoly::degree_span() const {
  if (terms_.empty()) return 0;
  int span = 0;
  for (int j = 0; j < num_vars_; ++j) {
    int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
    for (const auto& [e, c] : terms_) {
      lo = std::min(lo, e[static_cast<std::size_t>(j)]);
      hi = std::max(hi, e[static_cast<std::size_t>(j)]);
    }
    span += hi - lo;
  }
  return span;
}

bool LaurentPoly::has_negative_exponent() const {
  for (const auto& [e, c] : terms_)
    if (std::any_of(e.begin(), e.end(), [](int x) { return x < 0; })) return true;
  return false;
}

LaurentPoly LaurentPoly::specialize(const std::vector<int>& weights) const {
  LaurentPoly out(1);
  for (const auto& [e, c] : terms_) {
    int total = 0;
    for (std::size_t j = 0; j < e.size(); ++j) total += e[j] * weights[j];
    out.add_term({total}, c);
  }
  return out;
}

std::string LaurentPoly::to_string(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  auto var = [&](int j) {
    if (static_cast<std::size_t>(j) < names.size()) return names[static_cast<std::size_t>(j)];
    return num_vars_ == 1 ? std::string("t") : "t" + std::to_string(j + 1);
  };
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    const bool unit_mono = std::all_of(e.begin(), e.end(), [](int x) { return x == 0; });
    std::int64_t mag = c < 0 ? -c : c;
    if (first)
      os << (c < 0 ? "-" : "");
    else
      os << (c < 0 ? " - " : " + ");
    first = false;
    if (mag != 1 || unit_mono) os << mag;
    bool need_star = mag != 1;
    for (int j = 0; j < num_vars_; ++j) {
      const int x = e[static_cast<std::size_t>(j)];
      if (x == 0) continue;
      if (need_star) os << '*';
      os << var(j);
      if (x != 1) os << '^' << x;
      need_star = true;
    }
  }
  return os.str();
}

LaurentMatrix LaurentMatrix::mod(std::uint64_t p) const {
  LaurentMatrix out(num_vars, rows, cols);
  for (std::size_t k = 0; k < entries.size(); ++k) out.entries[k] = entries[k].mod(p);
  return out;
}

int LaurentMatrix::row_degree_bound() const {
  int bound = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    LaurentPoly row_support(num_vars);
    for (std::size_t j = 0; j < cols; ++j)
      for (const auto& [e, c] : (*this)(i, j).terms()) row_support.add_term(e, 1);
    bound = std::max(bound, row_support.degree_span());
  }
  return bound;
}

// ---------------------------------------------------------------------------

void FpPoly::trim() {
  while (!c.empty() && c.back() == 0) c.pop_back();
}

FpPoly fp_mul(const FpPoly& a, const FpPoly& b) {
  FpPoly out{a.p, {}};
  if (a.is_zero() || b.is_zero()) return out;
  out.c.assign(a.c.size() + b.c.size() - 1, 0);
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (a.c[i] == 0) continue;
    for (std::size_t j = 0; j < b.c.size(); ++j)
      out.c[i + j] = addmod(out.c[i + j], mulmod(a.c[i], b.c[j], a.p), a.p);
  }
  out.trim();
  return out;
}

FpPoly fp_sub(const FpPoly& a, const FpPoly& b) {
  FpPoly out{a.p, a.c};
  out.c.resize(std::max(a.c.size(), b.c.size()), 0);
  for (std::size_t i = 0; i < b.c.size(); ++i) out.c[i] = submod(out.c[i], b.c[i], a.p);
  out.trim();
  return out;
}

std::pair<FpPoly, FpPoly> fp_divmod(const FpPoly& a, const FpPoly& b) {
  if (b.is_zero()) throw Error("fp_divmod: division by zero polynomial");
  const std::uint64_t p = a.p;
  FpPoly rem{p, a.c};
  FpPoly quot{p, {}};
  if (rem.degree() < b.degree()) return {quot, rem};
  quot.c.assign(static_cast<std::size_t>(rem.degree() - b.degree() + 1), 0);
  const std::uint64_t lead_inv = invmod(b.c.back(), p);
  while (!rem.is_zero() && rem.degree() >= b.degree()) {
    const auto shift = static_cast<std::size_t>(rem.degree() - b.degree());
    const std::uint64_t f = mulmod(rem.c.back(), lead_inv, p);
    quot.c[shift] = f;
    for (std::size_t j = 0; j < b.c.size(); ++j) rem.c[shift + j] = submod(rem.c[shift + j], mulmod(f, b.c[j], p), p);
    rem.trim();
  }
  quot.trim();
  return {quot, rem};
}

FpPoly fp_gcd(FpPoly a, FpPoly b) {
  while (!b.is_zero()) {
    FpPoly r = fp_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.is_zero()) {
    const std::uint64_t inv = invmod(a.c.back(), a.p);
    for (auto& x : a.c) x = mulmod(x, inv, a.p);
  }
  return a;
}

namespace {

// Returns (g, s) with s*a = g (mod m), g = gcd(a, m).
std::pair<FpPoly, FpPoly> fp_half_ext_gcd(const FpPoly& a, const FpPoly& m) {
  const std::uint64_t p = m.p;
  FpPoly r0 = m, r1 = a;
  FpPoly s0{p, {}}, s1{p, {1}};
  while (!r1.is_zero()) {
    auto [q, r] = fp_divmod(r0, r1);
    FpPoly s = fp_sub(s0, fp_mul(q, s1));
    r0 = std::move(r1);
    r1 = std::move(r);
    s0 = std::move(s1);
    s1 = std::move(s);
  }
  return {r0, s0};
}

FpPoly fp_powmod(FpPoly base, std::uint64_t exp, const FpPoly& m) {
  FpPoly result{m.p, {1}};
  base = fp_divmod(base, m).second;
  while (exp != 0) {
    if (exp & 1U) result = fp_divmod(fp_mul(result, base), m).second;
    base = fp_divmod(fp_mul(base, base), m).second;
    exp >>= 1U;
  }
  return result;
}

}  // namespace

bool is_irreducible(const FpPoly& f) {
  const int n = f.degree();
  if (n < 1) return false;
  if (n == 1) return true;
  const FpPoly x{f.p, {0, 1}};
  FpPoly power = x;
  for (int k = 1; k <= n / 2; ++k) {
    power = fp_powmod(power, f.p, f);
    const FpPoly g = fp_gcd(fp_sub(power, x), f);
    if (g.degree() > 0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

void QPoly::trim() {
  while (!c.empty() && c.back() == 0) c.pop_back();
}

mpq_class QPoly::eval(const mpq_class& x) const {
  mpq_class acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

QPoly q_mul(const QPoly& a, const QPoly& b) {
  QPoly out;
  if (a.is_zero() || b.is_zero()) return out;
  out.c.assign(a.c.size() + b.c.size() - 1, 0);
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) out.c[i + j] += a.c[i] * b.c[j];
  out.trim();
  return out;
}

QPoly q_sub(const QPoly& a, const QPoly& b) {
  QPoly out = a;
  out.c.resize(std::max(a.c.size(), b.c.size()), 0);
  for (std::size_t i = 0; i < b.c.size(); ++i) out.c[i] -= b.c[i];
  out.trim();
  return out;
}

std::pair<QPoly, QPoly> q_divmod(const QPoly& a, const QPoly& b) {
  if (b.is_zero()) throw Error("q_divmod: division by zero polynomial");
  QPoly rem = a, quot;
  if (rem.degree() < b.degree()) return {quot, rem};
  quot.c.assign(static_cast<std::size_t>(rem.degree() - b.degree() + 1), 0);
  while (!rem.is_zero() && rem.degree() >= b.degree()) {
    const auto shift = static_cast<std::size_t>(rem.degree() - b.degree());
    const mpq_class f = rem.c.back() / b.c.back();
    quot.c[shift] = f;
    for (std::size_t j = 0; j < b.c.size(); ++j) rem.c[shift + j] -= f * b.c[j];
    rem.trim();
  }
  quot.trim();
  return {quot, rem};
}

QPoly q_gcd(QPoly a, QPoly b) {
  while (!b.is_zero()) {
    QPoly r = q_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.is_zero()) {
    const mpq_class lead = a.c.back();
    for (auto& x : a.c) x /= lead;
  }
  return a;
}

std::vector<mpz_class> normalize_primitive(const QPoly& f) {
  if (f.is_zero()) return {};
  mpz_class den = 1;
  for (const auto& x : f.c) den = lcm(den, mpz_class(x.get_den()));
  std::vector<mpz_class> ints;
  for (const auto& x : f.c) ints.emplace_back(mpz_class(x * den));
  mpz_class content = 0;
  for (const auto& x : ints) content = gcd(content, x);
  std::size_t low = 0;
  while (ints[low] == 0) ++low;
  std::vector<mpz_class> out(ints.begin() + static_cast<std::ptrdiff_t>(low), ints.end());
  const int sign = sgn(out.back()) < 0 ? -1 : 1;
  for (auto& x : out) x = x / content * sign;
  return out;
}

QPoly to_qpoly(const LaurentPoly& f) {
  if (f.num_vars() != 1) throw Error("to_qpoly: expected a one-variable polynomial");
  QPoly out;
  if (f.is_zero()) return out;
  const int low = f.terms().begin()->first[0];
  const int high = f.terms().rbegin()->first[0];
  out.c.assign(static_cast<std::size_t>(high - low + 1), 0);
  for (const auto& [e, c] : f.terms()) out.c[static_cast<std::size_t>(e[0] - low)] = static_cast<long>(c);
  out.trim();
  return out;
}

// ---------------------------------------------------------------------------

ExtensionField::ExtensionField(std::uint64_t p, int degree) : p_(p), e_(degree), modulus_{p, {}} {
  if (degree < 1) throw Error("ExtensionField: degree must be positive");
  if (degree == 1) {
    modulus_.c = {0, 1};
    return;
  }
  // Enumerate monic candidates with lower coefficients in base-p counting order.
  std::vector<std::uint64_t> lower(static_cast<std::size_t>(degree), 0);
  lower[0] = 1;
  for (;;) {
    FpPoly f{p, lower};
    f.c.push_back(1);
    if (is_irreducible(f)) {
      modulus_ = f;
      return;
    }
    std::size_t k = 0;
    while (k < lower.size() && ++lower[k] == p) lower[k++] = 0;
    if (k == lower.size()) throw Error("ExtensionField: no irreducible polynomial found");
  }
}

ExtensionField::Element ExtensionField::one() const {
  Element out = zero();
  out[0] = 1 % p_;
  return out;
}

ExtensionField::Element ExtensionField::from_int(std::int64_t v) const {
  Element out = zero();
  out[0] = reduce(v, p_);
  return out;
}

bool ExtensionField::is_zero(const Element& a) const {
  return std::all_of(a.begin(), a.end(), [](std::uint64_t x) { return x == 0; });
}

ExtensionField::Element ExtensionField::add(const Element& a, const Element& b) const {
  Element out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = addmod(a[i], b[i], p_);
  return out;
}

ExtensionField::Element ExtensionField::sub(const Element& a, const Element& b) const {
  Element out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = submod(a[i], b[i], p_);
  return out;
}

ExtensionField::Element ExtensionField::mul(const Element& a, const Element& b) const {
  if (e_ == 1) return {mulmod(a[0], b[0], p_)};
  FpPoly pa{p_, a}, pb{p_, b};
  pa.trim();
  pb.trim();
  FpPoly r = fp_divmod(fp_mul(pa, pb), modulus_).second;
  Element out = r.c;
  out.resize(static_cast<std::size_t>(e_), 0);
  return out;
}

ExtensionField::Element ExtensionField::inv(const Element& a) const {
  if (is_zero(a)) throw Error("ExtensionField: inverse of zero");
  if (e_ == 1) return {invmod(a[0], p_)};
  FpPoly pa{p_, a};
  pa.trim();
  auto [g, s] = fp_half_ext_gcd(pa, modulus_);
  // g is a nonzero constant since the modulus is irreducible.
  const std::uint64_t ginv = invmod(g.c[0], p_);
  Element out = fp_divmod(s, modulus_).second.c;
  for (auto& x : out) x = mulmod(x, ginv, p_);
  out.resize(static_cast<std::size_t>(e_), 0);
  return out;
}

ExtensionField::Element ExtensionField::pow(const Element& a, std::int64_t k) const {
  Element base = k < 0 ? inv(a) : a;
  auto exp = static_cast<std::uint64_t>(k < 0 ? -k : k);
  Element result = one();
  while (exp != 0) {
    if (exp & 1U) result = mul(result, base);
    base = mul(base, base);
    exp >>= 1U;
  }
  return result;
}

ExtensionField::Element ExtensionField::random_nonzero(std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::uint64_t> dist(0, p_ - 1);
  for (;;) {
    Element out = zero();
    for (auto& x : out) x = dist(rng);
    if (!is_zero(out)) return out;
  }
}

int admissible_ext_degree(const LaurentMatrix& m, std::uint64_t p) {
  const long double need =
      4.0L * static_cast<long double>(std::max(1, m.row_degree_bound())) * static_cast<long double>(std::max(m.rows, m.cols));
  int e = 1;
  long double size = static_cast<long double>(p);
  while (size <= need) {
    size *= static_cast<long double>(p);
    ++e;
  }
  return e;
}

namespace {

std::size_t rank_over(const ExtensionField& field, std::vector<std::vector<ExtensionField::Element>> a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && field.is_zero(a[pivot][c])) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[rank]);
    const auto inv = field.inv(a[rank][c]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (field.is_zero(a[r][c])) continue;
      const auto f = field.mul(a[r][c], inv);
      for (std::size_t j = c; j < cols; ++j) a[r][j] = field.sub(a[r][j], field.mul(f, a[rank][j]));
    }
    ++rank;
  }
  return rank;
}

}  // namespace

std::size_t rank_laurent(const LaurentMatrix& m, std::uint64_t p, const LaurentRankOptions& opts) {
  if (opts.trials < 1) throw InputError("rank_laurent: trials must be >= 1");
  const int required = admissible_ext_degree(m, p);
  if (opts.ext_degree != 0 && opts.ext_degree < required)
    throw FieldTooSmall("rank_laurent: GF(" + std::to_string(p) + "^" + std::to_string(opts.ext_degree) +
                        ") is too small for the degree bound; need extension degree >= " + std::to_string(required));
  const ExtensionField field(p, opts.ext_degree == 0 ? required : opts.ext_degree);
  if (m.rows == 0 || m.cols == 0) return 0;

  std::size_t best = 0;
  for (int trial = 0; trial < opts.trials; ++trial) {
    // Each trial owns its RNG stream, so a prefix of trials is reproduced exactly.
    std::mt19937_64 rng(opts.seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(trial + 1)));
    std::vector<ExtensionField::Element> point;
    for (int j = 0; j < m.num_vars; ++j) point.push_back(field.random_nonzero(rng));

    std::vector<std::vector<ExtensionField::Element>> a(m.rows, std::vector<ExtensionField::Element>(m.cols));
    for (std::size_t i = 0; i < m.rows; ++i)
      for (std::size_t j = 0; j < m.cols; ++j) {
        auto value = field.zero();
        for (const auto& [e, c] : m(i, j).terms()) {
          auto term = field.from_int(c);
          for (std::size_t v = 0; v < e.size(); ++v)
            if (e[v] != 0) term = field.mul(term, field.pow(point[v], e[v]));
          value = field.add(value, term);
        }
        a[i][j] = std::move(value);
      }
    best = std::max(best, rank_over(field, std::move(a)));
  }
  return best;
}

std::size_t rank_laurent_univariate(const LaurentMatrix& m, std::uint64_t p) {
  if (m.num_vars != 1) throw InputError("rank_laurent_univariate: expected one variable");
  const std::size_t rows = m.rows, cols = m.cols;
  std::vector<std::vector<FpPoly>> a(rows, std::vector<FpPoly>(cols, FpPoly{p, {}}));
  for (std::size_t i = 0; i < rows; ++i) {
    int low = std::numeric_limits<int>::max();
    for (std::size_t j = 0; j < cols; ++j)
      for (const auto& [e, c] : m(i, j).terms())
        if (reduce(c, p) != 0) low = std::min(low, e[0]);
    for (std::size_t j = 0; j < cols; ++j) {
      for (const auto& [e, c] : m(i, j).terms()) {
        const std::uint64_t v = reduce(c, p);
        if (v == 0) continue;
        const auto k = static_cast<std::size_t>(e[0] - low);
        if (a[i][j].c.size() <= k) a[i][j].c.resize(k + 1, 0);
        a[i][j].c[k] = v;
      }
      a[i][j].trim();
    }
  }
  FpPoly prev{p, {1}};
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][c].is_zero()) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[pivot], a[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        FpPoly num = fp_sub(fp_mul(a[r][j], a[rank][c]), fp_mul(a[r][c], a[rank][j]));
        auto [q, rem] = fp_divmod(num, prev);
        if (!rem.is_zero()) throw Error("rank_laurent_univariate: inexact Bareiss division");
        a[r][j] = std::move(q);
      }
      a[r][c] = FpPoly{p, {}};
    }
    prev = a[rank][c];
    ++rank;
  }
  return rank;
}

}  // namespace l2t
