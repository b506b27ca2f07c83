#include "l2tower/tower.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>
#include <unistd.h>

#include "l2tower/errors.hpp"

namespace l2t {

// ---------------------------------------------------------------------------
// Rational

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw BudgetExceeded("rational overflow");
  return static_cast<std::int64_t>(v);
}

Rational make_rational(i128 num, i128 den) {
  if (den < 0) num = -num, den = -den;
  i128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) num /= a, den /= a;
  return Rational(narrow(num), narrow(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InputError("zero denominator");
  if (den < 0) num = -num, den = -den;
  const std::int64_t g = std::gcd(num, den);
  num_ = g > 1 ? num / g : num;
  den_ = g > 1 ? den / g : den;
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

std::string Rational::to_string() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return make_rational(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                       static_cast<i128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return make_rational(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
                       static_cast<i128>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, std::int64_t k) { return make_rational(static_cast<i128>(a.num_) * k, a.den_); }

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<i128>(a.num_) * b.den_ < static_cast<i128>(b.num_) * a.den_;
}

// ---------------------------------------------------------------------------
// Tables

std::vector<std::tuple<int, std::uint64_t, std::size_t>> BettiTable::column(std::size_t k, bool fp) const {
  std::vector<std::tuple<int, std::uint64_t, std::size_t>> out;
  for (const auto& r : rows) {
    if (r.k != k) continue;
    const auto& b = fp ? r.b_fp : r.b_q;
    if (b) out.emplace_back(r.level, r.index, *b);
  }
  return out;
}

namespace {

class Fnv {
public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  std::uint64_t value() const { return h_; }

private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

std::string input_key(const GroupPresentation& pres, const PadicRep& rep, const EquivariantComplex& complex,
                      const TowerOptions& opts) {
  Fnv h;
  h.u64(pres.fingerprint());
  h.u64(rep.p);
  h.u64(static_cast<std::uint64_t>(rep.n));
  for (const auto& m : rep.images)
    for (Eigen::Index i = 0; i < m.size(); ++i) h.i64(m.data()[i]);
  h.u64(complex.dims.size());
  for (auto d : complex.dims) h.u64(d);
  for (const auto& b : complex.boundaries) {
    for (const auto& e : b.entries) {
      h.u64(e.terms().size());
      for (const auto& [w, c] : e.terms()) {
        h.i64(c);
        h.u64(w.size());
        for (int l : w) h.i64(l);
      }
    }
  }
  h.u64(opts.field_q ? 1 : 0);
  h.u64(opts.field_fp ? 1 : 0);
  h.u64(opts.betti.rank_q.seed);
  h.u64(static_cast<std::uint64_t>(opts.betti.rank_q.primes));
  return hex(h.value());
}

struct LevelOutcome {
  int level = 0;
  std::uint64_t index = 1;
  std::vector<BettiRow> rows;
  bool certified = true;
  bool cache_hit = false;
  std::optional<std::string> budget_failure;
};

std::filesystem::path cache_path(const std::string& dir, const std::string& key, int level) {
  return std::filesystem::path(dir) / (key + "-L" + std::to_string(level) + ".json");
}

nlohmann::json opt_json(const std::optional<std::size_t>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<std::size_t> json_opt(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

std::optional<LevelOutcome> cache_load(const std::string& dir, const std::string& key, int level) {
  if (dir.empty()) return std::nullopt;
  std::ifstream in(cache_path(dir, key, level));
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("key").get<std::string>() != key || j.at("level").get<int>() != level) return std::nullopt;
    LevelOutcome out;
    out.level = level;
    out.index = j.at("index").get<std::uint64_t>();
    out.certified = j.at("certified").get<bool>();
    for (const auto& r : j.at("rows")) {
      BettiRow row;
      row.k = r.at("k").get<std::size_t>();
      row.level = level;
      row.index = out.index;
      row.b_q = json_opt(r.at("b_q"));
      row.b_fp = json_opt(r.at("b_fp"));
      row.coker_q = json_opt(r.at("coker_q"));
      row.coker_fp = json_opt(r.at("coker_fp"));
      out.rows.push_back(row);
    }
    out.cache_hit = true;
    return out;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // unreadable entries are recomputed
  }
}

void cache_store(const std::string& dir, const std::string& key, const LevelOutcome& o) {
  if (dir.empty()) return;
  nlohmann::json j;
  j["key"] = key;
  j["level"] = o.level;
  j["index"] = o.index;
  j["certified"] = o.certified;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : o.rows)
    j["rows"].push_back({{"k", r.k},
                         {"b_q", opt_json(r.b_q)},
                         {"b_fp", opt_json(r.b_fp)},
                         {"coker_q", opt_json(r.coker_q)},
                         {"coker_fp", opt_json(r.coker_fp)}});
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto target = cache_path(dir, key, o.level);
  auto tmp = target;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(o.level);
  {
    std::ofstream out(tmp);
    if (!out) return;  // the cache is best effort
    out << j.dump() << '\n';
    if (!out) return;
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

void check_level(const InducedComplex& ind, const FiniteQuotient& q, const EquivariantComplex& complex,
                 const BettiResult& b) {
  require_cokernel_identity(ind, b);
  const std::size_t components = coset_components(q);
  if (b.betti[0] != components)
    throw IdentityViolated("b_0 = " + std::to_string(b.betti[0]) + " but the cover has " +
                           std::to_string(components) + " components");
  std::int64_t chi = 0;
  for (std::size_t k = 0; k < b.betti.size(); ++k)
    chi += (k % 2 == 0 ? 1 : -1) * static_cast<std::int64_t>(b.betti[k]);
  if (chi != static_cast<std::int64_t>(ind.index) * euler_characteristic(complex))
    throw IdentityViolated("Euler characteristic of the cover is not multiplicative");
}

LevelOutcome compute_level(const GroupPresentation& pres, const PadicRep& rep, const EquivariantComplex& complex,
                           int level, const TowerOptions& opts) {
  LevelOutcome out;
  out.level = level;
  try {
    const FiniteQuotient q = enumerate_quotient(pres, rep, level, opts.quotient);
    const InducedComplex ind = induce(complex, q);
    if (!ind.boundary_squared_zero()) throw IdentityViolated("induced boundaries do not compose to zero");
    out.index = ind.index;

    BettiOptions bo = opts.betti;
    bo.rank_q.job_id = static_cast<std::uint64_t>(level);
    std::optional<BettiResult> bq, bfp;
    if (opts.field_q) {
      bq = betti(ind, Field::rational(), bo);
      check_level(ind, q, complex, *bq);
      out.certified = out.certified && bq->certified;
    }
    if (opts.field_fp) {
      bfp = betti(ind, Field::prime(rep.p), bo);
      check_level(ind, q, complex, *bfp);
    }
    for (std::size_t k = 0; k <= ind.top_degree(); ++k) {
      BettiRow row;
      row.k = k;
      row.level = level;
      row.index = ind.index;
      if (bq) row.b_q = bq->betti[k], row.coker_q = bq->cokernel[k];
      if (bfp) row.b_fp = bfp->betti[k], row.coker_fp = bfp->cokernel[k];
      if (bq && bfp && *row.b_fp < *row.b_q)
        throw IdentityViolated("b_" + std::to_string(k) + " over F_p is below b over Q at level " +
                               std::to_string(level));
      out.rows.push_back(row);
    }
  } catch (const BudgetExceeded& e) {
    out.budget_failure = e.what();
    out.rows.clear();
  }
  return out;
}

}  // namespace

BettiTable run_tower(const GroupPresentation& pres, const PadicRep& rep, const EquivariantComplex& complex, int levels,
                     const TowerOptions& opts) {
  if (levels < 1) throw InputError("levels must be at least 1");
  if (!opts.field_q && !opts.field_fp) throw InputError("no field selected");
  pres.validate();
  rep.validate(pres);
  complex.validate_shape();
  if (levels > rep.max_level)
    throw InputError("representation is only valid up to level " + std::to_string(rep.max_level));

  BettiTable table;
  table.p = rep.p;
  table.top_degree = complex.top_degree();
  table.cache_key = input_key(pres, rep, complex, opts);

  const unsigned jobs = std::max(1U, opts.jobs);
  int next = 1;
  while (next <= levels && !table.failed_level) {
    const int batch_end = std::min(levels, next + static_cast<int>(jobs) - 1);
    std::vector<LevelOutcome> outcomes;
    if (jobs == 1) {
      auto hit = cache_load(opts.cache_dir, table.cache_key, next);
      outcomes.push_back(hit ? *hit : compute_level(pres, rep, complex, next, opts));
    } else {
      std::vector<std::future<LevelOutcome>> futures;
      for (int level = next; level <= batch_end; ++level) {
        futures.push_back(std::async(std::launch::async, [&, level] {
          auto hit = cache_load(opts.cache_dir, table.cache_key, level);
          return hit ? *hit : compute_level(pres, rep, complex, level, opts);
        }));
      }
      for (auto& f : futures) outcomes.push_back(f.get());
    }
    for (auto& o : outcomes) {
      if (table.failed_level) break;
      if (o.budget_failure) {
        table.failed_level = o.level;
        table.failure = *o.budget_failure;
        break;
      }
      if (o.cache_hit) {
        ++table.cache_hits;
      } else {
        cache_store(opts.cache_dir, table.cache_key, o);
      }
      table.indices.emplace_back(o.level, o.index);
      table.certified = table.certified && o.certified;
      for (auto& r : o.rows) table.rows.push_back(std::move(r));
    }
    next = jobs == 1 ? next + 1 : batch_end + 1;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Estimates

LimitEstimate estimate_limit(const std::vector<std::pair<std::uint64_t, std::size_t>>& column, LimitMode mode) {
  if (column.size() < 2) throw InsufficientLevels("limit estimate needs at least 2 levels");
  LimitEstimate out;
  for (const auto& [index, b] : column)
    out.normalized.emplace_back(static_cast<std::int64_t>(b), static_cast<std::int64_t>(index));
  for (std::size_t i = 1; i < out.normalized.size(); ++i)
    out.differences.push_back(out.normalized[i] - out.normalized[i - 1]);

  const Rational last = out.normalized.back();
  const Rational diff = out.differences.back();
  out.stabilized = diff == Rational(0);
  out.estimate = out.stabilized ? last : Rational(last.floor());
  if (mode == LimitMode::Fp) {
    out.lower = Rational(0);
    out.upper = last;
  } else {
    const Rational spread = diff < Rational(0) ? Rational(0) - diff : diff;
    const Rational lo = last - spread;
    out.lower = lo < Rational(0) ? Rational(0) : lo;
    out.upper = last + spread;
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "CONSISTENT";
    case Verdict::TriviallyConsistent: return "TRIVIALLY-CONSISTENT";
    case Verdict::Inconsistent: return "INCONSISTENT";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

ExponentFit fit_error_exponent(const std::vector<std::pair<std::uint64_t, std::size_t>>& column, const Rational& beta,
                               double d_hat) {
  if (column.size() < 3) throw InsufficientLevels("exponent fit needs at least 3 levels");
  if (!(d_hat >= 1.0)) throw InputError("dimension estimate must be at least 1");
  ExponentFit out;
  out.bound = 1.0 - 1.0 / d_hat + kExponentSlack;
  std::vector<double> xs, ys;
  for (const auto& [index, b] : column) {
    Rational e = Rational(static_cast<std::int64_t>(b)) - beta * static_cast<std::int64_t>(index);
    if (e < Rational(0)) e = Rational(0) - e;
    out.residuals.push_back(e.to_double());
    if (e.num() != 0) {
      xs.push_back(std::log(static_cast<double>(index)));
      ys.push_back(std::log(e.to_double()));
    }
  }
  if (xs.empty()) {
    out.verdict = Verdict::TriviallyConsistent;
    return out;
  }
  if (xs.size() < 3) {
    out.verdict = Verdict::Inconclusive;
    return out;
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  if (std::abs(*out.slope) < 1e-12) out.slope = 0.0;
  out.verdict = *out.slope <= out.bound ? Verdict::Consistent : Verdict::Inconsistent;
  return out;
}

MonotonicityResult check_monotonicity(const std::vector<std::tuple<int, std::uint64_t, std::size_t>>& column,
                                      int base_level, std::uint64_t p) {
  MonotonicityResult out;
  out.base_level = base_level;
  std::optional<std::uint64_t> base_index;
  for (const auto& [level, index, b] : column)
    if (level == base_level) base_index = index;
  if (!base_index) {
    out.applicable = false;
    return out;
  }
  for (const auto& [level, index, b] : column) {
    if (level < base_level) continue;
    if (index % *base_index != 0 || exact_log(index / *base_index, p) < 0) {
      out.applicable = false;
      out.normalized.clear();
      return out;
    }
    out.normalized.emplace_back(static_cast<std::int64_t>(b), static_cast<std::int64_t>(index / *base_index));
  }
  for (std::size_t i = 1; i < out.normalized.size(); ++i)
    if (out.normalized[i - 1] < out.normalized[i]) out.pass = false;
  return out;
}

void require_monotone(const MonotonicityResult& r) {
  if (r.applicable && !r.pass) throw MonotonicityViolated("normalized F_p Betti numbers increase along a p-power chain");
}

TowerReport make_report(const BettiTable& table, std::optional<int> user_d, int monotonicity_base) {
  TowerReport out;
  out.p = table.p;
  out.user_d = user_d;
  out.monotonicity_base = monotonicity_base;
  if (table.indices.size() >= 2) {
    try {
      out.d_hat = estimate_dim(table.indices, table.p);
    } catch (const InsufficientLevels&) {
    }
  }
  double d = 0.0;
  if (user_d) {
    d = *user_d;
  } else if (out.d_hat) {
    d = out.d_hat->exact_powers ? std::round(out.d_hat->estimate) : out.d_hat->estimate;
  }

  auto pairs = [](const std::vector<std::tuple<int, std::uint64_t, std::size_t>>& col) {
    std::vector<std::pair<std::uint64_t, std::size_t>> v;
    for (const auto& [level, index, b] : col) v.emplace_back(index, b);
    return v;
  };

  for (std::size_t k = 0; k <= table.top_degree; ++k) {
    DegreeReport dr;
    dr.k = k;
    const auto cq = table.column(k, false);
    const auto cfp = table.column(k, true);
    if (cq.size() >= 2) {
      dr.q = estimate_limit(pairs(cq), LimitMode::Q);
      if (cq.size() >= 3 && d >= 1.0) dr.fit_q = fit_error_exponent(pairs(cq), dr.q->estimate, d);
    }
    if (cfp.size() >= 2) {
      dr.fp = estimate_limit(pairs(cfp), LimitMode::Fp);
      if (cfp.size() >= 3 && d >= 1.0) dr.fit_fp = fit_error_exponent(pairs(cfp), dr.fp->estimate, d);
    }
    if (!cfp.empty()) {
      dr.monotonicity = check_monotonicity(cfp, monotonicity_base, table.p);
      if (dr.monotonicity->applicable && !dr.monotonicity->pass) out.pass = false;
    }
    for (const auto& fit : {dr.fit_q, dr.fit_fp})
      if (fit && fit->verdict == Verdict::Inconsistent) out.pass = false;
    out.degrees.push_back(std::move(dr));
  }
  return out;
}

}  // namespace l2t
