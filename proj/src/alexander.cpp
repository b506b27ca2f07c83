#include "l2tower/alexander.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "l2tower/errors.hpp"

namespace l2t {

Exponent AbelianizationMap::image_of(const Word& w) const {
  Exponent e(static_cast<std::size_t>(d), 0);
  for (int l : w) {
    const auto& v = images.at(static_cast<std::size_t>(std::abs(l) - 1));
    for (int j = 0; j < d; ++j) e[static_cast<std::size_t>(j)] += l > 0 ? v[static_cast<std::size_t>(j)] : -v[static_cast<std::size_t>(j)];
  }
  return e;
}

void AbelianizationMap::validate(const GroupPresentation& pres) const {
  if (d < 1) throw InputError("abelianization rank must be at least 1");
  if (images.size() != pres.num_generators())
    throw InputError("need one meridian image per generator (" + std::to_string(pres.num_generators()) + ")");
  for (const auto& v : images)
    if (v.size() != static_cast<std::size_t>(d)) throw InputError("meridian images must all have length d");
  for (std::size_t j = 0; j < pres.relators.size(); ++j) {
    const Exponent e = image_of(pres.relators[j]);
    if (std::any_of(e.begin(), e.end(), [](int x) { return x != 0; }))
      throw RelatorNotKilled("relator " + std::to_string(j + 1) + " has nonzero image in Z^d");
  }
}

bool fox_fundamental_identity(const Word& r, std::size_t num_generators) {
  GroupRingElement sum;
  for (std::size_t k = 1; k <= num_generators; ++k) {
    const int x = static_cast<int>(k);
    sum += fox_derivative(r, x) * (GroupRingElement::term(1, {x}) - GroupRingElement::constant(1));
  }
  return sum == GroupRingElement::term(1, r) - GroupRingElement::constant(1);
}

LaurentPoly abelianize(const GroupRingElement& e, const AbelianizationMap& ab) {
  LaurentPoly out(ab.d);
  for (const auto& [w, c] : e.terms()) out.add_term(ab.image_of(w), c);
  return out;
}

LaurentMatrix alexander_matrix(const GroupPresentation& pres, const AbelianizationMap& ab) {
  pres.validate();
  ab.validate(pres);
  const std::size_t g = pres.num_generators();
  LaurentMatrix a(ab.d, pres.relators.size(), g);
  for (std::size_t j = 0; j < pres.relators.size(); ++j)
    for (std::size_t k = 0; k < g; ++k) a(j, k) = abelianize(fox_derivative(pres.relators[j], static_cast<int>(k + 1)), ab);
  return a;
}

bool alexander_row_identity(const LaurentMatrix& a, const AbelianizationMap& ab) {
  for (std::size_t j = 0; j < a.rows; ++j) {
    LaurentPoly sum(a.num_vars);
    for (std::size_t k = 0; k < a.cols; ++k) {
      LaurentPoly e = LaurentPoly::monomial(ab.images.at(k)) - LaurentPoly::constant(a.num_vars, 1);
      sum += a(j, k) * e;
    }
    if (!sum.is_zero()) return false;
  }
  return true;
}

std::int64_t modp_l2_betti_1(const GroupPresentation& pres, const AbelianizationMap& ab, std::uint64_t p,
                             const LaurentRankOptions& opts) {
  if (!is_prime(p)) throw InputError("p must be prime");
  const LaurentMatrix a = alexander_matrix(pres, ab).mod(p);
  const std::size_t g = pres.num_generators();
  // d_1 = (t^{v_k} - 1)_k is nonzero over F_p(t) as soon as some meridian image is nonzero.
  const bool d1_nonzero =
      std::any_of(ab.images.begin(), ab.images.end(), [](const auto& v) {
        return std::any_of(v.begin(), v.end(), [](int x) { return x != 0; });
      });
  const std::size_t rank1 = d1_nonzero ? 1 : 0;
  const std::size_t rank2 = a.rows == 0 ? 0 : (a.num_vars == 1 ? rank_laurent_univariate(a, p) : rank_laurent(a, p, opts));
  return static_cast<std::int64_t>(g - rank1) - static_cast<std::int64_t>(rank2);
}

namespace {

std::string poly_string(const std::vector<mpz_class>& c) {
  if (c.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = c.size(); i-- > 0;) {
    if (c[i] == 0) continue;
    mpz_class mag = abs(c[i]);
    if (first)
      os << (c[i] < 0 ? "-" : "");
    else
      os << (c[i] < 0 ? " - " : " + ");
    first = false;
    if (mag != 1 || i == 0) os << mag.get_str();
    if (i >= 1) os << "t";
    if (i >= 2) os << "^" << i;
  }
  return os.str();
}

using QMatrix = std::vector<std::vector<QPoly>>;

QPoly exact_div(const QPoly& a, const QPoly& b) {
  auto [q, r] = q_divmod(a, b);
  if (!r.is_zero()) throw Error("inexact division in fraction-free determinant");
  return q;
}

QPoly determinant(QMatrix m) {
  const std::size_t n = m.size();
  if (n == 0) return QPoly{{1}};
  QPoly prev{{1}};
  bool negate = false;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    while (pivot < n && m[pivot][k].is_zero()) ++pivot;
    if (pivot == n) return {};
    if (pivot != k) {
      std::swap(m[pivot], m[k]);
      negate = !negate;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j)
        m[i][j] = exact_div(q_sub(q_mul(m[k][k], m[i][j]), q_mul(m[i][k], m[k][j])), prev);
      m[i][k] = {};
    }
    prev = m[k][k];
  }
  QPoly det = m[n - 1][n - 1];
  if (negate)
    for (auto& x : det.c) x = -x;
  return det;
}

/// Diagonal specialization with every row multiplied by a power of t so that exponents start at 0.
QMatrix specialized_rows(const LaurentMatrix& a) {
  QMatrix out(a.rows, std::vector<QPoly>(a.cols));
  const std::vector<int> ones(static_cast<std::size_t>(a.num_vars), 1);
  for (std::size_t i = 0; i < a.rows; ++i) {
    std::vector<LaurentPoly> row;
    int low = INT32_MAX;
    for (std::size_t j = 0; j < a.cols; ++j) {
      row.push_back(a(i, j).specialize(ones));
      if (!row.back().is_zero()) low = std::min(low, row.back().terms().begin()->first[0]);
    }
    for (std::size_t j = 0; j < a.cols; ++j) {
      QPoly q;
      for (const auto& [e, c] : row[j].terms()) {
        const auto pos = static_cast<std::size_t>(e[0] - low);
        if (q.c.size() <= pos) q.c.resize(pos + 1, 0);
        q.c[pos] = static_cast<long>(c);
      }
      q.trim();
      out[i][j] = std::move(q);
    }
  }
  return out;
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

constexpr std::size_t kMaxMinors = 20000;

}  // namespace

std::string DiagonalSpecialization::delta_string() const { return poly_string(delta); }
std::string DiagonalSpecialization::minor_gcd_string() const { return poly_string(minor_gcd); }

DiagonalSpecialization diagonal_specialization(const LaurentMatrix& a) {
  if (a.num_vars < 1 || a.num_vars > 2) throw InputError("diagonal specialization supports d = 1 or 2 only");
  if (a.cols == 0) throw DegenerateMatrix("Alexander matrix has no columns");
  const std::size_t size = a.cols - 1;
  if (a.rows < size) throw DegenerateMatrix("fewer relators than the minor size; no minors");
  const QMatrix m = specialized_rows(a);

  QPoly g;
  std::vector<std::size_t> rows(size), cols(size);
  std::iota(rows.begin(), rows.end(), 0);
  std::size_t visited = 0;
  do {
    for (std::size_t drop = 0; drop < a.cols; ++drop) {
      if (++visited > kMaxMinors) throw BudgetExceeded("too many minors in the diagonal specialization");
      QMatrix sub(size, std::vector<QPoly>(size));
      for (std::size_t i = 0; i < size; ++i) {
        std::size_t jj = 0;
        for (std::size_t j = 0; j < a.cols; ++j)
          if (j != drop) sub[i][jj++] = m[rows[i]][j];
      }
      const QPoly det = determinant(std::move(sub));
      if (!det.is_zero()) g = g.is_zero() ? det : q_gcd(g, det);
    }
  } while (size > 0 && next_combination(rows, a.rows));

  if (g.is_zero()) throw DegenerateMatrix("all minors of the specialized Alexander matrix vanish");
  DiagonalSpecialization out;
  out.d = a.num_vars;
  out.minor_gcd = normalize_primitive(g);
  if (out.d == 1) {
    out.delta = out.minor_gcd;
    return out;
  }
  QPoly f;
  for (const auto& c : out.minor_gcd) f.c.emplace_back(c);
  auto [q, r] = q_divmod(f, QPoly{{-1, 1}});
  if (r.is_zero()) out.delta = normalize_primitive(q);
  return out;
}

std::int64_t linking_number(const DiagonalSpecialization& s) {
  if (s.d != 2) throw InputError("linking number needs a 2-component link (d = 2)");
  if (s.delta.empty()) throw DegenerateMatrix("Delta(t,t) is not determined by the minors");
  mpz_class sum = 0;
  for (const auto& c : s.delta) sum += c;
  sum = abs(sum);
  if (!sum.fits_slong_p()) throw BudgetExceeded("linking number overflows");
  return sum.get_si();
}

std::int64_t linking_number(const LaurentMatrix& a) { return linking_number(diagonal_specialization(a)); }

BraidClosure braid_closure(const std::vector<int>& braid_word, int strands) {
  if (strands < 1) throw InputError("braid needs at least one strand");
  for (int s : braid_word)
    if (s == 0 || std::abs(s) >= strands) throw InputError("braid generator out of range: " + std::to_string(s));

  const auto n = static_cast<std::size_t>(strands);
  std::vector<std::size_t> label(n), origin(n);
  std::iota(label.begin(), label.end(), 0);
  std::iota(origin.begin(), origin.end(), 0);
  std::vector<std::size_t> arc_origin(origin);
  struct Crossing {
    std::size_t over, under, out;
    int sign;
    std::size_t over_origin, under_origin;
  };
  std::vector<Crossing> crossings;

  for (int s : braid_word) {
    const auto i = static_cast<std::size_t>(std::abs(s) - 1);
    const std::size_t y = arc_origin.size();
    if (s > 0) {
      const std::size_t over = label[i], under = label[i + 1];
      crossings.push_back({over, under, y, +1, origin[i], origin[i + 1]});
      arc_origin.push_back(origin[i + 1]);
      label[i] = y;
      label[i + 1] = over;
    } else {
      const std::size_t over = label[i + 1], under = label[i];
      crossings.push_back({over, under, y, -1, origin[i + 1], origin[i]});
      arc_origin.push_back(origin[i]);
      label[i] = over;
      label[i + 1] = y;
    }
    std::swap(origin[i], origin[i + 1]);
  }

  // Close up: bottom arc at position j is the top arc j; strands at position j join too.
  std::vector<std::size_t> arc_parent(arc_origin.size()), strand_parent(n);
  std::iota(arc_parent.begin(), arc_parent.end(), 0);
  std::iota(strand_parent.begin(), strand_parent.end(), 0);
  auto find = [](std::vector<std::size_t>& par, std::size_t x) {
    while (par[x] != x) x = par[x] = par[par[x]];
    return x;
  };
  for (std::size_t j = 0; j < n; ++j) {
    arc_parent[find(arc_parent, label[j])] = find(arc_parent, j);
    const std::size_t a = find(strand_parent, origin[j]), b = find(strand_parent, j);
    if (a != b) strand_parent[std::max(a, b)] = std::min(a, b);
  }

  BraidClosure out;
  std::vector<int> component_of_root(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t r = find(strand_parent, j);
    if (component_of_root[r] < 0) component_of_root[r] = out.components++;
  }
  auto component = [&](std::size_t top) { return component_of_root[find(strand_parent, top)]; };

  std::vector<int> generator_of(arc_origin.size(), 0);
  int next_gen = 0;
  for (std::size_t a = 0; a < arc_origin.size(); ++a) {
    const std::size_t r = find(arc_parent, a);
    if (generator_of[r] == 0) {
      generator_of[r] = ++next_gen;
      out.pres.generators.push_back("x" + std::to_string(next_gen));
      std::vector<int> e(static_cast<std::size_t>(out.components), 0);
      e[static_cast<std::size_t>(component(arc_origin[a]))] = 1;
      out.ab.images.push_back(e);
    }
    generator_of[a] = generator_of[r];
  }
  out.ab.d = out.components;

  std::int64_t inter_sign = 0;
  for (std::size_t c = 0; c < crossings.size(); ++c) {
    const auto& x = crossings[c];
    const int o = generator_of[x.over], u = generator_of[x.under], y = generator_of[x.out];
    if (component(x.over_origin) != component(x.under_origin)) inter_sign += x.sign;
    if (c + 1 == crossings.size()) continue;  // the last relation follows from the others
    const Word rel = x.sign > 0 ? Word{-y, o, u, -o} : Word{-y, -o, u, o};
    Word reduced = free_reduce(rel);
    if (!reduced.empty()) out.pres.relators.push_back(std::move(reduced));
  }
  out.crossings = static_cast<int>(crossings.size());
  if (out.components == 2) out.crossing_linking_number = inter_sign / 2;
  return out;
}

PadicRep abelian_rep(const AbelianizationMap& ab, std::uint64_t p, int max_level) {
  PadicRep rep;
  rep.p = p;
  rep.n = 2 * ab.d;
  rep.max_level = max_level;
  for (const auto& v : ab.images) {
    IntMatrix m = IntMatrix::Identity(rep.n, rep.n);
    for (int j = 0; j < ab.d; ++j) m(2 * j, 2 * j + 1) = v[static_cast<std::size_t>(j)];
    rep.images.push_back(m);
  }
  return rep;
}

PredictionReport predict_vs_tower(const GroupPresentation& pres, const AbelianizationMap& ab, std::uint64_t p,
                                  int levels, const std::optional<PadicRep>& rep, const TowerOptions& tower_opts,
                                  const LaurentRankOptions& rank_opts) {
  pres.validate();
  ab.validate(pres);
  if (levels < 2) throw InsufficientLevels("prediction needs at least 2 levels");
  PadicRep expected = abelian_rep(ab, p, levels);
  if (rep) {
    const std::uint64_t m = level_modulus(p, rep->max_level, rep->n);
    bool ok = rep->p == p && rep->n == expected.n && rep->images.size() == expected.images.size();
    for (std::size_t k = 0; ok && k < expected.images.size(); ++k)
      for (Eigen::Index i = 0; ok && i < expected.images[k].size(); ++i)
        ok = reduce(rep->images[k].data()[i], m) == reduce(expected.images[k].data()[i], m);
    if (!ok) throw InputError("representation is not the abelian unipotent representation of the meridian images");
    expected.max_level = rep->max_level;
  }

  PredictionReport out;
  out.p = p;
  out.levels = levels;
  out.table = run_tower(pres, expected, presentation_complex(pres), levels, tower_opts);
  if (out.table.failed_level) throw BudgetExceeded(out.table.failure);

  std::vector<std::pair<std::uint64_t, std::size_t>> cq, cfp;
  for (const auto& [level, index, b] : out.table.column(1, false)) {
    cq.emplace_back(index, b);
    out.b1_q.push_back(b);
  }
  for (const auto& [level, index, b] : out.table.column(1, true)) {
    cfp.emplace_back(index, b);
    out.b1_fp.push_back(b);
    out.indices.push_back(index);
  }
  if (!cq.empty()) out.tower_q = estimate_limit(cq, LimitMode::Q);
  out.tower_fp = estimate_limit(cfp, LimitMode::Fp);

  out.predicted_fp = modp_l2_betti_1(pres, ab, p, rank_opts);
  if (ab.d <= 2) {
    try {
      const auto ds = diagonal_specialization(alexander_matrix(pres, ab));
      if (!ds.delta.empty()) {
        out.predicted_q = 0;
        if (ab.d == 2) out.linking_number = linking_number(ds);
      }
    } catch (const DegenerateMatrix&) {
    }
  }

  const auto mono = check_monotonicity(out.table.column(1, true), 1, p);
  out.monotone = !mono.applicable || mono.pass;
  bool shrinking = true;
  for (std::size_t i = 1; i < cfp.size(); ++i)
    if (cfp[i].second > cfp[i - 1].second || cfp[i].first <= cfp[i - 1].first) shrinking = false;
  out.fp_collapses = shrinking && out.predicted_fp == 0;

  auto inside = [](const LimitEstimate& e, std::int64_t v) { return e.lower <= Rational(v) && Rational(v) <= e.upper; };
  out.pass = out.monotone && inside(out.tower_fp, out.predicted_fp);
  if (out.predicted_q && !cq.empty()) out.pass = out.pass && inside(out.tower_q, *out.predicted_q);
  return out;
}

}  // namespace l2t
