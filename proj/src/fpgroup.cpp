#include "l2tower/fpgroup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "l2tower/errors.hpp"

namespace l2t {

Word free_reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (int letter : w) {
    if (!out.empty() && out.back() == -letter)
      out.pop_back();
    else
      out.push_back(letter);
  }
  return out;
}

Word inverse(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (auto& letter : out) letter = -letter;
  return out;
}

Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

bool is_freely_reduced(const Word& w) {
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (w[i] == -w[i + 1]) return false;
  return true;
}

void GroupPresentation::validate() const {
  const auto g = static_cast<int>(generators.size());
  for (std::size_t j = 0; j < relators.size(); ++j) {
    for (int letter : relators[j])
      if (letter == 0 || letter > g || letter < -g)
        throw InputError("relator " + std::to_string(j + 1) + ": generator index " + std::to_string(letter) +
                         " out of range 1.." + std::to_string(g));
    if (!is_freely_reduced(relators[j]))
      throw InputError("relator " + std::to_string(j + 1) + " is not freely reduced");
  }
}

std::uint64_t GroupPresentation::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(generators.size());
  for (const auto& r : relators) {
    mix(0xFFFFFFFFULL);
    for (int letter : r) mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(letter)));
  }
  return h;
}

std::uint64_t level_modulus(std::uint64_t p, int level, int n) {
  long double bound = 1.0L;
  std::uint64_t q = 1;
  for (int i = 0; i < level; ++i) {
    q *= p;
    bound *= static_cast<long double>(p);
    if (bound * bound * static_cast<long double>(std::max(n, 1)) >= 4.0e18L)
      throw BudgetExceeded("modulus " + std::to_string(p) + "^" + std::to_string(level) +
                           " is too large for word-size matrix arithmetic");
  }
  return q;
}

IntMatrix mat_mulmod(const IntMatrix& a, const IntMatrix& b, std::uint64_t m) {
  IntMatrix c = a * b;
  const auto mm = static_cast<std::int64_t>(m);
  return c.unaryExpr([mm](std::int64_t x) { return ((x % mm) + mm) % mm; });
}

IntMatrix inverse_mod_prime_power(const IntMatrix& a, std::uint64_t p, int level) {
  const Eigen::Index n = a.rows();
  // Gauss-Jordan mod p on [A | I].
  DenseMatrix<std::uint64_t> aug(n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      aug(i, j) = reduce(a(i, j), p);
      aug(i, n + j) = i == j ? 1 : 0;
    }
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index pivot = c;
    while (pivot < n && aug(pivot, c) == 0) ++pivot;
    if (pivot == n) throw InputError("matrix is not invertible mod " + std::to_string(p));
    aug.row(pivot).swap(aug.row(c));
    const std::uint64_t inv = invmod(aug(c, c), p);
    for (Eigen::Index j = 0; j < 2 * n; ++j) aug(c, j) = mulmod(aug(c, j), inv, p);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c || aug(r, c) == 0) continue;
      const std::uint64_t f = aug(r, c);
      for (Eigen::Index j = 0; j < 2 * n; ++j) aug(r, j) = submod(aug(r, j), mulmod(f, aug(c, j), p), p);
    }
  }
  IntMatrix x(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = static_cast<std::int64_t>(aug(i, n + j));

  const std::uint64_t target = level_modulus(p, std::max(level, 1), static_cast<int>(n));
  const IntMatrix two_i = 2 * IntMatrix::Identity(n, n);
  std::uint64_t precision = p;
  while (precision < target) {
    precision = (precision > target / precision) ? target : precision * precision;
    const IntMatrix ax = mat_mulmod(a.unaryExpr([&](std::int64_t v) { return static_cast<std::int64_t>(reduce(v, precision)); }),
                                    x, precision);
    x = mat_mulmod(x, (two_i - ax).unaryExpr([&](std::int64_t v) { return static_cast<std::int64_t>(reduce(v, precision)); }),
                   precision);
  }
  return x.unaryExpr([&](std::int64_t v) { return static_cast<std::int64_t>(reduce(v, target)); });
}

IntMatrix evaluate_word(const PadicRep& rep, const Word& w, std::uint64_t m) {
  const Eigen::Index n = rep.n;
  IntMatrix acc = IntMatrix::Identity(n, n);
  if (m == 1) return IntMatrix::Zero(n, n);
  int level = 0;
  for (std::uint64_t q = 1; q < m; q *= rep.p) ++level;
  std::vector<IntMatrix> fwd, inv;
  for (const auto& img : rep.images) {
    fwd.push_back(img.unaryExpr([m](std::int64_t v) { return static_cast<std::int64_t>(reduce(v, m)); }));
    inv.emplace_back();
  }
  for (int letter : w) {
    const auto g = static_cast<std::size_t>(std::abs(letter) - 1);
    if (letter > 0) {
      acc = mat_mulmod(acc, fwd[g], m);
    } else {
      if (inv[g].size() == 0) inv[g] = inverse_mod_prime_power(rep.images[g], rep.p, level);
      acc = mat_mulmod(acc, inv[g], m);
    }
  }
  return acc;
}

void PadicRep::validate(const GroupPresentation& pres) const {
  if (!is_prime(p)) throw InputError("rep: p = " + std::to_string(p) + " is not prime");
  if (n < 1) throw InputError("rep: n must be positive");
  if (max_level < 0) throw InputError("rep: max_level must be nonnegative");
  if (images.size() != pres.num_generators())
    throw InputError("rep: expected " + std::to_string(pres.num_generators()) + " generator images, got " +
                     std::to_string(images.size()));
  for (std::size_t g = 0; g < images.size(); ++g) {
    if (images[g].rows() != n || images[g].cols() != n)
      throw InputError("rep: image of generator " + std::to_string(g + 1) + " is not " + std::to_string(n) + "x" +
                       std::to_string(n));
    if (rank_fp(images[g], p) != static_cast<std::size_t>(n))
      throw InputError("rep: image of generator " + std::to_string(g + 1) + " is not invertible mod p");
  }
  if (max_level == 0) return;
  const std::uint64_t m = level_modulus(p, max_level, n);
  const IntMatrix id = IntMatrix::Identity(n, n);
  for (std::size_t j = 0; j < pres.relators.size(); ++j)
    if (evaluate_word(*this, pres.relators[j], m) != id)
      throw NotHomomorphism("relator " + std::to_string(j + 1) + " does not map to the identity mod " +
                            std::to_string(p) + "^" + std::to_string(max_level));
}

Permutation identity_permutation(std::size_t n) {
  Permutation out(n);
  std::iota(out.begin(), out.end(), 0U);
  return out;
}

Permutation compose(const Permutation& a, const Permutation& b) {
  Permutation out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = b[a[j]];
  return out;
}

Permutation invert(const Permutation& a) {
  Permutation out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[a[j]] = static_cast<std::uint32_t>(j);
  return out;
}

namespace {

struct EntryHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (auto x : v) h = (h ^ static_cast<std::uint64_t>(x)) * 0xBF58476D1CE4E5B9ULL;
    return static_cast<std::size_t>(h ^ (h >> 31U));
  }
};

std::vector<std::int64_t> key_of(const IntMatrix& m) { return {m.data(), m.data() + m.size()}; }

}  // namespace

FiniteQuotient enumerate_quotient(const GroupPresentation& pres, const PadicRep& rep, int level,
                                  const QuotientOptions& opts) {
  if (level < 0 || level > rep.max_level)
    throw InputError("level " + std::to_string(level) + " outside 0.." + std::to_string(rep.max_level));
  if (rep.images.size() != pres.num_generators())
    throw MismatchedPresentation("representation has " + std::to_string(rep.images.size()) +
                                 " images for " + std::to_string(pres.num_generators()) + " generators");
  FiniteQuotient q;
  q.level = level;
  q.num_generators = pres.num_generators();
  q.presentation_fingerprint = pres.fingerprint();
  q.modulus = level_modulus(rep.p, level, rep.n);
  const Eigen::Index n = rep.n;

  if (level == 0) {
    q.elements.push_back(IntMatrix::Zero(n, n));
    q.gen_perms.assign(q.num_generators, Permutation{0});
    q.inv_perms = q.gen_perms;
    return q;
  }

  const IntMatrix id = IntMatrix::Identity(n, n);
  for (std::size_t j = 0; j < pres.relators.size(); ++j)
    if (evaluate_word(rep, pres.relators[j], q.modulus) != id)
      throw NotHomomorphism("relator " + std::to_string(j + 1) + " is nontrivial mod " + std::to_string(rep.p) + "^" +
                            std::to_string(level));

  const std::size_t g = pres.num_generators();
  std::vector<IntMatrix> steps;  // generator images then inverses
  for (std::size_t k = 0; k < g; ++k) steps.push_back(evaluate_word(rep, {static_cast<int>(k + 1)}, q.modulus));
  for (std::size_t k = 0; k < g; ++k) steps.push_back(evaluate_word(rep, {-static_cast<int>(k + 1)}, q.modulus));

  std::unordered_map<std::vector<std::int64_t>, std::uint32_t, EntryHash> index_of;
  std::vector<std::vector<std::uint32_t>> step_targets(steps.size());
  q.elements.push_back(id);
  index_of.emplace(key_of(id), 0U);
  for (std::size_t head = 0; head < q.elements.size(); ++head) {
    for (std::size_t s = 0; s < steps.size(); ++s) {
      IntMatrix next = mat_mulmod(q.elements[head], steps[s], q.modulus);
      auto [it, inserted] = index_of.try_emplace(key_of(next), static_cast<std::uint32_t>(q.elements.size()));
      if (inserted) {
        if (q.elements.size() >= opts.element_cap)
          throw ElementCapExceeded("quotient at level " + std::to_string(level) + " exceeds the cap of " +
                                   std::to_string(opts.element_cap) + " elements");
        q.elements.push_back(std::move(next));
      }
      step_targets[s].push_back(it->second);
    }
  }
  for (std::size_t k = 0; k < g; ++k) {
    q.gen_perms.emplace_back(std::move(step_targets[k]));
    q.inv_perms.emplace_back(std::move(step_targets[g + k]));
  }
  return q;
}

Permutation word_to_perm(const FiniteQuotient& q, const Word& w) {
  Permutation out = identity_permutation(q.index());
  for (int letter : w) {
    const auto g = static_cast<std::size_t>(std::abs(letter));
    if (letter == 0 || g > q.num_generators) throw InputError("word letter " + std::to_string(letter) + " out of range");
    const Permutation& step = letter > 0 ? q.gen_perms[g - 1] : q.inv_perms[g - 1];
    for (auto& x : out) x = step[x];
  }
  return out;
}

std::size_t element_of_word(const FiniteQuotient& q, const Word& w) {
  std::size_t at = q.identity_idx;
  for (int letter : w) {
    const auto g = static_cast<std::size_t>(std::abs(letter));
    if (letter == 0 || g > q.num_generators) throw InputError("word letter " + std::to_string(letter) + " out of range");
    at = (letter > 0 ? q.gen_perms[g - 1] : q.inv_perms[g - 1])[at];
  }
  return at;
}

std::size_t coset_components(const FiniteQuotient& q) {
  std::vector<std::size_t> parent(q.index());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = q.index();
  for (const auto& perm : q.gen_perms)
    for (std::size_t j = 0; j < perm.size(); ++j) {
      const std::size_t a = find(j), b = find(perm[j]);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  return components;
}

int exact_log(std::uint64_t n, std::uint64_t p) {
  if (n == 0 || p < 2) return -1;
  int k = 0;
  while (n % p == 0) {
    n /= p;
    ++k;
  }
  return n == 1 ? k : -1;
}

DimEstimate estimate_dim(std::vector<std::pair<int, std::uint64_t>> indices, std::uint64_t p) {
  std::sort(indices.begin(), indices.end());
  DimEstimate out;
  for (std::size_t k = 0; k + 1 < indices.size(); ++k) {
    const auto [la, ia] = indices[k];
    const auto [lb, ib] = indices[k + 1];
    if (lb != la + 1 || ib <= ia || ia == 0) continue;
    const int exact = ib % ia == 0 ? exact_log(ib / ia, p) : -1;
    if (exact < 0) out.exact_powers = false;
    out.per_step.push_back(exact >= 0 ? static_cast<double>(exact)
                                      : std::log(static_cast<double>(ib) / static_cast<double>(ia)) /
                                            std::log(static_cast<double>(p)));
  }
  if (out.per_step.empty()) throw InsufficientLevels("estimate_dim: need two consecutive levels with growing index");
  out.estimate = out.per_step.back();
  out.stabilized = out.per_step.size() >= 2 &&
                   std::abs(out.per_step.back() - out.per_step[out.per_step.size() - 2]) < 1e-9;
  return out;
}

}  // namespace l2t
