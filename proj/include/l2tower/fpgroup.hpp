#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "l2tower/exactla.hpp"

namespace l2t {

/// Signed 1-based generator indices: +k is x_k, -k is x_k^{-1}.
using Word = std::vector<int>;

/// Cancels adjacent x x^{-1} pairs.
Word free_reduce(const Word& w);
Word inverse(const Word& w);
Word concat(const Word& a, const Word& b);
bool is_freely_reduced(const Word& w);

struct GroupPresentation {
  std::vector<std::string> generators;
  std::vector<Word> relators;

  std::size_t num_generators() const { return generators.size(); }

  /// Throws InputError on out-of-range letters or unreduced relators.
  void validate() const;

  /// Stable hash of the generator count and relator words.
  std::uint64_t fingerprint() const;
};

/// Integer matrices standing in for phi: Gamma -> GL_n(Z_p), truncated per level.
struct PadicRep {
  std::uint64_t p = 2;
  int n = 1;
  std::vector<IntMatrix> images;
  int max_level = 1;

  /// Checks p prime, shapes, det a unit mod p and every relator trivial mod p^max_level.
  void validate(const GroupPresentation& pres) const;
};

/// p^level, or BudgetExceeded when n*(p^level)^2 does not fit word arithmetic.
std::uint64_t level_modulus(std::uint64_t p, int level, int n);

/// (a*b) mod m with entries reduced to [0, m).
IntMatrix mat_mulmod(const IntMatrix& a, const IntMatrix& b, std::uint64_t m);

/// Inverse mod p^level: Gaussian elimination mod p, then Newton lifting X <- X(2I - AX).
IntMatrix inverse_mod_prime_power(const IntMatrix& a, std::uint64_t p, int level);

/// Matrix of a word under the representation, mod m.
IntMatrix evaluate_word(const PadicRep& rep, const Word& w, std::uint64_t m);

using Permutation = std::vector<std::uint32_t>;

Permutation identity_permutation(std::size_t n);
/// Apply a, then b.
Permutation compose(const Permutation& a, const Permutation& b);
Permutation invert(const Permutation& a);

struct QuotientOptions {
  std::size_t element_cap = 200000;
};

/// Image of Gamma in GL_n(Z/p^level) with the right-multiplication action on itself.
struct FiniteQuotient {
  int level = 0;
  std::uint64_t modulus = 1;
  std::vector<IntMatrix> elements;
  std::vector<Permutation> gen_perms;
  std::vector<Permutation> inv_perms;
  std::size_t identity_idx = 0;
  std::size_t num_generators = 0;
  std::uint64_t presentation_fingerprint = 0;

  std::size_t index() const { return elements.size(); }
};

FiniteQuotient enumerate_quotient(const GroupPresentation& pres, const PadicRep& rep, int level,
                                  const QuotientOptions& opts = {});

/// Coset permutation of a word: composite of generator permutations left to right.
Permutation word_to_perm(const FiniteQuotient& q, const Word& w);

/// Position of the image of w, i.e. identity acted on by w.
std::size_t element_of_word(const FiniteQuotient& q, const Word& w);

/// Number of orbits of the generator action (union-find on the coset graph).
std::size_t coset_components(const FiniteQuotient& q);

struct DimEstimate {
  double estimate = 0.0;
  std::vector<double> per_step;
  /// Last two per-step estimates agree.
  bool stabilized = false;
  /// Every step ratio is an exact power of p.
  bool exact_powers = true;
};

/// log_p of consecutive index ratios; uses the deepest consecutive pair.
DimEstimate estimate_dim(std::vector<std::pair<int, std::uint64_t>> indices, std::uint64_t p);

/// Exponent k with n == p^k, or -1.
int exact_log(std::uint64_t n, std::uint64_t p);

}  // namespace l2t
