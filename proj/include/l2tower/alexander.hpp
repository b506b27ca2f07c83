#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "l2tower/chain.hpp"
#include "l2tower/fpgroup.hpp"
#include "l2tower/poly.hpp"
#include "l2tower/tower.hpp"

namespace l2t {

/// Surjection Gamma -> Z^d given on generators.
struct AbelianizationMap {
  int d = 1;
  std::vector<std::vector<int>> images;  // one vector in Z^d per generator

  Exponent image_of(const Word& w) const;
  /// Throws RelatorNotKilled if some relator has nonzero image.
  void validate(const GroupPresentation& pres) const;
};

/// Checks sum_k (dr/dx_k)(x_k - 1) = r - 1 in Z[F].
bool fox_fundamental_identity(const Word& r, std::size_t num_generators);

/// Abelianized Fox derivatives: (#relators) x (#generators) over Z[t_1^{+-1}..t_d^{+-1}].
LaurentMatrix alexander_matrix(const GroupPresentation& pres, const AbelianizationMap& ab);

/// Pushes a group-ring element through the abelianization.
LaurentPoly abelianize(const GroupRingElement& e, const AbelianizationMap& ab);

/// Row identity sum_k A_jk (t^{image(x_k)} - 1) = 0 for every row.
bool alexander_row_identity(const LaurentMatrix& a, const AbelianizationMap& ab);

/// beta_1 over F_p[[Z_p^d]] of the presentation complex: dim ker d_1 - rank(A mod p) over F_p(t).
std::int64_t modp_l2_betti_1(const GroupPresentation& pres, const AbelianizationMap& ab, std::uint64_t p,
                             const LaurentRankOptions& opts = {});

struct DiagonalSpecialization {
  int d = 1;
  /// gcd over Q[t] of the (g-1)-minors after t_j -> t, normalized (content 1, positive lead, no t-power).
  std::vector<mpz_class> minor_gcd;
  /// Delta(t,t) = minor_gcd / (t - 1) for d = 2; Delta(t) = minor_gcd for d = 1. Empty if (t - 1) does not divide.
  std::vector<mpz_class> delta;

  std::string delta_string() const;
  std::string minor_gcd_string() const;
};

/// Throws DegenerateMatrix when all (g-1)-minors vanish.
DiagonalSpecialization diagonal_specialization(const LaurentMatrix& a);

/// |Delta(1,1)| from the diagonal specialization (d = 2 only).
std::int64_t linking_number(const LaurentMatrix& a);
std::int64_t linking_number(const DiagonalSpecialization& s);

/// Wirtinger presentation of a braid closure with meridians labelled by component.
struct BraidClosure {
  GroupPresentation pres;
  AbelianizationMap ab;
  int components = 0;
  int crossings = 0;
  /// Sum of inter-component crossing signs over 2 (two-component closures only).
  std::optional<std::int64_t> crossing_linking_number;
};

BraidClosure braid_closure(const std::vector<int>& braid_word, int strands);

/// Block-diagonal unipotents [[1, v_j], [0, 1]] in GL_{2d} realizing Gamma -> Z^d -> Z_p^d.
PadicRep abelian_rep(const AbelianizationMap& ab, std::uint64_t p, int max_level);

struct PredictionReport {
  std::uint64_t p = 2;
  int levels = 0;
  BettiTable table;
  std::vector<std::size_t> b1_q, b1_fp;
  std::vector<std::uint64_t> indices;
  LimitEstimate tower_q, tower_fp;
  std::int64_t predicted_fp = 0;
  std::optional<std::int64_t> predicted_q;  // empty when Delta(t,t) = 0
  std::optional<std::int64_t> linking_number;
  bool fp_collapses = false;
  bool monotone = true;
  bool pass = false;
};

/// Runs the abelian tower and compares its limits against the Alexander-module predictions.
PredictionReport predict_vs_tower(const GroupPresentation& pres, const AbelianizationMap& ab, std::uint64_t p,
                                  int levels, const std::optional<PadicRep>& rep = std::nullopt,
                                  const TowerOptions& tower_opts = {}, const LaurentRankOptions& rank_opts = {});

}  // namespace l2t
