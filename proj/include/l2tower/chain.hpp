#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "l2tower/exactla.hpp"
#include "l2tower/fpgroup.hpp"

namespace l2t {

/// Element of Z[F]: integer combination of freely reduced words.
class GroupRingElement {
public:
  GroupRingElement() = default;
  static GroupRingElement constant(std::int64_t c) { return term(c, {}); }
  static GroupRingElement term(std::int64_t c, const Word& w);

  void add(std::int64_t c, const Word& w);
  bool is_zero() const { return terms_.empty(); }
  const std::map<Word, std::int64_t>& terms() const { return terms_; }

  GroupRingElement& operator+=(const GroupRingElement& o);
  GroupRingElement& operator-=(const GroupRingElement& o);
  friend GroupRingElement operator+(GroupRingElement a, const GroupRingElement& b) { return a += b; }
  friend GroupRingElement operator-(GroupRingElement a, const GroupRingElement& b) { return a -= b; }
  friend GroupRingElement operator*(const GroupRingElement& a, const GroupRingElement& b);
  friend bool operator==(const GroupRingElement& a, const GroupRingElement& b) = default;

  /// Image in Z[Gamma/Gamma_i]: coefficient per quotient element.
  std::map<std::size_t, std::int64_t> in_quotient(const FiniteQuotient& q) const;

private:
  std::map<Word, std::int64_t> terms_;
};

/// Free derivative d r / d x_k in Z[F] (generator is 1-based).
GroupRingElement fox_derivative(const Word& r, int generator);

struct GroupRingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<GroupRingElement> entries;  // row-major

  GroupRingMatrix() = default;
  GroupRingMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r * c) {}

  GroupRingElement& operator()(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
  const GroupRingElement& operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
};

GroupRingMatrix operator*(const GroupRingMatrix& a, const GroupRingMatrix& b);

/// Free Z[Gamma]-complex of row vectors: boundary(k) is r_k x r_{k-1}, acting by right multiplication.
struct EquivariantComplex {
  std::vector<std::size_t> dims;
  std::vector<GroupRingMatrix> boundaries;  // boundaries[k-1] is d_k
  std::size_t num_generators = 0;
  std::optional<std::uint64_t> presentation_fingerprint;

  std::size_t top_degree() const { return dims.size() - 1; }
  const GroupRingMatrix& boundary(std::size_t k) const { return boundaries.at(k - 1); }

  /// Shapes, r_0 >= 1 and letters in range.
  void validate_shape() const;
};

/// One 0-cell, a 1-cell per generator (d_1 = x_k - 1), a 2-cell per relator (d_2 = Fox matrix).
EquivariantComplex presentation_complex(const GroupPresentation& pres);

/// d_{k+1} d_k computed in Z[F] with free reduction.
GroupRingMatrix boundary_composite(const EquivariantComplex& c, std::size_t k);

/// True when every composite d_{k+1} d_k vanishes in Z[Gamma/Gamma_i].
bool composites_vanish_in(const EquivariantComplex& c, const FiniteQuotient& q);

using SparseIntMatrix = Eigen::SparseMatrix<std::int64_t, Eigen::RowMajor>;

/// Induced boundary kept as (row block, col block, coefficient, permutation) terms.
struct BlockMatrix {
  struct Term {
    std::size_t row_block;
    std::size_t col_block;
    std::int64_t coeff;
    std::size_t perm;  // into perms
  };
  std::size_t row_blocks = 0;
  std::size_t col_blocks = 0;
  std::size_t block_size = 0;
  std::vector<Term> terms;
  std::vector<Permutation> perms;

  std::size_t rows() const { return row_blocks * block_size; }
  std::size_t cols() const { return col_blocks * block_size; }

  SparseIntMatrix to_sparse() const;
  IntMatrix to_dense() const;
  PrimeFieldMatrix to_field(std::uint64_t p) const;
  BitMatrix to_bits() const;
};

struct InducedComplex {
  int level = 0;
  std::size_t index = 1;
  std::vector<std::size_t> dims;
  std::vector<BlockMatrix> boundaries;  // boundaries[k-1] is d_k over Z

  std::size_t top_degree() const { return dims.size() - 1; }
  const BlockMatrix& boundary(std::size_t k) const { return boundaries.at(k - 1); }

  /// Exact d_{k+1} d_k = 0 over Z for all k, via sparse products.
  bool boundary_squared_zero() const;
};

/// Cellular chain complex of the finite cover attached to q.
InducedComplex induce(const EquivariantComplex& complex, const FiniteQuotient& q);

struct Field {
  enum class Kind { Rational, Prime } kind = Kind::Rational;
  std::uint64_t p = 0;

  static Field rational() { return {}; }
  static Field prime(std::uint64_t p) { return {Kind::Prime, p}; }
};

struct BettiOptions {
  RankQOptions rank_q;
};

struct BettiResult {
  Field field;
  std::size_t index = 1;
  std::vector<std::size_t> ranks;     // ranks[k] = rank d_k, k = 0..N+1 (ends are zero maps)
  std::vector<std::size_t> betti;     // k = 0..N
  std::vector<std::size_t> cokernel;  // dim coker d_k, k = 0..N+1
  bool certified = true;
};

BettiResult betti(const InducedComplex& ind, Field field, const BettiOptions& opts = {});

struct CokernelCheck {
  bool ok = true;
  /// b_k - (coker d_k + coker d_{k+1} - m r_{k-1}) for k = 0..N; all zero when ok.
  std::vector<std::int64_t> residuals;
};

CokernelCheck cokernel_identity_check(const InducedComplex& ind, const BettiResult& b);

/// Throws IdentityViolated when the check fails.
void require_cokernel_identity(const InducedComplex& ind, const BettiResult& b);

/// Sum of (-1)^k r_k.
std::int64_t euler_characteristic(const EquivariantComplex& c);

}  // namespace l2t
