#include "l2tower/chain.hpp"

#include <cstdlib>
#include <string>

#include "l2tower/errors.hpp"

namespace l2t {

GroupRingElement GroupRingElement::term(std::int64_t c, const Word& w) {
  GroupRingElement out;
  out.add(c, w);
  return out;
}

void GroupRingElement::add(std::int64_t c, const Word& w) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(free_reduce(w), c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

GroupRingElement& GroupRingElement::operator+=(const GroupRingElement& o) {
  for (const auto& [w, c] : o.terms_) add(c, w);
  return *this;
}

GroupRingElement& GroupRingElement::operator-=(const GroupRingElement& o) {
  for (const auto& [w, c] : o.terms_) add(-c, w);
  return *this;
}

GroupRingElement operator*(const GroupRingElement& a, const GroupRingElement& b) {
  GroupRingElement out;
  for (const auto& [wa, ca] : a.terms_)
    for (const auto& [wb, cb] : b.terms_) out.add(ca * cb, concat(wa, wb));
  return out;
}

std::map<std::size_t, std::int64_t> GroupRingElement::in_quotient(const FiniteQuotient& q) const {
  std::map<std::size_t, std::int64_t> out;
  for (const auto& [w, c] : terms_) {
    auto& slot = out[element_of_word(q, w)];
    slot += c;
  }
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

GroupRingElement fox_derivative(const Word& r, int generator) {
  GroupRingElement out;
  Word prefix;
  for (int letter : r) {
    if (letter == generator) {
      out.add(1, prefix);
    } else if (letter == -generator) {
      out.add(-1, concat(prefix, {-generator}));
    }
    prefix.push_back(letter);
  }
  return out;
}

GroupRingMatrix operator*(const GroupRingMatrix& a, const GroupRingMatrix& b) {
  if (a.cols != b.rows) throw Error("GroupRingMatrix: shape mismatch in product");
  GroupRingMatrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      if (a(i, k).is_zero()) continue;
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += a(i, k) * b(k, j);
    }
  return out;
}

void EquivariantComplex::validate_shape() const {
  if (dims.empty() || dims[0] < 1) throw InputError("complex: need r_0 >= 1");
  if (boundaries.size() != dims.size() - 1)
    throw InputError("complex: expected " + std::to_string(dims.size() - 1) + " boundary matrices, got " +
                     std::to_string(boundaries.size()));
  const auto g = static_cast<int>(num_generators);
  for (std::size_t k = 1; k < dims.size(); ++k) {
    const auto& d = boundary(k);
    if (d.rows != dims[k] || d.cols != dims[k - 1])
      throw InputError("complex: boundary " + std::to_string(k) + " must be " + std::to_string(dims[k]) + "x" +
                       std::to_string(dims[k - 1]));
    for (const auto& e : d.entries)
      for (const auto& [w, c] : e.terms())
        for (int letter : w)
          if (letter == 0 || std::abs(letter) > g)
            throw InputError("complex: boundary " + std::to_string(k) + " uses generator " + std::to_string(letter) +
                             " out of range");
  }
}

EquivariantComplex presentation_complex(const GroupPresentation& pres) {
  EquivariantComplex c;
  const std::size_t g = pres.num_generators();
  const std::size_t r = pres.relators.size();
  c.num_generators = g;
  c.presentation_fingerprint = pres.fingerprint();
  c.dims = {1, g};
  GroupRingMatrix d1(g, 1);
  for (std::size_t k = 0; k < g; ++k) d1(k, 0) = GroupRingElement::term(1, {static_cast<int>(k + 1)}) - GroupRingElement::constant(1);
  c.boundaries.push_back(std::move(d1));
  if (r > 0) {
    c.dims.push_back(r);
    GroupRingMatrix d2(r, g);
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t k = 0; k < g; ++k) d2(j, k) = fox_derivative(pres.relators[j], static_cast<int>(k + 1));
    c.boundaries.push_back(std::move(d2));
  }
  return c;
}

GroupRingMatrix boundary_composite(const EquivariantComplex& c, std::size_t k) {
  return c.boundary(k + 1) * c.boundary(k);
}

bool composites_vanish_in(const EquivariantComplex& c, const FiniteQuotient& q) {
  for (std::size_t k = 1; k < c.top_degree(); ++k) {
    const GroupRingMatrix comp = boundary_composite(c, k);
    for (const auto& e : comp.entries)
      if (!e.in_quotient(q).empty()) return false;
  }
  return true;
}

SparseIntMatrix BlockMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<std::int64_t>> triplets;
  triplets.reserve(terms.size() * block_size);
  for (const auto& t : terms) {
    const auto& perm = perms[t.perm];
    for (std::size_t j = 0; j < block_size; ++j)
      triplets.emplace_back(static_cast<int>(t.row_block * block_size + j), static_cast<int>(t.col_block * block_size + perm[j]),
                            t.coeff);
  }
  SparseIntMatrix out(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.prune(std::int64_t{0});
  return out;
}

IntMatrix BlockMatrix::to_dense() const {
  IntMatrix out = IntMatrix::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (const auto& t : terms) {
    const auto& perm = perms[t.perm];
    for (std::size_t j = 0; j < block_size; ++j)
      out(static_cast<Eigen::Index>(t.row_block * block_size + j), static_cast<Eigen::Index>(t.col_block * block_size + perm[j])) +=
          t.coeff;
  }
  return out;
}

PrimeFieldMatrix BlockMatrix::to_field(std::uint64_t p) const {
  PrimeFieldMatrix out(p, static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (const auto& t : terms) {
    const auto& perm = perms[t.perm];
    const std::uint64_t c = reduce(t.coeff, p);
    for (std::size_t j = 0; j < block_size; ++j) {
      auto& slot = out.entries(static_cast<Eigen::Index>(t.row_block * block_size + j),
                               static_cast<Eigen::Index>(t.col_block * block_size + perm[j]));
      slot = addmod(slot, c, p);
    }
  }
  return out;
}

BitMatrix BlockMatrix::to_bits() const {
  BitMatrix out(rows(), cols());
  for (const auto& t : terms) {
    if ((t.coeff & 1) == 0) continue;
    const auto& perm = perms[t.perm];
    for (std::size_t j = 0; j < block_size; ++j) out.flip(t.row_block * block_size + j, t.col_block * block_size + perm[j]);
  }
  return out;
}

bool InducedComplex::boundary_squared_zero() const {
  for (std::size_t k = 1; k < top_degree(); ++k) {
    SparseIntMatrix prod = (boundary(k + 1).to_sparse() * boundary(k).to_sparse()).pruned();
    if (prod.nonZeros() != 0) return false;
  }
  return true;
}

InducedComplex induce(const EquivariantComplex& complex, const FiniteQuotient& q) {
  complex.validate_shape();
  if (complex.num_generators != q.num_generators ||
      (complex.presentation_fingerprint && *complex.presentation_fingerprint != q.presentation_fingerprint))
    throw MismatchedPresentation("complex and quotient come from different presentations");
  if (!composites_vanish_in(complex, q))
    throw InputError("complex: d_{k+1} d_k does not vanish in the group ring of the level-" + std::to_string(q.level) +
                     " quotient");

  InducedComplex out;
  out.level = q.level;
  out.index = q.index();
  out.dims = complex.dims;
  for (std::size_t k = 1; k <= complex.top_degree(); ++k) {
    const auto& d = complex.boundary(k);
    BlockMatrix b;
    b.row_blocks = d.rows;
    b.col_blocks = d.cols;
    b.block_size = q.index();
    std::map<Word, std::size_t> perm_of;
    for (std::size_t i = 0; i < d.rows; ++i)
      for (std::size_t j = 0; j < d.cols; ++j)
        for (const auto& [w, c] : d(i, j).terms()) {
          auto [it, inserted] = perm_of.try_emplace(w, b.perms.size());
          if (inserted) b.perms.push_back(word_to_perm(q, w));
          b.terms.push_back({i, j, c, it->second});
        }
    out.boundaries.push_back(std::move(b));
  }
  return out;
}

BettiResult betti(const InducedComplex& ind, Field field, const BettiOptions& opts) {
  const std::size_t top = ind.top_degree();
  const std::size_t m = ind.index;
  BettiResult out;
  out.field = field;
  out.index = m;
  out.ranks.assign(top + 2, 0);
  for (std::size_t k = 1; k <= top; ++k) {
    const BlockMatrix& d = ind.boundary(k);
    if (d.rows() == 0 || d.cols() == 0) continue;
    if (field.kind == Field::Kind::Rational) {
      RankQOptions ro = opts.rank_q;
      ro.job_id = ro.job_id * 64 + k;
      const RankQResult r = rank_q(d.to_dense(), ro);
      out.ranks[k] = r.rank;
      out.certified = out.certified && r.certified;
    } else if (field.p == 2) {
      out.ranks[k] = d.to_bits().rank();
    } else {
      out.ranks[k] = rank_fp(d.to_field(field.p));
    }
  }
  for (std::size_t k = 0; k <= top; ++k) out.betti.push_back(m * ind.dims[k] - out.ranks[k] - out.ranks[k + 1]);
  out.cokernel.push_back(0);
  for (std::size_t k = 1; k <= top + 1; ++k) out.cokernel.push_back(m * ind.dims[k - 1] - out.ranks[k]);
  return out;
}

CokernelCheck cokernel_identity_check(const InducedComplex& ind, const BettiResult& b) {
  CokernelCheck out;
  const auto m = static_cast<std::int64_t>(ind.index);
  for (std::size_t k = 0; k <= ind.top_degree(); ++k) {
    const std::int64_t prev_dim = k == 0 ? 0 : static_cast<std::int64_t>(ind.dims[k - 1]);
    const std::int64_t rhs =
        static_cast<std::int64_t>(b.cokernel[k]) + static_cast<std::int64_t>(b.cokernel[k + 1]) - m * prev_dim;
    const std::int64_t residual = static_cast<std::int64_t>(b.betti[k]) - rhs;
    out.residuals.push_back(residual);
    if (residual != 0) out.ok = false;
  }
  return out;
}

void require_cokernel_identity(const InducedComplex& ind, const BettiResult& b) {
  const CokernelCheck check = cokernel_identity_check(ind, b);
  if (!check.ok)
    throw IdentityViolated("Betti numbers at level " + std::to_string(ind.level) +
                           " disagree with the cokernel dimensions");
}

std::int64_t euler_characteristic(const EquivariantComplex& c) {
  std::int64_t chi = 0;
  for (std::size_t k = 0; k < c.dims.size(); ++k) chi += (k % 2 == 0 ? 1 : -1) * static_cast<std::int64_t>(c.dims[k]);
  return chi;
}

}  // namespace l2t
