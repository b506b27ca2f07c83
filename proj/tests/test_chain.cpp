#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "l2tower/chain.hpp"
#include "l2tower/errors.hpp"
#include "oracles.hpp"

using namespace l2t;

namespace {

PadicRep abelian(std::uint64_t p, int d, int gens) {
  PadicRep rep{p, 2 * d, {}, 8};
  for (int g = 0; g < gens; ++g) {
    IntMatrix m = IntMatrix::Identity(2 * d, 2 * d);
    m(2 * (g % d), 2 * (g % d) + 1) = 1;
    rep.images.push_back(m);
  }
  return rep;
}

const GroupPresentation kCircle{{"x"}, {}};
const GroupPresentation kWedge{{"a", "b"}, {}};
const GroupPresentation kTorus{{"a", "b"}, {{1, 2, -1, -2}}};

/// Induced boundary built from the definition: sum of c times products of generator permutation matrices.
IntMatrix induced_oracle(const GroupRingMatrix& b, const FiniteQuotient& q) {
  const auto m = static_cast<Eigen::Index>(q.index());
  auto perm_matrix = [&](const Permutation& p) {
    IntMatrix out = IntMatrix::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) out(j, p[static_cast<std::size_t>(j)]) = 1;
    return out;
  };
  IntMatrix out = IntMatrix::Zero(static_cast<Eigen::Index>(b.rows) * m, static_cast<Eigen::Index>(b.cols) * m);
  for (std::size_t i = 0; i < b.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j)
      for (const auto& [w, c] : b(i, j).terms()) {
        IntMatrix pw = IntMatrix::Identity(m, m);
        for (int l : w) {
          const auto& g = l > 0 ? q.gen_perms[static_cast<std::size_t>(l - 1)] : q.inv_perms[static_cast<std::size_t>(-l - 1)];
          pw = pw * perm_matrix(g);
        }
        out.block(static_cast<Eigen::Index>(i) * m, static_cast<Eigen::Index>(j) * m, m, m) += c * pw;
      }
  return out;
}

}  // namespace

TEST_CASE("fox derivative base cases and product rule") {
  CHECK(fox_derivative({1}, 1) == GroupRingElement::constant(1));
  CHECK(fox_derivative({-1}, 1) == GroupRingElement::term(-1, {-1}));
  CHECK(fox_derivative({2}, 1).is_zero());
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    auto random_word = [&] {
      Word w;
      const std::size_t len = rng() % 8;
      for (std::size_t i = 0; i < len; ++i) w.push_back((rng() % 2 ? 1 : -1) * static_cast<int>(1 + rng() % 3));
      return free_reduce(w);
    };
    const Word u = random_word(), v = random_word();
    for (int x = 1; x <= 3; ++x) {
      const auto lhs = fox_derivative(free_reduce(concat(u, v)), x);
      const auto rhs = fox_derivative(u, x) + GroupRingElement::term(1, u) * fox_derivative(v, x);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("presentation complex shape") {
  const auto c = presentation_complex(kTorus);
  CHECK(c.dims == std::vector<std::size_t>{1, 2, 1});
  CHECK(c.boundary(1)(0, 0) == GroupRingElement::term(1, {1}) - GroupRingElement::constant(1));
  CHECK(presentation_complex(kCircle).dims == std::vector<std::size_t>{1, 1});
  // In Z[F] the composite is r - 1, not zero; it dies in every quotient of the group.
  CHECK_FALSE(boundary_composite(c, 1)(0, 0).is_zero());
  CHECK(composites_vanish_in(c, enumerate_quotient(kTorus, abelian(2, 2, 2), 2)));
}

TEST_CASE("circle covers") {
  const auto c = presentation_complex(kCircle);
  const PadicRep rep = abelian(2, 1, 1);
  const auto trivial = induce(c, enumerate_quotient(kCircle, rep, 0));
  CHECK(trivial.boundary(1).to_dense() == IntMatrix::Zero(1, 1));
  for (int level = 1; level <= 5; ++level) {
    const auto q = enumerate_quotient(kCircle, rep, level);
    const auto ind = induce(c, q);
    const IntMatrix d1 = ind.boundary(1).to_dense();
    CHECK(d1 == induced_oracle(c.boundary(1), q));
    // P - I with P a single cycle.
    CHECK(oracle::rank_q(oracle::to_dense(d1)) == q.index() - 1);
    for (Field f : {Field::rational(), Field::prime(2)}) {
      const auto b = betti(ind, f);
      CHECK(b.betti == std::vector<std::size_t>{1, 1});
      CHECK(cokernel_identity_check(ind, b).ok);
    }
  }
}

TEST_CASE("cokernel identity conventions") {
  const auto c = presentation_complex(kCircle);
  const auto ind = induce(c, enumerate_quotient(kCircle, abelian(2, 1, 1), 3));
  const auto b = betti(ind, Field::prime(2));
  // k = 1: 1 = coker d_1 + coker d_2 - m r_0 = 1 + 8 - 8.
  CHECK(b.cokernel[1] == 1);
  CHECK(b.cokernel[2] == 8);
  CHECK(cokernel_identity_check(ind, b).residuals == std::vector<std::int64_t>{0, 0});

  const auto t = induce(presentation_complex(kTorus), enumerate_quotient(kTorus, abelian(2, 2, 2), 0));
  const auto bt = betti(t, Field::rational());
  CHECK(bt.betti == std::vector<std::size_t>{1, 2, 1});
  CHECK(bt.cokernel[1] == 1);
  CHECK(bt.cokernel[2] == 2);

  BettiResult broken = bt;
  broken.betti[1] = 3;
  CHECK_FALSE(cokernel_identity_check(t, broken).ok);
  CHECK_THROWS_AS(require_cokernel_identity(t, broken), IdentityViolated);
}

TEST_CASE("torus covers") {
  const auto c = presentation_complex(kTorus);
  for (std::uint64_t p : {2, 3}) {
    const PadicRep rep = abelian(p, 2, 2);
    for (int level = 0; level <= 2; ++level) {
      const auto q = enumerate_quotient(kTorus, rep, level);
      const auto ind = induce(c, q);
      CHECK(ind.boundary_squared_zero());
      const IntMatrix d1 = ind.boundary(1).to_dense(), d2 = ind.boundary(2).to_dense();
      CHECK(d1 == induced_oracle(c.boundary(1), q));
      CHECK(d2 == induced_oracle(c.boundary(2), q));
      CHECK((d2 * d1).isZero());
      for (Field f : {Field::rational(), Field::prime(p)}) {
        const auto b = betti(ind, f);
        CHECK(b.betti == std::vector<std::size_t>{1, 2, 1});
        CHECK(cokernel_identity_check(ind, b).ok);
      }
    }
  }
  CHECK(enumerate_quotient(kTorus, abelian(2, 2, 2), 1).index() == 4);
}

TEST_CASE("wedge covers") {
  const auto c = presentation_complex(kWedge);
  const PadicRep rep = abelian(2, 2, 2);
  for (int level = 1; level <= 3; ++level) {
    const auto ind = induce(c, enumerate_quotient(kWedge, rep, level));
    for (Field f : {Field::rational(), Field::prime(2)}) {
      const auto b = betti(ind, f);
      CHECK(b.betti[1] == ind.index + 1);
      std::int64_t chi = static_cast<std::int64_t>(b.betti[0]) - static_cast<std::int64_t>(b.betti[1]);
      CHECK(chi == static_cast<std::int64_t>(ind.index) * euler_characteristic(c));
      CHECK(cokernel_identity_check(ind, b).ok);
    }
  }
}

TEST_CASE("explicit complexes and induction errors") {
  // Torus as an explicit complex with the second boundary [b - 1, 1 - a].
  EquivariantComplex c;
  c.dims = {1, 2, 1};
  c.num_generators = 2;
  GroupRingMatrix d1(2, 1), d2(1, 2);
  d1(0, 0) = GroupRingElement::term(1, {1}) - GroupRingElement::constant(1);
  d1(1, 0) = GroupRingElement::term(1, {2}) - GroupRingElement::constant(1);
  d2(0, 0) = GroupRingElement::constant(1) - GroupRingElement::term(1, {2});
  d2(0, 1) = GroupRingElement::term(1, {1}) - GroupRingElement::constant(1);
  c.boundaries = {d1, d2};
  const auto q = enumerate_quotient(kTorus, abelian(2, 2, 2), 1);
  const auto ind = induce(c, q);
  CHECK(ind.dims == std::vector<std::size_t>{1, 2, 1});
  CHECK(ind.boundary(2).rows() == 4);
  CHECK(ind.boundary(2).cols() == 8);
  CHECK(ind.boundary_squared_zero());
  CHECK(betti(ind, Field::rational()).betti == std::vector<std::size_t>{1, 2, 1});

  EquivariantComplex wrong = c;
  wrong.num_generators = 3;
  CHECK_THROWS_AS(induce(wrong, q), MismatchedPresentation);

  EquivariantComplex bad = c;
  bad.boundaries[1](0, 0) = GroupRingElement::constant(1);
  CHECK_THROWS_AS(induce(bad, q), InputError);

  EquivariantComplex other = presentation_complex(GroupPresentation{{"a", "b"}, {{1, 2, -1, -2, 1}}});
  CHECK_THROWS_AS(induce(other, q), MismatchedPresentation);
}

TEST_CASE("representations of block matrices agree") {
  const auto c = presentation_complex(kTorus);
  const auto ind = induce(c, enumerate_quotient(kTorus, abelian(3, 2, 2), 1));
  const auto& b = ind.boundary(2);
  const IntMatrix dense = b.to_dense();
  CHECK(IntMatrix(b.to_sparse().toDense()) == dense);
  const auto f = b.to_field(3);
  for (Eigen::Index i = 0; i < dense.rows(); ++i)
    for (Eigen::Index j = 0; j < dense.cols(); ++j) CHECK(f.entries(i, j) == reduce(dense(i, j), 3));
  const auto bits = induce(c, enumerate_quotient(kTorus, abelian(2, 2, 2), 2)).boundary(2);
  const BitMatrix bm = bits.to_bits();
  const IntMatrix bd = bits.to_dense();
  for (Eigen::Index i = 0; i < bd.rows(); ++i)
    for (Eigen::Index j = 0; j < bd.cols(); ++j)
      CHECK(bm.get(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == (reduce(bd(i, j), 2) == 1));
}
