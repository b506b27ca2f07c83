#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "l2tower/errors.hpp"
#include "l2tower/fpgroup.hpp"

using namespace l2t;

namespace {

IntMatrix unipotent2() {
  IntMatrix a(2, 2);
  a << 1, 1, 0, 1;
  return a;
}

PadicRep z_rep(std::uint64_t p) { return {p, 2, {unipotent2()}, 12}; }

PadicRep z2_rep(std::uint64_t p) {
  IntMatrix a = IntMatrix::Identity(4, 4), b = IntMatrix::Identity(4, 4);
  a(0, 1) = 1;
  b(2, 3) = 1;
  return {p, 4, {a, b}, 6};
}

PadicRep heisenberg_rep() {
  IntMatrix a = IntMatrix::Identity(3, 3), b = IntMatrix::Identity(3, 3);
  a(0, 1) = 1;
  b(1, 2) = 1;
  return {2, 3, {a, b}, 6};
}

GroupPresentation heisenberg() {
  const Word c{1, 2, -1, -2};
  return {{"a", "b"},
          {free_reduce(concat(concat(concat(c, {1}), inverse(c)), {-1})),
           free_reduce(concat(concat(concat(c, {2}), inverse(c)), {-2}))}};
}

}  // namespace

TEST_CASE("words") {
  CHECK(free_reduce({1, 2, -2, -1, 3}) == Word{3});
  CHECK(free_reduce({1, -1}).empty());
  CHECK(inverse({1, -2, 3}) == Word{-3, 2, -1});
  CHECK(is_freely_reduced({1, 2, 1}));
  CHECK_FALSE(is_freely_reduced({1, 2, -2}));
}

TEST_CASE("presentation validation") {
  GroupPresentation bad{{"a"}, {{2}}};
  CHECK_THROWS_AS(bad.validate(), InputError);
  GroupPresentation unreduced{{"a"}, {{1, -1}}};
  CHECK_THROWS_AS(unreduced.validate(), InputError);
  CHECK(GroupPresentation{{"a", "b"}, {{1, 2}}}.fingerprint() != GroupPresentation{{"a", "b"}, {{2, 1}}}.fingerprint());
}

TEST_CASE("matrix inverses mod prime powers") {
  IntMatrix a(3, 3);
  a << 1, 2, 3, 0, 1, 4, 5, 6, 0;  // det 1
  for (auto [p, level] : std::vector<std::pair<std::uint64_t, int>>{{2, 5}, {3, 4}, {7, 3}}) {
    const std::uint64_t m = level_modulus(p, level, 3);
    const IntMatrix inv = inverse_mod_prime_power(a, p, level);
    CHECK(mat_mulmod(a, inv, m) == IntMatrix::Identity(3, 3));
  }
  IntMatrix singular = IntMatrix::Zero(2, 2);
  CHECK_THROWS(inverse_mod_prime_power(singular, 3, 2));
}

TEST_CASE("enumerate Z quotient") {
  const GroupPresentation z{{"a"}, {}};
  const auto q = enumerate_quotient(z, z_rep(2), 3);
  CHECK(q.index() == 8);
  // The generator permutation is a single 8-cycle.
  std::size_t x = q.identity_idx, steps = 0;
  do {
    x = q.gen_perms[0][x];
    ++steps;
  } while (x != q.identity_idx);
  CHECK(steps == 8);
  // Brute-force closure: {[[1,k],[0,1]] mod 8}.
  std::set<std::int64_t> tops;
  for (const auto& e : q.elements) {
    CHECK(e(0, 0) == 1);
    CHECK(e(1, 0) == 0);
    tops.insert(e(0, 1));
  }
  CHECK(tops.size() == 8);
  CHECK(enumerate_quotient(z, z_rep(2), 0).index() == 1);
}

TEST_CASE("enumerate Z^2 quotient") {
  const GroupPresentation z2{{"a", "b"}, {{1, 2, -1, -2}}};
  CHECK(enumerate_quotient(z2, z2_rep(3), 2).index() == 81);
  CHECK(enumerate_quotient(z2, z2_rep(2), 1).index() == 4);
}

TEST_CASE("word permutations") {
  const GroupPresentation z{{"a"}, {}};
  const auto q = enumerate_quotient(z, z_rep(2), 2);
  CHECK(word_to_perm(q, {}) == identity_permutation(4));
  CHECK(word_to_perm(q, {1, -1}) == identity_permutation(4));
  CHECK(word_to_perm(q, {1, 1}) == compose(q.gen_perms[0], q.gen_perms[0]));
  CHECK(compose(q.gen_perms[0], q.inv_perms[0]) == identity_permutation(4));
  CHECK(invert(q.gen_perms[0]) == q.inv_perms[0]);
}

TEST_CASE("quotient invariants along towers") {
  const GroupPresentation z2{{"a", "b"}, {{1, 2, -1, -2}}};
  for (const auto& [pres, rep] : std::vector<std::pair<GroupPresentation, PadicRep>>{
           {z2, z2_rep(2)}, {z2, z2_rep(3)}, {heisenberg(), heisenberg_rep()}}) {
    std::uint64_t prev = 1;
    for (int level = 1; level <= 3; ++level) {
      const auto q = enumerate_quotient(pres, rep, level);
      CHECK(q.index() % prev == 0);
      if (level > 1) CHECK(exact_log(q.index() / prev, rep.p) >= 0);
      prev = q.index();
      for (const auto& r : pres.relators) CHECK(word_to_perm(q, r) == identity_permutation(q.index()));
      for (const auto& perm : q.gen_perms) {
        std::vector<bool> seen(perm.size());
        for (auto x : perm) seen[x] = true;
        CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
      }
      CHECK(coset_components(q) == 1);
    }
  }
}

TEST_CASE("enumeration errors") {
  const GroupPresentation z2{{"a", "b"}, {{1, 2, -1, -2}}};
  QuotientOptions tiny;
  tiny.element_cap = 10;
  CHECK_THROWS_AS(enumerate_quotient(z2, z2_rep(2), 3, tiny), ElementCapExceeded);
  // a b != b a for the Heisenberg generators.
  CHECK_THROWS_AS(enumerate_quotient(z2, heisenberg_rep(), 2), NotHomomorphism);
  CHECK_THROWS_AS(level_modulus(2, 40, 3), BudgetExceeded);
}

TEST_CASE("estimate_dim") {
  auto d1 = estimate_dim({{1, 2}, {2, 4}, {3, 8}}, 2);
  CHECK(d1.estimate == 1.0);
  CHECK(d1.stabilized);
  auto d2 = estimate_dim({{1, 9}, {2, 81}}, 3);
  CHECK(d2.estimate == 2.0);
  std::vector<std::pair<int, std::uint64_t>> heis;
  for (int level = 1; level <= 3; ++level)
    heis.emplace_back(level, enumerate_quotient(heisenberg(), heisenberg_rep(), level).index());
  CHECK(heis[2].second == 512);
  CHECK(estimate_dim(heis, 2).estimate == 3.0);
  CHECK_THROWS_AS(estimate_dim({{1, 2}}, 2), InsufficientLevels);
}
