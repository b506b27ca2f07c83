#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "l2tower/errors.hpp"
#include "l2tower/io.hpp"
#include "l2tower/tower.hpp"
#include "oracles.hpp"

using namespace l2t;

namespace {

const GroupPresentation kCircle{{"a"}, {}};
const GroupPresentation kWedge{{"a", "b"}, {}};
const GroupPresentation kTorus{{"a", "b"}, {{1, 2, -1, -2}}};

IntMatrix unipotent(std::size_t n, std::size_t row, std::size_t col) {
  IntMatrix m = IntMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = 1;
  return m;
}

PadicRep circle_rep(std::uint64_t p, int max_level) { return {p, 2, {unipotent(2, 0, 1)}, max_level}; }

PadicRep pair_rep(std::uint64_t p, int max_level) {
  return {p, 4, {unipotent(4, 0, 1), unipotent(4, 2, 3)}, max_level};
}

std::vector<std::pair<std::uint64_t, std::size_t>> pairs(const std::vector<std::tuple<int, std::uint64_t, std::size_t>>& c) {
  std::vector<std::pair<std::uint64_t, std::size_t>> v;
  for (const auto& [level, index, b] : c) v.emplace_back(index, b);
  return v;
}

std::vector<std::size_t> values(const std::vector<std::tuple<int, std::uint64_t, std::size_t>>& c) {
  std::vector<std::size_t> v;
  for (const auto& t : c) v.push_back(std::get<2>(t));
  return v;
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("l2t-test-" + tag + "-" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("rational arithmetic") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(3, -6) == Rational(-1, 2));
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(1, 2) - Rational(1, 3) == Rational(1, 6));
  CHECK(Rational(3, 4) * 8 == Rational(6));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(7, 2).floor() == 3);
  CHECK(Rational(-7, 2).floor() == -4);
  CHECK(Rational(65, 64).to_string() == "65/64");
  CHECK(Rational(4, 2).to_string() == "2");
  CHECK_THROWS(Rational(1, 0));
  CHECK_THROWS_AS(Rational(INT64_MAX, 1) + Rational(INT64_MAX, 1), BudgetExceeded);
}

TEST_CASE("limit estimates") {
  const auto circle = estimate_limit({{2, 1}, {4, 1}, {8, 1}}, LimitMode::Fp);
  CHECK(circle.lower == Rational(0));
  CHECK(circle.upper == Rational(1, 8));
  CHECK(circle.estimate == Rational(0));
  CHECK_FALSE(circle.stabilized);

  const auto wedge = estimate_limit({{4, 5}, {16, 17}, {64, 65}}, LimitMode::Q);
  CHECK(wedge.estimate == Rational(1));
  CHECK(wedge.differences.back() == Rational(-3, 64));
  CHECK(wedge.lower == Rational(62, 64));
  CHECK(wedge.upper == Rational(68, 64));

  const auto constant = estimate_limit({{3, 6}, {9, 18}, {27, 54}}, LimitMode::Q);
  CHECK(constant.stabilized);
  CHECK(constant.estimate == Rational(2));
  CHECK(constant.lower == Rational(2));
  CHECK(constant.upper == Rational(2));

  CHECK_THROWS_AS(estimate_limit({{2, 1}}, LimitMode::Fp), InsufficientLevels);
}

TEST_CASE("error exponent fits") {
  CHECK(fit_error_exponent({{2, 1}, {4, 1}, {8, 1}, {16, 1}}, Rational(0), 1.0).verdict == Verdict::Consistent);
  CHECK(fit_error_exponent({{4, 5}, {16, 17}, {64, 65}}, Rational(1), 2.0).verdict == Verdict::Consistent);
  CHECK(fit_error_exponent({{4, 2}, {16, 2}, {64, 2}}, Rational(0), 2.0).verdict == Verdict::Consistent);

  const auto exact = fit_error_exponent({{2, 2}, {4, 4}, {8, 8}}, Rational(1), 1.0);
  CHECK(exact.verdict == Verdict::TriviallyConsistent);
  CHECK(to_string(exact.verdict) == "TRIVIALLY-CONSISTENT");

  CHECK(fit_error_exponent({{2, 3}, {4, 4}, {8, 8}}, Rational(1), 1.0).verdict == Verdict::Inconclusive);

  const auto linear = fit_error_exponent({{2, 1}, {4, 2}, {8, 4}, {16, 8}}, Rational(0), 1.0);
  CHECK(linear.verdict == Verdict::Inconsistent);
  REQUIRE(linear.slope);
  CHECK(*linear.slope == doctest::Approx(1.0));
  CHECK(linear.bound == doctest::Approx(0.15));

  // sqrt growth is fine in dimension 2 but not in dimension 1.
  const std::vector<std::pair<std::uint64_t, std::size_t>> root{{4, 2}, {16, 4}, {64, 8}, {256, 16}};
  CHECK(fit_error_exponent(root, Rational(0), 2.0).verdict == Verdict::Consistent);
  CHECK(fit_error_exponent(root, Rational(0), 1.0).verdict == Verdict::Inconsistent);

  CHECK_THROWS_AS(fit_error_exponent({{2, 1}, {4, 1}}, Rational(0), 1.0), InsufficientLevels);
}

TEST_CASE("monotonicity") {
  const auto wedge = check_monotonicity({{1, 4, 5}, {2, 16, 17}, {3, 64, 65}}, 1, 2);
  CHECK(wedge.applicable);
  CHECK(wedge.pass);
  CHECK(wedge.normalized == std::vector<Rational>{Rational(5), Rational(17, 4), Rational(65, 16)});

  const auto bad = check_monotonicity({{1, 2, 1}, {2, 4, 3}}, 1, 2);
  CHECK_FALSE(bad.pass);
  CHECK_THROWS_AS(require_monotone(bad), MonotonicityViolated);

  const auto rebased = check_monotonicity({{1, 2, 1}, {2, 4, 3}, {3, 8, 5}}, 2, 2);
  CHECK(rebased.pass);

  const auto not_power = check_monotonicity({{1, 2, 1}, {2, 6, 3}}, 1, 2);
  CHECK_FALSE(not_power.applicable);
  CHECK_NOTHROW(require_monotone(not_power));
}

TEST_CASE("circle tower") {
  const auto t = run_tower(kCircle, circle_rep(2, 12), presentation_complex(kCircle), 5);
  CHECK_FALSE(t.failed_level);
  CHECK(values(t.column(0, false)) == std::vector<std::size_t>{1, 1, 1, 1, 1});
  CHECK(values(t.column(1, false)) == std::vector<std::size_t>{1, 1, 1, 1, 1});
  CHECK(values(t.column(1, true)) == std::vector<std::size_t>{1, 1, 1, 1, 1});
  const auto lim = estimate_limit(pairs(t.column(1, true)), LimitMode::Fp);
  CHECK(lim.upper == Rational(1, 32));
  const auto report = make_report(t);
  CHECK(report.pass);
  REQUIRE(report.d_hat);
  CHECK(report.d_hat->estimate == doctest::Approx(1.0));
}

TEST_CASE("wedge tower") {
  const auto t = run_tower(kWedge, pair_rep(2, 8), presentation_complex(kWedge), 3);
  CHECK(values(t.column(1, false)) == std::vector<std::size_t>{5, 17, 65});
  CHECK(values(t.column(1, true)) == std::vector<std::size_t>{5, 17, 65});
  const auto report = make_report(t);
  CHECK(report.pass);
  REQUIRE(report.degrees.size() == 2);
  REQUIRE(report.degrees[1].fp);
  CHECK(report.degrees[1].fp->estimate == Rational(1));
  REQUIRE(report.degrees[1].monotonicity);
  CHECK(report.degrees[1].monotonicity->pass);
}

TEST_CASE("torus towers") {
  for (std::uint64_t p : {2, 3}) {
    const int levels = p == 2 ? 4 : 3;
    const auto t = run_tower(kTorus, pair_rep(p, 6), presentation_complex(kTorus), levels);
    for (std::size_t k = 0; k <= 2; ++k) {
      const std::size_t expected = k == 1 ? 2 : 1;
      for (bool fp : {false, true})
        for (auto b : values(t.column(k, fp))) CHECK(b == expected);
    }
    CHECK(make_report(t).pass);
  }
}

TEST_CASE("heisenberg tower against an independent rank oracle") {
  const auto input = tower_input_from_json(read_json_file(std::string(L2T_CORPUS_DIR) + "/heisenberg.json"));
  REQUIRE(input.rep);
  const auto complex = input.resolve_complex();
  const auto t = run_tower(input.pres, *input.rep, complex, 3);
  CHECK(t.indices == std::vector<std::pair<int, std::uint64_t>>{{1, 8}, {2, 64}, {3, 512}});
  CHECK(values(t.column(1, false)) == std::vector<std::size_t>{2, 2, 2});

  const auto q = enumerate_quotient(input.pres, *input.rep, 1);
  const auto ind = induce(complex, q);
  const auto d1 = oracle::to_dense(ind.boundary(1).to_dense());
  const auto d2 = oracle::to_dense(ind.boundary(2).to_dense());
  const std::size_t b1 = ind.dims[1] * ind.index - oracle::rank_q(d1) - oracle::rank_q(d2);
  CHECK(b1 == 2);
  CHECK(t.column(1, false).front() == std::make_tuple(1, std::uint64_t{8}, b1));

  const auto report = make_report(t, input.d);
  CHECK(report.pass);
}

TEST_CASE("F_p Betti numbers dominate rational ones") {
  const GroupPresentation torsion{{"a", "b"}, {{1, 1, 2, 2}}};
  IntMatrix inv = unipotent(2, 0, 1);
  inv(0, 1) = -1;
  const PadicRep rep{2, 2, {unipotent(2, 0, 1), inv}, 6};
  const auto t = run_tower(torsion, rep, presentation_complex(torsion), 4);
  const auto q = values(t.column(1, false));
  const auto fp = values(t.column(1, true));
  REQUIRE(q.size() == fp.size());
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(fp[i] >= q[i]);
}

TEST_CASE("budget failures give a partial table") {
  TowerOptions o;
  o.quotient.element_cap = 10;
  const auto t = run_tower(kCircle, circle_rep(2, 12), presentation_complex(kCircle), 6, o);
  REQUIRE(t.failed_level);
  CHECK(*t.failed_level == 4);
  CHECK(t.indices.size() == 3);
  CHECK_FALSE(t.failure.empty());
  CHECK_THROWS_AS(run_tower(kCircle, circle_rep(2, 3), presentation_complex(kCircle), 5), InputError);
}

TEST_CASE("cache replay is identical") {
  const auto dir = temp_dir("cache");
  TowerOptions o;
  o.cache_dir = dir.string();
  const auto first = run_tower(kWedge, pair_rep(2, 8), presentation_complex(kWedge), 3, o);
  const auto second = run_tower(kWedge, pair_rep(2, 8), presentation_complex(kWedge), 3, o);
  CHECK(first.cache_hits == 0);
  CHECK(second.cache_hits == 3);
  CHECK(first.cache_key == second.cache_key);
  CHECK(first.cache_key.size() == 16);
  REQUIRE(first.rows.size() == second.rows.size());
  for (std::size_t i = 0; i < first.rows.size(); ++i) {
    CHECK(first.rows[i].b_q == second.rows[i].b_q);
    CHECK(first.rows[i].b_fp == second.rows[i].b_fp);
    CHECK(first.rows[i].coker_q == second.rows[i].coker_q);
    CHECK(first.rows[i].coker_fp == second.rows[i].coker_fp);
  }
  const auto uncached = run_tower(kWedge, pair_rep(2, 8), presentation_complex(kWedge), 3);
  CHECK(betti_csv(uncached) == betti_csv(second));

  TowerOptions other = o;
  other.betti.rank_q.seed = 7;
  CHECK(run_tower(kWedge, pair_rep(2, 8), presentation_complex(kWedge), 3, other).cache_key != first.cache_key);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel jobs match serial runs") {
  TowerOptions o;
  o.jobs = 3;
  const auto par = run_tower(kTorus, pair_rep(2, 6), presentation_complex(kTorus), 3, o);
  const auto ser = run_tower(kTorus, pair_rep(2, 6), presentation_complex(kTorus), 3);
  CHECK(betti_csv(par) == betti_csv(ser));
}
