#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ugvbs/mobility.hpp"

using namespace ugvbs;

namespace {

Matrix euclidean(const std::vector<Point2> &pts) {
  Matrix D(pts.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      D(i, j) = distance(pts[i], pts[j]);
  return D;
}

Matrix random_points(std::size_t M, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 20.0);
  std::vector<Point2> pts(M);
  for (auto &p : pts)
    p = {u(rng), u(rng)};
  return euclidean(pts);
}

} // namespace

TEST_CASE("selection basics") {
  const Selection s = Selection::parse("1010");
  CHECK(s.size() == 4);
  CHECK(s.count() == 2);
  CHECK(s.contains(0));
  CHECK(s.contains(2));
  CHECK_FALSE(s.contains(1));
  CHECK(s.to_string() == "1010");
  CHECK(s.indices() == std::vector<std::size_t>{0, 2});
  CHECK(s.flipped(1).to_string() == "1110");
  CHECK(s.hamming(Selection::all(4)) == 2);
  CHECK(Selection::depot_only(3).to_string() == "100");
  CHECK_THROWS_AS(Selection::parse("0110"), std::invalid_argument);
  CHECK_THROWS_AS(Selection::parse("1x"), std::invalid_argument);
  CHECK_THROWS_AS(s.flipped(0), std::out_of_range);
  CHECK_THROWS_AS(Selection::from_bits(3, 0b1001), std::invalid_argument);
}

TEST_CASE("depot-only tour is empty") {
  Matrix D(3, 3, 5.0);
  for (int i = 0; i < 3; ++i)
    D(i, i) = 0.0;
  PhysicalParams p;
  const TspResult r = solve_tsp(Selection::depot_only(3), D, p);
  CHECK(r.tour_length == 0.0);
  CHECK(r.upsilon == p.horizon_T);
  CHECK(r.plan.order == std::vector<std::size_t>{0});
  CHECK(check_mtz(r.plan).ok);
}

TEST_CASE("square tour") {
  // Unit-speed square of side 3: perimeter 12, the diagonal tour is longer.
  const Matrix D = euclidean({{0, 0}, {3, 0}, {3, 3}, {0, 3}});
  PhysicalParams p;
  const TspResult r = solve_tsp(Selection::all(4), D, p);
  CHECK(r.tour_length == doctest::Approx(12.0));
  CHECK(r.upsilon == doctest::Approx(38.0));
  CHECK(r.plan.order == std::vector<std::size_t>{0, 1, 2, 3, 0});
  CHECK(motion_time(r.plan, D, 2.0) == doctest::Approx(6.0));
  CHECK(motion_energy(r.plan, D, p) == doctest::Approx(12.0 * 7.69));
  const MtzReport rep = check_mtz(r.plan, true);
  CHECK(rep.ok);
}

TEST_CASE("two vertices visited out and back") {
  const Matrix D = euclidean({{0, 0}, {5, 0}});
  PhysicalParams p;
  p.speed_a = 0.5;
  const TspResult r = solve_tsp(Selection::all(2), D, p);
  CHECK(r.tour_length == doctest::Approx(10.0));
  CHECK(r.upsilon == doctest::Approx(30.0));
}

TEST_CASE("missing edges make the tour infeasible") {
  Matrix D = euclidean({{0, 0}, {1, 0}, {0, 1}});
  D(0, 1) = kInf;
  D(1, 0) = kInf;
  PhysicalParams p;
  const TspResult r = solve_tsp(Selection::parse("110"), D, p);
  CHECK_FALSE(r.has_tour());
  CHECK(r.upsilon == -kInf);
  // Still reachable through vertex 2 when it is selected too: 0 -> 2 -> 1 needs 1 -> 0.
  CHECK_FALSE(solve_tsp(Selection::all(3), D, p).has_tour());
  D(1, 0) = 3.0;
  const TspResult r2 = solve_tsp(Selection::all(3), D, p);
  REQUIRE(r2.has_tour());
  CHECK(r2.plan.order == std::vector<std::size_t>{0, 2, 1, 0});
}

TEST_CASE("held-karp agrees with brute force on asymmetric graphs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  PhysicalParams p;
  for (int inst = 0; inst < 10; ++inst) {
    const std::size_t M = 7;
    Matrix D(M, M);
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < M; ++j)
        D(i, j) = i == j ? 0.0 : (u(rng) < 2.0 ? kInf : u(rng));
    for (std::uint64_t c = 0; c < (1u << (M - 1)); ++c) {
      const Selection sel = Selection::from_bits(M, (c << 1) | 1u);
      auto idx = sel.indices();
      idx.erase(idx.begin());
      const double expect = oracle::brute_force_tour(D, idx);
      const TspResult r = solve_tsp(sel, D, p);
      if (expect == kInf) {
        CHECK_FALSE(r.has_tour());
      } else {
        REQUIRE(r.has_tour());
        CHECK(r.tour_length == doctest::Approx(expect).epsilon(1e-12));
        CHECK(tour_length(r.plan, D) == doctest::Approx(r.tour_length).epsilon(1e-12));
        CHECK(check_mtz(r.plan).ok);
        CHECK(check_mtz(r.plan, true).ok);
      }
    }
  }
}

TEST_CASE("tsp is deterministic and picks the lexicographically first optimum") {
  // Symmetric instance: both directions tie, forward order must win.
  const Matrix D = euclidean({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  PhysicalParams p;
  const TspResult a = solve_tsp(Selection::all(4), D, p);
  const TspResult b = solve_tsp(Selection::all(4), D, p);
  CHECK(a.plan.order == b.plan.order);
  CHECK(a.plan.order.at(1) == 1);
}

TEST_CASE("selection above the cap is refused") {
  std::mt19937_64 rng(1);
  const Matrix D = random_points(26, rng);
  PhysicalParams p;
  CHECK_THROWS_AS(solve_tsp(Selection::all(26), D, p), std::length_error);
  const Matrix D6 = random_points(6, rng);
  CHECK_THROWS_AS(solve_tsp(Selection::all(6), D6, p, 5), std::length_error);
  CHECK_THROWS_AS(solve_tsp(Selection::all(6), D, p), std::invalid_argument);
}

TEST_CASE("mtz check rejects two disjoint 2-cycles") {
  TourPlan plan;
  plan.selection = Selection::all(4);
  plan.edge_W = EdgeMatrix(4);
  plan.edge_W(0, 1) = plan.edge_W(1, 0) = 1;
  plan.edge_W(2, 3) = plan.edge_W(3, 2) = 1;
  plan.mtz_lambda = {0, 1, 2, 3};
  const MtzReport rep = check_mtz(plan);
  CHECK_FALSE(rep.ok);
  CHECK(rep.cycles.size() == 2);
  CHECK_FALSE(rep.mtz_violations.empty());
  CHECK(rep.degree_violations.empty());
  CHECK_FALSE(check_mtz(plan, true).ok);
  CHECK(rep.summary().find("disjoint") != std::string::npos);
}

TEST_CASE("mtz check rejects a subtour avoiding the depot") {
  // Depot loop 0->1->0 plus 2->3->4->2.
  TourPlan plan;
  plan.selection = Selection::all(5);
  plan.edge_W = EdgeMatrix(5);
  plan.edge_W(0, 1) = plan.edge_W(1, 0) = 1;
  plan.edge_W(2, 3) = plan.edge_W(3, 4) = plan.edge_W(4, 2) = 1;
  const MtzReport rep = check_mtz(plan);
  CHECK_FALSE(rep.ok);
  CHECK_FALSE(rep.mtz_violations.empty());
}

TEST_CASE("mtz check flags degree errors and bad slacks") {
  TourPlan plan = TourPlan::from_order(Selection::parse("1101"), {0, 1, 3, 0});
  CHECK(check_mtz(plan, true).ok);
  CHECK(plan.mtz_lambda == std::vector<double>{0, 1, 0, 2});

  TourPlan bad = plan;
  bad.edge_W(0, 2) = 1; // vertex 2 is not selected
  CHECK_FALSE(check_mtz(bad).ok);

  TourPlan wrong_lambda = plan;
  wrong_lambda.mtz_lambda = {0, 2, 0, 1}; // order reversed against the edges
  CHECK_FALSE(check_mtz(wrong_lambda, true).ok);
  CHECK(check_mtz(wrong_lambda, false).ok);

  TourPlan depot = TourPlan::from_order(Selection::depot_only(3), {0});
  CHECK(check_mtz(depot).ok);
  depot.edge_W(0, 1) = 1;
  CHECK_FALSE(check_mtz(depot).ok);
}

TEST_CASE("motion helpers") {
  const Matrix D = euclidean({{0, 0}, {5, 0}});
  const TourPlan plan = TourPlan::from_order(Selection::all(2), {0, 1, 0});
  CHECK(tour_length(plan, D) == doctest::Approx(10.0));
  CHECK_THROWS_AS(motion_time(plan, D, 0.0), std::invalid_argument);
  PhysicalParams p;
  CHECK(motion_energy(plan, D, p) == doctest::Approx(76.9));
}
