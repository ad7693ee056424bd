#include <doctest.h>

#include "dpp/simplex.hpp"

using namespace dpp::lp;
using Vec = Eigen::VectorXd;

TEST_CASE("textbook maximisation") {
  // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
  LinearProgram<double> lp(2);
  lp.cost << -3, -5;
  lp.add_upper(Vec::Unit(2, 0), 4);
  lp.add_upper(Vec((Vec(2) << 0, 2).finished()), 12);
  lp.add_upper(Vec((Vec(2) << 3, 2).finished()), 18);
  const auto sol = solve(lp);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.objective == doctest::Approx(-36).epsilon(1e-12));
  CHECK(sol.x(0) == doctest::Approx(2).epsilon(1e-12));
  CHECK(sol.x(1) == doctest::Approx(6).epsilon(1e-12));
}

TEST_CASE("equality and negative right-hand sides need phase one") {
  // min x + y st x + y = 2, -x <= -0.5
  LinearProgram<double> lp(2);
  lp.cost << 1, 1;
  lp.add_equality(Vec::Ones(2), 2);
  lp.add_upper(Vec((Vec(2) << -1, 0).finished()), -0.5);
  const auto sol = solve(lp);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.objective == doctest::Approx(2).epsilon(1e-12));
  CHECK(sol.x(0) >= 0.5 - 1e-12);
}

TEST_CASE("infeasible and unbounded programs") {
  LinearProgram<double> infeasible(1);
  infeasible.cost << 1;
  infeasible.add_upper(Vec::Ones(1), 1);
  infeasible.add_upper(-Vec::Ones(1), -2);
  CHECK(solve(infeasible).status == Status::Infeasible);

  LinearProgram<double> unbounded(2);
  unbounded.cost << -1, 0;
  unbounded.add_upper(Vec((Vec(2) << 0, 1).finished()), 1);
  CHECK(solve(unbounded).status == Status::Unbounded);
}

TEST_CASE("degenerate vertex terminates") {
  // Several constraints meet at the optimum (1, 1).
  LinearProgram<double> lp(2);
  lp.cost << -1, -1;
  lp.add_upper(Vec::Unit(2, 0), 1);
  lp.add_upper(Vec::Unit(2, 1), 1);
  lp.add_upper(Vec::Ones(2), 2);
  lp.add_upper(Vec((Vec(2) << 2, 1).finished()), 3);
  lp.add_upper(Vec((Vec(2) << 1, 2).finished()), 3);
  const auto sol = solve(lp);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.objective == doctest::Approx(-2).epsilon(1e-12));
}

TEST_CASE("redundant equalities") {
  LinearProgram<double> lp(3);
  lp.cost << 1, 2, 3;
  lp.add_equality(Vec::Ones(3), 1);
  lp.add_equality(2 * Vec::Ones(3), 2);
  const auto sol = solve(lp);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.objective == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("long double instantiation") {
  LinearProgram<long double> lp(1);
  lp.cost << -1;
  lp.add_upper(Eigen::Matrix<long double, 1, 1>::Ones(), 0.75L);
  const auto sol = solve(lp, 1e-15L);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(static_cast<double>(sol.x(0)) == 0.75);
}
