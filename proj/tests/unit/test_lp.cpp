#include <gtest/gtest.h>

#include "dro/lp.hpp"

using namespace dro::lp;

TEST(Lp, SolvesTextbookProblem) {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
  Problem p;
  p.objective = {-3.0, -5.0};
  p.add({1.0, 0.0}, Sense::LessEqual, 4.0);
  p.add({0.0, 2.0}, Sense::LessEqual, 12.0);
  p.add({3.0, 2.0}, Sense::LessEqual, 18.0);
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.objective, -36.0, 1e-12);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], 6.0, 1e-12);
}

TEST(Lp, HandlesEqualityAndGreaterEqualRows) {
  Problem p;
  p.objective = {1.0, 2.0, 3.0};
  p.add({1.0, 1.0, 1.0}, Sense::Equal, 1.0);
  p.add({0.0, 1.0, 1.0}, Sense::GreaterEqual, 0.5);
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.objective, 1.5, 1e-12);
}

TEST(Lp, NegativeRightHandSides) {
  Problem p;
  p.objective = {1.0, 1.0};
  p.add({-1.0, -1.0}, Sense::LessEqual, -2.0);
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.objective, 2.0, 1e-12);
}

TEST(Lp, DetectsInfeasibility) {
  Problem p;
  p.objective = {1.0, 1.0};
  p.add({1.0, 1.0}, Sense::Equal, 1.0);
  p.add({1.0, 1.0}, Sense::GreaterEqual, 2.0);
  EXPECT_EQ(solve(p).status, Status::Infeasible);
}

TEST(Lp, DetectsUnboundedness) {
  Problem p;
  p.objective = {-1.0, 0.0};
  p.add({1.0, -1.0}, Sense::LessEqual, 1.0);
  EXPECT_EQ(solve(p).status, Status::Unbounded);
}

TEST(Lp, RedundantEqualitiesAreHarmless) {
  Problem p;
  p.objective = {1.0, 0.0, 0.0};
  p.add({1.0, 1.0, 1.0}, Sense::Equal, 1.0);
  p.add({2.0, 2.0, 2.0}, Sense::Equal, 2.0);
  p.add({0.0, 1.0, 0.0}, Sense::Equal, 0.25);
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.objective, 0.0, 1e-12);
  EXPECT_NEAR(r.x[1], 0.25, 1e-12);
  EXPECT_NEAR(r.x[2], 0.75, 1e-12);
}

TEST(Lp, DegenerateAssignmentPolytope) {
  const int n = 5;
  Problem p;
  p.objective.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.objective[i * n + j] = (i * 7 + j * 3) % n;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(n * n, 0.0), col(n * n, 0.0);
    for (int j = 0; j < n; ++j) {
      row[i * n + j] = 1.0;
      col[j * n + i] = 1.0;
    }
    p.add(row, Sense::Equal, 1.0);
    p.add(col, Sense::Equal, 1.0);
  }
  const Result r = solve(p);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_NEAR(r.objective, 0.0, 1e-12);
}
