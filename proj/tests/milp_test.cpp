#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <sstream>

#include "cesmarket/milp/backend.hpp"
#include "cesmarket/milp/feasibility.hpp"
#include "oracle/from_model.hpp"
#include "oracle/random_milp.hpp"

namespace {

using namespace cesmarket::milp;
using oracle::random_model;

MilpModel knapsack() {
  const double value[] = {10, 13, 7, 8, 11, 4, 9, 6};
  const double weight[] = {5, 7, 3, 4, 6, 2, 5, 3};
  MilpModel m(Sense::maximize);
  std::vector<Term> obj, row;
  for (int k = 0; k < 8; ++k) {
    VarId x = m.add_binary();
    obj.push_back({x, value[k]});
    row.push_back({x, weight[k]});
  }
  m.add_constraint(row, Relation::less_equal, 17);
  m.set_objective(obj);
  return m;
}

double knapsack_by_enumeration() {
  const double value[] = {10, 13, 7, 8, 11, 4, 9, 6};
  const double weight[] = {5, 7, 3, 4, 6, 2, 5, 3};
  double best = 0;
  for (int mask = 0; mask < 256; ++mask) {
    double v = 0, w = 0;
    for (int k = 0; k < 8; ++k)
      if (mask >> k & 1) {
        v += value[k];
        w += weight[k];
      }
    if (w <= 17) best = std::max(best, v);
  }
  return best;
}

// Random mixed model with <= 12 binaries and a few bounded continuous
// variables, rows only of <= / >= kind; feasible by construction at x = 0
// for <= rows with nonnegative rhs.
TEST(MilpModel, CountsAndIds) {
  MilpModel m;
  auto a = m.add_variable(0, 1);
  auto b = m.add_variable(0, kInf);
  m.add_constraint({{a, 1}, {b, 1}}, Relation::less_equal, 3);
  EXPECT_EQ(m.num_variables(), 2u);
  EXPECT_EQ(m.num_constraints(), 1u);
  EXPECT_THROW(m.add_constraint({{VarId{5}, 1.0}}, Relation::less_equal, 1), ModelError);
  EXPECT_THROW(m.add_constraint({{a, std::nan("")}}, Relation::less_equal, 1), ModelError);
  EXPECT_THROW(m.add_constraint({{a, 1.0}}, Relation::less_equal, kInf), ModelError);
  EXPECT_THROW(m.add_variable(2, 1), ModelError);
  EXPECT_THROW(m.add_variable(0, 2, Integrality::binary), ModelError);
}

TEST(MilpModel, SetObjectiveLastWriteWins) {
  MilpModel m;
  auto a = m.add_variable(0, 1);
  auto b = m.add_variable(0, 1);
  m.set_objective({{a, 1.0}});
  m.set_objective({{b, 2.0}}, 1.5);
  EXPECT_EQ(m.objective()[0], 0.0);
  EXPECT_EQ(m.objective()[1], 2.0);
  EXPECT_EQ(m.objective_constant(), 1.5);
}

TEST(MilpModel, DuplicateTermsMerge) {
  MilpModel m;
  auto a = m.add_variable(0, 1);
  m.add_constraint({{a, 1.0}, {a, 2.0}}, Relation::less_equal, 1);
  ASSERT_EQ(m.constraints()[0].row.size(), 1u);
  EXPECT_EQ(m.constraints()[0].row[0].coef, 3.0);
}

TEST(MilpSolve, SingleBinaryMax) {
  MilpModel m(Sense::maximize);
  auto x = m.add_binary();
  m.set_objective({{x, 1.0}});
  auto sol = solve(m);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_EQ(sol.value(x), 1.0);
  EXPECT_DOUBLE_EQ(sol.objective, 1.0);
}

TEST(MilpSolve, Infeasible) {
  MilpModel m;
  auto x = m.add_variable(-kInf, kInf);
  m.add_constraint({{x, 1.0}}, Relation::greater_equal, 1);
  m.add_constraint({{x, 1.0}}, Relation::less_equal, 0);
  EXPECT_EQ(solve(m).status, SolveStatus::infeasible);
}

TEST(MilpSolve, Unbounded) {
  MilpModel m(Sense::maximize);
  auto x = m.add_variable(0, kInf);
  auto y = m.add_binary();
  m.add_constraint({{x, 1.0}, {y, -1.0}}, Relation::greater_equal, 0);
  m.set_objective({{x, 1.0}});
  EXPECT_EQ(solve(m).status, SolveStatus::unbounded);
}

TEST(MilpSolve, KnapsackMatchesEnumeration) {
  auto m = knapsack();
  auto sol = solve(m);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.objective, knapsack_by_enumeration(), 1e-9);
  EXPECT_TRUE(check_feasibility(m, sol.values).empty());
  EXPECT_GE(sol.root_relaxation, sol.objective - 1e-9);
}

TEST(MilpSolve, EqualityAndFreeVariables) {
  // min |x - 2.5| over x = y + z, y binary, z in [-1, 1].
  MilpModel m;
  auto x = m.add_variable(-kInf, kInf);
  auto y = m.add_binary();
  auto z = m.add_variable(-1, 1);
  auto d = m.add_variable(0, kInf);
  m.add_constraint({{x, 1.0}, {y, -1.0}, {z, -1.0}}, Relation::equal, 0);
  m.add_constraint({{d, 1.0}, {x, -1.0}}, Relation::greater_equal, -2.5);
  m.add_constraint({{d, 1.0}, {x, 1.0}}, Relation::greater_equal, 2.5);
  m.set_objective({{d, 1.0}});
  auto sol = solve(m);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.objective, 0.5, 1e-9);
  EXPECT_EQ(sol.value(y), 1.0);
}

TEST(MilpSolve, RandomModelsMatchEnumerationOracle) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto m = random_model(seed);
    auto sol = solve(m);
    auto ref = oracle::model_optimum(m);
    SCOPED_TRACE(seed);
    if (!ref) {
      EXPECT_EQ(sol.status, SolveStatus::infeasible);
      continue;
    }
    ASSERT_EQ(sol.status, SolveStatus::optimal);
    EXPECT_NEAR(sol.objective, *ref, 1e-6 * std::max(1.0, std::abs(*ref)));
    EXPECT_TRUE(check_feasibility(m, sol.values).empty());
    auto relax = oracle::model_optimum(m, true);
    ASSERT_TRUE(relax.has_value());
    EXPECT_NEAR(sol.root_relaxation, *relax, 1e-6 * std::max(1.0, std::abs(*relax)));
    if (m.sense() == Sense::maximize)
      EXPECT_GE(sol.root_relaxation, sol.objective - 1e-9);
    else
      EXPECT_LE(sol.root_relaxation, sol.objective + 1e-9);
  }
}

TEST(MilpSolve, ResolveIsBitIdentical) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    auto m = random_model(seed);
    auto a = solve(m);
    auto b = solve(m);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.nodes, b.nodes);
  }
}

TEST(MilpSolve, NodeLimitReportsIncumbentAndBound) {
  auto m = knapsack();
  SolveParams p;
  p.node_limit = 1;
  auto sol = solve(m, p);
  if (sol.status == SolveStatus::limit_reached) {
    EXPECT_GE(sol.bound, knapsack_by_enumeration() - 1e-9);
    if (sol.has_incumbent) {
      EXPECT_LE(sol.objective, knapsack_by_enumeration() + 1e-9);
    }
  } else {
    EXPECT_EQ(sol.status, SolveStatus::optimal);
  }
}

TEST(Feasibility, DetectsViolations) {
  MilpModel m;
  auto x = m.add_binary("x");
  auto y = m.add_variable(0, 2, Integrality::continuous, "y");
  m.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::less_equal, 2, "cap");
  EXPECT_TRUE(check_feasibility(m, std::vector<double>{1.0, 1.0}).empty());
  auto v = check_feasibility(m, std::vector<double>{0.5, 2.0});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].what, "x not integral");
  EXPECT_EQ(v[1].what, "cap violated");
}

TEST(Backend, ReferenceMatchesSolve) {
  auto m = knapsack();
  EXPECT_DOUBLE_EQ(solve_with_backend(m, {}, "reference").objective, solve(m).objective);
}

TEST(Backend, UnknownNameThrows) {
  auto m = knapsack();
  EXPECT_THROW(solve_with_backend(m, {}, "gurobi"), cesmarket::BackendUnavailable);
}

TEST(Backend, LpFormatExport) {
  auto m = knapsack();
  std::ostringstream os;
  write_lp_format(m, os);
  const std::string text = os.str();
  EXPECT_NE(text.find("Maximize"), std::string::npos);
  EXPECT_NE(text.find("Binaries"), std::string::npos);
  EXPECT_NE(text.find("<= 17"), std::string::npos);
}

#ifdef CESMARKET_SCIPY_BACKEND
TEST(Backend, ExternalAgreesWithReference) {
  ::setenv("CESMARKET_MILP_COMMAND", "python3 " CESMARKET_SCIPY_BACKEND, 1);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 200 && checked < 5; ++seed) {
    int nb = 0;
    auto m = random_model(seed, &nb);
    if (nb != 10) continue;
    auto ref = solve(m);
    if (ref.status != SolveStatus::optimal) continue;
    auto ext = solve_with_backend(m, {}, "external");
    ASSERT_EQ(ext.status, SolveStatus::optimal) << seed;
    EXPECT_NEAR(ext.objective, ref.objective, 1e-6 * std::max(1.0, std::abs(ref.objective))) << seed;
    EXPECT_TRUE(check_feasibility(m, ext.values).empty()) << seed;
    ++checked;
  }
  EXPECT_EQ(checked, 5);
  ::unsetenv("CESMARKET_MILP_COMMAND");
}
#endif

}  // namespace
