#include <gtest/gtest.h>

#include "cesmarket/formulations/markets.hpp"
#include "cesmarket/formulations/ves.hpp"
#include "cesmarket/metrics.hpp"
#include "fixtures.hpp"
#include "oracle/from_model.hpp"

namespace {

using namespace cesmarket;

void expect_physics(const Instance& inst, const ModelOutcome& o) {
  auto issues = check_physics(inst, o.schedule, o.physics);
  for (const auto& v : issues) ADD_FAILURE() << to_string(o.model) << ": " << v.what << " " << v.amount;
}

TEST(Census, SmallCesProgram) {
  Instance inst = fixtures::one_bc();
  inst.time.periods = 2;
  inst.buildings[0].scenarios[0].demand = {0, 10};
  inst.buildings[0].scenarios[0].renewable = {10, 0};
  populate_derived(inst);
  auto prog = build_ces_program(inst, std::vector<double>{2.0});
  EXPECT_EQ(prog.model.num_variables(), 18u + 2u + 2u);
  EXPECT_EQ(prog.model.num_variables(), shared_variable_census(inst));
  EXPECT_EQ(prog.model.num_binaries(), 2u * 4u + 1u);
}

TEST(Census, CesNeedsIndividualCosts) {
  EXPECT_THROW(build_ces_program(fixtures::two_bc(), std::vector<double>{1.0}), InputError);
}

TEST(Ies, TwoBcIndividualCost) {
  const auto inst = fixtures::two_bc();
  for (std::size_t i = 0; i < 2; ++i) {
    auto r = solve_ies_total(inst, i);
    EXPECT_NEAR(r.j_ind, 2.0, 1e-9);
    EXPECT_NEAR(r.energy, 10.0, 1e-9);
    EXPECT_NEAR(r.power, 10.0, 1e-9);
    EXPECT_NEAR(r.r_hat, 10.0, 1e-9);
    EXPECT_LE(r.j_ind, inst.baseline_bill[i] + 1e-9);
  }
}

TEST(Ies, ExpensiveStorageIsNotBuilt) {
  const auto inst = fixtures::two_bc(0.2, 0.2);
  auto r = solve_ies_total(inst, 0);
  EXPECT_NEAR(r.energy, 0.0, 1e-9);
  EXPECT_NEAR(r.power, 0.0, 1e-9);
  EXPECT_NEAR(r.j_ind, inst.baseline_bill[0], 1e-9);
}

TEST(Ies, MinCapitalLosslessIsLinear) {
  Instance inst = fixtures::one_bc();
  inst.time.periods = 2;
  inst.buildings[0].scenarios[0].demand = {0, 10};
  inst.buildings[0].scenarios[0].renewable = {10, 0};
  populate_derived(inst);
  EXPECT_NEAR(solve_ies_min_capital(inst, 0, 0.0).cost, 0.0, 1e-12);
  for (double r : {2.5, 5.0, 10.0}) {
    auto q = solve_ies_min_capital(inst, 0, r);
    ASSERT_TRUE(q.feasible);
    EXPECT_NEAR(q.cost, 0.2 * r, 1e-9);
  }
  auto curve = sweep_ies_curve(inst, 0, 2.5);
  ASSERT_EQ(curve.size(), 5u);
  for (const auto& p : curve) EXPECT_NEAR(p.cost, 0.2 * p.r, 1e-9);
}

TEST(Ies, MinCapitalWithLosses) {
  Instance inst = fixtures::one_bc();
  inst.time.periods = 2;
  inst.tech.eta_ch = inst.tech.eta_dis = 0.9;
  inst.buildings[0].scenarios[0].demand = {0, 10};
  inst.buildings[0].scenarios[0].renewable = {10, 0};
  populate_derived(inst);
  auto q = solve_ies_min_capital(inst, 0, 8.1);
  ASSERT_TRUE(q.feasible);
  EXPECT_NEAR(q.energy, 8.1 / 0.9, 1e-6);
  EXPECT_FALSE(solve_ies_min_capital(inst, 0, 8.2).feasible);
}

TEST(Ies, CurveGridIncludesEndpoint) {
  Instance inst = fixtures::one_bc();
  inst.buildings[0].scenarios[0].renewable = {25, 0, 0, 0};
  inst.buildings[0].scenarios[0].demand = {0, 25, 0, 0};
  populate_derived(inst);
  auto curve = sweep_ies_curve(inst, 0, 10.0);
  ASSERT_EQ(curve.size(), 4u);
  EXPECT_DOUBLE_EQ(curve[3].r, 25.0);
  for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_GE(curve[k].cost, curve[k - 1].cost - 1e-9);
}

TEST(Ies, FitQuadratic) {
  std::vector<CurvePoint> exact;
  for (double r : {0.0, 10.0, 20.0, 30.0}) exact.push_back({r, true, 3e-3 * r * r});
  auto fit = fit_quadratic(exact);
  EXPECT_NEAR(fit.q_hat, 3e-3, 1e-15);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);

  std::vector<CurvePoint> linear;
  double s3 = 0, s4 = 0;
  for (double r : {5.0, 10.0, 15.0}) {
    linear.push_back({r, true, 0.2 * r});
    s3 += r * r * r;
    s4 += r * r * r * r;
  }
  EXPECT_NEAR(fit_quadratic(linear).q_hat, 0.2 * s3 / s4, 1e-15);
  EXPECT_THROW(fit_quadratic({{0.0, true, 0.0}, {0.0, true, 0.0}}), InputError);
  EXPECT_THROW(fit_quadratic({{1.0, true, 1.0}}), InputError);
}

TEST(Ces, TwoBcFixture) {
  const auto inst = fixtures::two_bc();
  auto ies = solve_ies(inst);
  auto ces = solve_ces(inst, ies.j_ind());
  ASSERT_TRUE(ces.certified());
  for (const auto& b : ces.buildings) {
    EXPECT_TRUE(b.accepted);
    EXPECT_NEAR(b.r_star, 10.0, 1e-6);
    ASSERT_TRUE(b.q_star.has_value());
    EXPECT_NEAR(*b.q_star, 0.015, 1e-9);
    EXPECT_NEAR(b.payment, 1.5, 1e-6);
    EXPECT_NEAR(b.bill, 0.0, 1e-6);
  }
  EXPECT_NEAR(ces.energy, 10.0, 1e-6);
  EXPECT_NEAR(ces.power, 10.0, 1e-6);
  EXPECT_NEAR(ces.eso_profit, 1.0, 1e-6);
  EXPECT_TRUE(verify_equilibrium(ces, inst).passed);
  auto out = ces_model_outcome(ces, inst, &ies);
  expect_physics(inst, out);
  EXPECT_NEAR(social_cost(out).social_cost, 2.0, 1e-6);
}

TEST(Metrics, TwoBcIncentivesAndUtilization) {
  const auto inst = fixtures::two_bc();
  auto ies = solve_ies(inst);
  expect_physics(inst, ies.outcome);
  EXPECT_NEAR(social_cost(ies.outcome).social_cost, 4.0, 1e-6);
  for (double ci : consumer_incentive(ies.outcome, inst)) EXPECT_NEAR(ci, 1.0, 1e-6);

  auto ces = solve_ces(inst, ies.j_ind());
  auto out = ces_model_outcome(ces, inst, &ies);
  auto ci = consumer_incentive(out, inst);
  for (double v : ci) EXPECT_NEAR(v, 1.5, 1e-6);
  EXPECT_NEAR(ci[0] + ci[1] + out.eso_profit + social_cost(out).social_cost, 6.0, 1e-6);

  auto u = utilization_stats(out.schedule, out.energy, out.power, inst);
  ASSERT_FALSE(u.empty);
  const std::vector<double> expected{100, 0, 100, 0};
  for (std::size_t t = 0; t < 4; ++t) EXPECT_NEAR(u.energy_pct[0][t], expected[t], 1e-6);
  EXPECT_NEAR(u.peak_energy_pct, 100.0, 1e-6);
  EXPECT_NEAR(u.peak_power_pct, 100.0, 1e-6);
  EXPECT_NEAR(u.mean_energy_pct, 50.0, 1e-6);
}

TEST(Ces, RejectedFallbackNone) {
  const auto inst = fixtures::one_bc();
  auto ces = solve_ces(inst);
  auto ies = solve_ies(inst);
  auto with_ies = ces_model_outcome(ces, inst, &ies);
  EXPECT_NEAR(with_ies.social_cost, ies.outcome.social_cost, 1e-9);
  auto bare = ces_model_outcome(ces, inst, nullptr, RejectedFallback::none);
  EXPECT_NEAR(bare.social_cost, inst.baseline_bill[0], 1e-9);
  EXPECT_THROW(ces_model_outcome(ces, inst, nullptr), InputError);
}

TEST(Ces, TwoBcFixtureMatchesEnumerationOracle) {
  const auto inst = fixtures::two_bc();
  auto prog = build_ces_program(inst, std::vector<double>{2.0, 2.0});
  auto ref = oracle::model_optimum(prog.model);
  ASSERT_TRUE(ref.has_value());
  EXPECT_NEAR(*ref, 1.0, 1e-9);
  auto cm = build_cmes_program(inst);
  auto ref_cm = oracle::model_optimum(cm.model);
  ASSERT_TRUE(ref_cm.has_value());
  EXPECT_NEAR(*ref_cm, 2.0, 1e-9);
}

TEST(Ces, ExpensiveCapitalRejectsEveryone) {
  const auto inst = fixtures::two_bc(0.2, 0.2);
  auto ces = solve_ces(inst);
  for (const auto& b : ces.buildings) {
    EXPECT_FALSE(b.accepted);
    EXPECT_EQ(b.payment, 0.0);
    EXPECT_FALSE(b.q_star.has_value());
  }
  EXPECT_NEAR(ces.eso_profit, 0.0, 1e-9);
  EXPECT_TRUE(verify_equilibrium(ces, inst).passed);
}

TEST(Ces, SingleBuildingIsRejected) {
  const auto inst = fixtures::one_bc();
  auto ces = solve_ces(inst);
  EXPECT_FALSE(ces.buildings[0].accepted);
  EXPECT_NEAR(ces.eso_profit, 0.0, 1e-9);
}

TEST(Ces, NoSurplusMeansNoTrade) {
  auto inst = fixtures::two_bc();
  for (auto& b : inst.buildings) b.scenarios[0].renewable = {0, 0, 0, 0};
  populate_derived(inst);
  auto ces = solve_ces(inst);
  EXPECT_NEAR(ces.stats.objective, 0.0, 1e-12);
  for (const auto& b : ces.buildings) EXPECT_EQ(b.r_star, 0.0);
  auto cm = solve_cmes(inst);
  EXPECT_NEAR(cm.social_cost, inst.baseline_bill[0] + inst.baseline_bill[1], 1e-9);
  EXPECT_NEAR(cm.energy, 0.0, 1e-12);
}

TEST(Cmes, TwoBcFixture) {
  const auto inst = fixtures::two_bc();
  auto cm = solve_cmes(inst);
  EXPECT_NEAR(cm.social_cost, 2.0, 1e-6);
  EXPECT_NEAR(total_bills(cm), 0.0, 1e-6);
  EXPECT_NEAR(cm.operator_capital, 2.0, 1e-6);
  expect_physics(inst, cm);
}

TEST(Baseline, TwoBcFixture) {
  const auto inst = fixtures::two_bc();
  auto b = solve_baseline(inst);
  EXPECT_NEAR(b.social_cost, 6.0, 1e-12);
  expect_physics(inst, b);
}

TEST(Formulations, RelaxedExclusivityAgrees) {
  const auto inst = fixtures::two_bc();
  SolverOptions relaxed;
  relaxed.relaxed_exclusivity = true;
  auto a = solve_ces(inst);
  auto b = solve_ces(inst, relaxed);
  EXPECT_NEAR(a.eso_profit, b.eso_profit, 1e-6);
  EXPECT_NEAR(solve_cmes(inst).social_cost, solve_cmes(inst, relaxed).social_cost, 1e-6);
  EXPECT_NEAR(solve_ies_total(inst, 0).j_ind, solve_ies_total(inst, 0, relaxed).j_ind, 1e-6);
}

TEST(Ves, TwoBcLeases) {
  const auto inst = fixtures::two_bc();
  auto r = solve_ves_bc(inst, 0, 0.1);
  EXPECT_NEAR(r.capacity, 10.0, 1e-9);
  EXPECT_NEAR(r.total_cost(), 1.0, 1e-9);
  auto expensive = solve_ves_bc(inst, 0, 0.31);
  EXPECT_NEAR(expensive.capacity, 0.0, 1e-12);
  EXPECT_NEAR(expensive.total_cost(), inst.baseline_bill[0], 1e-9);
  auto free = solve_ves_bc(inst, 0, 0.0);
  EXPECT_NEAR(free.capacity, free.schedule.peak_soc(0), 1e-12);
  EXPECT_NEAR(free.capacity, 10.0, 1e-9);
}

TEST(Ves, EquilibriumOnGrid) {
  const auto inst = fixtures::two_bc();
  auto grid = price_grid(0.05, 0.5, 0.002);
  ASSERT_EQ(grid.size(), 226u);
  auto ves = ves_equilibrium(inst, std::vector<double>(grid.begin(), grid.begin() + 40));
  for (const auto& pt : ves.points) {
    EXPECT_NEAR(pt.total_capacity, 20.0, 1e-9);
    EXPECT_NEAR(pt.eso_profit, 20.0 * pt.price - 3.5, 1e-9);
    EXPECT_LE(pt.eso_profit, ves.best().eso_profit);
  }
  EXPECT_EQ(ves.equilibrium, ves.points.size() - 1);
  auto out = ves_model_outcome(ves);
  expect_physics(inst, out);
  auto row = social_cost(out);
  auto ci = consumer_incentive(out, inst);
  EXPECT_NEAR(ci[0] + ci[1] + out.eso_profit + row.social_cost, 6.0, 1e-9);
}

TEST(Ves, GridValidation) {
  EXPECT_EQ(price_grid(0.1, 0.1, 0.01).size(), 1u);
  EXPECT_THROW(price_grid(0.1, 0.2, 0.0), InputError);
  EXPECT_THROW(ves_equilibrium(fixtures::two_bc(), {}), InputError);
  EXPECT_THROW(ves_equilibrium(fixtures::two_bc(), {0.2, 0.1}), InputError);
}

TEST(Ves, PeakSocSizingOption) {
  const auto inst = fixtures::two_bc();
  auto ves = ves_equilibrium(inst, {0.1}, {}, VesSizing::peak_aggregate_soc);
  EXPECT_NEAR(ves.best().energy, 10.0, 1e-9);
  EXPECT_NEAR(ves.best().eso_profit, 2.0 - 2.0, 1e-9);
}

}  // namespace
