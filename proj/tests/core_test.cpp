#include <gtest/gtest.h>

#include <cmath>

#include "cesmarket/formulations/markets.hpp"
#include "cesmarket/game.hpp"
#include "cesmarket/generator.hpp"
#include "cesmarket/instance_json.hpp"
#include "cesmarket/metrics.hpp"
#include "fixtures.hpp"

namespace {

using namespace cesmarket;

// Annuity factor by repeated multiplication, independent of std::pow.
long double crf_oracle(long double rate, int years) {
  long double g = 1.0L;
  for (int k = 0; k < years; ++k) g *= 1.0L + rate;
  return rate * g / (g - 1.0L);
}

TEST(Amortize, DailyPrices) {
  EXPECT_NEAR(amortize(100, 0.06, 10, 365), static_cast<double>(100 * crf_oracle(0.06L, 10) / 365), 1e-15);
  EXPECT_NEAR(amortize(100, 0.06, 10, 365), 0.037224, 5e-7);
  EXPECT_NEAR(amortize(300, 0.06, 10, 365), 0.111672, 5e-7);
  EXPECT_DOUBLE_EQ(amortize(50, 0.0, 5, 1), 10.0);
  EXPECT_NEAR(amortize(7 * 100, 0.06, 10, 365), 7 * amortize(100, 0.06, 10, 365), 1e-15);
  EXPECT_THROW(amortize(1, -0.1, 10, 365), std::invalid_argument);
  EXPECT_THROW(amortize(1, 0.1, 0.5, 365), std::invalid_argument);
}

TEST(Scenario, RusAndBaselineBill) {
  BuildingProfile b{"x", {{1.0, {0, 10}, {10, 0}}}, std::nullopt};
  TimeGrid g{2, 1.0};
  GridTariff tf{0.3, 0.0, 100.0};
  EXPECT_DOUBLE_EQ(max_rus(b, g), 10.0);
  EXPECT_DOUBLE_EQ(baseline_bill(b, tf, g), 3.0);
  BuildingProfile two{"y", {{0.5, {0, 0}, {10, 0}}, {0.5, {0, 0}, {20, 0}}}, std::nullopt};
  EXPECT_DOUBLE_EQ(max_rus(two, g), 15.0);
  EXPECT_DOUBLE_EQ(baseline_bill(two, tf, g), 0.0);
  BuildingProfile dark{"z", {{1.0, {5, 5}, {0, 0}}}, std::nullopt};
  EXPECT_DOUBLE_EQ(max_rus(dark, g), 0.0);
  EXPECT_DOUBLE_EQ(baseline_bill(dark, tf, TimeGrid{2, 0.5}), 1.5);
}

TEST(Scenario, ValidationDiagnostics) {
  auto inst = fixtures::two_bc();
  EXPECT_TRUE(validate_instance(inst).empty());

  auto bad = inst;
  bad.tech.eta_ch = 1.2;
  auto d = validate_instance(bad);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].path, "tech.eta_ch");

  bad = inst;
  bad.r_min[0] = bad.r_max[0] + 1;
  d = validate_instance(bad);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].path, "derived.r_min[0]");

  bad = inst;
  bad.tariff.sell_price = 0.4;
  d = validate_instance(bad);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].path, "tariff.buy");

  bad = inst;
  bad.buildings[1].scenarios[0].probability = 0.9;
  d = validate_instance(bad);
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d.back().path, "buildings[1].scenarios");

  bad = inst;
  bad.buildings[0].scenarios[0].demand.pop_back();
  populate_derived(bad);
  d = validate_instance(bad);
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d[0].path, "buildings[0].scenarios[0].demand");
}

const char* kOneBc = R"({
  "time": {"T": 2},
  "tariff": {"buy": 0.3, "sell": 0.0, "p_grid_max": 100},
  "tech": {"eta_ch": 0.9, "eta_dis": 0.9, "p_ch_max": 50, "p_dis_max": 50,
           "capex_e_eur_per_kwh": 100, "capex_p_eur_per_kw": 300,
           "interest_rate": 0.06, "lifetime_years": 10, "exchange_rate": 1.0},
  "buildings": [{"name": "A", "scenarios": [{"prob": 1.0, "demand": [0, 10], "renewable": [10, 0]}]}]
})";

TEST(InstanceJson, ParseAndRoundTrip) {
  auto inst = parse_instance(kOneBc);
  EXPECT_EQ(inst.num_periods(), 2u);
  EXPECT_EQ(inst.num_buildings(), 1u);
  EXPECT_DOUBLE_EQ(inst.time.dt_hours, 1.0);
  EXPECT_DOUBLE_EQ(inst.tech.periods_per_year, 365.0);
  EXPECT_NEAR(inst.tech.energy_price, 0.037224, 5e-7);
  EXPECT_DOUBLE_EQ(inst.r_max[0], 10.0);
  EXPECT_DOUBLE_EQ(inst.baseline_bill[0], 3.0);
  auto again = parse_instance(instance_to_json(inst).dump());
  EXPECT_EQ(instance_to_json(again), instance_to_json(inst));
}

TEST(InstanceJson, Errors) {
  EXPECT_THROW(parse_instance("{"), InstanceParseError);
  auto doc = nlohmann::json::parse(kOneBc);
  auto no_rate = doc;
  no_rate["tech"].erase("exchange_rate");
  EXPECT_THROW(parse_instance(no_rate.dump()), InstanceParseError);
  auto bad_prob = doc;
  bad_prob["buildings"][0]["scenarios"][0]["prob"] = 0.9;
  EXPECT_THROW(parse_instance(bad_prob.dump()), InstanceValidationError);
  auto sell_high = doc;
  sell_high["tariff"]["sell"] = 0.5;
  try {
    parse_instance(sell_high.dump());
    FAIL() << "expected a validation error";
  } catch (const InstanceValidationError& e) {
    ASSERT_EQ(e.diagnostics.size(), 1u);
    EXPECT_EQ(e.diagnostics[0].path, "tariff.buy");
  }
  EXPECT_THROW(load_instance("/nonexistent/instance.json"), InputError);
}

TEST(Game, BestResponseSegments) {
  GridTariff tf{0.3, 0.0, 100};
  auto a = follower_best_response(0.015, tf, 0, 10);
  EXPECT_DOUBLE_EQ(a.r, 10.0);
  EXPECT_EQ(a.segment, Segment::at_upper);
  auto b = follower_best_response(0.03, tf, 0, 10);
  EXPECT_DOUBLE_EQ(b.r, 5.0);
  EXPECT_EQ(b.segment, Segment::interior);
  auto c = follower_best_response(1e12, tf, 0, 10);
  EXPECT_NEAR(c.r, 0.0, 1e-9);
  auto d = follower_best_response(1.0, tf, 2, 10);
  EXPECT_DOUBLE_EQ(d.r, 2.0);
  EXPECT_EQ(d.segment, Segment::at_lower);
  EXPECT_THROW(follower_best_response(0.0, tf, 0, 10), std::invalid_argument);
  EXPECT_THROW(follower_best_response(0.1, tf, 5, 1), std::invalid_argument);
}

TEST(Game, BestResponseProperties) {
  GridTariff tf{0.3, 0.0, 100};
  double prev = 1e300;
  for (int k = 1; k <= 400; ++k) {
    const double q = 1e-4 * k;
    const auto br = follower_best_response(q, tf, 0, 200);
    EXPECT_LE(br.r, prev);
    prev = br.r;
    if (br.segment == Segment::interior) {
      EXPECT_NEAR(equilibrium_price(br.r, tf), q, 1e-15);
      GridTariff scaled{0.6, 0.0, 100};
      EXPECT_NEAR(follower_best_response(q, scaled, 0, 1e9).r, 2 * br.r, 1e-9);
    }
  }
}

TEST(Game, PriceIdentity) {
  GridTariff tf{0.3, 0.0, 100};
  EXPECT_DOUBLE_EQ(equilibrium_price(10, tf), 0.015);
  EXPECT_NEAR(equilibrium_price(50.81, tf), 2.952e-3, 1e-6);
  EXPECT_NEAR(equilibrium_price(114.88, tf), 1.306e-3, 1e-6);
  EXPECT_THROW(equilibrium_price(0.0, tf), UndefinedPrice);
}

TEST(Game, VerifyCatchesPerturbation) {
  const auto inst = fixtures::two_bc();
  std::vector<FollowerRecord> f{{true, 10, 0.015, 0, 2}, {true, 10, 0.015, 0, 2}};
  EXPECT_TRUE(verify_equilibrium(f, 1.0, inst).passed);
  auto bumped = f;
  bumped[0].q_star *= 1.1;
  auto rep = verify_equilibrium(bumped, 1.0, inst);
  ASSERT_FALSE(rep.passed);
  EXPECT_EQ(rep.failures[0].building, 0u);
  EXPECT_EQ(rep.failures[0].check, "best_response");
  auto greedy = f;
  greedy[1].bill = 1.0;
  rep = verify_equilibrium(greedy, 1.0, inst);
  ASSERT_EQ(rep.failures.size(), 1u);
  EXPECT_EQ(rep.failures[0].check, "participation");
  EXPECT_NEAR(rep.failures[0].magnitude, 0.5, 1e-12);
  EXPECT_FALSE(verify_equilibrium(f, -1.0, inst).passed);
  rep = verify_equilibrium({{false}, {false}}, 0.0, inst);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.accepted, 0u);
}

TEST(Metrics, Rsc) {
  EXPECT_DOUBLE_EQ(rsc(5, 5, 9), 0.0);
  EXPECT_DOUBLE_EQ(rsc(9, 5, 9), 1.0);
  EXPECT_NEAR(rsc(10.02, 9.90, 10.73), 0.12 / 0.83, 1e-12);
  EXPECT_NEAR(rsc(10.02, 9.90, 10.73), 0.1446, 1e-4);
  EXPECT_THROW(rsc(1, 2, 2), std::domain_error);
}

TEST(Metrics, AccountingMismatchThrows) {
  auto out = solve_baseline(fixtures::two_bc());
  EXPECT_NO_THROW(social_cost(out));
  out.social_cost += 0.1;
  EXPECT_THROW(social_cost(out), AccountingError);
}

TEST(Metrics, UtilizationEmptyWithoutStorage) {
  const auto inst = fixtures::two_bc();
  auto out = solve_baseline(inst);
  EXPECT_TRUE(utilization_stats(out.schedule, 0.0, 0.0, inst).empty);
}

TEST(Generator, DeterministicAndValid) {
  GeneratorConfig cfg;
  auto a = instance_to_json(generate_instance(cfg)).dump();
  auto b = instance_to_json(generate_instance(cfg)).dump();
  EXPECT_EQ(a, b);
  auto inst = generate_instance(cfg);
  EXPECT_EQ(inst.num_buildings(), 5u);
  EXPECT_EQ(inst.num_periods(), 24u);
  EXPECT_EQ(inst.num_scenarios(), 3u);
  EXPECT_TRUE(validate_instance(inst).empty()) << format_diagnostics(validate_instance(inst));
  cfg.seed = 2;
  EXPECT_NE(instance_to_json(generate_instance(cfg)).dump(), a);
  cfg.buildings = 0;
  EXPECT_THROW(generate_instance(cfg), InputError);
}

TEST(Generator, ManySeedsValidate) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.buildings = 1 + seed % 6;
    cfg.periods = 1 + seed % 30;
    cfg.scenarios = 1 + seed % 4;
    auto inst = generate_instance(cfg);
    EXPECT_TRUE(validate_instance(inst).empty()) << seed;
  }
}

}  // namespace
