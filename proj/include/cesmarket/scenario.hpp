#pragma once

// Market instance data model: time grid, tariff, storage technology and the
// per-building scenario profiles, plus the offline quantities every model
// needs (amortized capital prices, RUS bounds, no-storage bills).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cesmarket {

struct TimeGrid {
  std::size_t periods = 0;
  double dt_hours = 1.0;  // energy [kWh] = power [kW] * dt_hours
};

struct GridTariff {
  double buy_price = 0.0;   // money per kWh bought from the grid
  double sell_price = 0.0;  // money per kWh sold back
  double p_grid_max = 0.0;  // kW, per building

  double spread() const { return buy_price - sell_price; }
};

struct StorageTech {
  double eta_ch = 1.0;
  double eta_dis = 1.0;
  double p_ch_max = 0.0;   // kW per building
  double p_dis_max = 0.0;  // kW per building
  double capex_energy = 0.0;  // raw capital price per kWh, source currency
  double capex_power = 0.0;   // raw capital price per kW, source currency
  double interest_rate = 0.0;
  double lifetime_years = 1.0;
  double exchange_rate = 1.0;  // source currency -> instance currency
  double periods_per_year = 365.0;

  // Amortized prices per contract period; filled by populate_derived().
  double energy_price = 0.0;  // C_E
  double power_price = 0.0;   // C_P
};

struct ScenarioProfile {
  double probability = 0.0;
  std::vector<double> demand;     // kW per period
  std::vector<double> renewable;  // kW per period
};

struct BuildingProfile {
  std::string name;
  std::vector<ScenarioProfile> scenarios;
  std::optional<double> r_min_override;
};

struct Instance {
  std::string name = "instance";
  TimeGrid time;
  GridTariff tariff;
  StorageTech tech;
  std::vector<BuildingProfile> buildings;

  // Derived, one entry per building.
  std::vector<double> r_min;
  std::vector<double> r_max;
  std::vector<double> baseline_bill;

  std::size_t num_buildings() const { return buildings.size(); }
  std::size_t num_scenarios() const {
    return buildings.empty() ? 0 : buildings.front().scenarios.size();
  }
  std::size_t num_periods() const { return time.periods; }
  double probability(std::size_t scenario) const {
    return buildings.front().scenarios[scenario].probability;
  }
};

struct Diagnostic {
  std::string path;
  std::string message;
};

inline double capital_recovery_factor(double rate, double lifetime_years) {
  if (rate == 0.0) return 1.0 / lifetime_years;
  const double growth = std::pow(1.0 + rate, lifetime_years);
  return rate * growth / (growth - 1.0);
}

// Annuity payment per contract period for a capital price paid up front.
inline double amortize(double capital_price, double interest_rate, double lifetime_years,
                       double periods_per_year) {
  if (!(interest_rate >= 0.0))
    throw std::invalid_argument("amortize: interest rate must be non-negative");
  if (!(lifetime_years >= 1.0))
    throw std::invalid_argument("amortize: lifetime must be at least one year");
  if (!(periods_per_year >= 1.0))
    throw std::invalid_argument("amortize: periods_per_year must be at least 1");
  return capital_price * capital_recovery_factor(interest_rate, lifetime_years) /
         periods_per_year;
}

// Probability-weighted total surplus renewable energy, the upper bound on RUS.
inline double max_rus(const BuildingProfile& profile, const TimeGrid& grid) {
  double total = 0.0;
  for (const auto& sc : profile.scenarios) {
    double surplus = 0.0;
    for (std::size_t t = 0; t < sc.demand.size(); ++t)
      surplus += std::max(sc.renewable[t] - sc.demand[t], 0.0);
    total += sc.probability * surplus * grid.dt_hours;
  }
  return total;
}

// Expected electricity bill without storage.
inline double baseline_bill(const BuildingProfile& profile, const GridTariff& tariff,
                            const TimeGrid& grid) {
  double total = 0.0;
  for (const auto& sc : profile.scenarios) {
    double bill = 0.0;
    for (std::size_t t = 0; t < sc.demand.size(); ++t) {
      const double net = sc.demand[t] - sc.renewable[t];
      bill += net > 0.0 ? tariff.buy_price * net : tariff.sell_price * net;
    }
    total += sc.probability * bill * grid.dt_hours;
  }
  return total;
}

namespace detail {

inline bool finite(double v) { return std::isfinite(v); }

inline std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

}  // namespace detail

// One diagnostic per violated invariant; empty means the instance is usable.
inline std::vector<Diagnostic> validate_instance(const Instance& inst) {
  std::vector<Diagnostic> out;
  auto fail = [&](std::string path, std::string msg) {
    out.push_back({std::move(path), std::move(msg)});
  };

  if (inst.time.periods < 1) fail("time.T", "must be at least 1");
  if (!(inst.time.dt_hours > 0.0) || !detail::finite(inst.time.dt_hours))
    fail("time.dt_hours", "must be positive");

  const auto& tf = inst.tariff;
  if (!detail::finite(tf.buy_price) || !detail::finite(tf.sell_price))
    fail("tariff", "prices must be finite");
  if (tf.sell_price < 0.0) fail("tariff.sell", "must be non-negative");
  if (!(tf.buy_price > tf.sell_price))
    fail("tariff.buy", "buy price must exceed the sell-back price");
  if (!(tf.p_grid_max > 0.0)) fail("tariff.p_grid_max", "must be positive");

  const auto& tech = inst.tech;
  if (!(tech.eta_ch > 0.0 && tech.eta_ch <= 1.0)) fail("tech.eta_ch", "must lie in (0, 1]");
  if (!(tech.eta_dis > 0.0 && tech.eta_dis <= 1.0)) fail("tech.eta_dis", "must lie in (0, 1]");
  if (!(tech.p_ch_max >= 0.0)) fail("tech.p_ch_max", "must be non-negative");
  if (!(tech.p_dis_max >= 0.0)) fail("tech.p_dis_max", "must be non-negative");
  if (!(tech.capex_energy >= 0.0)) fail("tech.capex_e_eur_per_kwh", "must be non-negative");
  if (!(tech.capex_power >= 0.0)) fail("tech.capex_p_eur_per_kw", "must be non-negative");
  if (!(tech.interest_rate >= 0.0)) fail("tech.interest_rate", "must be non-negative");
  if (!(tech.lifetime_years >= 1.0)) fail("tech.lifetime_years", "must be at least 1");
  if (!(tech.exchange_rate > 0.0)) fail("tech.exchange_rate", "must be positive");
  if (!(tech.periods_per_year >= 1.0)) fail("tech.periods_per_year", "must be at least 1");
  if (!(tech.energy_price >= 0.0) || !(tech.power_price >= 0.0))
    fail("tech", "amortized prices must be populated and non-negative");

  if (inst.buildings.empty()) fail("buildings", "at least one building is required");
  const std::size_t n_sc = inst.num_scenarios();
  for (std::size_t i = 0; i < inst.buildings.size(); ++i) {
    const auto& b = inst.buildings[i];
    const std::string bpath = detail::index_path("buildings", i);
    if (b.scenarios.empty()) {
      fail(bpath + ".scenarios", "at least one scenario is required");
      continue;
    }
    if (b.scenarios.size() != n_sc)
      fail(bpath + ".scenarios", "every building must list the same joint scenarios");
    double psum = 0.0;
    for (std::size_t w = 0; w < b.scenarios.size(); ++w) {
      const auto& sc = b.scenarios[w];
      const std::string spath = detail::index_path(bpath + ".scenarios", w);
      psum += sc.probability;
      if (!(sc.probability >= 0.0)) fail(spath + ".prob", "must be non-negative");
      if (w < n_sc && i > 0 &&
          std::abs(sc.probability - inst.buildings[0].scenarios[w].probability) > 1e-12)
        fail(spath + ".prob", "joint scenario probabilities differ between buildings");
      if (sc.demand.size() != inst.time.periods)
        fail(spath + ".demand", "expected T entries");
      if (sc.renewable.size() != inst.time.periods)
        fail(spath + ".renewable", "expected T entries");
      for (double v : sc.demand)
        if (!(v >= 0.0) || !detail::finite(v)) {
          fail(spath + ".demand", "entries must be finite and non-negative");
          break;
        }
      for (double v : sc.renewable)
        if (!(v >= 0.0) || !detail::finite(v)) {
          fail(spath + ".renewable", "entries must be finite and non-negative");
          break;
        }
      const std::size_t common = std::min(sc.demand.size(), sc.renewable.size());
      for (std::size_t t = 0; t < common; ++t)
        if (std::abs(sc.demand[t] - sc.renewable[t]) > tf.p_grid_max) {
          fail(spath, "net load exceeds p_grid_max at t=" + std::to_string(t));
          break;
        }
    }
    if (std::abs(psum - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "scenario probabilities sum to " << psum << ", expected 1";
      fail(bpath + ".scenarios", msg.str());
    }
  }

  const std::size_t n = inst.buildings.size();
  if (inst.r_min.size() != n || inst.r_max.size() != n || inst.baseline_bill.size() != n) {
    fail("derived", "derived per-building fields are not populated");
  } else {
    for (std::size_t i = 0; i < n; ++i)
      if (!(inst.r_min[i] >= 0.0 && inst.r_min[i] <= inst.r_max[i]))
        fail(detail::index_path("derived.r_min", i), "requires 0 <= r_min <= r_max");
  }
  return out;
}

inline std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  for (std::size_t k = 0; k < diags.size(); ++k) {
    if (k) os << "; ";
    os << diags[k].path << ": " << diags[k].message;
  }
  return os.str();
}

// Fills amortized prices, RUS bounds and baseline bills. Shape errors are left
// for validate_instance() to report.
inline void populate_derived(Instance& inst) {
  auto& tech = inst.tech;
  if (tech.interest_rate >= 0.0 && tech.lifetime_years >= 1.0 && tech.periods_per_year >= 1.0) {
    tech.energy_price = amortize(tech.capex_energy * tech.exchange_rate, tech.interest_rate,
                                 tech.lifetime_years, tech.periods_per_year);
    tech.power_price = amortize(tech.capex_power * tech.exchange_rate, tech.interest_rate,
                                tech.lifetime_years, tech.periods_per_year);
  } else {
    tech.energy_price = tech.power_price = -1.0;
  }
  const std::size_t n = inst.buildings.size();
  inst.r_min.assign(n, 0.0);
  inst.r_max.assign(n, 0.0);
  inst.baseline_bill.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = inst.buildings[i];
    bool ragged = false;
    for (const auto& sc : b.scenarios)
      ragged |= sc.demand.size() != inst.time.periods || sc.renewable.size() != inst.time.periods;
    if (ragged) continue;
    inst.r_max[i] = max_rus(b, inst.time);
    inst.baseline_bill[i] = baseline_bill(b, inst.tariff, inst.time);
    inst.r_min[i] = b.r_min_override.value_or(0.0);
  }
}

}  // namespace cesmarket
