#pragma once

// Dispatch trajectories and an independent physics re-check.
//
// e(i, w, t) is the state of charge at the end of period t; the level before
// the first period is zero.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cesmarket/scenario.hpp"

namespace cesmarket {

struct PeriodState {
  double p_ch = 0.0;
  double p_dis = 0.0;
  double e = 0.0;
  double p_gplus = 0.0;
  double p_gminus = 0.0;
  bool x_ch = false;
  bool x_dis = false;
  bool x_gplus = false;
  bool x_gminus = false;

  double net_storage() const { return p_ch - p_dis; }
};

class OperationSchedule {
 public:
  OperationSchedule() = default;
  OperationSchedule(std::size_t buildings, std::size_t scenarios, std::size_t periods)
      : n_(buildings), w_(scenarios), t_(periods), data_(buildings * scenarios * periods) {}

  std::size_t num_buildings() const { return n_; }
  std::size_t num_scenarios() const { return w_; }
  std::size_t num_periods() const { return t_; }
  bool empty() const { return data_.empty(); }

  PeriodState& at(std::size_t i, std::size_t w, std::size_t t) { return data_[(i * w_ + w) * t_ + t]; }
  const PeriodState& at(std::size_t i, std::size_t w, std::size_t t) const {
    return data_[(i * w_ + w) * t_ + t];
  }

  double aggregate_soc(std::size_t w, std::size_t t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += at(i, w, t).e;
    return s;
  }

  double aggregate_net(std::size_t w, std::size_t t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += at(i, w, t).net_storage();
    return s;
  }

  double peak_soc(std::size_t i) const {
    double m = 0.0;
    for (std::size_t w = 0; w < w_; ++w)
      for (std::size_t t = 0; t < t_; ++t) m = std::max(m, at(i, w, t).e);
    return m;
  }

 private:
  std::size_t n_ = 0, w_ = 0, t_ = 0;
  std::vector<PeriodState> data_;
};

// Expected bill of building i under the schedule's grid trades.
inline double schedule_bill(const Instance& inst, const OperationSchedule& s, std::size_t i) {
  double total = 0.0;
  for (std::size_t w = 0; w < s.num_scenarios(); ++w) {
    double bill = 0.0;
    for (std::size_t t = 0; t < s.num_periods(); ++t) {
      const auto& p = s.at(i, w, t);
      bill += inst.tariff.buy_price * p.p_gplus - inst.tariff.sell_price * p.p_gminus;
    }
    total += inst.probability(w) * bill * inst.time.dt_hours;
  }
  return total;
}

// Replaces each building's grid trades by the cheapest ones compatible with
// its storage dispatch: buy the deficit, sell the surplus up to the grid
// limit, curtail the rest.
inline void settle_grid(const Instance& inst, OperationSchedule& s) {
  for (std::size_t i = 0; i < s.num_buildings(); ++i)
    for (std::size_t w = 0; w < s.num_scenarios(); ++w) {
      const auto& sc = inst.buildings[i].scenarios[w];
      for (std::size_t t = 0; t < s.num_periods(); ++t) {
        auto& p = s.at(i, w, t);
        const double need = p.p_ch - p.p_dis + sc.demand[t] - sc.renewable[t];
        p.p_gplus = std::max(need, 0.0);
        p.p_gminus = std::min(std::max(-need, 0.0), inst.tariff.p_grid_max);
        p.x_gplus = p.p_gplus > 0.0;
        p.x_gminus = p.p_gminus > 0.0;
      }
    }
}

enum class GridBalance { at_least, exact };

// What a schedule has to satisfy. Unset caps are not checked.
struct PhysicsSpec {
  GridBalance balance = GridBalance::exact;
  bool unit_power_limits = true;             // p_ch_max, p_dis_max
  std::optional<double> shared_energy;       // aggregate SoC <= E
  std::optional<double> shared_power;        // |aggregate net storage power| <= P
  std::vector<double> energy_cap;            // per building SoC cap, if non-empty
  std::vector<double> power_cap;             // per building power cap, if non-empty
  double tol = 1e-6;
};

struct PhysicsIssue {
  std::string what;
  double amount = 0.0;
};

inline std::vector<PhysicsIssue> check_physics(const Instance& inst, const OperationSchedule& s,
                                               const PhysicsSpec& spec) {
  std::vector<PhysicsIssue> out;
  const double tol = spec.tol;
  const double dt = inst.time.dt_hours;
  const auto& tech = inst.tech;
  auto loc = [](std::size_t i, std::size_t w, std::size_t t) {
    std::ostringstream os;
    os << "bc " << i << " scenario " << w << " t " << t << ": ";
    return os.str();
  };
  auto over = [&](double value, double limit, const std::string& what) {
    const double excess = value - limit;
    if (excess > tol * std::max(1.0, std::abs(limit))) out.push_back({what, excess});
  };
  if (s.num_buildings() != inst.num_buildings() || s.num_scenarios() != inst.num_scenarios() ||
      s.num_periods() != inst.num_periods()) {
    out.push_back({"schedule shape does not match the instance", 0.0});
    return out;
  }
  for (std::size_t i = 0; i < s.num_buildings(); ++i)
    for (std::size_t w = 0; w < s.num_scenarios(); ++w) {
      const auto& sc = inst.buildings[i].scenarios[w];
      double prev = 0.0;
      for (std::size_t t = 0; t < s.num_periods(); ++t) {
        const auto& p = s.at(i, w, t);
        const std::string at = loc(i, w, t);
        const double expected = prev + tech.eta_ch * p.p_ch * dt - p.p_dis * dt / tech.eta_dis;
        const double resid = std::abs(p.e - expected);
        if (resid > tol * std::max(1.0, std::abs(p.e))) out.push_back({at + "SoC recursion", resid});
        prev = p.e;
        over(-p.e, 0.0, at + "negative SoC");
        over(-p.p_ch, 0.0, at + "negative charge");
        over(-p.p_dis, 0.0, at + "negative discharge");
        over(-p.p_gplus, 0.0, at + "negative purchase");
        over(-p.p_gminus, 0.0, at + "negative sale");
        over(std::min(p.p_ch, p.p_dis), 0.0, at + "simultaneous charge and discharge");
        over(std::min(p.p_gplus, p.p_gminus), 0.0, at + "simultaneous purchase and sale");
        over(p.p_ch, sc.renewable[t], at + "charging beyond renewable output");
        if (spec.unit_power_limits) {
          over(p.p_ch, tech.p_ch_max, at + "charge power limit");
          over(p.p_dis, tech.p_dis_max, at + "discharge power limit");
        }
        over(p.p_gplus, inst.tariff.p_grid_max, at + "purchase limit");
        over(p.p_gminus, inst.tariff.p_grid_max, at + "sale limit");
        if (!spec.energy_cap.empty()) over(p.e, spec.energy_cap[i], at + "energy capacity");
        if (!spec.power_cap.empty()) {
          over(p.p_ch, spec.power_cap[i], at + "charge above power capacity");
          over(p.p_dis, spec.power_cap[i], at + "discharge above power capacity");
        }
        const double need = p.p_ch - p.p_dis + sc.demand[t] - sc.renewable[t];
        const double trade = p.p_gplus - p.p_gminus;
        const double scale = std::max(1.0, std::abs(need));
        if (spec.balance == GridBalance::exact) {
          if (std::abs(trade - need) > tol * scale)
            out.push_back({at + "grid balance", std::abs(trade - need)});
        } else if (need - trade > tol * scale) {
          out.push_back({at + "grid balance", need - trade});
        }
      }
    }
  for (std::size_t w = 0; w < s.num_scenarios(); ++w)
    for (std::size_t t = 0; t < s.num_periods(); ++t) {
      const std::string at = "scenario " + std::to_string(w) + " t " + std::to_string(t) + ": ";
      if (spec.shared_energy) over(s.aggregate_soc(w, t), *spec.shared_energy, at + "aggregate SoC above E");
      if (spec.shared_power)
        over(std::abs(s.aggregate_net(w, t)), *spec.shared_power, at + "aggregate power above P");
    }
  return out;
}

}  // namespace cesmarket
