#pragma once

// Welfare accounting and storage utilization.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cesmarket/error.hpp"
#include "cesmarket/formulations/outcome.hpp"
#include "cesmarket/scenario.hpp"

namespace cesmarket {

struct SocialCostRow {
  ModelTag model = ModelTag::wo_es;
  double social_cost = 0.0;
  double bills = 0.0;
  double payments = 0.0;  // transfers to the operator
  double capital = 0.0;   // operator plus own storage
  double eso_profit = 0.0;
};

// Recomputes the social cost as bills plus all capital and checks it against
// the outcome's own figure and, where an operator exists, against total
// building cost minus operator profit.
inline SocialCostRow social_cost(const ModelOutcome& o, double tol = 1e-6) {
  SocialCostRow row;
  row.model = o.model;
  row.bills = total_bills(o);
  row.payments = total_payments(o);
  row.capital = o.operator_capital + total_own_capital(o);
  row.eso_profit = o.eso_profit;
  row.social_cost = row.bills + row.capital;
  auto check = [&](double a, double b, const char* what) {
    if (std::abs(a - b) > tol * std::max(1.0, std::abs(b)))
      throw AccountingError(std::string(to_string(o.model)) + ": " + what + " does not reconcile");
  };
  check(row.social_cost, o.social_cost, "social cost");
  double building_cost = 0.0;
  for (const auto& b : o.buildings) building_cost += b.total();
  if (o.model == ModelTag::ces || o.model == ModelTag::ves) {
    check(row.eso_profit, row.payments - o.operator_capital, "operator profit");
    check(building_cost - row.eso_profit, row.social_cost, "cost net of operator profit");
  }
  if (o.model == ModelTag::wo_es && row.capital != 0.0)
    throw AccountingError("WO_ES outcome carries storage capital");
  return row;
}

// (SC(x) - SC(CMES)) / (SC(WO_ES) - SC(CMES)); 0 is the social optimum.
inline double rsc(double sc_model, double sc_cmes, double sc_woes) {
  if (!(sc_woes > sc_cmes + 1e-9))
    throw std::domain_error("relative social cost undefined: storage brings no saving");
  return (sc_model - sc_cmes) / (sc_woes - sc_cmes);
}

// Cost reduction against each building's no-storage bill.
inline std::vector<double> consumer_incentive(const ModelOutcome& o, const Instance& inst) {
  std::vector<double> out;
  for (std::size_t i = 0; i < o.buildings.size(); ++i)
    out.push_back(inst.baseline_bill[i] - o.buildings[i].total());
  return out;
}

struct UtilizationStats {
  bool empty = true;
  // Per scenario, per period, in percent.
  std::vector<std::vector<double>> energy_pct;
  std::vector<std::vector<double>> power_pct;
  double mean_energy_pct = 0.0;  // probability weighted, time averaged
  double mean_power_pct = 0.0;
  double peak_energy_pct = 0.0;
  double peak_power_pct = 0.0;
  // Per building, per scenario, per period SoC in kWh.
  std::vector<std::vector<std::vector<double>>> soc;
};

inline UtilizationStats utilization_stats(const OperationSchedule& s, double energy, double power,
                                          const Instance& inst) {
  UtilizationStats u;
  if (!(energy > 0.0) || s.empty()) return u;
  u.empty = false;
  const std::size_t W = s.num_scenarios(), T = s.num_periods();
  u.energy_pct.assign(W, std::vector<double>(T, 0.0));
  u.power_pct.assign(W, std::vector<double>(T, 0.0));
  for (std::size_t w = 0; w < W; ++w) {
    const double p = inst.probability(w);
    for (std::size_t t = 0; t < T; ++t) {
      const double e = 100.0 * s.aggregate_soc(w, t) / energy;
      const double pw = power > 0.0 ? 100.0 * std::abs(s.aggregate_net(w, t)) / power : 0.0;
      u.energy_pct[w][t] = e;
      u.power_pct[w][t] = pw;
      u.mean_energy_pct += p * e / static_cast<double>(T);
      u.mean_power_pct += p * pw / static_cast<double>(T);
      u.peak_energy_pct = std::max(u.peak_energy_pct, e);
      u.peak_power_pct = std::max(u.peak_power_pct, pw);
    }
  }
  u.soc.assign(s.num_buildings(), std::vector<std::vector<double>>(W, std::vector<double>(T, 0.0)));
  for (std::size_t i = 0; i < s.num_buildings(); ++i)
    for (std::size_t w = 0; w < W; ++w)
      for (std::size_t t = 0; t < T; ++t) u.soc[i][w][t] = s.at(i, w, t).e;
  return u;
}

}  // namespace cesmarket
