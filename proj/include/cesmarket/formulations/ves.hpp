#pragma once

// Capacity leasing: the operator rents energy capacity at a linear price and
// each building decides on its own how much to rent.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cesmarket/error.hpp"
#include "cesmarket/formulations/operation.hpp"
#include "cesmarket/formulations/outcome.hpp"

namespace cesmarket {

struct VesBcResult {
  double capacity = 0.0;  // kWh rented
  double bill = 0.0;
  double lease = 0.0;     // price * capacity
  double total_cost() const { return bill + lease; }
  OperationSchedule schedule;  // single building
  SolveStats stats;
};

inline VesBcResult solve_ves_bc(const Instance& inst, std::size_t i, double price,
                                const SolverOptions& opt = {}) {
  if (!(price >= 0.0)) throw InputError("lease price must be non-negative");
  auto attempt = [&](bool relaxed) {
    milp::MilpModel m;
    const milp::VarId cap = m.add_variable(0.0, milp::kInf, milp::Integrality::continuous, "cap");
    BlockOptions bo;
    bo.balance = GridBalance::exact;
    bo.energy_cap = cap;
    bo.unit_power_limits = false;
    bo.relaxed_exclusivity = relaxed;
    OperationBlock block = add_operation_block(m, inst, i, bo);
    auto obj = bill_terms(inst, block);
    obj.push_back({cap, price});
    m.set_objective(obj);
    auto sol = run_solver(m, opt, "VES lease of " + inst.buildings[i].name);
    VesBcResult res;
    res.schedule = OperationSchedule(1, inst.num_scenarios(), inst.num_periods());
    extract_block(inst, block, sol.values, res.schedule, 0);
    res.stats = stats_of(sol);
    return res;
  };
  VesBcResult res;
  bool done = false;
  if (opt.relaxed_exclusivity) {
    res = attempt(true);
    done = schedule_is_exclusive(res.schedule, opt.params.feasibility_tol);
  }
  if (!done) res = attempt(false);
  // Unused headroom is never rented.
  res.capacity = res.schedule.peak_soc(0);
  res.bill = schedule_bill(inst, res.schedule, 0);
  res.lease = price * res.capacity;
  return res;
}

enum class VesSizing {
  leased_capacity,    // E = sum of rented capacities
  peak_aggregate_soc  // E = peak of the summed SoC traces
};

struct VesPricePoint {
  double price = 0.0;
  std::vector<double> capacity;
  std::vector<double> bill;
  double total_capacity = 0.0;
  double energy = 0.0;
  double power = 0.0;
  double capital = 0.0;
  double revenue = 0.0;
  double eso_profit = 0.0;
  bool certified = true;
  double cost(std::size_t i) const { return bill[i] + price * capacity[i]; }
};

struct VesOutcome {
  std::vector<VesPricePoint> points;
  std::size_t equilibrium = 0;
  OperationSchedule schedule;  // at the equilibrium price
  VesSizing sizing = VesSizing::leased_capacity;
  const VesPricePoint& best() const { return points.at(equilibrium); }
};

// start, start + step, ... up to stop (inclusive within rounding).
inline std::vector<double> price_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw InputError("price step must be positive");
  if (!(stop >= start)) throw InputError("price grid stop must not be below start");
  if (!(start >= 0.0)) throw InputError("prices must be non-negative");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = start + static_cast<double>(k) * step;
  return g;
}

inline VesOutcome ves_equilibrium(const Instance& inst, const std::vector<double>& grid,
                                  const SolverOptions& opt = {},
                                  VesSizing sizing = VesSizing::leased_capacity) {
  if (grid.empty()) throw InputError("price grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw InputError("price grid must be strictly ascending");
  const std::size_t N = inst.num_buildings();
  VesOutcome out;
  out.sizing = sizing;
  std::vector<OperationSchedule> schedules;
  for (double price : grid) {
    VesPricePoint pt;
    pt.price = price;
    OperationSchedule joint(N, inst.num_scenarios(), inst.num_periods());
    for (std::size_t i = 0; i < N; ++i) {
      VesBcResult r = solve_ves_bc(inst, i, price, opt);
      pt.capacity.push_back(r.capacity);
      pt.bill.push_back(r.bill);
      pt.total_capacity += r.capacity;
      pt.certified = pt.certified && r.stats.certified();
      for (std::size_t w = 0; w < inst.num_scenarios(); ++w)
        for (std::size_t t = 0; t < inst.num_periods(); ++t) joint.at(i, w, t) = r.schedule.at(0, w, t);
    }
    double peak_soc = 0.0;
    for (std::size_t w = 0; w < inst.num_scenarios(); ++w)
      for (std::size_t t = 0; t < inst.num_periods(); ++t) {
        pt.power = std::max(pt.power, std::abs(joint.aggregate_net(w, t)));
        peak_soc = std::max(peak_soc, joint.aggregate_soc(w, t));
      }
    pt.energy = sizing == VesSizing::leased_capacity ? pt.total_capacity : peak_soc;
    pt.capital = inst.tech.energy_price * pt.energy + inst.tech.power_price * pt.power;
    pt.revenue = price * pt.total_capacity;
    pt.eso_profit = pt.revenue - pt.capital;
    if (out.points.empty() || pt.eso_profit > out.points[out.equilibrium].eso_profit)
      out.equilibrium = out.points.size();
    out.points.push_back(std::move(pt));
    schedules.push_back(std::move(joint));
  }
  out.schedule = std::move(schedules[out.equilibrium]);
  return out;
}

inline ModelOutcome ves_model_outcome(const VesOutcome& ves) {
  const auto& pt = ves.best();
  ModelOutcome out;
  out.model = ModelTag::ves;
  out.schedule = ves.schedule;
  out.energy = pt.energy;
  out.power = pt.power;
  out.operator_capital = pt.capital;
  out.eso_profit = pt.eso_profit;
  out.certified = pt.certified;
  for (std::size_t i = 0; i < pt.capacity.size(); ++i)
    out.buildings.push_back({pt.bill[i], pt.price * pt.capacity[i], 0.0});
  out.social_cost = total_bills(out) + out.operator_capital;
  out.physics.balance = GridBalance::exact;
  out.physics.unit_power_limits = false;
  out.physics.energy_cap = pt.capacity;
  out.physics.shared_energy = pt.energy;
  out.physics.shared_power = pt.power;
  return out;
}

}  // namespace cesmarket
