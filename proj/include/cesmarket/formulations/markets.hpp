#pragma once

// Solve drivers returning uniform outcomes: no storage, individual storage,
// community storage and the cloud storage equilibrium.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "cesmarket/error.hpp"
#include "cesmarket/formulations/ies.hpp"
#include "cesmarket/formulations/outcome.hpp"
#include "cesmarket/formulations/shared.hpp"
#include "cesmarket/game.hpp"

namespace cesmarket {

inline ModelOutcome solve_baseline(const Instance& inst) {
  ModelOutcome out;
  out.model = ModelTag::wo_es;
  out.schedule = OperationSchedule(inst.num_buildings(), inst.num_scenarios(), inst.num_periods());
  settle_grid(inst, out.schedule);
  for (std::size_t i = 0; i < inst.num_buildings(); ++i)
    out.buildings.push_back({schedule_bill(inst, out.schedule, i), 0.0, 0.0});
  out.social_cost = total_bills(out);
  out.physics.balance = GridBalance::exact;
  out.physics.energy_cap.assign(inst.num_buildings(), 0.0);
  out.physics.power_cap.assign(inst.num_buildings(), 0.0);
  return out;
}

struct IesOutcome {
  std::vector<IesTotal> buildings;
  ModelOutcome outcome;
  std::vector<double> j_ind() const {
    std::vector<double> v;
    for (const auto& b : buildings) v.push_back(b.j_ind);
    return v;
  }
};

inline IesOutcome solve_ies(const Instance& inst, const SolverOptions& opt = {}) {
  IesOutcome res;
  auto& out = res.outcome;
  out.model = ModelTag::ies;
  out.schedule = OperationSchedule(inst.num_buildings(), inst.num_scenarios(), inst.num_periods());
  out.physics.balance = GridBalance::exact;
  for (std::size_t i = 0; i < inst.num_buildings(); ++i) {
    IesTotal t = solve_ies_total(inst, i, opt);
    for (std::size_t w = 0; w < inst.num_scenarios(); ++w)
      for (std::size_t k = 0; k < inst.num_periods(); ++k) out.schedule.at(i, w, k) = t.schedule.at(0, w, k);
    out.buildings.push_back({t.bill, 0.0, t.capital});
    out.energy += t.energy;
    out.power += t.power;
    out.certified = out.certified && t.stats.certified();
    out.physics.energy_cap.push_back(t.energy);
    out.physics.power_cap.push_back(t.power);
    res.buildings.push_back(std::move(t));
  }
  out.social_cost = total_bills(out) + total_own_capital(out);
  return res;
}

namespace detail {

struct SharedSolve {
  SharedProgram program;
  milp::MilpSolution solution;
  OperationSchedule raw;  // grid trades as returned by the solver
};

inline SharedSolve solve_shared(const Instance& inst, SharedKind kind, std::span<const double> j_ind,
                                const SolverOptions& opt) {
  const char* what = kind == SharedKind::ces ? "CES equilibrium" : "CMES optimum";
  auto attempt = [&](bool relaxed) {
    SharedSolve s{build_shared_program(inst, kind, j_ind, relaxed), {}, {}};
    s.solution = run_solver(s.program.model, opt, what);
    s.raw = OperationSchedule(inst.num_buildings(), inst.num_scenarios(), inst.num_periods());
    for (std::size_t i = 0; i < inst.num_buildings(); ++i)
      extract_block(inst, s.program.blocks[i], s.solution.values, s.raw, i);
    return s;
  };
  if (opt.relaxed_exclusivity) {
    SharedSolve s = attempt(true);
    if (schedule_is_exclusive(s.raw, opt.params.feasibility_tol)) return s;
  }
  return attempt(false);
}

// Installed sizes actually used by the schedule.
inline void used_capacity(const OperationSchedule& s, double& energy, double& power) {
  energy = power = 0.0;
  for (std::size_t w = 0; w < s.num_scenarios(); ++w)
    for (std::size_t t = 0; t < s.num_periods(); ++t) {
      energy = std::max(energy, s.aggregate_soc(w, t));
      power = std::max(power, std::abs(s.aggregate_net(w, t)));
    }
}

}  // namespace detail

inline ModelOutcome solve_cmes(const Instance& inst, const SolverOptions& opt = {}) {
  auto s = detail::solve_shared(inst, SharedKind::cmes, {}, opt);
  ModelOutcome out;
  out.model = ModelTag::cmes;
  out.schedule = s.raw;
  settle_grid(inst, out.schedule);
  detail::used_capacity(out.schedule, out.energy, out.power);
  out.operator_capital = inst.tech.energy_price * out.energy + inst.tech.power_price * out.power;
  for (std::size_t i = 0; i < inst.num_buildings(); ++i)
    out.buildings.push_back({schedule_bill(inst, out.schedule, i), 0.0, 0.0});
  out.social_cost = total_bills(out) + out.operator_capital;
  out.certified = s.solution.certified();
  const double obj = s.solution.objective;
  if (out.social_cost > obj + 1e-6 * std::max(1.0, std::abs(obj)))
    throw AccountingError("CMES social cost exceeds the optimized objective");
  out.physics.balance = GridBalance::at_least;
  out.physics.shared_energy = out.energy;
  out.physics.shared_power = out.power;
  return out;
}

enum class RejectedFallback {
  individual_storage,  // a rejected building installs its own optimal unit
  none                 // a rejected building stays without storage
};

struct CesBuilding {
  bool accepted = false;  // selected with positive RUS
  bool selected = false;  // raw acceptance flag of the solution
  double r_star = 0.0;
  std::optional<double> q_star;
  double payment = 0.0;
  double bill = 0.0;      // under the shared schedule
  double j_ind = 0.0;
};

struct CesOutcome {
  std::vector<CesBuilding> buildings;
  double energy = 0.0;
  double power = 0.0;
  double capital = 0.0;
  double revenue = 0.0;
  double eso_profit = 0.0;
  OperationSchedule schedule;  // rejected buildings have no storage activity
  SolveStats stats;
  bool certified() const { return stats.certified(); }
};

inline double rus_tolerance(const Instance& inst, std::size_t i) {
  return 1e-7 * std::max(1.0, inst.r_max[i]);
}

inline CesOutcome solve_ces(const Instance& inst, std::span<const double> j_ind,
                            const SolverOptions& opt = {}) {
  auto s = detail::solve_shared(inst, SharedKind::ces, j_ind, opt);
  const auto& x = s.solution.values;
  CesOutcome out;
  out.stats = stats_of(s.solution);
  out.schedule = s.raw;
  for (std::size_t i = 0; i < inst.num_buildings(); ++i) {
    CesBuilding b;
    b.j_ind = j_ind[i];
    b.selected = x[s.program.s[i].value] > 0.5;
    const double r = b.selected ? x[s.program.r[i].value] : 0.0;
    if (!b.selected) {
      for (std::size_t w = 0; w < inst.num_scenarios(); ++w)
        for (std::size_t t = 0; t < inst.num_periods(); ++t) out.schedule.at(i, w, t) = PeriodState{};
    }
    if (b.selected && r > rus_tolerance(inst, i)) {
      b.accepted = true;
      b.r_star = r;
      b.q_star = equilibrium_price(r, inst.tariff);
      b.payment = *b.q_star * r * r;
    }
    out.buildings.push_back(b);
  }
  settle_grid(inst, out.schedule);
  for (std::size_t i = 0; i < inst.num_buildings(); ++i) {
    out.buildings[i].bill = schedule_bill(inst, out.schedule, i);
    out.revenue += out.buildings[i].payment;
  }
  detail::used_capacity(out.schedule, out.energy, out.power);
  out.capital = inst.tech.energy_price * out.energy + inst.tech.power_price * out.power;
  out.eso_profit = out.revenue - out.capital;
  return out;
}

// Runs the individual-storage sizing first to obtain J_ind.
inline CesOutcome solve_ces(const Instance& inst, const SolverOptions& opt = {}) {
  const auto ies = solve_ies(inst, opt);
  const auto j = ies.j_ind();
  return solve_ces(inst, j, opt);
}

inline std::vector<FollowerRecord> follower_records(const CesOutcome& ces) {
  std::vector<FollowerRecord> out;
  for (const auto& b : ces.buildings)
    out.push_back({b.accepted, b.r_star, b.q_star.value_or(0.0), b.bill, b.j_ind});
  return out;
}

inline EquilibriumReport verify_equilibrium(const CesOutcome& ces, const Instance& inst,
                                            double tol = 1e-5) {
  return verify_equilibrium(follower_records(ces), ces.eso_profit, inst, tol);
}

// Uniform envelope; `ies` supplies the fallback of buildings left out of the
// market (unselected ones).
inline ModelOutcome ces_model_outcome(const CesOutcome& ces, const Instance& inst, const IesOutcome* ies,
                                      RejectedFallback fallback = RejectedFallback::individual_storage) {
  if (fallback == RejectedFallback::individual_storage && !ies)
    throw InputError("individual-storage fallback needs the IES outcome");
  ModelOutcome out;
  out.model = ModelTag::ces;
  out.schedule = ces.schedule;
  out.energy = ces.energy;
  out.power = ces.power;
  out.operator_capital = ces.capital;
  out.eso_profit = ces.eso_profit;
  out.certified = ces.certified();
  for (std::size_t i = 0; i < ces.buildings.size(); ++i) {
    const auto& b = ces.buildings[i];
    if (b.selected) {
      out.buildings.push_back({b.bill, b.payment, 0.0});
    } else if (fallback == RejectedFallback::individual_storage) {
      out.buildings.push_back({ies->buildings[i].bill, 0.0, ies->buildings[i].capital});
    } else {
      out.buildings.push_back({inst.baseline_bill[i], 0.0, 0.0});
    }
  }
  out.social_cost = total_bills(out) + total_own_capital(out) + out.operator_capital;
  out.physics.balance = GridBalance::at_least;
  out.physics.shared_energy = ces.energy;
  out.physics.shared_power = ces.power;
  return out;
}

}  // namespace cesmarket
