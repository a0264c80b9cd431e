#pragma once

// Individual storage: one building sizes and runs its own unit.

#include <cmath>
#include <optional>
#include <vector>

#include "cesmarket/error.hpp"
#include "cesmarket/formulations/operation.hpp"

namespace cesmarket {

struct IesProgram {
  milp::MilpModel model;
  OperationBlock block;
  milp::VarId energy, power;
};

// Operating block of building i with its own capacities E_i, P_i and exact
// grid balance. The objective is left to the caller.
inline IesProgram build_ies_program(const Instance& inst, std::size_t i, bool relaxed = false) {
  IesProgram prog;
  auto& m = prog.model;
  prog.energy = m.add_variable(0.0, milp::kInf, milp::Integrality::continuous, "E");
  prog.power = m.add_variable(0.0, milp::kInf, milp::Integrality::continuous, "P");
  BlockOptions opt;
  opt.balance = GridBalance::exact;
  opt.energy_cap = prog.energy;
  opt.power_cap = prog.power;
  opt.relaxed_exclusivity = relaxed;
  prog.block = add_operation_block(m, inst, i, opt);
  return prog;
}

struct IesTotal {
  double j_ind = 0.0;   // bill + capital
  double bill = 0.0;
  double capital = 0.0;
  double r_hat = 0.0;   // bill reduction / (c+ - c-)
  double energy = 0.0;
  double power = 0.0;
  OperationSchedule schedule;  // single building
  SolveStats stats;
};

namespace detail {

inline IesTotal finish_ies_total(const Instance& inst, std::size_t i, const IesProgram& prog,
                                 const milp::MilpSolution& sol) {
  IesTotal res;
  res.schedule = OperationSchedule(1, inst.num_scenarios(), inst.num_periods());
  extract_block(inst, prog.block, sol.values, res.schedule, 0);
  res.energy = sol.value(prog.energy);
  res.power = sol.value(prog.power);
  res.bill = schedule_bill(inst, res.schedule, 0);
  res.capital = inst.tech.energy_price * res.energy + inst.tech.power_price * res.power;
  res.j_ind = res.bill + res.capital;
  res.r_hat = (inst.baseline_bill[i] - res.bill) / inst.tariff.spread();
  res.stats = stats_of(sol);
  return res;
}

}  // namespace detail

// Minimal total cost of building i with its own storage.
inline IesTotal solve_ies_total(const Instance& inst, std::size_t i, const SolverOptions& opt = {}) {
  auto solve_with = [&](bool relaxed) {
    IesProgram prog = build_ies_program(inst, i, relaxed);
    std::vector<milp::Term> obj = bill_terms(inst, prog.block);
    obj.push_back({prog.energy, inst.tech.energy_price});
    obj.push_back({prog.power, inst.tech.power_price});
    prog.model.set_objective(obj);
    auto sol = run_solver(prog.model, opt, "IES sizing of " + inst.buildings[i].name);
    return detail::finish_ies_total(inst, i, prog, sol);
  };
  if (opt.relaxed_exclusivity) {
    IesTotal res = solve_with(true);
    if (schedule_is_exclusive(res.schedule, opt.params.feasibility_tol)) return res;
  }
  return solve_with(false);
}

struct IesCapital {
  bool feasible = false;
  double cost = 0.0;  // Q^IES(r)
  double energy = 0.0;
  double power = 0.0;
  bool certified = true;
};

// Q^IES_i(r): cheapest own storage that lowers the bill by (c+ - c-) r.
inline IesCapital solve_ies_min_capital(const Instance& inst, std::size_t i, double r,
                                        const SolverOptions& opt = {}) {
  if (!(r >= 0.0)) throw InputError("RUS level must be non-negative");
  IesProgram prog = build_ies_program(inst, i, false);
  prog.model.set_objective({{prog.energy, inst.tech.energy_price}, {prog.power, inst.tech.power_price}});
  prog.model.add_constraint(bill_terms(inst, prog.block), milp::Relation::less_equal,
                            inst.baseline_bill[i] - inst.tariff.spread() * r, "rus");
  auto sol = milp::solve_with_backend(prog.model, opt.params, opt.backend);
  IesCapital out;
  if (sol.status == milp::SolveStatus::infeasible) return out;
  if (!sol.has_incumbent)
    throw SolverLimitError("IES capital curve: no feasible solution within limits");
  out.feasible = true;
  out.energy = sol.value(prog.energy);
  out.power = sol.value(prog.power);
  out.cost = inst.tech.energy_price * out.energy + inst.tech.power_price * out.power;
  out.certified = sol.certified();
  return out;
}

struct CurvePoint {
  double r = 0.0;
  bool feasible = false;
  double cost = 0.0;
};

// Samples Q^IES_i at 0, step, 2 step, ... and at r_max itself.
inline std::vector<CurvePoint> sweep_ies_curve(const Instance& inst, std::size_t i, double step,
                                               const SolverOptions& opt = {}) {
  if (!(step > 0.0)) throw InputError("curve step must be positive");
  const double r_max = inst.r_max[i];
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double r = static_cast<double>(k) * step;
    if (r > r_max * (1.0 + 1e-12) + 1e-12) break;
    grid.push_back(r);
  }
  if (grid.empty() || std::abs(grid.back() - r_max) > 1e-9 * std::max(1.0, r_max)) grid.push_back(r_max);
  std::vector<CurvePoint> out;
  for (double r : grid) {
    auto q = solve_ies_min_capital(inst, i, r, opt);
    out.push_back({r, q.feasible, q.cost});
  }
  return out;
}

struct QuadraticFit {
  double q_hat = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Least squares Q ~ q r^2 through the origin over the feasible points.
inline QuadraticFit fit_quadratic(const std::vector<CurvePoint>& curve) {
  double sqr = 0.0, r4 = 0.0, mean = 0.0;
  std::size_t n = 0;
  for (const auto& p : curve) {
    if (!p.feasible || !std::isfinite(p.cost)) continue;
    sqr += p.cost * p.r * p.r;
    r4 += std::pow(p.r, 4);
    mean += p.cost;
    ++n;
  }
  if (n < 2) throw InputError("quadratic fit needs at least two feasible points");
  if (!(r4 > 0.0)) throw InputError("quadratic fit is degenerate: all RUS levels are zero");
  QuadraticFit fit;
  fit.points = n;
  fit.q_hat = sqr / r4;
  mean /= static_cast<double>(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : curve) {
    if (!p.feasible || !std::isfinite(p.cost)) continue;
    ss_res += std::pow(p.cost - fit.q_hat * p.r * p.r, 2);
    ss_tot += std::pow(p.cost - mean, 2);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

// Q^IES(r_hat) / r_hat^2, the price a building would see from its own unit.
inline std::optional<double> projected_price(const Instance& inst, std::size_t i, double r_hat,
                                             const SolverOptions& opt = {}) {
  if (!(r_hat > 1e-9)) return std::nullopt;
  auto q = solve_ies_min_capital(inst, i, r_hat, opt);
  if (!q.feasible) return std::nullopt;
  return q.cost / (r_hat * r_hat);
}

}  // namespace cesmarket
