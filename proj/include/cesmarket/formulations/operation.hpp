#pragma once

// Shared pieces of every storage formulation: the per-building operation
// block (charge/discharge with exclusivity binaries, SoC recursion, grid
// trading), the bill expression, schedule extraction and solver dispatch.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cesmarket/error.hpp"
#include "cesmarket/milp/backend.hpp"
#include "cesmarket/scenario.hpp"
#include "cesmarket/schedule.hpp"

namespace cesmarket {

struct SolverOptions {
  milp::SolveParams params;
  std::string backend = "reference";
  // Solve without charge/discharge and buy/sell binaries; falls back to the
  // exact model when the relaxed optimum uses both directions at once.
  bool relaxed_exclusivity = false;
};

struct SolveStats {
  milp::SolveStatus status = milp::SolveStatus::optimal;
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  double root_relaxation = 0.0;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  bool certified() const { return status == milp::SolveStatus::optimal; }
};

struct OperationVars {
  milp::VarId x_ch, x_dis, x_gplus, x_gminus;
  milp::VarId p_ch, p_dis, e, p_gplus, p_gminus;
};

struct BlockOptions {
  GridBalance balance = GridBalance::exact;
  std::optional<milp::VarId> demand_scale;  // multiplies demand in the balance row
  std::optional<milp::VarId> activity;      // x_ch + x_dis <= activity instead of <= 1
  std::optional<milp::VarId> energy_cap;    // e <= energy_cap
  std::optional<milp::VarId> power_cap;     // p_ch, p_dis <= power_cap
  bool unit_power_limits = true;
  bool relaxed_exclusivity = false;
};

class OperationBlock {
 public:
  OperationBlock() = default;
  OperationBlock(std::size_t building, std::size_t periods) : building_(building), periods_(periods) {}

  std::size_t building() const { return building_; }
  const OperationVars& at(std::size_t w, std::size_t t) const { return vars_[w * periods_ + t]; }
  std::vector<OperationVars>& vars() { return vars_; }
  const std::vector<OperationVars>& vars() const { return vars_; }

 private:
  std::size_t building_ = 0;
  std::size_t periods_ = 0;
  std::vector<OperationVars> vars_;
};

// Adds the 9 variables per (scenario, period) of one building together with
// its operating constraints. Charging is limited to the renewable output
// through the upper bound of p_ch. Big-M constants are the tightest valid
// ones: the charge bound for p_ch, and for p_dis the smaller of the power
// limit and what could have been stored by the end of the previous period.
inline OperationBlock add_operation_block(milp::MilpModel& m, const Instance& inst, std::size_t i,
                                          const BlockOptions& opt) {
  using milp::Relation;
  using milp::Term;
  const auto& tech = inst.tech;
  const double dt = inst.time.dt_hours;
  const double pg = inst.tariff.p_grid_max;
  const std::size_t T = inst.num_periods();
  const auto type = opt.relaxed_exclusivity ? milp::Integrality::continuous : milp::Integrality::binary;
  const std::string tag = "b" + std::to_string(i);

  OperationBlock block(i, T);
  for (std::size_t w = 0; w < inst.num_scenarios(); ++w) {
    const auto& sc = inst.buildings[i].scenarios[w];
    double reachable = 0.0;  // SoC reachable by the end of the previous period
    milp::VarId prev_e{};
    for (std::size_t t = 0; t < T; ++t) {
      const std::string at = tag + "_w" + std::to_string(w) + "_t" + std::to_string(t);
      double ch_cap = sc.renewable[t];
      double dis_cap = tech.eta_dis * reachable / dt;
      if (opt.unit_power_limits) {
        ch_cap = std::min(ch_cap, tech.p_ch_max);
        dis_cap = std::min(dis_cap, tech.p_dis_max);
      }
      if (opt.relaxed_exclusivity) dis_cap = tech.eta_dis * (reachable + tech.eta_ch * ch_cap * dt) / dt;
      reachable += tech.eta_ch * ch_cap * dt;

      OperationVars v;
      v.x_ch = m.add_variable(0.0, ch_cap > 0.0 ? 1.0 : 0.0, type, "xch_" + at);
      v.x_dis = m.add_variable(0.0, dis_cap > 0.0 ? 1.0 : 0.0, type, "xdis_" + at);
      v.x_gplus = m.add_variable(0.0, 1.0, type, "xgp_" + at);
      v.x_gminus = m.add_variable(0.0, 1.0, type, "xgm_" + at);
      v.p_ch = m.add_variable(0.0, ch_cap, milp::Integrality::continuous, "pch_" + at);
      v.p_dis = m.add_variable(0.0, dis_cap, milp::Integrality::continuous, "pdis_" + at);
      v.e = m.add_variable(0.0, milp::kInf, milp::Integrality::continuous, "e_" + at);
      v.p_gplus = m.add_variable(0.0, pg, milp::Integrality::continuous, "gp_" + at);
      v.p_gminus = m.add_variable(0.0, pg, milp::Integrality::continuous, "gm_" + at);

      if (!opt.relaxed_exclusivity) {
        m.add_constraint({{v.p_ch, 1.0}, {v.x_ch, -ch_cap}}, Relation::less_equal, 0.0, "ch_on_" + at);
        m.add_constraint({{v.p_dis, 1.0}, {v.x_dis, -dis_cap}}, Relation::less_equal, 0.0, "dis_on_" + at);
      }
      std::vector<Term> soc{{v.e, 1.0}, {v.p_ch, -tech.eta_ch * dt}, {v.p_dis, dt / tech.eta_dis}};
      if (t > 0) soc.push_back({prev_e, -1.0});
      m.add_constraint(soc, Relation::equal, 0.0, "soc_" + at);
      if (!opt.relaxed_exclusivity) {
        if (opt.activity)
          m.add_constraint({{v.x_ch, 1.0}, {v.x_dis, 1.0}, {*opt.activity, -1.0}}, Relation::less_equal,
                           0.0, "excl_" + at);
        else
          m.add_constraint({{v.x_ch, 1.0}, {v.x_dis, 1.0}}, Relation::less_equal, 1.0, "excl_" + at);
      } else if (opt.activity) {
        // Rejected buildings still may not touch the storage.
        m.add_constraint({{v.p_ch, 1.0}, {*opt.activity, -ch_cap}}, Relation::less_equal, 0.0,
                         "ch_on_" + at);
        m.add_constraint({{v.p_dis, 1.0}, {*opt.activity, -dis_cap}}, Relation::less_equal, 0.0,
                         "dis_on_" + at);
      }

      std::vector<Term> bal{{v.p_gplus, 1.0}, {v.p_gminus, -1.0}, {v.p_ch, -1.0}, {v.p_dis, 1.0}};
      double rhs = -sc.renewable[t];
      if (opt.demand_scale) bal.push_back({*opt.demand_scale, -sc.demand[t]});
      else rhs += sc.demand[t];
      m.add_constraint(bal, opt.balance == GridBalance::exact ? Relation::equal : Relation::greater_equal,
                       rhs, "bal_" + at);
      if (!opt.relaxed_exclusivity) {
        m.add_constraint({{v.x_gplus, 1.0}, {v.x_gminus, 1.0}}, Relation::less_equal, 1.0, "gexcl_" + at);
        m.add_constraint({{v.p_gplus, 1.0}, {v.x_gplus, -pg}}, Relation::less_equal, 0.0, "gp_on_" + at);
        m.add_constraint({{v.p_gminus, 1.0}, {v.x_gminus, -pg}}, Relation::less_equal, 0.0, "gm_on_" + at);
      }
      if (opt.energy_cap)
        m.add_constraint({{v.e, 1.0}, {*opt.energy_cap, -1.0}}, Relation::less_equal, 0.0, "ecap_" + at);
      if (opt.power_cap) {
        m.add_constraint({{v.p_ch, 1.0}, {*opt.power_cap, -1.0}}, Relation::less_equal, 0.0, "pcap_ch_" + at);
        m.add_constraint({{v.p_dis, 1.0}, {*opt.power_cap, -1.0}}, Relation::less_equal, 0.0, "pcap_dis_" + at);
      }
      block.vars().push_back(v);
      prev_e = v.e;
    }
  }
  return block;
}

// Expected bill sum_w p_w (c+ sum g+ - c- sum g-) dt as linear terms.
inline std::vector<milp::Term> bill_terms(const Instance& inst, const OperationBlock& block,
                                          double scale = 1.0) {
  std::vector<milp::Term> out;
  const double dt = inst.time.dt_hours;
  for (std::size_t w = 0; w < inst.num_scenarios(); ++w)
    for (std::size_t t = 0; t < inst.num_periods(); ++t) {
      const auto& v = block.at(w, t);
      const double p = inst.probability(w) * dt * scale;
      out.push_back({v.p_gplus, p * inst.tariff.buy_price});
      out.push_back({v.p_gminus, -p * inst.tariff.sell_price});
    }
  return out;
}

inline void extract_block(const Instance& inst, const OperationBlock& block,
                          const std::vector<double>& x, OperationSchedule& out, std::size_t row) {
  (void)inst;
  for (std::size_t w = 0; w < out.num_scenarios(); ++w)
    for (std::size_t t = 0; t < out.num_periods(); ++t) {
      const auto& v = block.at(w, t);
      auto& p = out.at(row, w, t);
      auto clean = [](double value) { return std::abs(value) < 1e-12 ? 0.0 : value; };
      p.p_ch = clean(x[v.p_ch.value]);
      p.p_dis = clean(x[v.p_dis.value]);
      p.e = clean(x[v.e.value]);
      p.p_gplus = clean(x[v.p_gplus.value]);
      p.p_gminus = clean(x[v.p_gminus.value]);
      p.x_ch = p.p_ch > 0.0 || x[v.x_ch.value] > 0.5;
      p.x_dis = p.p_dis > 0.0 || x[v.x_dis.value] > 0.5;
      p.x_gplus = p.p_gplus > 0.0 || x[v.x_gplus.value] > 0.5;
      p.x_gminus = p.p_gminus > 0.0 || x[v.x_gminus.value] > 0.5;
    }
}

inline bool schedule_is_exclusive(const OperationSchedule& s, double tol) {
  for (std::size_t i = 0; i < s.num_buildings(); ++i)
    for (std::size_t w = 0; w < s.num_scenarios(); ++w)
      for (std::size_t t = 0; t < s.num_periods(); ++t) {
        const auto& p = s.at(i, w, t);
        if (std::min(p.p_ch, p.p_dis) > tol || std::min(p.p_gplus, p.p_gminus) > tol) return false;
      }
  return true;
}

inline SolveStats stats_of(const milp::MilpSolution& sol) {
  return {sol.status, sol.objective, sol.bound, sol.gap, sol.root_relaxation, sol.nodes, sol.lp_iterations};
}

// Solves and insists on a usable incumbent. Limits without incumbent raise
// SolverLimitError; infeasible or unbounded models raise SolverError since
// every formulation here has a known feasible point.
inline milp::MilpSolution run_solver(const milp::MilpModel& model, const SolverOptions& opt,
                                     const std::string& what) {
  milp::MilpSolution sol = milp::solve_with_backend(model, opt.params, opt.backend);
  if (sol.status == milp::SolveStatus::limit_reached && !sol.has_incumbent)
    throw SolverLimitError(what + ": solver limit reached without a feasible solution");
  if (sol.status == milp::SolveStatus::infeasible || sol.status == milp::SolveStatus::unbounded)
    throw SolverError(what + ": model reported " + milp::to_string(sol.status));
  return sol;
}

}  // namespace cesmarket
