#pragma once

// Shared-storage programs: the storage operator's equilibrium problem (CES)
// and the cooperative community optimum (CMES). Both size one aggregate unit
// (E, P) serving every participating building.
//
// Variable census: 2 (E, P) + per building 2 (s_i, r_i) + 9 per
// (building, scenario, period) = N*|W|*T*(4 binaries + 5 continuous) + 2N + 2.
// Constraint census with binaries: 9 per (building, scenario, period),
// 3 per (scenario, period) for the aggregate limits, and per building the RUS
// row, plus for CES the incentive row and the acceptance link of r_i
// (and r_i >= r_min s_i when r_min > 0).

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cesmarket/error.hpp"
#include "cesmarket/formulations/operation.hpp"

namespace cesmarket {

enum class SharedKind { ces, cmes };

struct SharedProgram {
  SharedKind kind = SharedKind::ces;
  milp::MilpModel model;
  milp::VarId energy, power;
  std::vector<milp::VarId> s, r;
  std::vector<OperationBlock> blocks;
};

inline std::size_t shared_variable_census(const Instance& inst) {
  return inst.num_buildings() * inst.num_scenarios() * inst.num_periods() * 9 +
         2 * inst.num_buildings() + 2;
}

inline SharedProgram build_shared_program(const Instance& inst, SharedKind kind,
                                          std::span<const double> j_ind, bool relaxed = false) {
  using milp::Relation;
  using milp::Term;
  const std::size_t N = inst.num_buildings();
  if (kind == SharedKind::ces && j_ind.size() != N)
    throw InputError("CES program needs the individual-storage cost J_ind of every building");
  const double spread = inst.tariff.spread();

  SharedProgram prog;
  prog.kind = kind;
  auto& m = prog.model;
  m.set_sense(kind == SharedKind::ces ? milp::Sense::maximize : milp::Sense::minimize);
  prog.energy = m.add_variable(0.0, milp::kInf, milp::Integrality::continuous, "E");
  prog.power = m.add_variable(0.0, milp::kInf, milp::Integrality::continuous, "P");

  for (std::size_t i = 0; i < N; ++i) {
    const std::string tag = "b" + std::to_string(i);
    const double lo = kind == SharedKind::cmes ? 1.0 : 0.0;
    prog.s.push_back(m.add_variable(lo, 1.0, milp::Integrality::binary, "s_" + tag));
    prog.r.push_back(m.add_variable(kind == SharedKind::cmes ? inst.r_min[i] : 0.0, inst.r_max[i],
                                    milp::Integrality::continuous, "r_" + tag));
    BlockOptions opt;
    opt.balance = GridBalance::at_least;
    opt.relaxed_exclusivity = relaxed;
    if (kind == SharedKind::ces) {
      opt.demand_scale = prog.s[i];
      opt.activity = prog.s[i];
    }
    prog.blocks.push_back(add_operation_block(m, inst, i, opt));

    // RUS delivery: C_i + (c+ - c-) r_i <= C_bar_i.
    auto rus = bill_terms(inst, prog.blocks[i]);
    rus.push_back({prog.r[i], spread});
    m.add_constraint(rus, Relation::less_equal, inst.baseline_bill[i], "rus_" + tag);
    if (kind == SharedKind::ces) {
      // Participation: half the spread per unit of RUS plus the bill stays
      // within what the building would pay with its own storage.
      auto inc = bill_terms(inst, prog.blocks[i]);
      inc.push_back({prog.r[i], spread / 2.0});
      inc.push_back({prog.s[i], -j_ind[i]});
      m.add_constraint(inc, Relation::less_equal, 0.0, "incentive_" + tag);
      m.add_constraint({{prog.r[i], 1.0}, {prog.s[i], -inst.r_max[i]}}, Relation::less_equal, 0.0,
                       "accept_" + tag);
      if (inst.r_min[i] > 0.0)
        m.add_constraint({{prog.r[i], 1.0}, {prog.s[i], -inst.r_min[i]}}, Relation::greater_equal, 0.0,
                         "rmin_" + tag);
    }
  }

  for (std::size_t w = 0; w < inst.num_scenarios(); ++w)
    for (std::size_t t = 0; t < inst.num_periods(); ++t) {
      const std::string at = "w" + std::to_string(w) + "_t" + std::to_string(t);
      std::vector<Term> soc{{prog.energy, -1.0}};
      std::vector<Term> up{{prog.power, -1.0}}, down{{prog.power, -1.0}};
      for (const auto& b : prog.blocks) {
        const auto& v = b.at(w, t);
        soc.push_back({v.e, 1.0});
        up.push_back({v.p_ch, 1.0});
        up.push_back({v.p_dis, -1.0});
        down.push_back({v.p_ch, -1.0});
        down.push_back({v.p_dis, 1.0});
      }
      m.add_constraint(soc, Relation::less_equal, 0.0, "Ecap_" + at);
      m.add_constraint(up, Relation::less_equal, 0.0, "Pcap_up_" + at);
      m.add_constraint(down, Relation::less_equal, 0.0, "Pcap_down_" + at);
    }

  std::vector<Term> obj;
  double constant = 0.0;
  if (kind == SharedKind::ces) {
    for (std::size_t i = 0; i < N; ++i) obj.push_back({prog.r[i], spread / 2.0});
    obj.push_back({prog.energy, -inst.tech.energy_price});
    obj.push_back({prog.power, -inst.tech.power_price});
  } else {
    for (std::size_t i = 0; i < N; ++i) {
      obj.push_back({prog.r[i], -spread});
      constant += inst.baseline_bill[i];
    }
    obj.push_back({prog.energy, inst.tech.energy_price});
    obj.push_back({prog.power, inst.tech.power_price});
  }
  m.set_objective(obj, constant);
  return prog;
}

inline SharedProgram build_ces_program(const Instance& inst, std::span<const double> j_ind,
                                       bool relaxed = false) {
  return build_shared_program(inst, SharedKind::ces, j_ind, relaxed);
}

inline SharedProgram build_cmes_program(const Instance& inst, bool relaxed = false) {
  return build_shared_program(inst, SharedKind::cmes, {}, relaxed);
}

}  // namespace cesmarket
