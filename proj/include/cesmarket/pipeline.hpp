#pragma once

// Runs a selection of models in dependency order: baseline, IES (which
// supplies J_ind to CES), CMES, CES, VES.

#include <optional>
#include <string>
#include <vector>

#include "cesmarket/error.hpp"
#include "cesmarket/formulations/markets.hpp"
#include "cesmarket/formulations/ves.hpp"
#include "cesmarket/metrics.hpp"

namespace cesmarket {

enum class ModelSelection { baseline, ies, cmes, ces, ves, compare };

inline ModelSelection parse_model_selection(const std::string& s) {
  if (s == "baseline" || s == "wo_es") return ModelSelection::baseline;
  if (s == "ies") return ModelSelection::ies;
  if (s == "cmes") return ModelSelection::cmes;
  if (s == "ces") return ModelSelection::ces;
  if (s == "ves") return ModelSelection::ves;
  if (s == "compare") return ModelSelection::compare;
  throw InputError("unknown model '" + s + "'");
}

inline const char* to_string(ModelSelection m) {
  switch (m) {
    case ModelSelection::baseline: return "baseline";
    case ModelSelection::ies: return "ies";
    case ModelSelection::cmes: return "cmes";
    case ModelSelection::ces: return "ces";
    case ModelSelection::ves: return "ves";
    case ModelSelection::compare: return "compare";
  }
  return "?";
}

struct PriceGridSpec {
  double start = 0.05;
  double stop = 0.5;
  double step = 0.002;
};

struct RunOptions {
  ModelSelection model = ModelSelection::compare;
  SolverOptions solver;
  PriceGridSpec prices;
  double curve_step = 10.0;  // kWh between IES curve samples; 0 skips the curve
  VesSizing ves_sizing = VesSizing::leased_capacity;
  RejectedFallback fallback = RejectedFallback::individual_storage;
  double equilibrium_tol = 1e-5;
  std::uint64_t seed = 0;
};

struct IesCurve {
  std::vector<CurvePoint> points;
  std::optional<QuadraticFit> fit;
  std::optional<double> projected_price;  // Q(r_hat) / r_hat^2
};

struct RunResult {
  std::string instance;
  RunOptions options;
  std::optional<ModelOutcome> baseline;
  std::optional<IesOutcome> ies;
  std::vector<IesCurve> curves;
  std::optional<ModelOutcome> cmes;
  std::optional<CesOutcome> ces;
  std::optional<ModelOutcome> ces_outcome;
  std::optional<EquilibriumReport> equilibrium;
  std::optional<VesOutcome> ves;
  std::optional<ModelOutcome> ves_outcome;

  // Outcomes present, in table order.
  std::vector<const ModelOutcome*> outcomes() const {
    std::vector<const ModelOutcome*> v;
    if (baseline) v.push_back(&*baseline);
    if (ies) v.push_back(&ies->outcome);
    if (ves_outcome) v.push_back(&*ves_outcome);
    if (ces_outcome) v.push_back(&*ces_outcome);
    if (cmes) v.push_back(&*cmes);
    return v;
  }
};

inline RunResult run_models(const Instance& inst, const RunOptions& opt) {
  const auto sel = opt.model;
  const bool all = sel == ModelSelection::compare;
  RunResult res;
  res.instance = inst.name;
  res.options = opt;
  if (all || sel == ModelSelection::baseline) res.baseline = solve_baseline(inst);
  if (all || sel == ModelSelection::ies || sel == ModelSelection::ces) {
    res.ies = solve_ies(inst, opt.solver);
    if (opt.curve_step > 0.0 && sel != ModelSelection::ces) {
      for (std::size_t i = 0; i < inst.num_buildings(); ++i) {
        IesCurve c;
        c.points = sweep_ies_curve(inst, i, opt.curve_step, opt.solver);
        try {
          c.fit = fit_quadratic(c.points);
        } catch (const InputError&) {
        }
        c.projected_price = projected_price(inst, i, res.ies->buildings[i].r_hat, opt.solver);
        res.curves.push_back(std::move(c));
      }
    }
  }
  if (all || sel == ModelSelection::cmes) res.cmes = solve_cmes(inst, opt.solver);
  if (all || sel == ModelSelection::ces) {
    res.ces = solve_ces(inst, res.ies->j_ind(), opt.solver);
    res.ces_outcome = ces_model_outcome(*res.ces, inst, &*res.ies, opt.fallback);
    res.equilibrium = verify_equilibrium(*res.ces, inst, opt.equilibrium_tol);
  }
  if (all || sel == ModelSelection::ves) {
    const auto grid = price_grid(opt.prices.start, opt.prices.stop, opt.prices.step);
    res.ves = ves_equilibrium(inst, grid, opt.solver, opt.ves_sizing);
    res.ves_outcome = ves_model_outcome(*res.ves);
  }
  // Reconcile every envelope before anything is written.
  for (const auto* o : res.outcomes()) social_cost(*o);
  return res;
}

}  // namespace cesmarket
