#pragma once

// Solver entry points and backend dispatch.
//
// "reference" is the built-in branch-and-bound. "external" runs the command
// in CESMARKET_MILP_COMMAND as `<command> <model.json> <solution.json>`; the
// file formats are produced by model_to_json() and read by
// solution_from_json(). tools/scipy_milp_backend.py implements that protocol
// on top of scipy.optimize.milp.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <unistd.h>

#include "cesmarket/error.hpp"
#include "cesmarket/milp/branch_and_bound.hpp"
#include "cesmarket/milp/model.hpp"
#include "json.hpp"

namespace cesmarket::milp {

inline MilpSolution solve(const MilpModel& model, const SolveParams& params = {}) {
  if (!(params.feasibility_tol > 0.0) || !(params.integrality_tol > 0.0) ||
      !(params.relative_gap > 0.0))
    throw ModelError("solve: tolerances must be positive");
  return BranchAndBound(model, params).solve();
}

inline nlohmann::json model_to_json(const MilpModel& model, const SolveParams& params) {
  auto bound = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json doc;
  doc["sense"] = model.sense() == Sense::maximize ? "max" : "min";
  doc["objective"] = model.objective();
  doc["objective_constant"] = model.objective_constant();
  auto& vars = doc["variables"] = nlohmann::json::array();
  for (const auto& v : model.variables())
    vars.push_back({{"lb", bound(v.lower)},
                    {"ub", bound(v.upper)},
                    {"binary", v.type == Integrality::binary}});
  auto& rows = doc["constraints"] = nlohmann::json::array();
  for (const auto& c : model.constraints()) {
    nlohmann::json idx = nlohmann::json::array(), val = nlohmann::json::array();
    for (const auto& t : c.row) {
      idx.push_back(t.var.value);
      val.push_back(t.coef);
    }
    const char* rel = c.relation == Relation::less_equal ? "<=" : c.relation == Relation::equal ? "=" : ">=";
    rows.push_back({{"index", idx}, {"value", val}, {"relation", rel}, {"rhs", c.rhs}});
  }
  doc["params"] = {{"feasibility_tol", params.feasibility_tol},
                   {"integrality_tol", params.integrality_tol},
                   {"relative_gap", params.relative_gap},
                   {"time_limit_seconds", params.time_limit_seconds},
                   {"node_limit", params.node_limit}};
  return doc;
}

inline MilpSolution solution_from_json(const nlohmann::json& doc, const MilpModel& model) {
  MilpSolution sol;
  const std::string status = doc.at("status").get<std::string>();
  if (status == "optimal") sol.status = SolveStatus::optimal;
  else if (status == "infeasible") sol.status = SolveStatus::infeasible;
  else if (status == "unbounded") sol.status = SolveStatus::unbounded;
  else if (status == "limit-reached") sol.status = SolveStatus::limit_reached;
  else throw SolverError("external backend returned unknown status " + status);
  if (doc.contains("values") && doc["values"].is_array()) {
    sol.values = doc["values"].get<std::vector<double>>();
    if (sol.values.size() != model.num_variables())
      throw SolverError("external backend returned the wrong number of values");
    for (std::size_t j = 0; j < sol.values.size(); ++j)
      if (model.variables()[j].type == Integrality::binary) sol.values[j] = std::round(sol.values[j]);
    sol.has_incumbent = true;
    sol.objective = model.evaluate_objective(sol.values);
  }
  sol.bound = doc.value("bound", sol.objective);
  sol.root_relaxation = doc.value("root_relaxation", sol.bound);
  sol.nodes = doc.value("nodes", std::int64_t{0});
  sol.gap = sol.has_incumbent ? std::abs(sol.objective - sol.bound) / std::max(1.0, std::abs(sol.objective)) : 0.0;
  return sol;
}

inline MilpSolution solve_external(const MilpModel& model, const SolveParams& params) {
  const char* command = std::getenv("CESMARKET_MILP_COMMAND");
  if (!command || !*command)
    throw BackendUnavailable("external backend requested but CESMARKET_MILP_COMMAND is not set");
  static std::atomic<unsigned> counter{0};
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("cesmarket_milp_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::create_directories(dir);
  const fs::path in = dir / "model.json";
  const fs::path out = dir / "solution.json";
  {
    std::ofstream f(in);
    f << model_to_json(model, params).dump();
  }
  const std::string cmd = std::string(command) + " '" + in.string() + "' '" + out.string() + "'";
  const int rc = std::system(cmd.c_str());
  nlohmann::json doc;
  {
    std::ifstream f(out);
    if (rc != 0 || !f) {
      fs::remove_all(dir);
      throw BackendUnavailable("external backend command failed: " + cmd);
    }
    doc = nlohmann::json::parse(f);
  }
  fs::remove_all(dir);
  return solution_from_json(doc, model);
}

inline MilpSolution solve_with_backend(const MilpModel& model, const SolveParams& params,
                                       std::string_view backend) {
  if (backend == "reference") return solve(model, params);
  if (backend == "external") return solve_external(model, params);
  throw BackendUnavailable("unknown MILP backend '" + std::string(backend) + "'");
}

// CPLEX LP text format, for inspecting a model with other solvers.
inline void write_lp_format(const MilpModel& model, std::ostream& os) {
  auto name = [&](int j) {
    const auto& v = model.variables()[j];
    return v.name.empty() ? "x" + std::to_string(j) : v.name;
  };
  auto terms = [&](const std::vector<Term>& row) {
    std::ostringstream s;
    s << std::setprecision(17);
    bool first = true;
    for (const auto& t : row) {
      s << (t.coef < 0 ? " - " : first ? " " : " + ") << std::abs(t.coef) << ' ' << name(t.var.value);
      first = false;
    }
    if (first) s << " 0 " << (model.num_variables() ? name(0) : "x0");
    return s.str();
  };
  os << std::setprecision(17);
  os << (model.sense() == Sense::maximize ? "Maximize\n" : "Minimize\n");
  std::vector<Term> obj;
  for (std::size_t j = 0; j < model.num_variables(); ++j)
    if (model.objective()[j] != 0.0) obj.push_back({VarId{static_cast<std::int32_t>(j)}, model.objective()[j]});
  os << " obj:" << terms(obj) << "\nSubject To\n";
  for (std::size_t r = 0; r < model.num_constraints(); ++r) {
    const auto& c = model.constraints()[r];
    const char* rel = c.relation == Relation::less_equal ? "<=" : c.relation == Relation::equal ? "=" : ">=";
    os << " c" << r << ':' << terms(c.row) << ' ' << rel << ' ' << c.rhs << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const auto& v = model.variables()[j];
    if (v.type == Integrality::binary && v.lower == 0.0 && v.upper == 1.0) continue;
    const std::string n = name(static_cast<int>(j));
    if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) os << ' ' << n << " free\n";
    else if (!std::isfinite(v.upper)) os << ' ' << v.lower << " <= " << n << '\n';
    else if (!std::isfinite(v.lower)) os << " -inf <= " << n << " <= " << v.upper << '\n';
    else os << ' ' << v.lower << " <= " << n << " <= " << v.upper << '\n';
  }
  os << "Binaries\n";
  for (std::size_t j = 0; j < model.num_variables(); ++j)
    if (model.variables()[j].type == Integrality::binary) os << ' ' << name(static_cast<int>(j)) << '\n';
  os << "End\n";
}

}  // namespace cesmarket::milp
