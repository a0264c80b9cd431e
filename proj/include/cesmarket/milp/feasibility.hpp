#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cesmarket/milp/model.hpp"

namespace cesmarket::milp {

struct Violation {
  std::string what;
  double amount = 0.0;
};

// Re-evaluates every bound, integrality requirement and row of the model at x.
// Tolerances are absolute, scaled by max(1, |rhs|) for rows.
inline std::vector<Violation> check_feasibility(const MilpModel& model, std::span<const double> x,
                                                double feas_tol = 1e-6, double int_tol = 1e-6) {
  std::vector<Violation> out;
  if (x.size() != model.num_variables()) {
    out.push_back({"value vector has wrong length", 0.0});
    return out;
  }
  const auto& vars = model.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double v = x[j];
    const auto label = [&] {
      return vars[j].name.empty() ? "x" + std::to_string(j) : vars[j].name;
    };
    if (!std::isfinite(v)) {
      out.push_back({label() + " is not finite", 0.0});
      continue;
    }
    if (v < vars[j].lower - feas_tol) out.push_back({label() + " below lower bound", vars[j].lower - v});
    if (v > vars[j].upper + feas_tol) out.push_back({label() + " above upper bound", v - vars[j].upper});
    if (vars[j].type == Integrality::binary) {
      const double dist = std::min(std::abs(v), std::abs(v - 1.0));
      if (dist > int_tol) out.push_back({label() + " not integral", dist});
    }
  }
  const auto& rows = model.constraints();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double act = 0.0;
    for (const auto& t : rows[r].row) act += t.coef * x[t.var.value];
    const double tol = feas_tol * std::max(1.0, std::abs(rows[r].rhs));
    double excess = 0.0;
    switch (rows[r].relation) {
      case Relation::less_equal: excess = act - rows[r].rhs; break;
      case Relation::greater_equal: excess = rows[r].rhs - act; break;
      case Relation::equal: excess = std::abs(act - rows[r].rhs); break;
    }
    if (excess > tol) {
      std::ostringstream os;
      os << (rows[r].name.empty() ? "row " + std::to_string(r) : rows[r].name) << " violated";
      out.push_back({os.str(), excess});
    }
  }
  return out;
}

}  // namespace cesmarket::milp
