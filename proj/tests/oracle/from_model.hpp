#pragma once

#include "cesmarket/milp/model.hpp"
#include "oracle/dense_lp.hpp"

namespace oracle {

// Dense copy of a library model in minimization form.
inline Lp to_dense(const cesmarket::milp::MilpModel& model, std::vector<int>* binaries = nullptr) {
  using namespace cesmarket::milp;
  Lp lp;
  const std::size_t n = model.num_variables();
  const double sign = model.sense() == Sense::maximize ? -1.0 : 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    lp.c.push_back(sign * model.objective()[j]);
    lp.lo.push_back(model.variables()[j].lower);
    lp.hi.push_back(model.variables()[j].upper);
    if (binaries && model.variables()[j].type == Integrality::binary)
      binaries->push_back(static_cast<int>(j));
  }
  for (const auto& c : model.constraints()) {
    Row r;
    r.a.assign(n, 0.0);
    for (const auto& t : c.row) r.a[t.var.value] = t.coef;
    r.rel = c.relation == Relation::less_equal ? Rel::le
            : c.relation == Relation::equal    ? Rel::eq
                                               : Rel::ge;
    r.b = c.rhs;
    lp.rows.push_back(std::move(r));
  }
  return lp;
}

// Optimum in the model's own sense, including the objective constant.
inline std::optional<double> model_optimum(const cesmarket::milp::MilpModel& model,
                                           bool relax = false) {
  std::vector<int> bins;
  Lp lp = to_dense(model, &bins);
  Result r = relax ? solve_lp(lp) : bins.size() <= 12 ? enumerate(lp, bins) : enumerate_pruned(lp, bins);
  if (r.status != Status::optimal) return std::nullopt;
  const double sign = model.sense() == cesmarket::milp::Sense::maximize ? -1.0 : 1.0;
  return sign * r.objective + model.objective_constant();
}

}  // namespace oracle
