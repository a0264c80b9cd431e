#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cesmarket::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { minimize, maximize };
enum class Relation { less_equal, equal, greater_equal };
enum class Integrality { continuous, binary };

struct VarId {
  std::int32_t value = -1;
  friend bool operator==(VarId, VarId) = default;
};

struct ConstraintId {
  std::int32_t value = -1;
  friend bool operator==(ConstraintId, ConstraintId) = default;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct Variable {
  double lower = 0.0;
  double upper = kInf;
  Integrality type = Integrality::continuous;
  std::string name;
};

struct Constraint {
  std::vector<Term> row;  // sorted by variable, no duplicates, no zeros
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
  std::string name;
};

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Linear model under construction. Construction order fixes variable and
// constraint ids, so building the same formulation twice gives the same model.
class MilpModel {
 public:
  explicit MilpModel(Sense sense = Sense::minimize) : sense_(sense) {}

  VarId add_variable(double lower, double upper, Integrality type = Integrality::continuous,
                     std::string name = {}) {
    if (std::isnan(lower) || std::isnan(upper) || lower == kInf || upper == -kInf)
      throw ModelError("add_variable: invalid bounds");
    if (lower > upper) throw ModelError("add_variable: lower bound exceeds upper bound");
    if (type == Integrality::binary && (lower < 0.0 || upper > 1.0))
      throw ModelError("add_variable: binary bounds must lie within [0,1]");
    vars_.push_back({lower, upper, type, std::move(name)});
    objective_.push_back(0.0);
    return VarId{static_cast<std::int32_t>(vars_.size() - 1)};
  }

  VarId add_binary(std::string name = {}) {
    return add_variable(0.0, 1.0, Integrality::binary, std::move(name));
  }

  ConstraintId add_constraint(std::span<const Term> row, Relation rel, double rhs,
                              std::string name = {}) {
    if (!std::isfinite(rhs)) throw ModelError("add_constraint: rhs must be finite");
    rows_.push_back({normalize(row), rel, rhs, std::move(name)});
    return ConstraintId{static_cast<std::int32_t>(rows_.size() - 1)};
  }

  ConstraintId add_constraint(std::initializer_list<Term> row, Relation rel, double rhs,
                              std::string name = {}) {
    return add_constraint(std::span<const Term>(row.begin(), row.size()), rel, rhs,
                          std::move(name));
  }

  // Replaces the whole objective; calling it twice keeps only the last call.
  void set_objective(std::span<const Term> coefs, double constant = 0.0) {
    auto row = normalize(coefs);
    std::fill(objective_.begin(), objective_.end(), 0.0);
    for (const auto& t : row) objective_[t.var.value] = t.coef;
    objective_constant_ = constant;
  }

  void set_objective(std::initializer_list<Term> coefs, double constant = 0.0) {
    set_objective(std::span<const Term>(coefs.begin(), coefs.size()), constant);
  }

  void set_bounds(VarId v, double lower, double upper) {
    check(v);
    if (lower > upper) throw ModelError("set_bounds: lower bound exceeds upper bound");
    vars_[v.value].lower = lower;
    vars_[v.value].upper = upper;
  }

  void set_sense(Sense s) { sense_ = s; }

  Sense sense() const { return sense_; }
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }
  std::size_t num_binaries() const {
    std::size_t n = 0;
    for (const auto& v : vars_) n += v.type == Integrality::binary;
    return n;
  }
  const Variable& variable(VarId v) const { return vars_.at(v.value); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }

  double evaluate_objective(std::span<const double> x) const {
    double v = objective_constant_;
    for (std::size_t j = 0; j < objective_.size(); ++j) v += objective_[j] * x[j];
    return v;
  }

 private:
  void check(VarId v) const {
    if (v.value < 0 || static_cast<std::size_t>(v.value) >= vars_.size())
      throw ModelError("unknown variable id " + std::to_string(v.value));
  }

  std::vector<Term> normalize(std::span<const Term> row) const {
    std::map<std::int32_t, double> merged;
    for (const auto& t : row) {
      check(t.var);
      if (!std::isfinite(t.coef)) throw ModelError("coefficient must be finite");
      merged[t.var.value] += t.coef;
    }
    std::vector<Term> out;
    out.reserve(merged.size());
    for (auto [j, c] : merged)
      if (c != 0.0) out.push_back({VarId{j}, c});
    return out;
  }

  Sense sense_;
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> objective_;
  double objective_constant_ = 0.0;
};

enum class SolveStatus { optimal, infeasible, unbounded, limit_reached };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::limit_reached: return "limit-reached";
  }
  return "?";
}

struct SolveParams {
  double feasibility_tol = 1e-6;
  double integrality_tol = 1e-6;
  double relative_gap = 1e-6;
  std::int64_t node_limit = 1'000'000;
  double time_limit_seconds = 300.0;
  std::uint64_t seed = 0;
};

struct MilpSolution {
  SolveStatus status = SolveStatus::infeasible;
  bool has_incumbent = false;
  double objective = 0.0;
  double bound = 0.0;  // best proven bound in the model's own sense
  double root_relaxation = 0.0;
  double gap = 0.0;    // |objective - bound| / max(1, |objective|)
  std::vector<double> values;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;

  bool certified() const { return status == SolveStatus::optimal; }
  double value(VarId v) const { return values.at(v.value); }
};

}  // namespace cesmarket::milp
