#pragma once

// LP-based branch-and-bound for models with binary and continuous variables.
//
// Node selection is best-bound with FIFO tie-breaking. Each child inherits the
// parent's optimal basis; the simplex re-enters phase 1 from it after the
// branching bound change. At every node a zero-objective-loss shift rounding
// tries to move fractional binaries to 0/1 using row slacks only; binaries it
// cannot move are the branching candidates (most fractional, lowest index).

#include <chrono>
#include <cmath>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "cesmarket/milp/feasibility.hpp"
#include "cesmarket/milp/model.hpp"
#include "cesmarket/milp/simplex.hpp"

namespace cesmarket::milp {

namespace detail {

struct RowMatrix {
  std::vector<int> start;
  std::vector<int> col;
  std::vector<double> val;
  std::vector<double> lo;
  std::vector<double> hi;
};

inline RowMatrix row_matrix(const MilpModel& model) {
  RowMatrix rm;
  rm.start.push_back(0);
  for (const auto& c : model.constraints()) {
    for (const auto& t : c.row) {
      rm.col.push_back(t.var.value);
      rm.val.push_back(t.coef);
    }
    rm.start.push_back(static_cast<int>(rm.col.size()));
    rm.lo.push_back(c.relation == Relation::less_equal ? -kInf : c.rhs);
    rm.hi.push_back(c.relation == Relation::greater_equal ? kInf : c.rhs);
  }
  return rm;
}

// Shifts fractional binaries to 0 or 1 when every row containing them has
// enough slack, continuous values untouched. Returns the binaries that could
// not be moved.
inline std::vector<int> shift_round(std::vector<double>& x, const LpProblem& lp,
                                    const RowMatrix& rm, const std::vector<int>& binaries,
                                    double int_tol) {
  std::vector<double> act(rm.lo.size(), 0.0);
  for (std::size_t r = 0; r < act.size(); ++r)
    for (int k = rm.start[r]; k < rm.start[r + 1]; ++k) act[r] += rm.val[k] * x[rm.col[k]];

  std::vector<int> frac;
  for (int j : binaries)
    if (std::min(x[j], 1.0 - x[j]) > int_tol) frac.push_back(j);

  auto fits = [&](int j, double delta) {
    for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
      const int r = lp.row_index[k];
      const double next = act[r] + lp.value[k] * delta;
      const double tol = 1e-9 * std::max(1.0, std::abs(rm.hi[r] < kInf ? rm.hi[r] : rm.lo[r]));
      if (next > rm.hi[r] + tol || next < rm.lo[r] - tol) return false;
    }
    return true;
  };

  bool progress = true;
  while (progress && !frac.empty()) {
    progress = false;
    std::vector<int> left;
    for (int j : frac) {
      const double up = 1.0 - x[j];
      const double down = -x[j];
      const bool can_up = fits(j, up);
      const bool can_down = fits(j, down);
      if (!can_up && !can_down) {
        left.push_back(j);
        continue;
      }
      double delta;
      if (can_up && can_down) {
        const double cu = lp.cost[j] * up;
        const double cd = lp.cost[j] * down;
        delta = cu < cd ? up : cd < cu ? down : (x[j] >= 0.5 ? up : down);
      } else {
        delta = can_up ? up : down;
      }
      for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k)
        act[lp.row_index[k]] += lp.value[k] * delta;
      x[j] = delta > 0 ? 1.0 : 0.0;
      progress = true;
    }
    frac = std::move(left);
  }
  return frac;
}

}  // namespace detail

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, SolveParams params)
      : model_(model), params_(params), lp_(make_lp(model)), rows_(detail::row_matrix(model)) {
    for (std::size_t j = 0; j < model.num_variables(); ++j)
      if (model.variables()[j].type == Integrality::binary) binaries_.push_back(static_cast<int>(j));
  }

  MilpSolution solve() {
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();
    const double sign = model_.sense() == Sense::maximize ? -1.0 : 1.0;
    const int n = lp_.num_cols;

    MilpSolution sol;
    BoundedSimplex simplex(lp_);
    std::vector<double> root_lo(lp_.lower.begin(), lp_.lower.begin() + n);
    std::vector<double> root_hi(lp_.upper.begin(), lp_.upper.begin() + n);

    double incumbent = kInf;  // minimization sense, without objective constant
    std::vector<double> best;
    bool incomplete = false;

    struct Node {
      double bound;
      std::int64_t seq;
      std::vector<std::pair<int, std::int8_t>> fixings;
      std::shared_ptr<const Basis> basis;
    };
    struct Order {
      bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.seq < b.seq;
      }
    };
    std::set<Node, Order> open;
    std::int64_t seq = 0;
    open.insert(Node{-kInf, seq++, {}, nullptr});

    auto abs_gap = [&](double inc) { return params_.relative_gap * std::max(1.0, std::abs(inc)); };

    auto offer = [&](const std::vector<double>& x, double obj) {
      if (obj < incumbent) {
        incumbent = obj;
        best = x;
      }
    };

    bool root = true;
    bool unbounded = false;
    double pruned_bound = kInf;  // lowest bound among nodes discarded by the incumbent
    std::vector<double> lo, hi;
    while (!open.empty()) {
      if (std::isfinite(incumbent) && open.begin()->bound >= incumbent - abs_gap(incumbent)) break;
      if (sol.nodes >= params_.node_limit ||
          std::chrono::duration<double>(clock::now() - started).count() > params_.time_limit_seconds) {
        incomplete = true;
        break;
      }
      Node node = std::move(open.extract(open.begin()).value());
      ++sol.nodes;

      lo = root_lo;
      hi = root_hi;
      for (auto [j, v] : node.fixings) lo[j] = hi[j] = v;
      simplex.set_structural_bounds(lo, hi);
      if (node.basis) simplex.set_basis(*node.basis);
      const LpStatus st = simplex.solve();
      if (st == LpStatus::infeasible) {
        root = false;
        continue;
      }
      if (st == LpStatus::unbounded) {
        unbounded = true;
        break;
      }
      if (st == LpStatus::iteration_limit) {
        incomplete = true;
        root = false;
        continue;
      }
      const double obj = simplex.objective();
      if (root) {
        sol.root_relaxation = sign * (obj + sign * model_.objective_constant());
        root = false;
      }
      if (std::isfinite(incumbent) && obj >= incumbent - abs_gap(incumbent)) {
        pruned_bound = std::min(pruned_bound, obj);
        continue;
      }

      std::vector<double> x = simplex.structural_values();
      std::vector<int> frac;
      for (int j : binaries_)
        if (std::min(std::abs(x[j]), std::abs(1.0 - x[j])) > params_.integrality_tol) frac.push_back(j);
      if (frac.empty()) {
        offer(x, obj);
        continue;
      }
      std::vector<double> rounded = x;
      std::vector<int> stuck =
          detail::shift_round(rounded, lp_, rows_, binaries_, params_.integrality_tol);
      if (stuck.empty()) {
        double robj = 0.0;
        for (int j = 0; j < n; ++j) robj += lp_.cost[j] * rounded[j];
        offer(rounded, robj);
        if (robj <= obj + abs_gap(robj)) {
          pruned_bound = std::min(pruned_bound, obj);
          continue;
        }
        stuck = frac;
      }

      int branch = -1;
      double best_frac = -1.0;
      for (int j : stuck) {
        const double f = std::min(x[j], 1.0 - x[j]);
        if (f > best_frac + 1e-12) {
          best_frac = f;
          branch = j;
        }
      }
      auto basis = std::make_shared<const Basis>(simplex.basis());
      const std::int8_t first = x[branch] >= 0.5 ? 1 : 0;
      for (std::int8_t v : {first, static_cast<std::int8_t>(1 - first)}) {
        Node child{obj, seq++, node.fixings, basis};
        child.fixings.emplace_back(branch, v);
        open.insert(std::move(child));
      }
    }

    sol.lp_iterations = simplex.iterations();
    const double constant = model_.objective_constant();
    if (unbounded) {
      sol.status = SolveStatus::unbounded;
      return sol;
    }
    double bound_min = std::min(pruned_bound, incumbent);
    if (!open.empty()) bound_min = std::min(bound_min, open.begin()->bound);
    if (!std::isfinite(incumbent)) {
      sol.status = incomplete || !open.empty() ? SolveStatus::limit_reached : SolveStatus::infeasible;
      sol.bound = sign * (bound_min + sign * constant);
      return sol;
    }

    polish(best, simplex, root_lo, root_hi, incumbent);
    sol.has_incumbent = true;
    sol.values = best;
    sol.objective = model_.evaluate_objective(best);
    const double inc_min = sign * sol.objective;
    if (incomplete && !open.empty()) {
      sol.status = SolveStatus::limit_reached;
    } else {
      sol.status = SolveStatus::optimal;
      bound_min = std::min(bound_min, inc_min - sign * constant);
    }
    sol.bound = sign * (bound_min + sign * constant);
    sol.gap = std::abs(sol.objective - sol.bound) / std::max(1.0, std::abs(sol.objective));
    return sol;
  }

 private:
  // Fixes binaries at their rounded values and re-solves the continuous part,
  // so that returned values are an exact vertex for that assignment.
  void polish(std::vector<double>& x, BoundedSimplex& simplex, std::vector<double> lo,
              std::vector<double> hi, double incumbent) const {
    for (int j : binaries_) lo[j] = hi[j] = std::round(x[j]);
    simplex.set_structural_bounds(lo, hi);
    if (simplex.solve() == LpStatus::optimal) {
      const double obj = simplex.objective();
      if (obj <= incumbent + 1e-9 * std::max(1.0, std::abs(incumbent))) {
        auto polished = simplex.structural_values();
        if (check_feasibility(model_, polished, params_.feasibility_tol, params_.integrality_tol)
                .empty() ||
            !check_feasibility(model_, x, params_.feasibility_tol, params_.integrality_tol).empty())
          x = std::move(polished);
      }
    }
    for (int j : binaries_) x[j] = std::round(x[j]);
  }

  const MilpModel& model_;
  SolveParams params_;
  LpProblem lp_;
  detail::RowMatrix rows_;
  std::vector<int> binaries_;
};

}  // namespace cesmarket::milp
