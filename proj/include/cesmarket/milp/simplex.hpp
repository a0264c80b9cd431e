#pragma once

// Bounded-variable revised primal simplex.
//
// Computational form: every row r gets a logical variable s_r so that
// A x + s = b holds as an equality; the row relation is carried by the bounds
// of s_r ([0,inf) for <=, (-inf,0] for >=, [0,0] for =). The basis inverse is
// kept explicitly as a dense matrix with product-form rank-one updates and is
// rebuilt periodically. Phase 1 minimizes the sum of bound violations of the
// basic variables, so any starting basis works; branch-and-bound relies on
// that to warm start children from the parent's optimal basis.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cesmarket/milp/model.hpp"

namespace cesmarket::milp {

// Column-major LP in minimization form.
struct LpProblem {
  int num_cols = 0;  // structural variables
  int num_rows = 0;
  std::vector<int> col_start;  // size num_cols + 1
  std::vector<int> row_index;
  std::vector<double> value;
  std::vector<double> cost;   // size num_cols
  std::vector<double> rhs;    // size num_rows
  std::vector<double> lower;  // size num_cols + num_rows, logicals last
  std::vector<double> upper;
};

inline LpProblem make_lp(const MilpModel& model) {
  LpProblem lp;
  const int n = static_cast<int>(model.num_variables());
  const int m = static_cast<int>(model.num_constraints());
  lp.num_cols = n;
  lp.num_rows = m;
  std::vector<int> count(n, 0);
  for (const auto& row : model.constraints())
    for (const auto& t : row.row) ++count[t.var.value];
  lp.col_start.assign(n + 1, 0);
  for (int j = 0; j < n; ++j) lp.col_start[j + 1] = lp.col_start[j] + count[j];
  lp.row_index.resize(lp.col_start[n]);
  lp.value.resize(lp.col_start[n]);
  std::vector<int> fill(lp.col_start.begin(), lp.col_start.end() - 1);
  for (int r = 0; r < m; ++r) {
    for (const auto& t : model.constraints()[r].row) {
      const int k = fill[t.var.value]++;
      lp.row_index[k] = r;
      lp.value[k] = t.coef;
    }
  }
  const double sign = model.sense() == Sense::maximize ? -1.0 : 1.0;
  lp.cost.resize(n);
  for (int j = 0; j < n; ++j) lp.cost[j] = sign * model.objective()[j];
  lp.rhs.resize(m);
  lp.lower.resize(n + m);
  lp.upper.resize(n + m);
  for (int j = 0; j < n; ++j) {
    lp.lower[j] = model.variables()[j].lower;
    lp.upper[j] = model.variables()[j].upper;
  }
  for (int r = 0; r < m; ++r) {
    const auto& c = model.constraints()[r];
    lp.rhs[r] = c.rhs;
    switch (c.relation) {
      case Relation::less_equal: lp.lower[n + r] = 0.0; lp.upper[n + r] = kInf; break;
      case Relation::greater_equal: lp.lower[n + r] = -kInf; lp.upper[n + r] = 0.0; break;
      case Relation::equal: lp.lower[n + r] = 0.0; lp.upper[n + r] = 0.0; break;
    }
  }
  return lp;
}

enum class VarStatus : std::uint8_t { basic, at_lower, at_upper, free_zero };

struct Basis {
  std::vector<int> header;  // basic variable per basis position
  std::vector<VarStatus> status;
  bool empty() const { return header.empty(); }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct SimplexTolerances {
  double primal = 1e-9;
  double dual = 1e-9;
  double pivot = 1e-9;
};

class BoundedSimplex {
 public:
  explicit BoundedSimplex(const LpProblem& lp, SimplexTolerances tol = {})
      : lp_(lp), tol_(tol), n_(lp.num_cols), m_(lp.num_rows),
        lower_(lp.lower), upper_(lp.upper) {
    x_.assign(n_ + m_, 0.0);
    reset_to_slack_basis();
  }

  int num_cols() const { return n_; }
  int num_rows() const { return m_; }

  // Replaces structural bounds (e.g. for a branch-and-bound node). Nonbasic
  // variables snap to the bound named by their status.
  void set_structural_bounds(const std::vector<double>& lower, const std::vector<double>& upper) {
    for (int j = 0; j < n_; ++j) {
      lower_[j] = lower[j];
      upper_[j] = upper[j];
    }
    for (int j = 0; j < n_ + m_; ++j)
      if (status_[j] != VarStatus::basic) place_nonbasic(j, status_[j]);
    fresh_ = false;
  }

  Basis basis() const { return {header_, status_}; }

  void set_basis(const Basis& b) {
    if (b.header == header_ && b.status == status_) return;
    header_ = b.header;
    status_ = b.status;
    for (int j = 0; j < n_ + m_; ++j)
      if (status_[j] != VarStatus::basic) place_nonbasic(j, status_[j]);
    factored_ = false;
  }

  LpStatus solve(std::int64_t iteration_limit = -1) {
    if (iteration_limit < 0) iteration_limit = 50LL * (n_ + m_) + 10000;
    if (!factored_) reinvert();
    else if (!fresh_) refresh_basic_values();
    std::int64_t local = 0;
    int since_reinvert = 0;
    int updates = 0;  // value updates since the last full recomputation
    int stalled = 0;
    double last_obj = kInf;
    bool bland = false;
    numerical_retries_ = 0;
    while (true) {
      if (local >= iteration_limit) return LpStatus::iteration_limit;
      if (since_reinvert >= kReinvertEvery) {
        reinvert();
        since_reinvert = 0;
        updates = 0;
      }
      const bool phase1 = compute_phase_costs();
      compute_duals();
      const double obj = phase1 ? infeasibility_sum() : objective();
      if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
        stalled = 0;
        bland = false;
      } else if (++stalled > kStallLimit) {
        bland = true;
      }
      last_obj = obj;

      int dir = 0;
      const int q = choose_entering(bland, dir);
      if (q < 0) {
        // Optimal for the current phase; confirm on freshly computed values.
        if (updates > 0) {
          reinvert();
          since_reinvert = 0;
          updates = 0;
          last_obj = kInf;
          continue;
        }
        return phase1 ? LpStatus::infeasible : LpStatus::optimal;
      }
      column(q, alpha_);
      const auto step = ratio_test(q, dir, phase1, bland);
      if (step.position < 0 && !step.bound_flip) {
        if (phase1) {
          // Cannot happen in exact arithmetic; rebuild and retry.
          reinvert();
          since_reinvert = 0;
          updates = 0;
          if (++numerical_retries_ > 5) return LpStatus::infeasible;
          continue;
        }
        return LpStatus::unbounded;
      }
      apply_step(q, dir, step);
      ++iterations_;
      ++local;
      ++updates;
      if (!step.bound_flip) ++since_reinvert;
    }
  }

  double objective() const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += lp_.cost[j] * x_[j];
    return v;
  }

  std::vector<double> structural_values() const {
    return std::vector<double>(x_.begin(), x_.begin() + n_);
  }

  std::int64_t iterations() const { return iterations_; }

 private:
  static constexpr int kReinvertEvery = 64;
  static constexpr int kStallLimit = 30;

  struct Step {
    int position = -1;  // leaving basis position, -1 for none
    bool bound_flip = false;
    double theta = 0.0;
    bool leave_at_upper = false;
  };

  void reset_to_slack_basis() {
    header_.resize(m_);
    status_.assign(n_ + m_, VarStatus::at_lower);
    for (int r = 0; r < m_; ++r) {
      header_[r] = n_ + r;
      status_[n_ + r] = VarStatus::basic;
    }
    for (int j = 0; j < n_; ++j) place_nonbasic(j, default_status(j));
    factored_ = false;
  }

  VarStatus default_status(int j) const {
    if (std::isfinite(lower_[j])) return VarStatus::at_lower;
    if (std::isfinite(upper_[j])) return VarStatus::at_upper;
    return VarStatus::free_zero;
  }

  void place_nonbasic(int j, VarStatus s) {
    if (s == VarStatus::at_lower && !std::isfinite(lower_[j])) s = default_status(j);
    if (s == VarStatus::at_upper && !std::isfinite(upper_[j])) s = default_status(j);
    if (s == VarStatus::free_zero && (std::isfinite(lower_[j]) || std::isfinite(upper_[j])))
      s = default_status(j);
    status_[j] = s;
    x_[j] = s == VarStatus::at_lower ? lower_[j] : s == VarStatus::at_upper ? upper_[j] : 0.0;
  }

  // alpha = B^-1 a_j
  void column(int j, Eigen::VectorXd& out) const {
    if (j >= n_) {
      out = binv_.col(j - n_);
      return;
    }
    out.setZero(m_);
    for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k)
      out.noalias() += lp_.value[k] * binv_.col(lp_.row_index[k]);
  }

  double dot_column(const Eigen::VectorXd& y, int j) const {
    if (j >= n_) return y[j - n_];
    double s = 0.0;
    for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k)
      s += lp_.value[k] * y[lp_.row_index[k]];
    return s;
  }

  // Rebuilds B^-1, exploiting that basic logicals are unit columns: only the
  // block of structural basic columns restricted to rows without a basic
  // logical needs a dense inverse.
  void reinvert() {
    std::vector<int> row_pos(m_, -1);  // basis position of the logical of row r
    std::vector<int> structural_pos;
    for (int p = 0; p < m_; ++p) {
      const int j = header_[p];
      if (j >= n_) row_pos[j - n_] = p;
      else structural_pos.push_back(p);
    }
    std::vector<int> free_rows;
    std::vector<int> local_row(m_, -1);
    for (int r = 0; r < m_; ++r)
      if (row_pos[r] < 0) {
        local_row[r] = static_cast<int>(free_rows.size());
        free_rows.push_back(r);
      }
    const int k = static_cast<int>(structural_pos.size());
    bool ok = static_cast<int>(free_rows.size()) == k;
    Eigen::MatrixXd kinv;
    if (ok && k > 0) {
      Eigen::MatrixXd kmat = Eigen::MatrixXd::Zero(k, k);
      for (int b = 0; b < k; ++b) {
        const int j = header_[structural_pos[b]];
        for (int e = lp_.col_start[j]; e < lp_.col_start[j + 1]; ++e) {
          const int lr = local_row[lp_.row_index[e]];
          if (lr >= 0) kmat(lr, b) = lp_.value[e];
        }
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(kmat);
      const auto diag = lu.matrixLU().diagonal().cwiseAbs();
      const double scale = std::max(1.0, kmat.cwiseAbs().maxCoeff());
      ok = diag.minCoeff() > 1e-11 * scale;
      if (ok) kinv = lu.inverse();
    }
    if (!ok) {
      repair_singular_basis();
      return;
    }
    binv_.setZero(m_, m_);
    for (int b = 0; b < k; ++b) {
      const int p = structural_pos[b];
      for (int a = 0; a < k; ++a) binv_(p, free_rows[a]) = kinv(b, a);
    }
    for (int r = 0; r < m_; ++r)
      if (row_pos[r] >= 0) binv_(row_pos[r], r) = 1.0;
    for (int b = 0; b < k; ++b) {
      const int j = header_[structural_pos[b]];
      for (int e = lp_.col_start[j]; e < lp_.col_start[j + 1]; ++e) {
        const int r = lp_.row_index[e];
        if (row_pos[r] < 0) continue;
        const int p = row_pos[r];
        const double v = lp_.value[e];
        for (int a = 0; a < k; ++a) binv_(p, free_rows[a]) -= v * kinv(b, a);
      }
    }
    factored_ = true;
    refresh_basic_values();
  }

  void repair_singular_basis() {
    // Keep nonbasic statuses, move every structural basic variable to its
    // nearest bound and restart from the logical basis.
    std::vector<VarStatus> keep = status_;
    for (int p = 0; p < m_; ++p) {
      const int j = header_[p];
      if (j < n_) {
        const double v = x_[j];
        VarStatus s = default_status(j);
        if (std::isfinite(lower_[j]) && std::isfinite(upper_[j]))
          s = std::abs(v - lower_[j]) <= std::abs(upper_[j] - v) ? VarStatus::at_lower
                                                                  : VarStatus::at_upper;
        keep[j] = s;
      }
    }
    for (int r = 0; r < m_; ++r) {
      header_[r] = n_ + r;
      keep[n_ + r] = VarStatus::basic;
    }
    status_ = keep;
    for (int j = 0; j < n_; ++j)
      if (status_[j] != VarStatus::basic) place_nonbasic(j, status_[j]);
    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    factored_ = true;
    refresh_basic_values();
  }

  void refresh_basic_values() {
    Eigen::VectorXd resid(m_);
    for (int r = 0; r < m_; ++r) resid[r] = lp_.rhs[r];
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == VarStatus::basic || x_[j] == 0.0) continue;
      for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k)
        resid[lp_.row_index[k]] -= lp_.value[k] * x_[j];
    }
    for (int r = 0; r < m_; ++r)
      if (status_[n_ + r] != VarStatus::basic) resid[r] -= x_[n_ + r];
    const Eigen::VectorXd xb = binv_ * resid;
    for (int p = 0; p < m_; ++p) x_[header_[p]] = xb[p];
    fresh_ = true;
  }

  double violation(int j) const {
    const double v = x_[j];
    if (v < lower_[j] - tol_.primal) return lower_[j] - v;
    if (v > upper_[j] + tol_.primal) return v - upper_[j];
    return 0.0;
  }

  double infeasibility_sum() const {
    double s = 0.0;
    for (int p = 0; p < m_; ++p) s += violation(header_[p]);
    return s;
  }

  // Fills basic costs; returns true when phase 1 is active.
  bool compute_phase_costs() {
    cb_.resize(m_);
    bool infeasible = false;
    for (int p = 0; p < m_; ++p) {
      const int j = header_[p];
      const double v = x_[j];
      if (v < lower_[j] - tol_.primal) {
        cb_[p] = -1.0;
        infeasible = true;
      } else if (v > upper_[j] + tol_.primal) {
        cb_[p] = 1.0;
        infeasible = true;
      } else {
        cb_[p] = 0.0;
      }
    }
    phase1_ = infeasible;
    if (!infeasible)
      for (int p = 0; p < m_; ++p) cb_[p] = header_[p] < n_ ? lp_.cost[header_[p]] : 0.0;
    return infeasible;
  }

  void compute_duals() { y_.noalias() = binv_.transpose() * cb_; }

  double reduced_cost(int j) const {
    const double c = (!phase1_ && j < n_) ? lp_.cost[j] : 0.0;
    return c - dot_column(y_, j);
  }

  int choose_entering(bool bland, int& dir) const {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < n_ + m_; ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::basic) continue;
      if (lower_[j] == upper_[j]) continue;
      const double d = reduced_cost(j);
      int this_dir = 0;
      if (s == VarStatus::at_lower && d < -tol_.dual) this_dir = 1;
      else if (s == VarStatus::at_upper && d > tol_.dual) this_dir = -1;
      else if (s == VarStatus::free_zero && std::abs(d) > tol_.dual) this_dir = d < 0 ? 1 : -1;
      if (!this_dir) continue;
      if (bland) {
        dir = this_dir;
        return j;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = j;
        dir = this_dir;
      }
    }
    return best;
  }

  Step ratio_test(int q, int dir, bool phase1, bool bland) const {
    // Basic variable p moves at rate -dir * alpha_p per unit step.
    struct Candidate {
      int position;
      double distance;
      double rate;
      bool at_upper;
    };
    std::vector<Candidate> cands;
    for (int p = 0; p < m_; ++p) {
      const double a = alpha_[p];
      if (std::abs(a) <= tol_.pivot) continue;
      const double rate = -dir * a;
      const int j = header_[p];
      const double v = x_[j];
      const bool below = v < lower_[j] - tol_.primal;
      const bool above = v > upper_[j] + tol_.primal;
      if (rate < 0.0) {
        if (phase1 && above) cands.push_back({p, v - upper_[j], rate, true});
        else if (!below && std::isfinite(lower_[j]))
          cands.push_back({p, std::max(v - lower_[j], 0.0), rate, false});
      } else {
        if (phase1 && below) cands.push_back({p, lower_[j] - v, rate, false});
        else if (!above && std::isfinite(upper_[j]))
          cands.push_back({p, std::max(upper_[j] - v, 0.0), rate, true});
      }
    }
    const double flip = upper_[q] - lower_[q];
    Step step;
    if (cands.empty()) {
      if (std::isfinite(flip)) {
        step.bound_flip = true;
        step.theta = flip;
      }
      return step;
    }
    int chosen = -1;
    if (bland) {
      // Minimum ratio, ties broken by the lowest variable index.
      double best = kInf;
      for (const auto& c : cands) best = std::min(best, c.distance / std::abs(c.rate));
      for (int c = 0; c < static_cast<int>(cands.size()); ++c) {
        const double ratio = cands[c].distance / std::abs(cands[c].rate);
        if (ratio <= best + 1e-12 &&
            (chosen < 0 || header_[cands[c].position] < header_[cands[chosen].position]))
          chosen = c;
      }
    } else {
      // Harris two-pass: bound with relaxed distances, then take the largest
      // pivot among candidates within that bound.
      double relaxed = kInf;
      for (const auto& c : cands)
        relaxed = std::min(relaxed, (c.distance + tol_.primal) / std::abs(c.rate));
      double best_pivot = -1.0;
      for (int c = 0; c < static_cast<int>(cands.size()); ++c) {
        const double ratio = cands[c].distance / std::abs(cands[c].rate);
        if (ratio <= relaxed && std::abs(cands[c].rate) > best_pivot) {
          best_pivot = std::abs(cands[c].rate);
          chosen = c;
        }
      }
    }
    const auto& c = cands[chosen];
    const double theta = c.distance / std::abs(c.rate);
    if (std::isfinite(flip) && flip <= theta) {
      step.bound_flip = true;
      step.theta = flip;
      return step;
    }
    step.position = c.position;
    step.theta = theta;
    step.leave_at_upper = c.at_upper;
    return step;
  }

  void apply_step(int q, int dir, const Step& step) {
    const double delta = dir * step.theta;
    if (delta != 0.0) {
      x_[q] += delta;
      for (int p = 0; p < m_; ++p) x_[header_[p]] -= delta * alpha_[p];
    }
    if (step.bound_flip) {
      status_[q] = dir > 0 ? VarStatus::at_upper : VarStatus::at_lower;
      x_[q] = dir > 0 ? upper_[q] : lower_[q];
      return;
    }
    const int p = step.position;
    const int leaving = header_[p];
    status_[leaving] = step.leave_at_upper ? VarStatus::at_upper : VarStatus::at_lower;
    x_[leaving] = step.leave_at_upper ? upper_[leaving] : lower_[leaving];
    header_[p] = q;
    status_[q] = VarStatus::basic;
    // B^-1 <- B^-1 - (alpha - e_p) (row_p / alpha_p)
    const Eigen::RowVectorXd rowp = binv_.row(p) / alpha_[p];
    alpha_[p] -= 1.0;
    binv_.noalias() -= alpha_ * rowp;
  }

  const LpProblem& lp_;
  SimplexTolerances tol_;
  int n_;
  int m_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> x_;
  std::vector<int> header_;
  std::vector<VarStatus> status_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd cb_;
  Eigen::VectorXd y_;
  Eigen::VectorXd alpha_;
  bool factored_ = false;
  bool fresh_ = false;
  bool phase1_ = false;
  int numerical_retries_ = 0;
  std::int64_t iterations_ = 0;
};

}  // namespace cesmarket::milp
