#pragma once

// Leader-follower pricing under the quadratic tariff Q(r) = q r^2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cesmarket/scenario.hpp"

namespace cesmarket {

enum class Segment { at_lower, interior, at_upper };

inline const char* to_string(Segment s) {
  switch (s) {
    case Segment::at_lower: return "at_lower";
    case Segment::interior: return "interior";
    case Segment::at_upper: return "at_upper";
  }
  return "?";
}

struct BestResponse {
  double r = 0.0;
  Segment segment = Segment::interior;
};

class UndefinedPrice : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A building minimizing q r^2 - (c+ - c-) r over [r_min, r_max].
inline BestResponse follower_best_response(double q, const GridTariff& tariff, double r_min,
                                           double r_max) {
  if (!(q > 0.0)) throw std::invalid_argument("follower_best_response: price must be positive");
  if (!(r_min <= r_max)) throw std::invalid_argument("follower_best_response: r_min exceeds r_max");
  const double target = tariff.spread() / (2.0 * q);
  if (target <= r_min) return {r_min, Segment::at_lower};
  if (target >= r_max) return {r_max, Segment::at_upper};
  return {target, Segment::interior};
}

// The price at which r_star is the unconstrained follower optimum.
inline double equilibrium_price(double r_star, const GridTariff& tariff) {
  if (!(r_star > 0.0)) throw UndefinedPrice("equilibrium price is undefined for zero RUS");
  return tariff.spread() / (2.0 * r_star);
}

struct EquilibriumCheck {
  std::size_t building = 0;
  std::string check;  // best_response, participation, profit
  double magnitude = 0.0;
};

struct EquilibriumReport {
  bool passed = true;
  double tol = 1e-5;
  std::size_t accepted = 0;
  double eso_profit = 0.0;
  std::vector<EquilibriumCheck> failures;
};

// Per accepted building, what the verifier needs; filled from a CES outcome.
struct FollowerRecord {
  bool accepted = false;
  double r_star = 0.0;
  double q_star = 0.0;
  double bill = 0.0;
  double j_ind = 0.0;
};

inline EquilibriumReport verify_equilibrium(const std::vector<FollowerRecord>& followers,
                                            double eso_profit, const Instance& inst,
                                            double tol = 1e-5) {
  EquilibriumReport rep;
  rep.tol = tol;
  rep.eso_profit = eso_profit;
  for (std::size_t i = 0; i < followers.size(); ++i) {
    const auto& f = followers[i];
    if (!f.accepted) continue;
    ++rep.accepted;
    if (!(f.q_star > 0.0)) {
      rep.failures.push_back({i, "best_response", std::numeric_limits<double>::infinity()});
      continue;
    }
    const auto br = follower_best_response(f.q_star, inst.tariff, inst.r_min[i], inst.r_max[i]);
    const double dev = std::abs(br.r - f.r_star);
    if (dev > tol) rep.failures.push_back({i, "best_response", dev});
    const double payment = f.q_star * f.r_star * f.r_star;
    const double excess = payment + f.bill - f.j_ind;
    if (excess > tol) rep.failures.push_back({i, "participation", excess});
  }
  if (eso_profit < -tol) rep.failures.push_back({followers.size(), "profit", -eso_profit});
  rep.passed = rep.failures.empty();
  return rep;
}

}  // namespace cesmarket
