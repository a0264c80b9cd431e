#pragma once

#include <string>
#include <vector>

#include "cesmarket/formulations/operation.hpp"
#include "cesmarket/schedule.hpp"

namespace cesmarket {

enum class ModelTag { wo_es, ies, ves, ces, cmes };

inline const char* to_string(ModelTag m) {
  switch (m) {
    case ModelTag::wo_es: return "WO_ES";
    case ModelTag::ies: return "IES";
    case ModelTag::ves: return "VES";
    case ModelTag::ces: return "CES";
    case ModelTag::cmes: return "CMES";
  }
  return "?";
}

// What one building pays under a model. own_capital is storage the building
// buys itself; payment goes to the storage operator.
struct BuildingCost {
  double bill = 0.0;
  double payment = 0.0;
  double own_capital = 0.0;
  double total() const { return bill + payment + own_capital; }
};

struct ModelOutcome {
  ModelTag model = ModelTag::wo_es;
  std::vector<BuildingCost> buildings;
  double operator_capital = 0.0;  // shared storage bought by the operator or community
  double eso_profit = 0.0;        // zero where there is no operator
  double social_cost = 0.0;       // bills + all capital
  double energy = 0.0;            // installed kWh (sum over units for IES)
  double power = 0.0;             // installed kW
  bool certified = true;
  OperationSchedule schedule;
  PhysicsSpec physics;            // the rules `schedule` obeys
};

inline double total_bills(const ModelOutcome& o) {
  double s = 0.0;
  for (const auto& b : o.buildings) s += b.bill;
  return s;
}

inline double total_payments(const ModelOutcome& o) {
  double s = 0.0;
  for (const auto& b : o.buildings) s += b.payment;
  return s;
}

inline double total_own_capital(const ModelOutcome& o) {
  double s = 0.0;
  for (const auto& b : o.buildings) s += b.own_capital;
  return s;
}

}  // namespace cesmarket
