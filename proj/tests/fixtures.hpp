#pragma once

#include "cesmarket/scenario.hpp"

namespace fixtures {

// Two buildings with complementary surplus/deficit periods, lossless storage,
// C_E = 0.15 and C_P = 0.05 per contract period.
inline cesmarket::Instance two_bc(double energy_capex = 0.15, double power_capex = 0.05) {
  using namespace cesmarket;
  Instance inst;
  inst.name = "two_bc";
  inst.time = {4, 1.0};
  inst.tariff = {0.3, 0.0, 100.0};
  inst.tech.eta_ch = inst.tech.eta_dis = 1.0;
  inst.tech.p_ch_max = inst.tech.p_dis_max = 100.0;
  inst.tech.capex_energy = energy_capex;
  inst.tech.capex_power = power_capex;
  inst.tech.interest_rate = 0.0;
  inst.tech.lifetime_years = 1.0;
  inst.tech.exchange_rate = 1.0;
  inst.tech.periods_per_year = 1.0;
  inst.buildings.push_back({"BC1", {{1.0, {0, 10, 0, 0}, {10, 0, 0, 0}}}, std::nullopt});
  inst.buildings.push_back({"BC2", {{1.0, {0, 0, 0, 10}, {0, 0, 10, 0}}}, std::nullopt});
  populate_derived(inst);
  return inst;
}

inline cesmarket::Instance one_bc() {
  auto inst = two_bc();
  inst.buildings.pop_back();
  cesmarket::populate_derived(inst);
  return inst;
}

}  // namespace fixtures
