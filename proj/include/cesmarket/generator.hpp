#pragma once

// Deterministic synthetic instances: archetype demand shapes and solar or
// wind generation, perturbed per scenario. The random stream uses the raw
// mt19937_64 output so files are identical across standard libraries.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "cesmarket/error.hpp"
#include "cesmarket/scenario.hpp"

namespace cesmarket {

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t buildings = 5;
  std::size_t periods = 24;
  std::size_t scenarios = 3;
  double buy_price = 0.3;
  double sell_price = 0.0;
  double p_grid_max = 1000.0;
  double efficiency = 0.9;
  double p_ch_max = 500.0;
  double p_dis_max = 500.0;
  double capex_energy = 100.0;
  double capex_power = 300.0;
  double interest_rate = 0.06;
  double lifetime_years = 10.0;
  double exchange_rate = 1.0;
  double periods_per_year = 365.0;
};

namespace detail {

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double operator()(double a, double b) { return a + (b - a) * (*this)(); }

 private:
  std::mt19937_64 rng_;
};

// Relative demand at hour h for office, hotel, school, hospital, restaurant.
inline double archetype_shape(std::size_t kind, double h) {
  const double pi = 3.14159265358979323846;
  auto bump = [&](double centre, double width) {
    const double d = std::remainder(h - centre, 24.0);
    return std::exp(-0.5 * d * d / (width * width));
  };
  switch (kind % 5) {
    case 0: return 0.25 + 0.9 * bump(13.0, 3.5);
    case 1: return 0.5 + 0.35 * bump(8.0, 2.0) + 0.55 * bump(20.0, 2.5);
    case 2: return 0.15 + 1.0 * bump(11.0, 2.5);
    case 3: return 0.75 + 0.2 * std::sin(2.0 * pi * (h - 8.0) / 24.0);
    default: return 0.2 + 0.6 * bump(12.5, 1.5) + 0.9 * bump(19.0, 1.8);
  }
}

inline double solar_shape(double h) {
  const double pi = 3.14159265358979323846;
  if (h < 6.0 || h > 18.0) return 0.0;
  return std::sin(pi * (h - 6.0) / 12.0);
}

}  // namespace detail

inline std::string archetype_name(std::size_t kind) {
  static const std::array<const char*, 5> names{"office", "hotel", "school", "hospital", "restaurant"};
  return names[kind % 5];
}

inline Instance generate_instance(const GeneratorConfig& cfg) {
  if (cfg.buildings < 1) throw InputError("generator: need at least one building");
  if (cfg.periods < 1) throw InputError("generator: need at least one period");
  if (cfg.scenarios < 1) throw InputError("generator: need at least one scenario");
  detail::Uniform u(cfg.seed);
  Instance inst;
  inst.name = "synthetic_s" + std::to_string(cfg.seed) + "_n" + std::to_string(cfg.buildings) + "_t" +
              std::to_string(cfg.periods) + "_w" + std::to_string(cfg.scenarios);
  inst.time.periods = cfg.periods;
  inst.time.dt_hours = 24.0 / static_cast<double>(cfg.periods);
  inst.tariff = {cfg.buy_price, cfg.sell_price, cfg.p_grid_max};
  auto& tech = inst.tech;
  tech.eta_ch = tech.eta_dis = cfg.efficiency;
  tech.p_ch_max = cfg.p_ch_max;
  tech.p_dis_max = cfg.p_dis_max;
  tech.capex_energy = cfg.capex_energy;
  tech.capex_power = cfg.capex_power;
  tech.interest_rate = cfg.interest_rate;
  tech.lifetime_years = cfg.lifetime_years;
  tech.exchange_rate = cfg.exchange_rate;
  tech.periods_per_year = cfg.periods_per_year;

  const double prob = 1.0 / static_cast<double>(cfg.scenarios);
  for (std::size_t i = 0; i < cfg.buildings; ++i) {
    const std::size_t kind = static_cast<std::size_t>(u() * 5.0) % 5;
    const double peak = u(40.0, 160.0);
    const bool wind = u() < 0.35;
    const double re_cap = peak * u(0.4, 1.4);
    const double phase = u(0.0, 24.0);
    BuildingProfile b;
    b.name = "BC" + std::to_string(i + 1) + "_" + archetype_name(kind);
    for (std::size_t w = 0; w < cfg.scenarios; ++w) {
      ScenarioProfile sc;
      sc.probability = prob;
      const double level = u(0.85, 1.15);
      const double weather = u(0.3, 1.0);
      for (std::size_t t = 0; t < cfg.periods; ++t) {
        const double h = (static_cast<double>(t) + 0.5) * inst.time.dt_hours;
        const double d = peak * level * detail::archetype_shape(kind, h) * u(0.92, 1.08);
        double re;
        if (wind) {
          const double pi = 3.14159265358979323846;
          re = re_cap * weather * (0.55 + 0.45 * std::sin(2.0 * pi * (h + phase) / 24.0)) * u(0.6, 1.2);
        } else {
          re = re_cap * weather * detail::solar_shape(h) * u(0.85, 1.05);
        }
        sc.demand.push_back(std::round(d * 1000.0) / 1000.0);
        sc.renewable.push_back(std::round(std::max(re, 0.0) * 1000.0) / 1000.0);
      }
      b.scenarios.push_back(std::move(sc));
    }
    // Probabilities must sum to one exactly after rounding to doubles.
    double sum = 0.0;
    for (std::size_t w = 0; w + 1 < cfg.scenarios; ++w) sum += b.scenarios[w].probability;
    b.scenarios.back().probability = 1.0 - sum;
    inst.buildings.push_back(std::move(b));
  }
  populate_derived(inst);
  return inst;
}

}  // namespace cesmarket
