#pragma once

// JSON instance files. Schema (all powers kW, energies kWh):
//
//   { "name": "...",                                  (optional)
//     "time":   { "T": 24, "dt_hours": 1 },           (dt_hours optional, 1)
//     "tariff": { "buy": 0.3, "sell": 0.0, "p_grid_max": 1000 },
//     "tech":   { "eta_ch", "eta_dis", "p_ch_max", "p_dis_max",
//                 "capex_e_eur_per_kwh", "capex_p_eur_per_kw",
//                 "interest_rate", "lifetime_years", "exchange_rate",
//                 "periods_per_year" },               (periods_per_year optional, 365)
//     "buildings": [ { "name", "r_min" (optional),
//                      "scenarios": [ { "prob", "demand": [T], "renewable": [T] } ] } ] }
//
// exchange_rate has no default: capital prices are quoted in their own
// currency and every money figure downstream is in the tariff currency.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cesmarket/error.hpp"
#include "cesmarket/scenario.hpp"
#include "json.hpp"

namespace cesmarket {

class InstanceParseError : public InputError {
 public:
  using InputError::InputError;
};

class InstanceValidationError : public InputError {
 public:
  InstanceValidationError(std::vector<Diagnostic> diags)
      : InputError("invalid instance: " + format_diagnostics(diags)), diagnostics(std::move(diags)) {}
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

template <typename T>
T required(const nlohmann::json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key))
    throw InstanceParseError("missing key " + path + "." + key);
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InstanceParseError("wrong type for " + path + "." + key);
  }
}

template <typename T>
T optional_or(const nlohmann::json& obj, const char* key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  return required<T>(obj, key, path);
}

}  // namespace detail

inline Instance instance_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InstanceParseError("instance document must be a JSON object");
  Instance inst;
  inst.name = detail::optional_or<std::string>(doc, "name", "", "instance");

  const auto time = detail::required<nlohmann::json>(doc, "time", "");
  const auto T = detail::required<long long>(time, "T", "time");
  if (T < 0) throw InstanceParseError("time.T must be non-negative");
  inst.time.periods = static_cast<std::size_t>(T);
  inst.time.dt_hours = detail::optional_or<double>(time, "dt_hours", "time", 1.0);

  const auto tariff = detail::required<nlohmann::json>(doc, "tariff", "");
  inst.tariff.buy_price = detail::required<double>(tariff, "buy", "tariff");
  inst.tariff.sell_price = detail::required<double>(tariff, "sell", "tariff");
  inst.tariff.p_grid_max = detail::required<double>(tariff, "p_grid_max", "tariff");

  const auto tech = detail::required<nlohmann::json>(doc, "tech", "");
  auto& st = inst.tech;
  st.eta_ch = detail::required<double>(tech, "eta_ch", "tech");
  st.eta_dis = detail::required<double>(tech, "eta_dis", "tech");
  st.p_ch_max = detail::required<double>(tech, "p_ch_max", "tech");
  st.p_dis_max = detail::required<double>(tech, "p_dis_max", "tech");
  st.capex_energy = detail::required<double>(tech, "capex_e_eur_per_kwh", "tech");
  st.capex_power = detail::required<double>(tech, "capex_p_eur_per_kw", "tech");
  st.interest_rate = detail::required<double>(tech, "interest_rate", "tech");
  st.lifetime_years = detail::required<double>(tech, "lifetime_years", "tech");
  st.exchange_rate = detail::required<double>(tech, "exchange_rate", "tech");
  st.periods_per_year = detail::optional_or<double>(tech, "periods_per_year", "tech", 365.0);

  const auto buildings = detail::required<nlohmann::json>(doc, "buildings", "");
  if (!buildings.is_array()) throw InstanceParseError("buildings must be an array");
  for (std::size_t i = 0; i < buildings.size(); ++i) {
    const auto& b = buildings[i];
    const std::string bpath = "buildings[" + std::to_string(i) + "]";
    BuildingProfile profile;
    profile.name = detail::optional_or<std::string>(b, "name", bpath, "BC" + std::to_string(i + 1));
    if (b.contains("r_min")) profile.r_min_override = detail::required<double>(b, "r_min", bpath);
    const auto scenarios = detail::required<nlohmann::json>(b, "scenarios", bpath);
    if (!scenarios.is_array()) throw InstanceParseError(bpath + ".scenarios must be an array");
    for (std::size_t w = 0; w < scenarios.size(); ++w) {
      const std::string spath = bpath + ".scenarios[" + std::to_string(w) + "]";
      ScenarioProfile sc;
      sc.probability = detail::required<double>(scenarios[w], "prob", spath);
      sc.demand = detail::required<std::vector<double>>(scenarios[w], "demand", spath);
      sc.renewable = detail::required<std::vector<double>>(scenarios[w], "renewable", spath);
      profile.scenarios.push_back(std::move(sc));
    }
    inst.buildings.push_back(std::move(profile));
  }
  return inst;
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json doc;
  doc["name"] = inst.name;
  doc["time"] = {{"T", inst.time.periods}, {"dt_hours", inst.time.dt_hours}};
  doc["tariff"] = {{"buy", inst.tariff.buy_price},
                   {"sell", inst.tariff.sell_price},
                   {"p_grid_max", inst.tariff.p_grid_max}};
  const auto& st = inst.tech;
  doc["tech"] = {{"eta_ch", st.eta_ch},
                 {"eta_dis", st.eta_dis},
                 {"p_ch_max", st.p_ch_max},
                 {"p_dis_max", st.p_dis_max},
                 {"capex_e_eur_per_kwh", st.capex_energy},
                 {"capex_p_eur_per_kw", st.capex_power},
                 {"interest_rate", st.interest_rate},
                 {"lifetime_years", st.lifetime_years},
                 {"exchange_rate", st.exchange_rate},
                 {"periods_per_year", st.periods_per_year}};
  auto& arr = doc["buildings"] = nlohmann::json::array();
  for (const auto& b : inst.buildings) {
    nlohmann::json jb;
    jb["name"] = b.name;
    if (b.r_min_override) jb["r_min"] = *b.r_min_override;
    auto& scs = jb["scenarios"] = nlohmann::json::array();
    for (const auto& sc : b.scenarios)
      scs.push_back({{"prob", sc.probability}, {"demand", sc.demand}, {"renewable", sc.renewable}});
    arr.push_back(std::move(jb));
  }
  return doc;
}

// Parses, derives and validates. Throws InstanceParseError or
// InstanceValidationError.
inline Instance parse_instance(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InstanceParseError(std::string("parse error: ") + e.what());
  }
  Instance inst = instance_from_json(doc);
  populate_derived(inst);
  if (auto diags = validate_instance(inst); !diags.empty())
    throw InstanceValidationError(std::move(diags));
  return inst;
}

inline Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open instance file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

}  // namespace cesmarket
