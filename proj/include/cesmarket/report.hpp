#pragma once

// Result bundle: results.json plus CSV tables. Column layouts are listed in
// FORMATS.md. Numbers are printed with a fixed number of significant digits so
// identical runs give identical bytes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cesmarket/error.hpp"
#include "cesmarket/pipeline.hpp"
#include "json.hpp"

namespace cesmarket {

inline constexpr int kResultsSchema = 1;
inline constexpr int kSignificantDigits = 12;

namespace report_detail {

inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  if (std::abs(v) < 1e-12) v = 0.0;  // solver residue, and no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, v);
  return buf;
}

// JSON number rounded to the same digits as the CSVs; null if not finite.
inline nlohmann::json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(fmt(v).c_str(), nullptr);
}

inline nlohmann::json num(const std::optional<double>& v) { return v ? num(*v) : nlohmann::json(nullptr); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) os_ << ',';
      os_ << csv_field(cells[k]);
    }
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

inline std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

}  // namespace report_detail

// Writes to a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw OutputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw OutputError("cannot move " + tmp.string() + " into place");
  }
}

inline void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw OutputError("cannot create output directory " + dir.string());
}

inline nlohmann::json to_json(const EquilibriumReport& rep) {
  using report_detail::num;
  nlohmann::json j{{"passed", rep.passed},
                   {"tol", num(rep.tol)},
                   {"accepted", rep.accepted},
                   {"eso_profit", num(rep.eso_profit)},
                   {"failures", nlohmann::json::array()}};
  for (const auto& f : rep.failures)
    j["failures"].push_back({{"building", f.building}, {"check", f.check}, {"magnitude", num(f.magnitude)}});
  return j;
}

inline nlohmann::json to_json(const SolveStats& s) {
  using report_detail::num;
  return {{"status", milp::to_string(s.status)}, {"certified", s.certified()},
          {"objective", num(s.objective)},      {"bound", num(s.bound)},
          {"gap", num(s.gap)},                  {"root_relaxation", num(s.root_relaxation)},
          {"nodes", s.nodes},                   {"lp_iterations", s.lp_iterations}};
}

inline nlohmann::json results_json(const RunResult& res, const Instance& inst) {
  using report_detail::num;
  const std::size_t N = inst.num_buildings();
  nlohmann::json doc;
  doc["schema"] = kResultsSchema;
  doc["status"] = "ok";
  doc["instance"] = inst.name;
  doc["model"] = to_string(res.options.model);
  doc["seed"] = res.options.seed;
  const auto& so = res.options.solver;
  doc["solver"] = {{"backend", so.backend},
                   {"relative_gap", num(so.params.relative_gap)},
                   {"feasibility_tol", num(so.params.feasibility_tol)},
                   {"node_limit", so.params.node_limit},
                   {"time_limit_seconds", num(so.params.time_limit_seconds)},
                   {"relaxed_exclusivity", so.relaxed_exclusivity}};
  auto& bcs = doc["buildings"] = nlohmann::json::array();
  for (std::size_t i = 0; i < N; ++i)
    bcs.push_back({{"name", inst.buildings[i].name},
                   {"baseline_bill", num(inst.baseline_bill[i])},
                   {"r_min", num(inst.r_min[i])},
                   {"r_max", num(inst.r_max[i])}});

  auto& models = doc["models"] = nlohmann::json::object();
  for (const auto* o : res.outcomes()) {
    const auto row = social_cost(*o);
    nlohmann::json m{{"social_cost", num(row.social_cost)}, {"bills", num(row.bills)},
                     {"payments", num(row.payments)},       {"capital", num(row.capital)},
                     {"eso_profit", num(row.eso_profit)},   {"energy", num(o->energy)},
                     {"power", num(o->power)},              {"certified", o->certified}};
    auto& per = m["buildings"] = nlohmann::json::array();
    const auto ci = consumer_incentive(*o, inst);
    for (std::size_t i = 0; i < o->buildings.size(); ++i) {
      const auto& b = o->buildings[i];
      per.push_back({{"bill", num(b.bill)},
                     {"payment", num(b.payment)},
                     {"own_capital", num(b.own_capital)},
                     {"cost", num(b.total())},
                     {"incentive", num(ci[i])}});
    }
    models[to_string(o->model)] = std::move(m);
  }

  if (res.ies) {
    auto& arr = doc["ies"] = nlohmann::json::array();
    for (std::size_t i = 0; i < N; ++i) {
      const auto& b = res.ies->buildings[i];
      nlohmann::json j{{"j_ind", num(b.j_ind)},   {"bill", num(b.bill)},     {"capital", num(b.capital)},
                       {"r_hat", num(b.r_hat)},   {"energy", num(b.energy)}, {"power", num(b.power)},
                       {"certified", b.stats.certified()}};
      if (i < res.curves.size()) {
        const auto& c = res.curves[i];
        j["q_hat_projected"] = num(c.projected_price);
        j["q_hat_fit"] = c.fit ? num(c.fit->q_hat) : nlohmann::json(nullptr);
        j["fit_r_squared"] = c.fit ? num(c.fit->r_squared) : nlohmann::json(nullptr);
        j["curve_points"] = c.points.size();
      }
      arr.push_back(std::move(j));
    }
  }
  if (res.ces) {
    const auto& c = *res.ces;
    nlohmann::json j{{"energy", num(c.energy)},   {"power", num(c.power)},
                     {"capital", num(c.capital)}, {"revenue", num(c.revenue)},
                     {"eso_profit", num(c.eso_profit)}, {"solve", to_json(c.stats)}};
    auto& arr = j["buildings"] = nlohmann::json::array();
    for (const auto& b : c.buildings)
      arr.push_back({{"accepted", b.accepted},      {"selected", b.selected},
                     {"r_star", num(b.r_star)},     {"q_star", num(b.q_star)},
                     {"payment", num(b.payment)},   {"bill", num(b.bill)},
                     {"j_ind", num(b.j_ind)}});
    doc["ces"] = std::move(j);
  }
  if (res.equilibrium) doc["equilibrium_report"] = to_json(*res.equilibrium);
  if (res.ves) {
    const auto& v = *res.ves;
    const auto& pt = v.best();
    doc["ves"] = {{"sizing", v.sizing == VesSizing::leased_capacity ? "leased_capacity" : "peak_aggregate_soc"},
                  {"grid", {{"start", num(res.options.prices.start)},
                            {"stop", num(res.options.prices.stop)},
                            {"step", num(res.options.prices.step)},
                            {"points", v.points.size()}}},
                  {"equilibrium_price", num(pt.price)},
                  {"total_capacity", num(pt.total_capacity)},
                  {"energy", num(pt.energy)},
                  {"power", num(pt.power)},
                  {"capital", num(pt.capital)},
                  {"revenue", num(pt.revenue)},
                  {"eso_profit", num(pt.eso_profit)},
                  {"certified", pt.certified}};
  }

  nlohmann::json metrics;
  auto& sc = metrics["social_cost"] = nlohmann::json::object();
  for (const auto* o : res.outcomes()) sc[to_string(o->model)] = num(o->social_cost);
  if (res.baseline && res.cmes) {
    auto& r = metrics["rsc"] = nlohmann::json::object();
    for (const auto* o : res.outcomes()) {
      try {
        r[to_string(o->model)] = num(rsc(o->social_cost, res.cmes->social_cost, res.baseline->social_cost));
      } catch (const std::domain_error&) {
        r[to_string(o->model)] = nullptr;
      }
    }
  }
  auto& util = metrics["utilization"] = nlohmann::json::object();
  for (const auto* o : res.outcomes()) {
    if (o->model != ModelTag::ces && o->model != ModelTag::cmes && o->model != ModelTag::ves) continue;
    const auto u = utilization_stats(o->schedule, o->energy, o->power, inst);
    if (u.empty) {
      util[to_string(o->model)] = nullptr;
      continue;
    }
    util[to_string(o->model)] = {{"mean_energy_pct", num(u.mean_energy_pct)},
                                 {"peak_energy_pct", num(u.peak_energy_pct)},
                                 {"mean_power_pct", num(u.mean_power_pct)},
                                 {"peak_power_pct", num(u.peak_power_pct)}};
  }
  doc["metrics"] = std::move(metrics);
  return doc;
}

inline std::string ves_sweep_csv(const VesOutcome& ves, const Instance& inst) {
  using namespace report_detail;
  std::vector<std::string> header{"price", "total_capacity", "energy", "power", "capital",
                                  "revenue", "eso_profit", "equilibrium"};
  for (const auto& b : inst.buildings) header.push_back("cost_" + b.name);
  Csv csv(header);
  for (std::size_t k = 0; k < ves.points.size(); ++k) {
    const auto& p = ves.points[k];
    std::vector<std::string> row{fmt(p.price),   fmt(p.total_capacity), fmt(p.energy),
                                 fmt(p.power),   fmt(p.capital),        fmt(p.revenue),
                                 fmt(p.eso_profit), k == ves.equilibrium ? "1" : "0"};
    for (std::size_t i = 0; i < p.capacity.size(); ++i) row.push_back(fmt(p.cost(i)));
    csv.row(row);
  }
  return csv.str();
}

// File name -> content for every table that the result supports.
inline std::map<std::string, std::string> bundle_tables(const RunResult& res, const Instance& inst) {
  using namespace report_detail;
  std::map<std::string, std::string> files;
  const std::size_t N = inst.num_buildings();
  const auto outcomes = res.outcomes();

  if (res.ies || res.ces) {
    Csv csv({"bc", "accepted", "r_star", "q_star", "payment", "j_ind", "r_hat", "q_hat_projected",
             "q_hat_fit", "fit_r_squared"});
    for (std::size_t i = 0; i < N; ++i) {
      std::vector<std::string> row{inst.buildings[i].name};
      if (res.ces) {
        const auto& b = res.ces->buildings[i];
        row.insert(row.end(), {b.accepted ? "1" : "0", fmt(b.r_star), opt_fmt(b.q_star), fmt(b.payment)});
      } else {
        row.insert(row.end(), {"", "", "", ""});
      }
      if (res.ies) {
        const auto& b = res.ies->buildings[i];
        row.insert(row.end(), {fmt(b.j_ind), fmt(b.r_hat)});
      } else {
        row.insert(row.end(), {"", ""});
      }
      if (i < res.curves.size()) {
        const auto& c = res.curves[i];
        row.insert(row.end(), {opt_fmt(c.projected_price), c.fit ? fmt(c.fit->q_hat) : "",
                               c.fit ? fmt(c.fit->r_squared) : ""});
      } else {
        row.insert(row.end(), {"", "", ""});
      }
      csv.row(row);
    }
    files["table_rus_price.csv"] = csv.str();
  }

  if (!res.curves.empty()) {
    Csv csv({"bc", "r", "feasible", "capital_cost", "fitted"});
    for (std::size_t i = 0; i < res.curves.size(); ++i) {
      const auto& c = res.curves[i];
      for (const auto& p : c.points)
        csv.row({inst.buildings[i].name, fmt(p.r), p.feasible ? "1" : "0", p.feasible ? fmt(p.cost) : "",
                 c.fit ? fmt(c.fit->q_hat * p.r * p.r) : ""});
    }
    files["ies_curve.csv"] = csv.str();
  }

  if (res.ces || res.ves) {
    Csv csv({"model", "price", "revenue", "capital", "energy", "power", "eso_profit"});
    if (res.ves) {
      const auto& p = res.ves->best();
      csv.row({"VES", fmt(p.price), fmt(p.revenue), fmt(p.capital), fmt(p.energy), fmt(p.power),
               fmt(p.eso_profit)});
    }
    if (res.ces) {
      const auto& c = *res.ces;
      csv.row({"CES", "", fmt(c.revenue), fmt(c.capital), fmt(c.energy), fmt(c.power), fmt(c.eso_profit)});
    }
    files["table_eso_profit.csv"] = csv.str();
  }

  if (!outcomes.empty()) {
    Csv sc({"model", "social_cost", "bills", "payments", "capital", "eso_profit", "rsc"});
    Csv inc({"model", "bc", "baseline_bill", "bill", "payment", "own_capital", "cost", "incentive"});
    Csv sched({"model", "bc", "scenario", "t", "p_ch", "p_dis", "e", "p_gplus", "p_gminus"});
    Csv util({"model", "scenario", "t", "aggregate_soc", "energy_pct", "aggregate_net", "power_pct"});
    for (const auto* o : outcomes) {
      const auto row = social_cost(*o);
      std::string r;
      if (res.baseline && res.cmes) {
        try {
          r = fmt(rsc(o->social_cost, res.cmes->social_cost, res.baseline->social_cost));
        } catch (const std::domain_error&) {
        }
      }
      const char* tag = to_string(o->model);
      sc.row({tag, fmt(row.social_cost), fmt(row.bills), fmt(row.payments), fmt(row.capital),
              fmt(row.eso_profit), r});
      const auto ci = consumer_incentive(*o, inst);
      for (std::size_t i = 0; i < o->buildings.size(); ++i) {
        const auto& b = o->buildings[i];
        inc.row({tag, inst.buildings[i].name, fmt(inst.baseline_bill[i]), fmt(b.bill), fmt(b.payment),
                 fmt(b.own_capital), fmt(b.total()), fmt(ci[i])});
      }
      const auto& s = o->schedule;
      for (std::size_t i = 0; i < s.num_buildings(); ++i)
        for (std::size_t w = 0; w < s.num_scenarios(); ++w)
          for (std::size_t t = 0; t < s.num_periods(); ++t) {
            const auto& st = s.at(i, w, t);
            sched.row({tag, inst.buildings[i].name, std::to_string(w), std::to_string(t), fmt(st.p_ch),
                       fmt(st.p_dis), fmt(st.e), fmt(st.p_gplus), fmt(st.p_gminus)});
          }
      if (o->model == ModelTag::ces || o->model == ModelTag::cmes || o->model == ModelTag::ves) {
        const auto u = utilization_stats(s, o->energy, o->power, inst);
        if (u.empty) continue;
        for (std::size_t w = 0; w < s.num_scenarios(); ++w)
          for (std::size_t t = 0; t < s.num_periods(); ++t)
            util.row({tag, std::to_string(w), std::to_string(t), fmt(s.aggregate_soc(w, t)),
                      fmt(u.energy_pct[w][t]), fmt(s.aggregate_net(w, t)), fmt(u.power_pct[w][t])});
      }
    }
    files["table_social_cost.csv"] = sc.str();
    files["incentives.csv"] = inc.str();
    files["schedules.csv"] = sched.str();
    files["utilization.csv"] = util.str();
  }

  if (res.ves) files["ves_sweep.csv"] = ves_sweep_csv(*res.ves, inst);
  return files;
}

inline void write_bundle(const std::filesystem::path& dir, const RunResult& res, const Instance& inst) {
  prepare_output_dir(dir);
  auto files = bundle_tables(res, inst);
  files["results.json"] = results_json(res, inst).dump(2) + "\n";
  for (const auto& [name, content] : files) write_file_atomic(dir / name, content);
}

// Written in place of a bundle when a run fails.
inline void write_failure(const std::filesystem::path& dir, const std::string& kind, const std::string& message,
                          int exit_code) {
  prepare_output_dir(dir);
  nlohmann::json doc{{"schema", kResultsSchema},
                     {"status", "error"},
                     {"error", {{"kind", kind}, {"message", message}, {"exit_code", exit_code}}}};
  write_file_atomic(dir / "results.json", doc.dump(2) + "\n");
}

}  // namespace cesmarket
