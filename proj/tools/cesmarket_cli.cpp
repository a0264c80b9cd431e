// cesmarket: run the storage market models on an instance file and write a
// result bundle, generate synthetic instances, or sweep lease prices.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cesmarket/generator.hpp"
#include "cesmarket/instance_json.hpp"
#include "cesmarket/milp/backend.hpp"
#include "cesmarket/pipeline.hpp"
#include "cesmarket/report.hpp"

namespace {

using namespace cesmarket;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolverLimit = 3;
constexpr int kExitAccounting = 4;

struct SourceArgs {
  std::string instance;
  std::uint64_t seed = 1;
  std::size_t buildings = 3;
  std::size_t periods = 8;
  std::size_t scenarios = 2;
};

struct SolverArgs {
  double gap = 1e-6;
  double time_limit = 300.0;
  std::int64_t node_limit = 1'000'000;
  std::string backend = "reference";
  bool relaxed = false;
};

void add_source_options(CLI::App* cmd, SourceArgs& a) {
  cmd->add_option("--instance", a.instance, "instance JSON file (a synthetic one is generated if omitted)");
  cmd->add_option("--seed", a.seed, "seed for the synthetic instance and the solver")->capture_default_str();
  cmd->add_option("--buildings", a.buildings, "synthetic instance: buildings")->capture_default_str();
  cmd->add_option("--periods", a.periods, "synthetic instance: periods")->capture_default_str();
  cmd->add_option("--scenarios", a.scenarios, "synthetic instance: scenarios")->capture_default_str();
}

void add_solver_options(CLI::App* cmd, SolverArgs& a) {
  cmd->add_option("--gap", a.gap, "relative MIP gap")->capture_default_str();
  cmd->add_option("--time-limit", a.time_limit, "seconds per MILP solve")->capture_default_str();
  cmd->add_option("--node-limit", a.node_limit, "branch-and-bound nodes per solve")->capture_default_str();
  cmd->add_option("--backend", a.backend,
                  "reference, or external (runs $CESMARKET_MILP_COMMAND model.json solution.json)")
      ->capture_default_str();
  cmd->add_flag("--relaxed-exclusivity", a.relaxed,
                "drop the exclusivity binaries, re-solving with them if the result is not exclusive");
}

void add_price_options(CLI::App* cmd, PriceGridSpec& p) {
  cmd->add_option("--price-start", p.start, "first lease price")->capture_default_str();
  cmd->add_option("--price-stop", p.stop, "last lease price (inclusive)")->capture_default_str();
  cmd->add_option("--price-step", p.step, "lease price increment")->capture_default_str();
}

Instance load_source(const SourceArgs& a) {
  if (!a.instance.empty()) return load_instance(a.instance);
  GeneratorConfig cfg;
  cfg.seed = a.seed;
  cfg.buildings = a.buildings;
  cfg.periods = a.periods;
  cfg.scenarios = a.scenarios;
  return generate_instance(cfg);
}

SolverOptions solver_options(const SolverArgs& a, std::uint64_t seed) {
  SolverOptions o;
  o.params.relative_gap = a.gap;
  o.params.time_limit_seconds = a.time_limit;
  o.params.node_limit = a.node_limit;
  o.params.seed = seed;
  o.backend = a.backend;
  o.relaxed_exclusivity = a.relaxed;
  if (a.backend != "reference" && a.backend != "external")
    throw InputError("unknown backend '" + a.backend + "'");
  if (!(a.gap > 0.0)) throw InputError("--gap must be positive");
  if (!(a.time_limit > 0.0)) throw InputError("--time-limit must be positive");
  return o;
}

void print_summary(const RunResult& res, const Instance& inst) {
  std::printf("instance %s: %zu buildings, %zu scenarios, %zu periods\n", inst.name.c_str(),
              inst.num_buildings(), inst.num_scenarios(), inst.num_periods());
  std::printf("%-6s %14s %12s %12s %12s\n", "model", "social_cost", "eso_profit", "energy", "power");
  for (const auto* o : res.outcomes())
    std::printf("%-6s %14.6f %12.6f %12.4f %12.4f%s\n", to_string(o->model), o->social_cost, o->eso_profit,
                o->energy, o->power, o->certified ? "" : "  (not certified)");
  if (res.equilibrium)
    std::printf("equilibrium check: %s (%zu accepted)\n", res.equilibrium->passed ? "passed" : "FAILED",
                res.equilibrium->accepted);
  if (res.ves) std::printf("VES equilibrium price %.4f\n", res.ves->best().price);
}

struct Failure {
  int code;
  std::string kind;
};

template <typename F>
int guarded(F&& body, const std::string& out_dir) {
  std::optional<Failure> fail;
  std::string message;
  try {
    return body();
  } catch (const InputError& e) {
    fail = Failure{kExitInput, "input"};
    message = e.what();
  } catch (const BackendUnavailable& e) {
    fail = Failure{kExitInput, "backend_unavailable"};
    message = e.what();
  } catch (const OutputError& e) {
    fail = Failure{kExitInput, "output"};
    message = e.what();
  } catch (const SolverLimitError& e) {
    fail = Failure{kExitSolverLimit, "solver_limit"};
    message = e.what();
  } catch (const AccountingError& e) {
    fail = Failure{kExitAccounting, "accounting"};
    message = e.what();
  } catch (const std::exception& e) {
    fail = Failure{kExitInternal, "internal"};
    message = e.what();
  }
  std::cerr << "cesmarket: " << message << "\n";
  if (!out_dir.empty() && fail->kind != "output") {
    try {
      write_failure(out_dir, fail->kind, message, fail->code);
    } catch (const std::exception&) {
    }
  }
  return fail->code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cloud energy storage sharing market: equilibrium and comparison models"};
  app.require_subcommand(1);

  SourceArgs src;
  SolverArgs sargs;
  RunOptions ropt;
  std::string model = "compare";
  std::string out_dir = "out";
  std::string sizing = "leased";
  bool no_fallback = false;
  auto* run = app.add_subcommand("run", "solve one model or the full comparison and write a bundle");
  add_source_options(run, src);
  add_solver_options(run, sargs);
  add_price_options(run, ropt.prices);
  run->add_option("--model", model, "baseline, ies, cmes, ces, ves or compare")->capture_default_str();
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--curve-step", ropt.curve_step, "IES curve sample spacing in kWh (0 skips)")
      ->capture_default_str();
  run->add_option("--ves-sizing", sizing, "VES energy sizing: leased or peak-soc")->capture_default_str();
  run->add_flag("--no-ies-fallback", no_fallback,
                "rejected buildings stay without storage instead of installing their own");

  GeneratorConfig gcfg;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "write a deterministic synthetic instance");
  gen->add_option("--seed", gcfg.seed)->capture_default_str();
  gen->add_option("--buildings", gcfg.buildings)->capture_default_str();
  gen->add_option("--periods", gcfg.periods)->capture_default_str();
  gen->add_option("--scenarios", gcfg.scenarios)->capture_default_str();
  gen->add_option("--exchange-rate", gcfg.exchange_rate, "capital currency to tariff currency")
      ->capture_default_str();
  gen->add_option("--out", gen_out, "instance file (stdout if omitted)");

  SourceArgs sw_src;
  SolverArgs sw_solver;
  PriceGridSpec sw_prices;
  std::string sw_out = "out";
  auto* sweep = app.add_subcommand("sweep-price", "VES lease price sweep only; writes ves_sweep.csv");
  add_source_options(sweep, sw_src);
  add_solver_options(sweep, sw_solver);
  add_price_options(sweep, sw_prices);
  sweep->add_option("--out", sw_out, "output directory")->capture_default_str();

  SourceArgs val_src;
  auto* validate = app.add_subcommand("validate", "check an instance file and print diagnostics");
  validate->add_option("--instance", val_src.instance, "instance JSON file")->required();

  SourceArgs lp_src;
  std::string lp_model = "ces";
  std::string lp_out;
  auto* export_lp = app.add_subcommand("export-lp", "write the CES or CMES program in LP text format");
  add_source_options(export_lp, lp_src);
  export_lp->add_option("--model", lp_model, "ces or cmes")->capture_default_str();
  export_lp->add_option("--out", lp_out, "LP file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  if (*run) {
    return guarded(
        [&] {
          ropt.model = parse_model_selection(model);
          ropt.seed = src.seed;
          ropt.solver = solver_options(sargs, src.seed);
          if (sizing == "leased") ropt.ves_sizing = VesSizing::leased_capacity;
          else if (sizing == "peak-soc") ropt.ves_sizing = VesSizing::peak_aggregate_soc;
          else throw InputError("--ves-sizing must be leased or peak-soc");
          if (no_fallback) ropt.fallback = RejectedFallback::none;
          if (ropt.curve_step < 0.0) throw InputError("--curve-step must be non-negative");
          // Fail on the grid and the output directory before any solve.
          price_grid(ropt.prices.start, ropt.prices.stop, ropt.prices.step);
          prepare_output_dir(out_dir);
          const Instance inst = load_source(src);
          const RunResult res = run_models(inst, ropt);
          write_bundle(out_dir, res, inst);
          print_summary(res, inst);
          if (res.equilibrium && !res.equilibrium->passed)
            throw AccountingError("CES equilibrium verification failed");
          for (const auto* o : res.outcomes())
            if (!o->certified) {
              std::cerr << "cesmarket: " << to_string(o->model)
                        << " stopped on a solver limit; the bundle holds the incumbent\n";
              return kExitSolverLimit;
            }
          return kExitOk;
        },
        out_dir);
  }
  if (*gen) {
    return guarded(
        [&] {
          const auto text = instance_to_json(generate_instance(gcfg)).dump(2) + "\n";
          if (gen_out.empty()) {
            std::cout << text;
          } else {
            const std::filesystem::path p(gen_out);
            if (p.has_parent_path()) prepare_output_dir(p.parent_path());
            write_file_atomic(p, text);
          }
          return kExitOk;
        },
        "");
  }
  if (*sweep) {
    return guarded(
        [&] {
          const auto opt = solver_options(sw_solver, sw_src.seed);
          const auto grid = price_grid(sw_prices.start, sw_prices.stop, sw_prices.step);
          prepare_output_dir(sw_out);
          const Instance inst = load_source(sw_src);
          const auto ves = ves_equilibrium(inst, grid, opt);
          write_file_atomic(std::filesystem::path(sw_out) / "ves_sweep.csv", ves_sweep_csv(ves, inst));
          std::printf("%zu prices, equilibrium %.4f with ESO profit %.6f\n", ves.points.size(),
                      ves.best().price, ves.best().eso_profit);
          return kExitOk;
        },
        "");
  }
  if (*validate) {
    return guarded(
        [&] {
          const Instance inst = load_instance(val_src.instance);
          std::printf("%s: valid, %zu buildings, %zu scenarios, %zu periods\n", inst.name.c_str(),
                      inst.num_buildings(), inst.num_scenarios(), inst.num_periods());
          return kExitOk;
        },
        "");
  }
  if (*export_lp) {
    return guarded(
        [&] {
          const Instance inst = load_source(lp_src);
          std::ostringstream os;
          if (lp_model == "ces") {
            const auto ies = solve_ies(inst);
            milp::write_lp_format(build_ces_program(inst, ies.j_ind()).model, os);
          } else if (lp_model == "cmes") {
            milp::write_lp_format(build_cmes_program(inst).model, os);
          } else {
            throw InputError("export-lp supports ces or cmes");
          }
          if (lp_out.empty()) std::cout << os.str();
          else write_file_atomic(lp_out, os.str());
          return kExitOk;
        },
        "");
  }
  return kExitInput;
}
