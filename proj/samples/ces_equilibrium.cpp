// Solves the cloud storage equilibrium for an instance file and prints each
// building's contract.
//
//   ces_equilibrium samples/instances/two_bc.json

#include <cstdio>
#include <exception>

#include "cesmarket/cesmarket.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s INSTANCE.json\n", argv[0]);
    return 2;
  }
  try {
    const auto inst = cesmarket::load_instance(argv[1]);
    const auto ies = cesmarket::solve_ies(inst);
    const auto ces = cesmarket::solve_ces(inst, ies.j_ind());

    std::printf("%-12s %8s %10s %12s %10s %10s\n", "building", "accepted", "r*", "q*", "payment", "J_ind");
    for (std::size_t i = 0; i < inst.num_buildings(); ++i) {
      const auto& b = ces.buildings[i];
      std::printf("%-12s %8s %10.4f %12.6g %10.4f %10.4f\n", inst.buildings[i].name.c_str(),
                  b.accepted ? "yes" : "no", b.r_star, b.q_star.value_or(0.0), b.payment, b.j_ind);
    }
    std::printf("E = %.4f kWh, P = %.4f kW, operator profit = %.6f\n", ces.energy, ces.power, ces.eso_profit);

    const auto rep = cesmarket::verify_equilibrium(ces, inst);
    std::printf("equilibrium check %s\n", rep.passed ? "passed" : "failed");
    return rep.passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}
