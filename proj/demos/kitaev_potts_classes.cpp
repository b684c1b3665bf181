// Operator evolution dimension of a clock operator in the qutrit
// Kitaev-Potts chain, and exact evolution of its autocorrelation inside the
// reachable class.

#include <cmath>
#include <cstdio>

#include "quditops/fragmentation.hpp"
#include "quditops/models.hpp"
#include "quditops/recursion.hpp"

using namespace quditops;

int main() {
  for (int sites = 4; sites <= 9; ++sites) {
    KitaevPottsModel m;
    m.sites = sites;
    m.periodic = sites % 2 == 0;
    const ModelSpec spec = m;
    const auto space = model_space(spec);
    const TermList h(space, hamiltonian_terms(spec));
    const std::vector<PhasedString> z{{Complex(1.0), WeylString::single(3, Site{0, 0}, 0, 1)}};
    const auto report = equivalence_classes(OperatorVector::from_terms(space, z), h);
    std::printf("%d sites (%s): OED %zu of %.0f strings\n", sites, m.periodic ? "ring" : "open", report.oed,
                std::pow(9.0, sites));
  }

  KitaevPottsModel m;
  m.sites = 6;
  const ModelSpec spec = m;
  const auto space = model_space(spec);
  const auto h = build_hamiltonian(spec, space);
  const std::vector<PhasedString> z{{Complex(1.0), WeylString::single(3, Site{0, 0}, 0, 1)}};
  const auto seed = OperatorVector::from_terms(space, z);
  const auto rl = restricted_liouvillian(equivalence_classes(seed, h), h);
  const Eigen::VectorXcd f0 = class_coefficients(rl, seed);
  const auto grid = uniform_grid(4.0, 0.5);
  const auto traj = evolve_in_class(rl, f0, grid);
  std::printf("class dimension %zu, %ld nonzeros in M\n", rl.dimension(), static_cast<long>(rl.m.nonZeros()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex c = f0.dot(traj[i]) / f0.squaredNorm();
    std::printf("t = %.1f  C = %+.6f %+.6fi\n", grid[i], c.real(), c.imag());
  }
}
