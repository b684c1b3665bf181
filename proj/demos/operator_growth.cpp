// Lanczos coefficients of the total magnetization for the 3-state Potts
// chain and the spin-1 Ising chain, with the growth-law fit for each, and
// the autocorrelation reconstructed from the Potts chain.

#include <cstdio>

#include "quditops/lanczos.hpp"
#include "quditops/models.hpp"
#include "quditops/recursion.hpp"

using namespace quditops;

static std::vector<double> magnetization_b(const ModelSpec& spec, int n_max) {
  const auto space = model_space(spec);
  LanczosOptions opts;
  opts.n_max = n_max;
  return run_lanczos(build_hamiltonian(spec, space), build_total_magnetization(model_spin(spec), space), opts).b;
}

int main() {
  PottsModel potts;
  potts.d = 3;
  const auto bp = magnetization_b(potts, 10);
  const auto fp = fit_bn(bp, FitForm::sqrt);

  IsingModel ising;
  ising.spin = SpinValue{2};
  ising.J = coupling_convention(ising.spin);
  const auto bi = magnetization_b(ising, 8);
  const auto fi = fit_bn(bi, FitForm::linear_log, 2);

  std::printf("%3s %14s %14s\n", "n", "potts d=3", "ising S=1");
  for (std::size_t n = 0; n < bp.size(); ++n) {
    std::printf("%3zu %14.9f ", n + 1, bp[n]);
    if (n < bi.size()) std::printf("%14.9f", bi[n]);
    std::printf("\n");
  }
  std::printf("potts: b_n ~ %.4f + %.4f sqrt(n)\n", fp.alpha, fp.gamma);
  std::printf("ising: b_n ~ %.4f n + %.4f + (-1)^n alpha/(log n + %.4f)\n", fi.alpha, fi.gamma, fi.c);

  const auto chain = extrapolate_bn(bp, fp, 4000);
  const auto c = autocorrelation(chain, uniform_grid(3.0, 0.5));
  for (std::size_t i = 0; i < c.times.size(); ++i) std::printf("C(%.1f) = %+.6f\n", c.times[i], c.values[i]);
}
