#pragma once

// Cross-checks of the engine against the dense oracle and against exact
// algebraic identities. Each check reports its worst residual and tolerance.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "quditops/ed_oracle.hpp"
#include "quditops/fragmentation.hpp"
#include "quditops/lanczos.hpp"
#include "quditops/models.hpp"
#include "quditops/recursion.hpp"

namespace quditops::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

inline CheckResult make_check(std::string name, double residual, double tolerance, std::string detail = {}) {
  return {std::move(name), residual <= tolerance, residual, tolerance, std::move(detail)};
}

/// Test hooks; `perturb_b` is added to the engine's b_1 before comparison.
struct Hooks {
  double perturb_b = 0.0;
};

// ------------------------------------------------------------------ algebra

namespace detail {

inline WeylString random_string(std::mt19937_64& rng, int d, int sites, Site origin = {0, 0}) {
  std::uniform_int_distribution<int> digit(0, d - 1);
  std::vector<Factor> f;
  for (int s = 0; s < sites; ++s) {
    f.push_back({origin + Site{s, 0}, static_cast<std::uint8_t>(digit(rng)), static_cast<std::uint8_t>(digit(rng))});
  }
  return WeylString(d, std::move(f));
}

inline Eigen::MatrixXcd oracle_matrix(const WeylString& p, int sites) {
  std::vector<int> v(static_cast<std::size_t>(sites), 0), w(v);
  for (const auto& f : p.factors()) {
    v[static_cast<std::size_t>(f.site.x)] = f.v;
    w[static_cast<std::size_t>(f.site.x)] = f.w;
  }
  return ed::string_matrix(p.d(), v, w);
}

inline std::vector<PhasedString> random_terms(std::mt19937_64& rng, int d, int count, int span) {
  std::normal_distribution<double> gauss;
  std::vector<PhasedString> out;
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> width(1, span);
    std::uniform_int_distribution<int> start(0, 2);
    WeylString s = random_string(rng, d, width(rng), Site{start(rng), 0});
    if (s.is_identity()) continue;
    out.push_back({Complex(gauss(rng), gauss(rng)), s});
  }
  return out;
}

}  // namespace detail

/// Product homomorphism and unitarity against explicit matrices.
inline CheckResult check_homomorphism(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  const int ds[] = {2, 3, 4, 5};
  for (int i = 0; i < instances; ++i) {
    const int d = ds[i % 4];
    const int sites = d <= 3 ? 3 : 2;
    const WeylString p = detail::random_string(rng, d, sites);
    const WeylString q = detail::random_string(rng, d, sites);
    const WeylProduct pq = multiply(p, q);
    const Eigen::MatrixXcd lhs = detail::oracle_matrix(p, sites) * detail::oracle_matrix(q, sites);
    const Eigen::MatrixXcd rhs = pq.coeff() * detail::oracle_matrix(pq.string, sites);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    const WeylProduct pd = adjoint(p);
    const Eigen::MatrixXcd adj = pd.coeff() * detail::oracle_matrix(pd.string, sites);
    worst = std::max(worst, (adj - detail::oracle_matrix(p, sites).adjoint()).cwiseAbs().maxCoeff());
    const WeylProduct unit = multiply(p, pd.string);
    if (!unit.string.is_identity()) worst = std::max(worst, 1.0);
    worst = std::max(worst, std::abs(unit.coeff() * pd.coeff() - 1.0));
  }
  return make_check("algebra.homomorphism_unitarity", worst, 1e-12, std::to_string(instances) + " instances");
}

/// (A | L B) = (L A | B) for random Hermitian H, on finite rings and the
/// infinite chain.
inline CheckResult check_liouvillian_self_adjoint(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  const int ds[] = {2, 3, 4, 5};
  for (int i = 0; i < instances; ++i) {
    const int d = ds[i % 4];
    const LatticeSpec lattice = (i / 4) % 2 == 0 ? LatticeSpec::ring(6) : LatticeSpec::chain();
    const auto space = OperatorSpace::make(d, lattice);
    TermList h = TermList(space, detail::random_terms(rng, d, 3, 2)).with_hermitian_closure();
    if (h.size() == 0) continue;
    const Liouvillian liou(h);
    const auto a = OperatorVector::from_terms(space, detail::random_terms(rng, d, 4, 3));
    const auto b = OperatorVector::from_terms(space, detail::random_terms(rng, d, 4, 3));
    if (a.empty() || b.empty()) continue;
    const Complex lhs = inner(a, liou.apply(b));
    const Complex rhs = inner(liou.apply(a), b);
    const double scale = std::max(1.0, std::abs(lhs));
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return make_check("algebra.liouvillian_self_adjoint", worst, 1e-10, std::to_string(instances) + " instances");
}

/// Anchoring is idempotent and translation-invariant keys ignore translations.
inline CheckResult check_anchoring(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> shift(-20, 20);
  int failures = 0;
  const int ds[] = {2, 3, 4, 5};
  for (int i = 0; i < instances; ++i) {
    const int d = ds[i % 4];
    const bool planar = (i / 4) % 2 == 1;
    const auto space = OperatorSpace::make(d, planar ? LatticeSpec::plane() : LatticeSpec::chain());
    WeylString p = detail::random_string(rng, d, 3);
    if (p.is_identity()) continue;
    if (planar) {
      std::vector<Factor> f(p.factors().begin(), p.factors().end());
      for (auto& x : f) x.site = Site{x.site.x % 2, x.site.x / 2 - 1};
      p = WeylString(d, std::move(f));
    }
    const auto once = canonical_anchor(p).first;
    const auto twice = canonical_anchor(once).first;
    const Site s{shift(rng), planar ? shift(rng) : 0};
    const bool ok = once == twice && space->encode(p) == space->encode(p.translated(s)) &&
                    space->decode(space->encode(p)) == once;
    if (!ok) ++failures;
  }
  return make_check("algebra.anchoring", failures, 0.0, std::to_string(instances) + " instances");
}

// ------------------------------------------------------------------ oracles

inline double max_relative(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
  if (a.size() < n || b.size() < n) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / std::abs(b[i]));
  return worst;
}

/// Translation-invariant b_1..b_4 against dense commutator Lanczos on a ring.
inline CheckResult check_lanczos_oracle(int two_s, double j, int ring, const Hooks& hooks = {}) {
  IsingModel m;
  m.spin.two_s = two_s;
  m.J = j;
  const ModelSpec ti = m;
  const auto space = model_space(ti);
  LanczosOptions opts;
  opts.n_max = 4;
  auto engine = run_lanczos(build_hamiltonian(ti, space), build_total_magnetization(m.spin, space), opts).b;
  if (!engine.empty()) engine[0] += hooks.perturb_b;
  m.lattice = LatticeSpec::ring(ring);
  const auto dense = ed::dense_lanczos(ed::dense_build(m), 4);
  return make_check("lanczos_oracle.ising_twoS=" + std::to_string(two_s) + "_L=" + std::to_string(ring),
                    max_relative(engine, dense, 4), 1e-9, "b_1..b_4 relative difference");
}

/// Potts d=2 on an L=8 ring: C(t) from the chain with engine b against dense evolution.
inline CheckResult check_autocorr_oracle(const Hooks& hooks = {}) {
  PottsModel m;
  m.d = 2;
  m.lattice = LatticeSpec::ring(8);
  const ModelSpec spec = m;
  const auto space = model_space(spec);
  LanczosOptions opts;
  opts.n_max = 400;
  auto result = run_lanczos(build_hamiltonian(spec, space), build_total_magnetization(SpinValue{1}, space), opts);
  if (!result.b.empty()) result.b[0] += hooks.perturb_b;
  const auto grid = uniform_grid(2.0, 0.05);
  ChainOptions chain;
  chain.closed = result.terminated == Termination::subspace_exhausted;
  const auto chain_c = autocorrelation(result.b, grid, chain).values;
  const auto dense_c = ed::dense_autocorr(ed::dense_build(spec), grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(chain_c[i] - dense_c[i]));
  return make_check("autocorr_oracle.potts_d=2_L=8", worst, 1e-3, "max |C_chain - C_dense| for t <= 2");
}

/// Dense-Lanczos b fed to the chain reproduces dense evolution (L=8, d=2).
inline CheckResult check_oracle_self_consistency() {
  IsingModel m;
  m.spin.two_s = 1;
  m.lattice = LatticeSpec::ring(8);
  const auto sys = ed::dense_build(m);
  const auto b = ed::dense_lanczos(sys, 256);
  const auto grid = uniform_grid(1.0, 0.05);
  ChainOptions chain;
  chain.closed = true;
  const auto chain_c = autocorrelation(b, grid, chain).values;
  const auto dense_c = ed::dense_autocorr(sys, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(chain_c[i] - dense_c[i]));
  return make_check("autocorr_oracle.dense_self_consistency", worst, 1e-6, "t <= 1, Ising S=1/2, L=8");
}

/// mu_{2k} from b against (A_0 | L^{2k} A_0) by repeated application.
inline CheckResult check_moments(const Hooks& hooks = {}) {
  IsingModel m;
  m.spin.two_s = 2;
  const ModelSpec spec = m;
  const auto space = model_space(spec);
  const auto h = build_hamiltonian(spec, space);
  const auto a = build_total_magnetization(m.spin, space);
  LanczosOptions opts;
  opts.n_max = 3;
  auto b = run_lanczos(h, a, opts).b;
  if (!b.empty()) b[0] += hooks.perturb_b;
  const auto mu = moments_from_b(b, 3);
  const Liouvillian liou(h);
  OperatorVector v = a.scaled(1.0 / norm(a));
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    v = liou.apply(v);
    const double direct = inner(v, v).real();  // (L^k A | L^k A) = (A | L^{2k} A)
    worst = std::max(worst, std::abs(direct - mu[static_cast<std::size_t>(k)]) / direct);
  }
  return make_check("lanczos.moments_vs_nested_commutators", worst, 1e-10, "Ising S=1, k <= 3");
}

/// In-class evolution against dense Heisenberg evolution (Kitaev-Potts, 4 sites).
inline CheckResult check_class_evolution() {
  KitaevPottsModel m;
  m.d = 3;
  m.sites = 4;
  const ModelSpec spec = m;
  const auto space = model_space(spec);
  const auto h = build_hamiltonian(spec, space);
  const std::vector<PhasedString> seed_terms{{Complex(1.0), WeylString::single(3, {1, 0}, 0, 1)}};
  const auto seed = OperatorVector::from_terms(space, seed_terms);
  const auto report = equivalence_classes(seed, h);
  const auto rl = restricted_liouvillian(report, h);
  const auto grid = uniform_grid(2.0, 0.25);
  const Eigen::VectorXcd f0 = class_coefficients(rl, seed);
  const auto traj = evolve_in_class(rl, f0, grid);
  const auto sys = ed::dense_build(spec);
  const ed::HeisenbergEvolver ev(sys.h);
  const Eigen::MatrixXcd a = ed::string_matrix(3, {0, 0, 0, 0}, {0, 1, 0, 0});
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex dense = ed::trace_inner(a, ev.evolve(a, grid[i]));
    const Complex cls = f0.dot(traj[i]);  // sum conj(f0) f(t)
    worst = std::max(worst, std::abs(dense - cls));
  }
  return make_check("fragmentation.class_evolution_vs_dense", worst, 1e-8, "Kitaev-Potts d=3, 4 sites, seed Z@1");
}

using Suite = std::vector<std::function<CheckResult()>>;

inline std::vector<std::string> suite_names() {
  return {"algebra", "lanczos-oracle", "moments", "autocorr-oracle", "fragmentation"};
}

inline Suite make_suite(const std::string& name, const Hooks& hooks, std::uint64_t seed) {
  Suite s;
  const bool all = name == "all";
  if (all || name == "algebra") {
    s.push_back([seed] { return check_homomorphism(2000, seed); });
    s.push_back([seed] { return check_liouvillian_self_adjoint(400, seed + 1); });
    s.push_back([seed] { return check_anchoring(2000, seed + 2); });
  }
  if (all || name == "lanczos-oracle") {
    s.push_back([hooks] { return check_lanczos_oracle(1, 1.0, 10, hooks); });
    s.push_back([hooks] { return check_lanczos_oracle(2, 1.0 / std::sqrt(2.0), 7, hooks); });
  }
  if (all || name == "moments") s.push_back([hooks] { return check_moments(hooks); });
  if (all || name == "autocorr-oracle") {
    s.push_back([hooks] { return check_autocorr_oracle(hooks); });
    s.push_back([] { return check_oracle_self_consistency(); });
  }
  if (all || name == "fragmentation") s.push_back([] { return check_class_evolution(); });
  if (s.empty()) throw InvalidArgument("unknown verify suite '" + name + "'");
  return s;
}

}  // namespace quditops::verify
