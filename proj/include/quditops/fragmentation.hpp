#pragma once

// Equivalence classes of Weyl strings under commutation with Hamiltonian
// terms, the operator evolution dimension (OED), and exact Heisenberg
// evolution inside a closed class.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <absl/container/flat_hash_map.h>
#include <boost/numeric/odeint.hpp>

#include "quditops/error.hpp"
#include "quditops/liouvillian.hpp"
#include "quditops/operator_vector.hpp"
#include "quditops/term_list.hpp"

namespace quditops {

/// Strings Q with [h, P] proportional to Q for some term h.
inline std::vector<WeylString> adjacency(const WeylString& p, const TermList& h) {
  std::set<WeylString> out;
  for (const auto& term : h.terms()) {
    if (auto c = commutator(term.string, p)) out.insert(c->string);
  }
  return {out.begin(), out.end()};
}

struct EquivalenceReport {
  std::string seed;
  std::size_t class_count = 0;
  std::vector<std::size_t> class_sizes;
  std::size_t oed = 0;
  /// Visited keys in discovery order; class k occupies the k-th block.
  std::vector<PackedKey> inventory;
  SpacePtr space;
  bool cap_hit = false;
};

inline constexpr std::size_t kDefaultClassCap = 100'000'000;

/// Breadth-first closure of every string in the seed's expansion.
inline EquivalenceReport equivalence_classes(const OperatorVector& seed, const TermList& h,
                                             std::size_t cap = kDefaultClassCap) {
  if (seed.space().translation_invariant()) {
    throw UnsupportedMode("equivalence classes need a finite lattice");
  }
  if (!(seed.space() == h.space())) throw DimensionMismatch("seed and Hamiltonian spaces differ");
  const Liouvillian liou(h);
  EquivalenceReport report;
  report.space = seed.space_ptr();
  {
    std::ostringstream os;
    bool first = true;
    for (const auto& t : seed.terms()) {
      os << (first ? "" : " + ") << to_string(t.string);
      first = false;
    }
    report.seed = os.str();
  }
  // Seed strings in a fixed order (by key) so the inventory is reproducible.
  std::vector<PackedKey> roots;
  for (const auto& e : seed.entries()) roots.push_back(e.key);
  std::sort(roots.begin(), roots.end());

  absl::flat_hash_map<PackedKey, std::uint32_t, PackedKeyHash> visited;
  std::vector<PackedKey>& order = report.inventory;
  for (PackedKey root : roots) {
    if (visited.contains(root)) continue;
    const std::size_t class_start = order.size();
    const auto class_id = static_cast<std::uint32_t>(report.class_sizes.size());
    visited.emplace(root, class_id);
    order.push_back(root);
    for (std::size_t head = class_start; head < order.size(); ++head) {
      liou.for_each_image(order[head], Complex{1.0}, [&](PackedKey k, Complex) {
        if (report.cap_hit) return;
        if (visited.emplace(k, class_id).second) {
          order.push_back(k);
          if (order.size() > cap) report.cap_hit = true;
        }
      });
      if (report.cap_hit) break;
    }
    report.class_sizes.push_back(order.size() - class_start);
    if (report.cap_hit) break;
  }
  report.class_count = report.class_sizes.size();
  report.oed = order.size();
  return report;
}

/// Line-based export: one string per line, classes separated by a header.
inline void write_inventory(std::ostream& os, const EquivalenceReport& report) {
  std::size_t pos = 0;
  for (std::size_t c = 0; c < report.class_sizes.size(); ++c) {
    os << "# class " << c << " size " << report.class_sizes[c] << '\n';
    for (std::size_t i = 0; i < report.class_sizes[c]; ++i, ++pos) {
      os << to_string(report.space->decode(report.inventory[pos]), report.space->lattice().dimension) << '\n';
    }
  }
}

struct RestrictedLiouvillian {
  SpacePtr space;
  std::vector<PackedKey> strings;
  /// m[m, k] = coefficient of P_m in [H, P_k].
  Eigen::SparseMatrix<Complex> m;

  std::size_t dimension() const { return strings.size(); }
};

inline RestrictedLiouvillian restricted_liouvillian(const EquivalenceReport& report, const TermList& h) {
  if (report.cap_hit) throw InvalidArgument("restricted_liouvillian: class enumeration hit its cap");
  if (!(*report.space == h.space())) throw DimensionMismatch("report and Hamiltonian spaces differ");
  const Liouvillian liou(h);
  RestrictedLiouvillian out;
  out.space = report.space;
  out.strings = report.inventory;
  absl::flat_hash_map<PackedKey, Eigen::Index, PackedKeyHash> index;
  for (std::size_t i = 0; i < out.strings.size(); ++i) index.emplace(out.strings[i], static_cast<Eigen::Index>(i));
  std::vector<Eigen::Triplet<Complex>> triplets;
  const auto dim = static_cast<Eigen::Index>(out.strings.size());
  for (Eigen::Index k = 0; k < dim; ++k) {
    liou.for_each_image(out.strings[static_cast<std::size_t>(k)], Complex{1.0}, [&](PackedKey key, Complex c) {
      auto it = index.find(key);
      if (it == index.end()) throw InternalError("restricted_liouvillian: commutator leaves the class");
      triplets.emplace_back(it->second, k, c);
    });
  }
  out.m.resize(dim, dim);
  out.m.setFromTriplets(triplets.begin(), triplets.end());
  out.m.makeCompressed();
  return out;
}

/// Coordinate-format (MatrixMarket) export of M, 1-based indices.
inline void write_matrix_market(std::ostream& os, const RestrictedLiouvillian& rl) {
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << rl.m.rows() << ' ' << rl.m.cols() << ' ' << rl.m.nonZeros() << '\n';
  os.precision(17);
  for (Eigen::Index k = 0; k < rl.m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(rl.m, k); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
}

/// One interval of piecewise-constant couplings: `generator` acts until t_end.
struct EvolutionSegment {
  double t_end = 0.0;
  const RestrictedLiouvillian* generator = nullptr;
};

struct EvolutionOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
};

/// f(t) for df/dt = i M f with M switched at segment ends; the last segment
/// extends to the end of the grid.
inline std::vector<Eigen::VectorXcd> evolve_piecewise(const std::vector<EvolutionSegment>& segments,
                                                      const Eigen::VectorXcd& f0, const std::vector<double>& t_grid,
                                                      const EvolutionOptions& opts = {}) {
  if (segments.empty()) throw InvalidArgument("evolve_in_class: no generator");
  if (f0.norm() == 0.0) throw InvalidArgument("evolve_in_class: initial vector is zero");
  if (t_grid.empty()) throw InvalidArgument("evolve_in_class: empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("evolve_in_class: time grid must increase");
  }
  for (std::size_t i = 1; i < segments.size(); ++i) {
    if (!(segments[i].t_end > segments[i - 1].t_end)) {
      throw InvalidArgument("evolve_in_class: segment ends must increase");
    }
  }
  const auto dim = f0.size();
  for (const auto& s : segments) {
    if (!s.generator || s.generator->m.rows() != dim) {
      throw DimensionMismatch("evolve_in_class: generator does not match the initial vector");
    }
  }
  using State = std::vector<double>;  // real parts, then imaginary parts
  State x(2 * static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    x[static_cast<std::size_t>(i)] = f0[i].real();
    x[static_cast<std::size_t>(i + dim)] = f0[i].imag();
  }
  const Eigen::SparseMatrix<Complex>* current = nullptr;
  Eigen::VectorXcd f(dim), g(dim);
  auto rhs = [&](const State& s, State& ds, double) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      f[i] = Complex(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(i + dim)]);
    }
    g.noalias() = *current * f;
    for (Eigen::Index i = 0; i < dim; ++i) {
      // i * g
      ds[static_cast<std::size_t>(i)] = -g[i].imag();
      ds[static_cast<std::size_t>(i + dim)] = g[i].real();
    }
  };
  auto unpack = [dim](const State& s) {
    Eigen::VectorXcd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      v[i] = Complex(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(i + dim)]);
    }
    return v;
  };
  namespace odeint = boost::numeric::odeint;
  std::vector<Eigen::VectorXcd> out;
  out.reserve(t_grid.size());
  double t = 0.0;
  std::size_t seg = 0;
  for (double target : t_grid) {
    // Advance through every switching time before the target.
    while (t < target) {
      while (seg + 1 < segments.size() && segments[seg].t_end <= t) ++seg;
      const bool last = seg + 1 == segments.size();
      const double stop = last ? target : std::min(target, segments[seg].t_end);
      current = &segments[seg].generator->m;
      if (stop > t) {
        auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>{});
        odeint::integrate_adaptive(stepper, rhs, x, t, stop, std::min(1e-3, stop - t));
      }
      t = stop;
    }
    out.push_back(unpack(x));
  }
  return out;
}

inline std::vector<Eigen::VectorXcd> evolve_in_class(const RestrictedLiouvillian& rl, const Eigen::VectorXcd& f0,
                                                     const std::vector<double>& t_grid,
                                                     const EvolutionOptions& opts = {}) {
  return evolve_piecewise({{0.0, &rl}}, f0, t_grid, opts);
}

/// Coefficients of `a` on the class inventory; strings outside the class are an error.
inline Eigen::VectorXcd class_coefficients(const RestrictedLiouvillian& rl, const OperatorVector& a) {
  absl::flat_hash_map<PackedKey, Eigen::Index, PackedKeyHash> index;
  for (std::size_t i = 0; i < rl.strings.size(); ++i) index.emplace(rl.strings[i], static_cast<Eigen::Index>(i));
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(rl.strings.size()));
  for (const auto& e : a.entries()) {
    auto it = index.find(e.key);
    if (it == index.end()) throw InvalidArgument("class_coefficients: operator leaves the class");
    f[it->second] = e.amp;
  }
  return f;
}

}  // namespace quditops
