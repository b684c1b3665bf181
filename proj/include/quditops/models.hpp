#pragma once

// Spin matrices, Weyl decomposition of local operators, and the lattice
// Hamiltonians: the spin-S Ising model, the d-state Potts chain and the
// Kitaev-Potts chain.

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "quditops/error.hpp"
#include "quditops/lattice.hpp"
#include "quditops/operator_vector.hpp"
#include "quditops/term_list.hpp"
#include "quditops/weyl_string.hpp"

namespace quditops {

/// Spin S = two_s / 2, local dimension d = two_s + 1.
struct SpinValue {
  int two_s = 1;

  static SpinValue from_dimension(int d) { return SpinValue{d - 1}; }
  double value() const { return 0.5 * two_s; }
  int dimension() const { return two_s + 1; }
  friend bool operator==(const SpinValue&, const SpinValue&) = default;
};

struct SpinMatrices {
  Eigen::MatrixXcd x, y, z;
};

/// Ladder construction in the basis m = S, S-1, ..., -S.
inline SpinMatrices spin_matrices(SpinValue spin) {
  if (spin.two_s < 1) throw InvalidArgument("spin must be positive");
  const int d = spin.dimension();
  const double s = spin.value();
  Eigen::MatrixXcd plus = Eigen::MatrixXcd::Zero(d, d);
  SpinMatrices out;
  out.z = Eigen::MatrixXcd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    const double m = s - j;
    out.z(j, j) = m;
    if (j > 0) plus(j - 1, j) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  const Eigen::MatrixXcd minus = plus.adjoint();
  out.x = 0.5 * (plus + minus);
  out.y = (plus - minus) / Complex(0.0, 2.0);
  return out;
}

/// Coefficient of X^v Z^w in a local operator.
struct LocalTerm {
  int v = 0;
  int w = 0;
  Complex coeff{};
};

/// c_vw = tr((X^v Z^w)^dagger M) / d; coefficients below 1e-12 max|M| are dropped.
inline std::vector<LocalTerm> decompose_local(const Eigen::MatrixXcd& m) {
  const auto d = static_cast<int>(m.rows());
  if (m.cols() != d || d < 2) throw InvalidArgument("decompose_local: need a square matrix, d >= 2");
  const double cut = 1e-12 * m.cwiseAbs().maxCoeff();
  std::vector<LocalTerm> out;
  for (int v = 0; v < d; ++v) {
    for (int w = 0; w < d; ++w) {
      // tr(Z^-w X^-v M) = sum_j omega^{-w j} M(j + v, j)
      Complex c{};
      for (int j = 0; j < d; ++j) c += unit_root(d, -static_cast<long long>(w) * j) * m((j + v) % d, j);
      c /= static_cast<double>(d);
      if (std::abs(c) > cut) out.push_back({v, w, c});
    }
  }
  return out;
}

struct IsingModel {
  double J = 1.0;
  double hx = 1.0;
  double hz = 1.0;
  SpinValue spin{};
  LatticeSpec lattice = LatticeSpec::chain();
};

struct PottsModel {
  int d = 3;
  double J = 1.0;
  double h = 1.0;
  LatticeSpec lattice = LatticeSpec::chain();
};

/// Alternating X^dagger X and Z^dagger Z bonds on a finite chain of `sites`
/// qudits. Coupling lists are indexed by bond (0-based); a missing entry
/// means coupling 1.
struct KitaevPottsModel {
  int d = 3;
  int sites = 4;
  bool periodic = true;
  bool hermitian_closure = true;
  std::vector<Complex> jx;
  std::vector<Complex> jy;
};

using ModelSpec = std::variant<IsingModel, PottsModel, KitaevPottsModel>;

inline double coupling_convention(SpinValue spin) {
  const double s = spin.value();
  return 1.0 / std::sqrt(s * (s + 1.0));
}

inline int model_dimension(const ModelSpec& spec) {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsingModel>) return m.spin.dimension();
        else return m.d;
      },
      spec);
}

inline LatticeSpec model_lattice(const ModelSpec& spec) {
  return std::visit(
      [](const auto& m) -> LatticeSpec {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KitaevPottsModel>) {
          // open chains use the ring layout and simply omit the closing bond
          return LatticeSpec::ring(m.sites);
        } else {
          return m.lattice;
        }
      },
      spec);
}

/// Spin carried by the observable sum_i S^z_i for this model.
inline SpinValue model_spin(const ModelSpec& spec) {
  return SpinValue::from_dimension(model_dimension(spec));
}

inline SpacePtr model_space(const ModelSpec& spec) {
  return OperatorSpace::make(model_dimension(spec), model_lattice(spec));
}

inline std::string model_name(const ModelSpec& spec) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsingModel>) {
          return m.lattice.dimension == 1 ? "ising1d" : "ising2d";
        } else if constexpr (std::is_same_v<T, PottsModel>) {
          return "potts";
        } else {
          return "kitaev-potts";
        }
      },
      spec);
}

/// Nearest-neighbour bonds. Translation-invariant lattices get the unit cell
/// (+x, and +y in 2D); finite lattices list each unordered pair once.
inline std::vector<std::pair<Site, Site>> lattice_bonds(const LatticeSpec& lattice) {
  std::vector<std::pair<Site, Site>> out;
  if (!lattice.finite()) {
    out.push_back({{0, 0}, {1, 0}});
    if (lattice.dimension == 2) out.push_back({{0, 0}, {0, 1}});
    return out;
  }
  std::set<std::pair<Site, Site>> seen;
  auto add = [&](Site a, Site b) {
    a = lattice.reduce(a);
    b = lattice.reduce(b);
    if (a == b) return;
    auto key = a < b ? std::pair{a, b} : std::pair{b, a};
    if (seen.insert(key).second) out.push_back({a, b});
  };
  for (const Site& s : lattice.sites()) {
    add(s, s + Site{1, 0});
    if (lattice.dimension == 2) add(s, s + Site{0, 1});
  }
  return out;
}

inline std::vector<Site> lattice_cell_sites(const LatticeSpec& lattice) {
  if (!lattice.finite()) return {Site{0, 0}};
  return lattice.sites();
}

namespace detail {

// Adds a term, summing coefficients of strings already present.
inline void add_term(std::vector<PhasedString>& terms, Complex coeff, WeylString s) {
  for (auto& t : terms) {
    if (t.string == s) {
      t.coeff += coeff;
      return;
    }
  }
  terms.push_back({coeff, std::move(s)});
}

inline std::vector<PhasedString> drop_zero(std::vector<PhasedString> terms) {
  std::erase_if(terms, [](const PhasedString& t) { return std::abs(t.coeff) < 1e-15; });
  return terms;
}

inline std::vector<PhasedString> ising_terms(const IsingModel& m) {
  const int d = m.spin.dimension();
  const SpinMatrices s = spin_matrices(m.spin);
  const auto sx = decompose_local(s.x);
  const auto field = decompose_local(m.hx * s.x + m.hz * s.z);
  std::vector<PhasedString> terms;
  if (m.J != 0.0) {
    for (const auto& [a, b] : lattice_bonds(m.lattice)) {
      for (const auto& p : sx) {
        for (const auto& q : sx) {
          WeylString str(d, {Factor{a, static_cast<std::uint8_t>(p.v), static_cast<std::uint8_t>(p.w)},
                             Factor{b, static_cast<std::uint8_t>(q.v), static_cast<std::uint8_t>(q.w)}});
          add_term(terms, m.J * p.coeff * q.coeff, std::move(str));
        }
      }
    }
  }
  for (const Site& site : lattice_cell_sites(m.lattice)) {
    for (const auto& p : field) add_term(terms, p.coeff, WeylString::single(d, site, p.v, p.w));
  }
  return drop_zero(std::move(terms));
}

inline std::vector<PhasedString> potts_terms(const PottsModel& m) {
  if (m.lattice.dimension != 1) throw InvalidArgument("Potts model is defined on a chain");
  const int d = m.d;
  std::vector<PhasedString> terms;
  for (const auto& [a, b] : lattice_bonds(m.lattice)) {
    // k = 0 is the identity and is dropped
    for (int k = 1; k < d; ++k) {
      WeylString str(d, {Factor{a, 0, static_cast<std::uint8_t>(k)},
                         Factor{b, 0, static_cast<std::uint8_t>((d - k) % d)}});
      add_term(terms, m.J, std::move(str));
    }
  }
  for (const Site& site : lattice_cell_sites(m.lattice)) {
    add_term(terms, m.h, WeylString::single(d, site, 1, 0));
    add_term(terms, m.h, WeylString::single(d, site, d - 1, 0));
  }
  return drop_zero(std::move(terms));
}

inline std::vector<PhasedString> kitaev_potts_terms(const KitaevPottsModel& m) {
  const int d = m.d;
  const int n = m.sites;
  if (n < 2) throw InvalidArgument("Kitaev-Potts chain needs at least 2 sites");
  if (m.periodic && n % 2 != 0) {
    throw InvalidArgument("periodic Kitaev-Potts chain needs an even number of sites");
  }
  const int bonds = m.periodic ? n : n - 1;
  std::vector<PhasedString> terms;
  auto coupling = [](const std::vector<Complex>& list, int index) {
    return index < static_cast<int>(list.size()) ? list[static_cast<std::size_t>(index)] : Complex(1.0);
  };
  for (int b = 0; b < bonds; ++b) {
    const Site a{b, 0};
    const Site c{(b + 1) % n, 0};
    const auto dm1 = static_cast<std::uint8_t>(d - 1);
    if (b % 2 == 0) {
      // X^dagger_{b} X_{b+1}
      const Complex j = coupling(m.jx, b / 2);
      if (j != Complex{}) terms.push_back({j, WeylString(d, {Factor{a, dm1, 0}, Factor{c, 1, 0}})});
    } else {
      // Z^dagger_{b} Z_{b+1}
      const Complex j = coupling(m.jy, b / 2);
      if (j != Complex{}) terms.push_back({j, WeylString(d, {Factor{a, 0, dm1}, Factor{c, 0, 1}})});
    }
  }
  if (m.hermitian_closure) {
    const std::size_t count = terms.size();
    for (std::size_t i = 0; i < count; ++i) {
      auto adj = adjoint(terms[i].string);
      add_term(terms, std::conj(terms[i].coeff) * adj.coeff(), adj.string);
    }
  }
  return drop_zero(std::move(terms));
}

}  // namespace detail

/// Phased strings of the Hamiltonian, before packing into a space.
inline std::vector<PhasedString> hamiltonian_terms(const ModelSpec& spec) {
  return std::visit(
      [](const auto& m) -> std::vector<PhasedString> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsingModel>) return detail::ising_terms(m);
        else if constexpr (std::is_same_v<T, PottsModel>) return detail::potts_terms(m);
        else return detail::kitaev_potts_terms(m);
      },
      spec);
}

/// TermList for the model; checks Hermiticity unless Hermitian closure was
/// switched off for a Kitaev-Potts chain.
inline TermList build_hamiltonian(const ModelSpec& spec, SpacePtr space = nullptr) {
  if (!space) space = model_space(spec);
  if (space->d() != model_dimension(spec)) throw DimensionMismatch("space does not match model dimension");
  TermList h(space, hamiltonian_terms(spec));
  const auto* kp = std::get_if<KitaevPottsModel>(&spec);
  const bool literal = kp && !kp->hermitian_closure;
  if (!literal && !h.hermitian()) throw InternalError("model Hamiltonian failed the Hermiticity check");
  return h;
}

/// A = sum_i S^z_i: one anchored representative when translation invariant,
/// otherwise the explicit sum over sites.
inline OperatorVector build_total_magnetization(SpinValue spin, SpacePtr space) {
  if (space->d() != spin.dimension()) throw DimensionMismatch("spin does not match space dimension");
  const auto local = decompose_local(spin_matrices(spin).z);
  std::vector<PhasedString> terms;
  for (const Site& site : lattice_cell_sites(space->lattice())) {
    for (const auto& p : local) terms.push_back({p.coeff, WeylString::single(spin.dimension(), site, p.v, p.w)});
  }
  return OperatorVector::from_terms(space, terms);
}

/// Short human-readable description embedded in result files.
inline std::string model_fingerprint(const ModelSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsingModel>) {
          os << "ising dim=" << m.lattice.dimension << " twoS=" << m.spin.two_s << " J=" << m.J
             << " hx=" << m.hx << " hz=" << m.hz << " boundary=" << to_string(m.lattice.boundary);
          if (m.lattice.finite()) os << " L=" << m.lattice.lx << "x" << m.lattice.ly;
        } else if constexpr (std::is_same_v<T, PottsModel>) {
          os << "potts d=" << m.d << " J=" << m.J << " h=" << m.h
             << " boundary=" << to_string(m.lattice.boundary);
          if (m.lattice.finite()) os << " L=" << m.lattice.lx;
        } else {
          os << "kitaev-potts d=" << m.d << " sites=" << m.sites << (m.periodic ? " ring" : " open")
             << (m.hermitian_closure ? " hc" : " literal");
        }
      },
      spec);
  return os.str();
}

}  // namespace quditops
