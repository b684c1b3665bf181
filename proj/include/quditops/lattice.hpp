#pragma once

#include <string>
#include <vector>

#include "quditops/error.hpp"
#include "quditops/weyl_string.hpp"

namespace quditops {

enum class Boundary { thermodynamic, ring, torus };

inline std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::thermodynamic: return "thermodynamic";
    case Boundary::ring: return "ring";
    case Boundary::torus: return "torus";
  }
  return "?";
}

/// Square lattice in one or two dimensions, either infinite (translation
/// invariant) or periodic with finite extent.
struct LatticeSpec {
  int dimension = 1;
  Boundary boundary = Boundary::thermodynamic;
  int lx = 0;
  int ly = 0;

  static LatticeSpec chain() { return {1, Boundary::thermodynamic, 0, 0}; }
  static LatticeSpec plane() { return {2, Boundary::thermodynamic, 0, 0}; }
  static LatticeSpec ring(int length) { return {1, Boundary::ring, length, 0}; }
  static LatticeSpec torus(int nx, int ny) { return {2, Boundary::torus, nx, ny}; }

  bool finite() const { return boundary != Boundary::thermodynamic; }

  int site_count() const {
    if (!finite()) throw UnsupportedMode("infinite lattice has no site count");
    return dimension == 1 ? lx : lx * ly;
  }

  void validate() const {
    if (dimension != 1 && dimension != 2) throw InvalidArgument("lattice dimension must be 1 or 2");
    if (boundary == Boundary::ring && (dimension != 1 || lx < 2)) {
      throw InvalidArgument("ring needs dimension 1 and at least 2 sites");
    }
    if (boundary == Boundary::torus && (dimension != 2 || lx < 2 || ly < 2)) {
      throw InvalidArgument("torus needs dimension 2 and sides of at least 2");
    }
  }

  /// Coordinates reduced into the periodic cell; identity on infinite lattices.
  Site reduce(Site s) const {
    auto wrap = [](int value, int n) { return ((value % n) + n) % n; };
    switch (boundary) {
      case Boundary::ring: return {wrap(s.x, lx), 0};
      case Boundary::torus: return {wrap(s.x, lx), wrap(s.y, ly)};
      default: return s;
    }
  }

  /// Row-major linear index of a reduced site on a finite lattice.
  int linear_index(Site s) const {
    Site r = reduce(s);
    return dimension == 1 ? r.x : r.x * ly + r.y;
  }

  Site site_at(int index) const {
    return dimension == 1 ? Site{index, 0} : Site{index / ly, index % ly};
  }

  /// All sites of a finite lattice in linear-index order.
  std::vector<Site> sites() const {
    std::vector<Site> out;
    const int n = site_count();
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(site_at(i));
    return out;
  }

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

}  // namespace quditops
