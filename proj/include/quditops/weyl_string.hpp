#pragma once

// Generalized Pauli (clock/shift) strings on a lattice of qudits.
//
// A string is the tensor product of local X^v Z^w factors, with
//   X|j> = |j+1 mod d>,  Z|j> = omega^j |j>,  omega = exp(2 pi i / d).
// Products of strings are strings up to a power of omega, and every phase in
// this header is carried as an integer exponent mod d so that commutator zero
// tests are exact.

#include <algorithm>
#include <charconv>
#include <compare>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "quditops/error.hpp"

namespace quditops {

using Complex = std::complex<double>;

/// Lattice coordinate. One-dimensional lattices leave y at zero.
struct Site {
  std::int32_t x = 0;
  std::int32_t y = 0;

  friend constexpr auto operator<=>(const Site&, const Site&) = default;
  friend constexpr Site operator+(Site a, Site b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Site operator-(Site a, Site b) { return {a.x - b.x, a.y - b.y}; }
};

struct LocalExponents {
  int v = 0;
  int w = 0;

  friend constexpr bool operator==(const LocalExponents&, const LocalExponents&) = default;
  constexpr bool is_identity() const { return v == 0 && w == 0; }
};

/// One non-identity factor X^v Z^w of a string.
struct Factor {
  Site site;
  std::uint8_t v = 0;
  std::uint8_t w = 0;

  friend constexpr bool operator==(const Factor&, const Factor&) = default;
};

/// omega^k for omega = exp(2 pi i / d). Quarter turns are returned exactly.
inline Complex unit_root(int d, long long k) {
  long long r = k % d;
  if (r < 0) r += d;
  if ((4 * r) % d == 0) {
    switch ((4 * r) / d) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / d);
}

inline int mod_d(long long value, int d) {
  long long r = value % d;
  return static_cast<int>(r < 0 ? r + d : r);
}

class WeylString {
 public:
  /// Identity string for qubits.
  WeylString() = default;

  /// Identity string on qudits of dimension d.
  explicit WeylString(int d) : d_(d) { check_dimension(d); }

  /// Builds a string from factors in any order. Exponents are reduced mod d
  /// and identity factors are dropped; a site listed twice is an error.
  WeylString(int d, std::vector<Factor> factors) : d_(d), factors_(std::move(factors)) {
    check_dimension(d);
    for (auto& f : factors_) {
      f.v = static_cast<std::uint8_t>(f.v % d);
      f.w = static_cast<std::uint8_t>(f.w % d);
    }
    std::erase_if(factors_, [](const Factor& f) { return f.v == 0 && f.w == 0; });
    std::sort(factors_.begin(), factors_.end(),
              [](const Factor& a, const Factor& b) { return a.site < b.site; });
    auto dup = std::adjacent_find(factors_.begin(), factors_.end(),
                                  [](const Factor& a, const Factor& b) { return a.site == b.site; });
    if (dup != factors_.end()) throw InvalidArgument("WeylString: site listed twice");
  }

  static WeylString single(int d, Site site, int v, int w) {
    return WeylString(d, {Factor{site, static_cast<std::uint8_t>(mod_d(v, d)),
                                 static_cast<std::uint8_t>(mod_d(w, d))}});
  }

  int d() const { return d_; }
  std::span<const Factor> factors() const { return factors_; }
  std::size_t weight() const { return factors_.size(); }
  bool is_identity() const { return factors_.empty(); }

  LocalExponents at(Site site) const {
    auto it = std::lower_bound(factors_.begin(), factors_.end(), site,
                               [](const Factor& f, Site s) { return f.site < s; });
    if (it == factors_.end() || it->site != site) return {};
    return {it->v, it->w};
  }

  WeylString translated(Site shift) const {
    WeylString out = *this;
    for (auto& f : out.factors_) f.site = f.site + shift;
    return out;
  }

  friend bool operator==(const WeylString&, const WeylString&) = default;

  /// Total order: dimension, then factors compared site by site.
  friend bool operator<(const WeylString& a, const WeylString& b) {
    if (a.d_ != b.d_) return a.d_ < b.d_;
    return std::lexicographical_compare(
        a.factors_.begin(), a.factors_.end(), b.factors_.begin(), b.factors_.end(),
        [](const Factor& p, const Factor& q) {
          if (p.site != q.site) return p.site < q.site;
          if (p.v != q.v) return p.v < q.v;
          return p.w < q.w;
        });
  }

 private:
  static void check_dimension(int d) {
    if (d < 2 || d > 255) throw InvalidArgument("WeylString: qudit dimension must be in [2, 255]");
  }

  int d_ = 2;
  std::vector<Factor> factors_;
};

struct WeylStringHash {
  std::size_t operator()(const WeylString& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(s.d());
    for (const auto& f : s.factors()) {
      std::uint64_t x = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(f.site.x)) << 32) ^
                        static_cast<std::uint32_t>(f.site.y);
      x ^= (static_cast<std::uint64_t>(f.v) << 8 | f.w) * 0xff51afd7ed558ccdULL;
      h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

/// A string with a complex coefficient. Used for Hamiltonian terms.
struct PhasedString {
  Complex coeff{1.0, 0.0};
  WeylString string;
};

/// omega^phase * string, the exact result of a product or adjoint.
struct WeylProduct {
  int phase = 0;
  WeylString string;

  Complex coeff() const { return unit_root(string.d(), phase); }
};

/// (omega^plus_phase - omega^minus_phase) * string, a nonzero commutator.
struct WeylCommutator {
  int plus_phase = 0;
  int minus_phase = 0;
  WeylString string;

  Complex coeff() const {
    return unit_root(string.d(), plus_phase) - unit_root(string.d(), minus_phase);
  }
};

namespace detail {

inline void require_same_dimension(const WeylString& a, const WeylString& b) {
  if (a.d() != b.d()) {
    throw DimensionMismatch("qudit dimension mismatch: " + std::to_string(a.d()) + " vs " +
                            std::to_string(b.d()));
  }
}

// Walks the union of two sorted supports.
template <typename Visit>
void merge_supports(const WeylString& a, const WeylString& b, Visit&& visit) {
  auto fa = a.factors();
  auto fb = b.factors();
  std::size_t i = 0, j = 0;
  while (i < fa.size() || j < fb.size()) {
    if (j == fb.size() || (i < fa.size() && fa[i].site < fb[j].site)) {
      visit(fa[i].site, LocalExponents{fa[i].v, fa[i].w}, LocalExponents{});
      ++i;
    } else if (i == fa.size() || fb[j].site < fa[i].site) {
      visit(fb[j].site, LocalExponents{}, LocalExponents{fb[j].v, fb[j].w});
      ++j;
    } else {
      visit(fa[i].site, LocalExponents{fa[i].v, fa[i].w}, LocalExponents{fb[j].v, fb[j].w});
      ++i;
      ++j;
    }
  }
}

}  // namespace detail

/// xi(w, v') = sum_i w_i v'_i mod d, with w taken from `left` and v' from `right`.
inline int phase_exponent(const WeylString& left, const WeylString& right) {
  detail::require_same_dimension(left, right);
  const int d = left.d();
  long long acc = 0;
  auto fa = left.factors();
  auto fb = right.factors();
  std::size_t i = 0, j = 0;
  while (i < fa.size() && j < fb.size()) {
    if (fa[i].site < fb[j].site) {
      ++i;
    } else if (fb[j].site < fa[i].site) {
      ++j;
    } else {
      acc += static_cast<long long>(fa[i].w) * fb[j].v;
      ++i;
      ++j;
    }
  }
  return mod_d(acc, d);
}

inline WeylProduct multiply(const WeylString& a, const WeylString& b) {
  detail::require_same_dimension(a, b);
  const int d = a.d();
  std::vector<Factor> out;
  out.reserve(a.weight() + b.weight());
  detail::merge_supports(a, b, [&](Site s, LocalExponents x, LocalExponents y) {
    out.push_back({s, static_cast<std::uint8_t>((x.v + y.v) % d),
                   static_cast<std::uint8_t>((x.w + y.w) % d)});
  });
  return {phase_exponent(a, b), WeylString(d, std::move(out))};
}

/// [a, b] = a b - b a. Empty when the two orderings carry the same phase.
inline std::optional<WeylCommutator> commutator(const WeylString& a, const WeylString& b) {
  const int plus = phase_exponent(a, b);
  const int minus = phase_exponent(b, a);
  if (plus == minus) return std::nullopt;
  auto product = multiply(a, b);
  return WeylCommutator{plus, minus, std::move(product.string)};
}

/// (X^v Z^w)^dagger = omega^{v w} X^{-v} Z^{-w}, site by site.
inline WeylProduct adjoint(const WeylString& p) {
  const int d = p.d();
  std::vector<Factor> out;
  out.reserve(p.weight());
  long long phase = 0;
  for (const auto& f : p.factors()) {
    phase += static_cast<long long>(f.v) * f.w;
    out.push_back({f.site, static_cast<std::uint8_t>((d - f.v) % d),
                   static_cast<std::uint8_t>((d - f.w) % d)});
  }
  return {mod_d(phase, d), WeylString(d, std::move(out))};
}

/// Local d x d matrix of X^v Z^w.
inline Eigen::MatrixXcd local_matrix(int d, int v, int w) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (int j = 0; j < d; ++j) m((j + v) % d, j) = unit_root(d, static_cast<long long>(w) * j);
  return m;
}

/// Kronecker product over `window` (first site is the most significant
/// tensor factor), identity on window sites outside the support.
inline Eigen::MatrixXcd dense_matrix(const WeylString& p, std::span<const Site> window) {
  for (const auto& f : p.factors()) {
    if (std::find(window.begin(), window.end(), f.site) == window.end()) {
      throw InvalidArgument("dense_matrix: window misses a support site");
    }
  }
  const int d = p.d();
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(1, 1);
  for (const Site& s : window) {
    auto e = p.at(s);
    Eigen::MatrixXcd local = local_matrix(d, e.v, e.w);
    Eigen::MatrixXcd next(result.rows() * d, result.cols() * d);
    for (Eigen::Index r = 0; r < result.rows(); ++r) {
      for (Eigen::Index c = 0; c < result.cols(); ++c) {
        next.block(r * d, c * d, d, d) = result(r, c) * local;
      }
    }
    result = std::move(next);
  }
  return result;
}

// Text form: "d=3; (0):X1Z2 (1):X0Z1", or "(x,y):..." on planar lattices.
// The identity string prints as "d=3; I".

inline std::string to_string(const WeylString& p, int lattice_dim = 0) {
  if (lattice_dim == 0) {
    lattice_dim = 1;
    for (const auto& f : p.factors()) {
      if (f.site.y != 0) lattice_dim = 2;
    }
  }
  std::ostringstream os;
  os << "d=" << p.d() << ';';
  if (p.is_identity()) {
    os << " I";
    return os.str();
  }
  for (const auto& f : p.factors()) {
    os << " (" << f.site.x;
    if (lattice_dim == 2) os << ',' << f.site.y;
    os << "):X" << int(f.v) << 'Z' << int(f.w);
  }
  return os.str();
}

namespace detail {

inline long long parse_integer(std::string_view& text, std::string_view what) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{}) throw ParseError("expected integer for " + std::string(what));
  text.remove_prefix(static_cast<std::size_t>(ptr - text.data()));
  return value;
}

inline void expect_char(std::string_view& text, char c) {
  if (text.empty() || text.front() != c) {
    throw ParseError(std::string("expected '") + c + "' in Weyl string text");
  }
  text.remove_prefix(1);
}

inline void skip_spaces(std::string_view& text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
}

}  // namespace detail

inline WeylString parse_weyl_string(std::string_view text) {
  using namespace detail;
  skip_spaces(text);
  expect_char(text, 'd');
  expect_char(text, '=');
  const long long d = parse_integer(text, "d");
  if (d < 2 || d > 255) throw ParseError("qudit dimension out of range");
  expect_char(text, ';');
  skip_spaces(text);
  std::vector<Factor> factors;
  if (!text.empty() && text.front() == 'I') {
    text.remove_prefix(1);
    skip_spaces(text);
    if (!text.empty()) throw ParseError("trailing characters after identity string");
    return WeylString(static_cast<int>(d));
  }
  while (!text.empty()) {
    Factor f;
    expect_char(text, '(');
    f.site.x = static_cast<std::int32_t>(parse_integer(text, "site"));
    if (!text.empty() && text.front() == ',') {
      text.remove_prefix(1);
      f.site.y = static_cast<std::int32_t>(parse_integer(text, "site"));
    }
    expect_char(text, ')');
    expect_char(text, ':');
    expect_char(text, 'X');
    const long long v = parse_integer(text, "X exponent");
    expect_char(text, 'Z');
    const long long w = parse_integer(text, "Z exponent");
    if (v < 0 || v >= d || w < 0 || w >= d) throw ParseError("exponent out of range [0, d)");
    f.v = static_cast<std::uint8_t>(v);
    f.w = static_cast<std::uint8_t>(w);
    factors.push_back(f);
    skip_spaces(text);
  }
  return WeylString(static_cast<int>(d), std::move(factors));
}

}  // namespace quditops
