#pragma once

// Shared helpers for the unit tests: dense images of sparse operators and
// small random generators.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "quditops/operator_vector.hpp"
#include "quditops/term_list.hpp"

namespace quditops::testing {

inline std::vector<Site> window(int sites) {
  std::vector<Site> w;
  for (int x = 0; x < sites; ++x) w.push_back({x, 0});
  return w;
}

/// Dense matrix of a vector on a finite ring or chain of `sites` sites.
inline Eigen::MatrixXcd dense_of(const OperatorVector& a, int sites) {
  const auto w = window(sites);
  long long dim = 1;
  for (int i = 0; i < sites; ++i) dim *= a.d();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& e : a.entries()) m += e.amp * dense_matrix(a.space().decode(e.key), w);
  return m;
}

inline Eigen::MatrixXcd dense_of(const TermList& h, int sites) { return dense_of(h.as_vector(), sites); }

/// Random string on sites [0, sites) with uniform exponents (possibly identity).
inline WeylString random_string(std::mt19937_64& rng, int d, int sites) {
  std::uniform_int_distribution<int> e(0, d - 1);
  std::vector<Factor> f;
  for (int x = 0; x < sites; ++x) {
    f.push_back({Site{x, 0}, static_cast<std::uint8_t>(e(rng)), static_cast<std::uint8_t>(e(rng))});
  }
  return WeylString(d, std::move(f));
}

inline std::vector<PhasedString> random_terms(std::mt19937_64& rng, int d, int sites, int count) {
  std::normal_distribution<double> g;
  std::vector<PhasedString> out;
  for (int i = 0; i < count; ++i) {
    auto s = random_string(rng, d, sites);
    if (!s.is_identity()) out.push_back({Complex(g(rng), g(rng)), s});
  }
  return out;
}

}  // namespace quditops::testing
