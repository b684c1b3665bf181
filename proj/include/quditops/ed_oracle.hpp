#pragma once

// Brute-force reference: explicit many-body matrices on small finite
// lattices. Shares no code with the Weyl-string engine beyond the model
// parameter structs; clock and shift matrices are rebuilt here.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include "quditops/error.hpp"
#include "quditops/models.hpp"

namespace quditops::ed {

using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;

/// Largest Hilbert space dimension handled at all.
inline constexpr long long kDimensionCap = 531441;  // 3^12
/// Largest dimension for full eigendecomposition.
inline constexpr long long kEigenCap = 6561;  // 3^8
/// Largest dimension for dense operator matrices (a handful of D x D complex).
inline constexpr long long kDenseOperatorCap = 4096;

struct DenseSystem {
  int d = 2;
  std::vector<Site> sites;  // site k is tensor factor k, first factor most significant
  SparseMatrix h;
  SparseMatrix a;
  std::string description;

  Eigen::Index dim() const { return h.rows(); }
};

inline DenseMatrix shift_matrix(int d) {
  DenseMatrix x = DenseMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) x((j + 1) % d, j) = 1.0;
  return x;
}

inline DenseMatrix clock_matrix(int d) {
  DenseMatrix z = DenseMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) z(j, j) = std::polar(1.0, 2.0 * M_PI * j / d);
  return z;
}

inline SparseMatrix sparse_identity(long long n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

/// `local` acting on tensor factor `k` of `count` factors of dimension d.
inline SparseMatrix embed(const DenseMatrix& local, int k, int count, int d) {
  long long left = 1, right = 1;
  for (int i = 0; i < k; ++i) left *= d;
  for (int i = k + 1; i < count; ++i) right *= d;
  const SparseMatrix loc = local.sparseView(1e-15, 1.0);
  SparseMatrix tmp = Eigen::kroneckerProduct(sparse_identity(left), loc);
  SparseMatrix out = Eigen::kroneckerProduct(tmp, sparse_identity(right));
  out.prune(Complex(0.0), 1e-15);
  return out;
}

namespace detail {

inline long long checked_dimension(int d, int count) {
  long long dim = 1;
  for (int i = 0; i < count; ++i) {
    dim *= d;
    if (dim > kDimensionCap) {
      throw CapacityExceeded("dense system d^L exceeds the cap of " + std::to_string(kDimensionCap));
    }
  }
  return dim;
}

// Nearest-neighbour pairs of a finite ring or torus by tensor-factor index.
inline std::vector<std::pair<int, int>> neighbour_pairs(const LatticeSpec& lat) {
  std::vector<std::pair<int, int>> out;
  auto push = [&](int a, int b) {
    if (a == b) return;
    for (auto [p, q] : out) {
      if ((p == a && q == b) || (p == b && q == a)) return;
    }
    out.push_back({a, b});
  };
  if (lat.dimension == 1) {
    for (int i = 0; i < lat.lx; ++i) push(i, (i + 1) % lat.lx);
  } else {
    for (int x = 0; x < lat.lx; ++x) {
      for (int y = 0; y < lat.ly; ++y) {
        push(x * lat.ly + y, ((x + 1) % lat.lx) * lat.ly + y);
        push(x * lat.ly + y, x * lat.ly + (y + 1) % lat.ly);
      }
    }
  }
  return out;
}

inline SparseMatrix total_sz(int d, int count) {
  const DenseMatrix sz = spin_matrices(SpinValue::from_dimension(d)).z;
  SparseMatrix a(checked_dimension(d, count), checked_dimension(d, count));
  for (int k = 0; k < count; ++k) a += embed(sz, k, count, d);
  return a;
}

}  // namespace detail

/// Explicit H and A = sum_i S^z_i for a model on a finite lattice.
/// The Potts k = 0 bond term (a multiple of the identity) is omitted.
inline DenseSystem dense_build(const ModelSpec& spec) {
  DenseSystem sys;
  if (const auto* m = std::get_if<IsingModel>(&spec)) {
    if (!m->lattice.finite()) throw UnsupportedMode("dense_build needs a finite lattice");
    const int d = m->spin.dimension();
    const int count = m->lattice.site_count();
    const auto dim = detail::checked_dimension(d, count);
    const SpinMatrices s = spin_matrices(m->spin);
    sys.d = d;
    sys.sites = m->lattice.sites();
    sys.h = SparseMatrix(dim, dim);
    std::vector<SparseMatrix> sx(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      sx[static_cast<std::size_t>(k)] = embed(s.x, k, count, d);
      sys.h += m->hx * sx[static_cast<std::size_t>(k)] + embed(Complex(m->hz) * s.z, k, count, d);
    }
    for (auto [i, j] : detail::neighbour_pairs(m->lattice)) {
      sys.h += Complex(m->J) * (sx[static_cast<std::size_t>(i)] * sx[static_cast<std::size_t>(j)]);
    }
    sys.a = detail::total_sz(d, count);
  } else if (const auto* p = std::get_if<PottsModel>(&spec)) {
    if (!p->lattice.finite() || p->lattice.dimension != 1) {
      throw UnsupportedMode("dense Potts model needs a finite ring");
    }
    const int d = p->d;
    const int count = p->lattice.site_count();
    const auto dim = detail::checked_dimension(d, count);
    sys.d = d;
    sys.sites = p->lattice.sites();
    const DenseMatrix x = shift_matrix(d);
    const DenseMatrix z = clock_matrix(d);
    sys.h = SparseMatrix(dim, dim);
    for (int i = 0; i < count; ++i) {
      sys.h += Complex(p->h) * embed(x + x.adjoint(), i, count, d);
    }
    for (auto [i, j] : detail::neighbour_pairs(p->lattice)) {
      // (Z_i Z_j^dagger)^k for k = 1..d-1
      const SparseMatrix zi = embed(z, i, count, d);
      const SparseMatrix zj = embed(z.adjoint(), j, count, d);
      const SparseMatrix bond = zi * zj;
      SparseMatrix power = bond;
      for (int k = 1; k < d; ++k) {
        sys.h += Complex(p->J) * power;
        power = SparseMatrix(power * bond);
      }
    }
    sys.a = detail::total_sz(d, count);
  } else {
    const auto& k = std::get<KitaevPottsModel>(spec);
    const int d = k.d;
    const int count = k.sites;
    const auto dim = detail::checked_dimension(d, count);
    sys.d = d;
    for (int i = 0; i < count; ++i) sys.sites.push_back({i, 0});
    const DenseMatrix x = shift_matrix(d);
    const DenseMatrix z = clock_matrix(d);
    sys.h = SparseMatrix(dim, dim);
    const int bonds = k.periodic ? count : count - 1;
    for (int b = 0; b < bonds; ++b) {
      const int c = (b + 1) % count;
      const bool xbond = b % 2 == 0;
      const auto& list = xbond ? k.jx : k.jy;
      const Complex j = b / 2 < static_cast<int>(list.size()) ? list[static_cast<std::size_t>(b / 2)] : Complex(1.0);
      const DenseMatrix& o = xbond ? x : z;
      SparseMatrix term = j * SparseMatrix(embed(o.adjoint(), b, count, d) * embed(o, c, count, d));
      sys.h += term;
      if (k.hermitian_closure) sys.h += SparseMatrix(term.adjoint());
    }
    sys.a = detail::total_sz(d, count);
  }
  sys.h.prune(Complex(0.0), 1e-15);
  sys.description = model_fingerprint(spec);
  return sys;
}

/// Frobenius-normalized trace inner product tr(A^dagger B) / D.
inline Complex trace_inner(const DenseMatrix& a, const DenseMatrix& b) {
  return a.conjugate().cwiseProduct(b).sum() / static_cast<double>(a.rows());
}

/// Lanczos with explicit commutators H A - A H; stops early below 1e-10.
inline std::vector<double> dense_lanczos(const DenseSystem& sys, int n_max, double threshold = 1e-10) {
  if (sys.dim() > kDenseOperatorCap) {
    throw CapacityExceeded("dense_lanczos: dimension " + std::to_string(sys.dim()) + " exceeds " +
                           std::to_string(kDenseOperatorCap));
  }
  DenseMatrix current = DenseMatrix(sys.a);
  const double n0 = std::sqrt(trace_inner(current, current).real());
  if (n0 == 0.0) throw InvalidArgument("dense_lanczos: observable is zero");
  current /= n0;
  DenseMatrix previous = DenseMatrix::Zero(sys.dim(), sys.dim());
  std::vector<double> b;
  for (int n = 1; n <= n_max; ++n) {
    DenseMatrix next = sys.h * current;
    next.noalias() -= current * sys.h;
    if (!b.empty()) next -= b.back() * previous;
    const double bn = std::sqrt(trace_inner(next, next).real());
    if (bn < threshold) break;
    b.push_back(bn);
    next /= bn;
    previous = std::move(current);
    current = std::move(next);
  }
  return b;
}

/// e^{iHt} A e^{-iHt} via eigendecomposition.
class HeisenbergEvolver {
 public:
  explicit HeisenbergEvolver(const SparseMatrix& h) {
    if (h.rows() > kEigenCap) throw CapacityExceeded("eigendecomposition above " + std::to_string(kEigenCap));
    solver_.compute(DenseMatrix(h));
    if (solver_.info() != Eigen::Success) throw InternalError("eigendecomposition failed");
  }

  const Eigen::VectorXd& energies() const { return solver_.eigenvalues(); }
  const DenseMatrix& vectors() const { return solver_.eigenvectors(); }

  DenseMatrix evolve(const DenseMatrix& a, double t) const {
    const DenseMatrix& u = solver_.eigenvectors();
    const Eigen::VectorXd& e = solver_.eigenvalues();
    DenseMatrix tilde = u.adjoint() * a * u;
    for (Eigen::Index j = 0; j < tilde.rows(); ++j) {
      for (Eigen::Index k = 0; k < tilde.cols(); ++k) tilde(j, k) *= std::polar(1.0, (e[j] - e[k]) * t);
    }
    return u * tilde * u.adjoint();
  }

 private:
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver_;
};

/// C(t) = tr(A(t) A) / tr(A^2) for Hermitian A.
inline std::vector<double> dense_autocorr(const DenseSystem& sys, const std::vector<double>& t_grid) {
  const HeisenbergEvolver ev(sys.h);
  const DenseMatrix& u = ev.vectors();
  const Eigen::VectorXd& e = ev.energies();
  const DenseMatrix tilde = u.adjoint() * DenseMatrix(sys.a) * u;
  const Eigen::MatrixXd weight = tilde.cwiseAbs2();
  const double total = weight.sum();
  if (total == 0.0) throw InvalidArgument("dense_autocorr: observable is zero");
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    double c = 0.0;
    for (Eigen::Index j = 0; j < weight.rows(); ++j) {
      for (Eigen::Index k = 0; k < weight.cols(); ++k) c += weight(j, k) * std::cos((e[j] - e[k]) * t);
    }
    out.push_back(c / total);
  }
  return out;
}

/// Matrix of prod_k X^{v_k} Z^{w_k} over tensor factors, built from the
/// explicit clock and shift matrices.
inline DenseMatrix string_matrix(int d, const std::vector<int>& v, const std::vector<int>& w) {
  if (v.size() != w.size()) throw DimensionMismatch("string_matrix: exponent lists differ in length");
  const DenseMatrix x = shift_matrix(d);
  const DenseMatrix z = clock_matrix(d);
  DenseMatrix out = DenseMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < v.size(); ++k) {
    DenseMatrix local = DenseMatrix::Identity(d, d);
    for (int i = 0; i < v[k]; ++i) local = x * local;
    DenseMatrix zw = DenseMatrix::Identity(d, d);
    for (int i = 0; i < w[k]; ++i) zw = z * zw;
    out = Eigen::kroneckerProduct(out, DenseMatrix(local * zw)).eval();
  }
  return out;
}

}  // namespace quditops::ed
