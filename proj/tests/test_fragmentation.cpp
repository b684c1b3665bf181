#include <map>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "quditops/ed_oracle.hpp"
#include "quditops/fragmentation.hpp"
#include "quditops/models.hpp"
#include "test_support.hpp"

namespace quditops {
namespace {

using testing::dense_of;
using testing::window;

/// Every string on `sites` sites, identity first.
std::vector<WeylString> all_strings(int d, int sites) {
  std::vector<WeylString> out;
  long long count = 1;
  for (int i = 0; i < 2 * sites; ++i) count *= d;
  for (long long idx = 0; idx < count; ++idx) {
    long long r = idx;
    std::vector<Factor> f;
    for (int x = 0; x < sites; ++x) {
      const auto v = static_cast<std::uint8_t>(r % d);
      r /= d;
      const auto w = static_cast<std::uint8_t>(r % d);
      r /= d;
      f.push_back({Site{x, 0}, v, w});
    }
    out.emplace_back(d, std::move(f));
  }
  return out;
}

/// Dense matrices are monomial; this key identifies a string up to a scalar.
std::string monomial_key(const Eigen::MatrixXcd& m) {
  std::ostringstream os;
  Complex ref{};
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::Index c = 0;
    m.row(r).cwiseAbs().maxCoeff(&c);
    if (ref == Complex{}) ref = m(r, c);
    const Complex z = m(r, c) / ref;
    os << c << ':' << std::lround(z.real() * 1e6) << ',' << std::lround(z.imag() * 1e6) << ';';
  }
  return os.str();
}

KitaevPottsModel kitaev_potts(int sites, bool periodic) {
  KitaevPottsModel m;
  m.d = 3;
  m.sites = sites;
  m.periodic = periodic;
  return m;
}

OperatorVector seed_z0(const SpacePtr& space) {
  const PhasedString z{1.0, WeylString::single(space->d(), Site{0, 0}, 0, 1)};
  return OperatorVector::from_terms(space, std::span<const PhasedString>(&z, 1));
}

TEST(Adjacency, CommutingStringHasNoNeighbours) {
  KitaevPottsModel m = kitaev_potts(4, true);
  m.jx = {0.0, 0.0};
  const auto h = build_hamiltonian(m);
  // Z^dagger Z bonds only: every pure-Z string commutes with H
  EXPECT_TRUE(adjacency(WeylString::single(3, Site{1, 0}, 0, 1), h).empty());
  const auto report = equivalence_classes(seed_z0(h.space_ptr()), h);
  EXPECT_EQ(report.oed, 1u);
  EXPECT_EQ(report.class_count, 1u);
  const auto rl = restricted_liouvillian(report, h);
  ASSERT_EQ(rl.dimension(), 1u);
  EXPECT_EQ(rl.m.nonZeros(), 0);
}

TEST(Adjacency, IsingZMatchesDenseCommutators) {
  const IsingModel model{1.0, 1.0, 1.0, SpinValue{1}, LatticeSpec::ring(3)};
  const auto h = build_hamiltonian(model);
  const auto p = WeylString::single(2, Site{0, 0}, 0, 1);
  const auto w = window(3);
  const Eigen::MatrixXcd pd = dense_matrix(p, w);
  std::set<WeylString> expected;
  for (const auto& q : all_strings(2, 3)) {
    const Eigen::MatrixXcd qd = dense_matrix(q, w);
    for (const auto& t : h.terms()) {
      const Eigen::MatrixXcd td = dense_matrix(t.string, w);
      const Eigen::MatrixXcd c = td * pd - pd * td;
      if (std::abs((qd.adjoint() * c).trace()) > 1e-9) expected.insert(q);
    }
  }
  const auto got = adjacency(p, h);
  EXPECT_EQ(std::set<WeylString>(got.begin(), got.end()), expected);
  // X on site 0 and the two X X bonds through it
  EXPECT_EQ(expected.size(), 3u);
}

TEST(Adjacency, SymmetricExhaustiveQutritPair) {
  const auto strings = all_strings(3, 2);
  std::vector<PhasedString> terms;
  for (const auto& s : strings) {
    if (!s.is_identity()) terms.push_back({1.0, s});
  }
  // one term and its adjoint at a time; a lone non-Hermitian term maps P to hP
  // but hP back to h^2 P, so symmetry needs the closure
  const auto space = OperatorSpace::make(3, LatticeSpec::ring(2));
  for (const auto& t : terms) {
    const TermList h = TermList(space, {t}).with_hermitian_closure();
    std::map<WeylString, std::set<WeylString>> adj;
    for (const auto& s : strings) {
      const auto a = adjacency(s, h);
      adj[s] = {a.begin(), a.end()};
    }
    for (const auto& [p, qs] : adj) {
      for (const auto& q : qs) EXPECT_TRUE(adj[q].count(p)) << to_string(p) << " -> " << to_string(q);
    }
  }
}

TEST(Adjacency, SymmetricRandomized) {
  std::mt19937_64 rng(11);
  for (int d = 2; d <= 5; ++d) {
    const auto space = OperatorSpace::make(d, LatticeSpec::ring(4));
    const TermList h = TermList(space, testing::random_terms(rng, d, 4, 6)).with_hermitian_closure();
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = testing::random_string(rng, d, 4);
      for (const auto& q : adjacency(p, h)) {
        const auto back = adjacency(q, h);
        EXPECT_TRUE(std::find(back.begin(), back.end(), p) != back.end());
      }
    }
  }
}

// Breadth-first search with dense matrices only, as an independent count.
TEST(EquivalenceClasses, DenseOracleOed) {
  for (bool periodic : {true, false}) {
    const auto model = kitaev_potts(4, periodic);
    const auto h = build_hamiltonian(model);
    const auto w = window(4);
    std::map<std::string, std::size_t> index;
    const auto strings = all_strings(3, 4);
    for (std::size_t i = 0; i < strings.size(); ++i) index.emplace(monomial_key(dense_matrix(strings[i], w)), i);
    ASSERT_EQ(index.size(), strings.size());
    std::vector<Eigen::MatrixXcd> terms;
    for (const auto& t : h.terms()) terms.push_back(dense_matrix(t.string, w));

    const auto z0 = WeylString::single(3, Site{0, 0}, 0, 1);
    std::vector<std::size_t> queue{index.at(monomial_key(dense_matrix(z0, w)))};
    std::set<std::size_t> seen(queue.begin(), queue.end());
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Eigen::MatrixXcd p = dense_matrix(strings[queue[head]], w);
      for (const auto& t : terms) {
        const Eigen::MatrixXcd c = t * p - p * t;
        if (c.cwiseAbs().maxCoeff() < 1e-9) continue;
        if (seen.insert(index.at(monomial_key(c))).second) queue.push_back(index.at(monomial_key(c)));
      }
    }
    const auto report = equivalence_classes(seed_z0(h.space_ptr()), h);
    EXPECT_EQ(report.oed, seen.size()) << (periodic ? "ring" : "open");
    EXPECT_FALSE(report.cap_hit);
  }
}

TEST(EquivalenceClasses, PartitionIsClosedAndDisjoint) {
  const auto h = build_hamiltonian(kitaev_potts(6, true));
  const auto space = h.space_ptr();
  std::vector<PhasedString> seed;
  seed.push_back({1.0, WeylString::single(3, Site{0, 0}, 0, 1)});
  seed.push_back({1.0, WeylString::single(3, Site{2, 0}, 1, 1)});
  seed.push_back({1.0, WeylString::single(3, Site{3, 0}, 0, 2)});
  const auto report = equivalence_classes(OperatorVector::from_terms(space, seed), h);
  std::size_t total = 0;
  for (auto s : report.class_sizes) total += s;
  EXPECT_EQ(total, report.oed);
  EXPECT_EQ(report.inventory.size(), report.oed);

  std::map<PackedKey, std::size_t> class_of;
  std::size_t pos = 0;
  for (std::size_t c = 0; c < report.class_sizes.size(); ++c) {
    for (std::size_t i = 0; i < report.class_sizes[c]; ++i, ++pos) {
      EXPECT_TRUE(class_of.emplace(report.inventory[pos], c).second);
    }
  }
  for (const auto& [key, c] : class_of) {
    for (const auto& q : adjacency(space->decode(key), h)) {
      auto it = class_of.find(space->encode(q));
      ASSERT_NE(it, class_of.end());
      EXPECT_EQ(it->second, c);
    }
  }
  EXPECT_LE(report.oed, 729u * 729u);
}

TEST(EquivalenceClasses, IndependentOfCouplingMagnitudes) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int sites : {4, 5, 6}) {
    const bool periodic = sites % 2 == 0;
    const auto uniform = build_hamiltonian(kitaev_potts(sites, periodic));
    auto model = kitaev_potts(sites, periodic);
    for (int b = 0; b < sites; ++b) {
      model.jx.push_back(std::polar(u(rng), u(rng)));
      model.jy.push_back(std::polar(u(rng), u(rng)));
    }
    const auto random = build_hamiltonian(model);
    const auto a = equivalence_classes(seed_z0(uniform.space_ptr()), uniform);
    const auto b = equivalence_classes(seed_z0(random.space_ptr()), random);
    EXPECT_EQ(a.oed, b.oed);
    EXPECT_EQ(std::set<PackedKey>(a.inventory.begin(), a.inventory.end()),
              std::set<PackedKey>(b.inventory.begin(), b.inventory.end()));
  }
}

TEST(EquivalenceClasses, LiteralGeneratorGivesSameClasses) {
  auto literal = kitaev_potts(6, true);
  literal.hermitian_closure = false;
  const auto hl = build_hamiltonian(literal);
  const auto hc = build_hamiltonian(kitaev_potts(6, true));
  EXPECT_FALSE(hl.hermitian());
  EXPECT_EQ(equivalence_classes(seed_z0(hl.space_ptr()), hl).oed, equivalence_classes(seed_z0(hc.space_ptr()), hc).oed);
}

TEST(EquivalenceClasses, Errors) {
  const auto h = build_hamiltonian(kitaev_potts(8, true));
  const auto partial = equivalence_classes(seed_z0(h.space_ptr()), h, 5);
  EXPECT_TRUE(partial.cap_hit);
  EXPECT_GE(partial.oed, 5u);
  EXPECT_THROW(restricted_liouvillian(partial, h), InvalidArgument);

  const auto ti = OperatorSpace::make(3, LatticeSpec::chain());
  const TermList h_ti(ti, {{1.0, WeylString::single(3, Site{0, 0}, 1, 0)}});
  const PhasedString z{1.0, WeylString::single(3, Site{0, 0}, 0, 1)};
  EXPECT_THROW(equivalence_classes(OperatorVector::from_terms(ti, std::span<const PhasedString>(&z, 1)), h_ti),
               UnsupportedMode);

  // classes built for a smaller H are not closed under a larger one
  KitaevPottsModel weak = kitaev_potts(4, true);
  weak.jx = {0.0, 0.0};
  const auto h_weak = build_hamiltonian(weak);
  const auto h_full = build_hamiltonian(kitaev_potts(4, true));
  const auto report = equivalence_classes(seed_z0(h_weak.space_ptr()), h_weak);
  const TermList h_full_same_space(h_weak.space_ptr(), {h_full.terms().begin(), h_full.terms().end()});
  EXPECT_THROW(restricted_liouvillian(report, h_full_same_space), InternalError);
}

TEST(EquivalenceClasses, InventoryExport) {
  const auto h = build_hamiltonian(kitaev_potts(4, true));
  const auto report = equivalence_classes(seed_z0(h.space_ptr()), h);
  std::ostringstream os;
  write_inventory(os, report);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# class 0 size " + std::to_string(report.oed));
  std::size_t count = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(h.space().encode(parse_weyl_string(line)), report.inventory[count]);
    ++count;
  }
  EXPECT_EQ(count, report.oed);
}

struct KitaevPottsClass {
  ed::DenseSystem sys;
  TermList h;
  EquivalenceReport report;
  RestrictedLiouvillian rl;
  std::vector<Eigen::MatrixXcd> basis;  // dense P_m, unit trace norm

  KitaevPottsClass()
      : sys(ed::dense_build(kitaev_potts(4, true))),
        h(build_hamiltonian(kitaev_potts(4, true))),
        report(equivalence_classes(seed_z0(h.space_ptr()), h)),
        rl(restricted_liouvillian(report, h)) {
    const auto w = window(4);
    for (auto key : rl.strings) basis.push_back(dense_matrix(h.space().decode(key), w) / 9.0);
  }
};

TEST(RestrictedLiouvillian, MatchesDenseSuperoperator) {
  const KitaevPottsClass k;
  const Eigen::MatrixXcd hd(k.sys.h);
  const auto dim = static_cast<Eigen::Index>(k.basis.size());
  Eigen::MatrixXcd projected(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const Eigen::MatrixXcd comm = hd * k.basis[c] - k.basis[c] * hd;
    Eigen::MatrixXcd rest = comm;
    for (Eigen::Index r = 0; r < dim; ++r) {
      projected(r, c) = (k.basis[r].adjoint() * comm).trace();
      rest -= projected(r, c) * k.basis[r];
    }
    EXPECT_LT(rest.norm(), 1e-10) << "commutator leaves the class";
  }
  const Eigen::MatrixXcd m(k.rl.m);
  EXPECT_LT((m - m.adjoint()).norm(), 1e-12);
  const Eigen::VectorXd ours = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m).eigenvalues();
  const Eigen::VectorXd dense = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(projected).eigenvalues();
  EXPECT_LT((ours - dense).cwiseAbs().maxCoeff(), 1e-10);

  for (Eigen::Index c = 0; c < k.rl.m.outerSize(); ++c) {
    EXPECT_LE(static_cast<std::size_t>(k.rl.m.col(c).nonZeros()), k.h.size());
  }
}

TEST(RestrictedLiouvillian, MatrixMarketExport) {
  const KitaevPottsClass k;
  std::ostringstream os;
  write_matrix_market(os, k.rl);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "%%MatrixMarket matrix coordinate complex general");
  long long rows = 0, cols = 0, nnz = 0;
  is >> rows >> cols >> nnz;
  EXPECT_EQ(rows, 81);
  EXPECT_EQ(nnz, k.rl.m.nonZeros());
  Eigen::MatrixXcd back = Eigen::MatrixXcd::Zero(rows, cols);
  for (long long i = 0; i < nnz; ++i) {
    long long r = 0, c = 0;
    double re = 0, im = 0;
    is >> r >> c >> re >> im;
    back(r - 1, c - 1) = Complex(re, im);
  }
  EXPECT_LT((back - Eigen::MatrixXcd(k.rl.m)).norm(), 1e-14);
}

TEST(EvolveInClass, ZeroGeneratorIsStatic) {
  RestrictedLiouvillian zero;
  zero.m.resize(3, 3);
  const Eigen::VectorXcd f0 = Eigen::Vector3cd(1.0, Complex(0, 2), -0.5);
  const auto traj = evolve_in_class(zero, f0, {0.0, 1.0, 5.0});
  for (const auto& f : traj) EXPECT_EQ(f, f0);
}

TEST(EvolveInClass, MatchesDenseHeisenbergEvolution) {
  const KitaevPottsClass k;
  const Eigen::MatrixXcd hd(k.sys.h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hd);
  const auto space = k.h.space_ptr();
  const Eigen::VectorXcd f0 = class_coefficients(k.rl, seed_z0(space));
  const Eigen::MatrixXcd a0 = dense_of(seed_z0(space), 4);
  const std::vector<double> grid{0.0, 0.3, 1.0, 2.5, 4.0};
  const auto traj = evolve_in_class(k.rl, f0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXcd phase = (Complex(0, 1) * grid[i] * eig.eigenvalues().cast<Complex>()).array().exp();
    const Eigen::MatrixXcd u = eig.eigenvectors() * phase.asDiagonal() * eig.eigenvectors().adjoint();
    const Eigen::MatrixXcd at = u * a0 * u.adjoint();
    Eigen::MatrixXcd from_class = Eigen::MatrixXcd::Zero(81, 81);
    for (std::size_t m = 0; m < k.basis.size(); ++m) from_class += traj[i][static_cast<Eigen::Index>(m)] * 9.0 * k.basis[m];
    EXPECT_LT((from_class - at).norm() / at.norm(), 1e-8) << "t = " << grid[i];
    const Complex c_dense = (a0.adjoint() * at).trace() / (a0.adjoint() * a0).trace();
    const Complex c_class = f0.dot(traj[i]) / f0.squaredNorm();
    EXPECT_LT(std::abs(c_dense - c_class), 1e-8);
    EXPECT_NEAR(traj[i].norm(), f0.norm(), 1e-10);
  }
}

TEST(EvolveInClass, PiecewiseQuench) {
  const KitaevPottsClass k;
  const Eigen::VectorXcd f0 = class_coefficients(k.rl, seed_z0(k.h.space_ptr()));
  // switching to the same generator changes nothing
  const auto plain = evolve_in_class(k.rl, f0, {0.5, 1.5});
  const auto split = evolve_piecewise({{1.0, &k.rl}, {2.0, &k.rl}}, f0, {0.5, 1.5});
  EXPECT_LT((plain[1] - split[1]).norm(), 1e-9);

  RestrictedLiouvillian frozen;
  frozen.m.resize(k.rl.m.rows(), k.rl.m.cols());
  const auto stopped = evolve_piecewise({{1.0, &k.rl}, {2.0, &frozen}}, f0, {1.0, 3.0});
  EXPECT_LT((stopped[0] - stopped[1]).norm(), 1e-14);
}

TEST(EvolveInClass, Validation) {
  const KitaevPottsClass k;
  const Eigen::VectorXcd f0 = class_coefficients(k.rl, seed_z0(k.h.space_ptr()));
  EXPECT_THROW(evolve_in_class(k.rl, f0, {1.0, 0.5}), InvalidArgument);
  EXPECT_THROW(evolve_in_class(k.rl, f0, {}), InvalidArgument);
  EXPECT_THROW(evolve_in_class(k.rl, Eigen::VectorXcd::Zero(f0.size()), {1.0}), InvalidArgument);
  EXPECT_THROW(evolve_in_class(k.rl, Eigen::VectorXcd::Ones(3), {1.0}), DimensionMismatch);
  const PhasedString x{1.0, WeylString::single(3, Site{1, 0}, 0, 1)};
  EXPECT_THROW(class_coefficients(k.rl, OperatorVector::from_terms(k.h.space_ptr(), std::span<const PhasedString>(&x, 1))),
               InvalidArgument);
}

}  // namespace
}  // namespace quditops
