#include <gtest/gtest.h>

#include "quditops/liouvillian.hpp"
#include "quditops/models.hpp"
#include "test_support.hpp"

namespace quditops {
namespace {

using testing::dense_of;

WeylString one(int d, int x, int v, int w) { return WeylString::single(d, Site{x, 0}, v, w); }

OperatorVector vec(const SpacePtr& space, std::vector<PhasedString> terms) {
  return OperatorVector::from_terms(space, terms);
}

TEST(Inner, Examples) {
  const auto space = OperatorSpace::make(3, LatticeSpec::ring(1 + 1));
  const auto x = vec(space, {{1.0, one(3, 0, 1, 0)}});
  const auto z = vec(space, {{1.0, one(3, 0, 0, 1)}});
  EXPECT_EQ(inner(x, x), Complex(1.0));
  EXPECT_EQ(inner(x, z), Complex(0.0));
  const auto a = vec(space, {{2.0, one(3, 0, 1, 0)}, {Complex(0, 3), one(3, 0, 0, 1)}});
  EXPECT_EQ(inner(a, x), Complex(2.0));
}

TEST(Inner, MatchesDenseTrace) {
  std::mt19937_64 rng(11);
  for (int d = 2; d <= 4; ++d) {
    const int sites = d == 2 ? 4 : 3;
    const auto space = OperatorSpace::make(d, LatticeSpec::ring(sites));
    for (int i = 0; i < 20; ++i) {
      const auto a = vec(space, testing::random_terms(rng, d, sites, 6));
      const auto b = vec(space, testing::random_terms(rng, d, sites, 6));
      const Eigen::MatrixXcd ma = dense_of(a, sites), mb = dense_of(b, sites);
      const Complex trace = (ma.adjoint() * mb).trace() / static_cast<double>(ma.rows());
      EXPECT_LT(std::abs(inner(a, b) - trace), 1e-12);
    }
  }
}

TEST(Inner, ModeMismatchThrows) {
  const auto ring = OperatorSpace::make(3, LatticeSpec::ring(4));
  const auto chain = OperatorSpace::make(3, LatticeSpec::chain());
  const auto other_d = OperatorSpace::make(2, LatticeSpec::ring(4));
  const auto a = vec(ring, {{1.0, one(3, 0, 1, 0)}});
  EXPECT_THROW(inner(a, vec(chain, {{1.0, one(3, 0, 1, 0)}})), DimensionMismatch);
  EXPECT_THROW(inner(a, vec(other_d, {{1.0, one(2, 0, 1, 0)}})), DimensionMismatch);
}

TEST(Norm, Examples) {
  const auto space = OperatorSpace::make(3, LatticeSpec::chain());
  EXPECT_DOUBLE_EQ(norm(vec(space, {{1.0, one(3, 0, 1, 0)}})), 1.0);
  EXPECT_DOUBLE_EQ(norm(OperatorVector(space)), 0.0);
  // tr((S^z)^2)/3 = 2/3 for S = 1
  const auto sz = build_total_magnetization(SpinValue{2}, space);
  EXPECT_NEAR(norm(sz), std::sqrt(2.0 / 3.0), 1e-14);
}

TEST(Axpy, Examples) {
  const auto space = OperatorSpace::make(3, LatticeSpec::chain());
  const auto a = vec(space, {{1.5, one(3, 0, 1, 0)}, {Complex(0, 2), one(3, 0, 1, 2)}});
  EXPECT_TRUE(axpy(-1.0, a, a).empty());

  const auto b = vec(space, {{1.0, WeylString(3, {{Site{0, 0}, 0, 1}, {Site{1, 0}, 2, 0}})}});
  EXPECT_EQ(axpy(1.0, a, b).size(), a.size() + b.size());

  // relative debris below 1e-14 of the largest amplitude is removed
  const auto big = vec(space, {{1.0, one(3, 0, 1, 0)}, {1.0, one(3, 0, 2, 0)}});
  const auto nearly = vec(space, {{-(1.0 - 1e-16), one(3, 0, 2, 0)}});
  const auto sum = axpy(1.0, nearly, big);
  EXPECT_EQ(sum.size(), 1u);
  EXPECT_EQ(sum.amplitude(one(3, 0, 1, 0)), Complex(1.0));
}

TEST(Anchor, Examples) {
  const WeylString s(2, {{Site{5, 0}, 1, 0}, {Site{6, 0}, 0, 1}});
  const auto [anchored, shift] = canonical_anchor(s);
  EXPECT_EQ(shift, (Site{-5, 0}));
  EXPECT_EQ(anchored, WeylString(2, {{Site{0, 0}, 1, 0}, {Site{1, 0}, 0, 1}}));
  EXPECT_EQ(canonical_anchor(anchored).first, anchored);
  EXPECT_EQ(canonical_anchor(anchored).second, (Site{0, 0}));

  const WeylString p(3, {{Site{2, 3}, 1, 0}, {Site{1, 7}, 0, 1}});
  const auto [a2, s2] = canonical_anchor(p);
  EXPECT_EQ(s2, (Site{-1, -7}));
  EXPECT_EQ(a2.factors().front().site, (Site{0, 0}));
  EXPECT_THROW(canonical_anchor(WeylString(3)), InvalidArgument);
}

TEST(OperatorSpace, KeysRoundTrip) {
  std::mt19937_64 rng(5);
  for (int d = 2; d <= 5; ++d) {
    const auto ring = OperatorSpace::make(d, LatticeSpec::ring(6));
    const auto chain = OperatorSpace::make(d, LatticeSpec::chain());
    for (int i = 0; i < 100; ++i) {
      const auto p = testing::random_string(rng, d, 6);
      EXPECT_EQ(ring->decode(ring->encode(p)), p);
      if (!p.is_identity()) EXPECT_EQ(chain->decode(chain->encode(p.translated(Site{3, 0}))), canonical_anchor(p).first);
    }
  }
  const auto plane = OperatorSpace::make(3, LatticeSpec::plane());
  const WeylString q(3, {{Site{0, 0}, 1, 0}, {Site{0, 1}, 0, 2}, {Site{1, -1}, 1, 1}});
  EXPECT_EQ(plane->decode(plane->encode(q.translated(Site{4, -2}))), q);
}

TEST(Liouvillian, Examples) {
  const auto chain = OperatorSpace::make(2, LatticeSpec::chain());
  const TermList zz(chain, {{1.0, WeylString(2, {{Site{0, 0}, 0, 1}, {Site{1, 0}, 0, 1}})}});
  const auto z0 = vec(chain, {{1.0, one(2, 0, 0, 1)}});
  EXPECT_TRUE(apply_liouvillian(zz, z0).empty());

  // [sum_i X_i, Z_0] = -[Z, X] = 2 XZ
  const TermList xs(chain, {{1.0, one(2, 0, 1, 0)}});
  const auto out = apply_liouvillian(xs, z0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.amplitude(one(2, 0, 1, 1)), Complex(2.0));
  const auto x = local_matrix(2, 1, 0), z = local_matrix(2, 0, 1);
  EXPECT_NEAR((x * z - z * x - 2.0 * local_matrix(2, 1, 1)).norm(), 0.0, 1e-15);
}

TEST(Liouvillian, MatchesDenseCommutatorOnRing) {
  std::mt19937_64 rng(21);
  for (int d = 2; d <= 3; ++d) {
    const auto space = OperatorSpace::make(d, LatticeSpec::ring(4));
    for (int i = 0; i < 10; ++i) {
      const TermList h(space, testing::random_terms(rng, d, 4, 5));
      const auto a = vec(space, testing::random_terms(rng, d, 4, 5));
      const Eigen::MatrixXcd mh = dense_of(h, 4), ma = dense_of(a, 4);
      EXPECT_LT((dense_of(apply_liouvillian(h, a), 4) - (mh * ma - ma * mh)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Liouvillian, HermitianInputsGiveAntiHermitianOutput) {
  std::mt19937_64 rng(31);
  for (int d = 2; d <= 5; ++d) {
    const auto space = OperatorSpace::make(d, LatticeSpec::chain());
    const auto h = TermList(space, testing::random_terms(rng, d, 2, 4)).with_hermitian_closure();
    ASSERT_TRUE(h.hermitian());
    auto a = vec(space, testing::random_terms(rng, d, 3, 4));
    a = axpy(1.0, adjoint(a), a);
    const auto la = apply_liouvillian(h, a);
    EXPECT_LT(norm(axpy(1.0, adjoint(la), la)), 1e-12 * std::max(1.0, norm(la)));
  }
}

TEST(Liouvillian, SelfAdjointUnderTraceInner) {
  std::mt19937_64 rng(41);
  for (int d = 2; d <= 5; ++d) {
    for (auto lattice : {LatticeSpec::ring(5), LatticeSpec::chain()}) {
      const auto space = OperatorSpace::make(d, lattice);
      const auto h = TermList(space, testing::random_terms(rng, d, 2, 4)).with_hermitian_closure();
      const Liouvillian liou(h, true);
      const auto a = vec(space, testing::random_terms(rng, d, 3, 4));
      const auto b = vec(space, testing::random_terms(rng, d, 3, 4));
      EXPECT_LT(std::abs(inner(liou.apply(a), b) - inner(a, liou.apply(b))), 1e-12);
    }
  }
}

TEST(Liouvillian, RequireHermitianRejectsNonHermitianTerms) {
  const auto space = OperatorSpace::make(3, LatticeSpec::chain());
  const TermList h(space, {{1.0, one(3, 0, 1, 0)}});
  EXPECT_FALSE(h.hermitian());
  EXPECT_THROW(Liouvillian(h, true), InvalidArgument);
}

// Per-site inner products of translation sums on a ring wide enough that no
// support wraps equal the translation-invariant inner product.
TEST(TranslationInvariant, MatchesRingTranslationSums) {
  constexpr int kRing = 10;
  std::mt19937_64 rng(51);
  for (int d = 2; d <= 3; ++d) {
    const auto ti = OperatorSpace::make(d, LatticeSpec::chain());
    const auto ring = OperatorSpace::make(d, LatticeSpec::ring(kRing));
    const auto cell = TermList(ti, testing::random_terms(rng, d, 2, 3)).with_hermitian_closure();
    std::vector<PhasedString> ring_terms;
    for (int s = 0; s < kRing; ++s) {
      for (const auto& t : cell.terms()) ring_terms.push_back({t.coeff, t.string.translated(Site{s, 0})});
    }
    const TermList h_ring(ring, ring_terms);
    const auto a_cell = testing::random_terms(rng, d, 2, 3);
    std::vector<PhasedString> a_sum;
    for (int s = 0; s < kRing; ++s) {
      for (const auto& t : a_cell) a_sum.push_back({t.coeff, t.string.translated(Site{s, 0})});
    }
    const auto a_ti = vec(ti, a_cell);
    const auto a_ring = vec(ring, a_sum);
    const auto la_ti = apply_liouvillian(cell, a_ti);
    const auto la_ring = apply_liouvillian(h_ring, a_ring);
    EXPECT_NEAR(std::abs(inner(la_ti, la_ti) - inner(la_ring, la_ring) / double(kRing)), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(inner(a_ti, la_ti) - inner(a_ring, la_ring) / double(kRing)), 0.0, 1e-10);
    for (const auto& e : la_ti.entries()) {
      EXPECT_LT(std::abs(la_ring.amplitude(ti->decode(e.key)) - e.amp), 1e-12);
    }
  }
}

TEST(Liouvillian, ParallelApplyIsBitIdentical) {
  const IsingModel m{1.0, 1.0, 1.0, SpinValue{2}, LatticeSpec::chain()};
  const auto space = model_space(m);
  const auto h = build_hamiltonian(m, space);
  auto a = build_total_magnetization(SpinValue{2}, space);
  for (int i = 0; i < 4; ++i) a = apply_liouvillian(h, a);
  ApplyOptions serial, parallel;
  parallel.threads = 3;
  parallel.buckets = 8;
  const auto x = apply_liouvillian(h, a, serial), y = apply_liouvillian(h, a, parallel);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x.entries()[i].key, y.entries()[i].key);
    EXPECT_EQ(x.entries()[i].amp, y.entries()[i].amp);
  }
}

}  // namespace
}  // namespace quditops
