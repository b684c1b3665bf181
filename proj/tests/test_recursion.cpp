#include <gtest/gtest.h>

#include "quditops/lanczos.hpp"
#include "quditops/recursion.hpp"

namespace quditops {
namespace {

std::vector<double> synthetic(const FitParams& p, int n_max) {
  std::vector<double> b;
  for (int n = 1; n <= n_max; ++n) b.push_back(p(n));
  return b;
}

FitParams linear_log(double alpha, double gamma, double c) {
  FitParams p;
  p.form = FitForm::linear_log;
  p.alpha = alpha;
  p.gamma = gamma;
  p.c = c;
  return p;
}

FitParams sqrt_form(double alpha, double gamma) {
  FitParams p;
  p.form = FitForm::sqrt;
  p.alpha = alpha;
  p.gamma = gamma;
  return p;
}

TEST(FitForm, ParseAndPrint) {
  EXPECT_EQ(parse_fit_form("linear_log"), FitForm::linear_log);
  EXPECT_EQ(parse_fit_form("sqrt"), FitForm::sqrt);
  EXPECT_EQ(to_string(FitForm::sqrt), "sqrt");
  EXPECT_THROW(parse_fit_form("cubic"), InvalidArgument);
}

TEST(FitBn, LinearLogRoundTrip) {
  const auto b = synthetic(linear_log(0.71, 1.07, 1.16), 20);
  const auto f = fit_bn(b, FitForm::linear_log, 2);
  EXPECT_NEAR(f.alpha, 0.71, 1e-6);
  EXPECT_NEAR(f.gamma, 1.07, 1e-6);
  EXPECT_NEAR(f.c, 1.16, 1e-6);
  EXPECT_LT(f.rms, 1e-9);
  EXPECT_EQ(f.n_min, 2);
  EXPECT_EQ(f.n_max, 20);
}

TEST(FitBn, SqrtRoundTrip) {
  const auto f = fit_bn(synthetic(sqrt_form(-0.34, 2.86), 12), FitForm::sqrt);
  EXPECT_NEAR(f.alpha, -0.34, 1e-12);
  EXPECT_NEAR(f.gamma, 2.86, 1e-12);
}

TEST(FitBn, ConstantSequence) {
  const auto f = fit_bn(std::vector<double>(10, 3.0), FitForm::sqrt);
  EXPECT_NEAR(f.alpha, 3.0, 1e-12);
  EXPECT_NEAR(f.gamma, 0.0, 1e-12);
}

TEST(FitBn, RangeAndErrors) {
  const auto b = synthetic(sqrt_form(0.5, 1.5), 12);
  const auto f = fit_bn(b, FitForm::sqrt, 4, 9);
  EXPECT_EQ(f.n_min, 4);
  EXPECT_EQ(f.n_max, 9);
  EXPECT_THROW(fit_bn({1.0, 2.0, 3.0, 4.0}, FitForm::sqrt), InvalidArgument);
  EXPECT_THROW(fit_bn(b, FitForm::sqrt, 0), InvalidArgument);
  EXPECT_THROW(fit_bn(b, FitForm::linear_log, 10), InvalidArgument);
}

TEST(FitBn, LinearLogKeepsLogPositive) {
  const auto b = synthetic(linear_log(0.5, 2.0, 0.3), 16);
  const auto f = fit_bn(b, FitForm::linear_log, 3);
  for (int n = f.n_min; n <= f.n_max; ++n) EXPECT_GT(std::log(n) + f.c, 0.0);
}

TEST(Extrapolate, Examples) {
  const std::vector<double> measured{1.0, 2.0, 2.5, 3.1};
  EXPECT_EQ(extrapolate_bn(measured, sqrt_form(0.0, 1.0), 4), measured);
  EXPECT_THROW(extrapolate_bn(measured, sqrt_form(0.0, 1.0), 3), InvalidArgument);

  const auto lin = extrapolate_bn(measured, linear_log(0.71, 1.07, 1.16), 10001);
  for (std::size_t i = 0; i < measured.size(); ++i) EXPECT_EQ(lin[i], measured[i]);
  // the (-1)^n term makes single steps oscillate by 2 alpha / (log n + c); two steps cancel it
  EXPECT_NEAR((lin[10000] - lin[9998]) / 2.0, 0.71, 1e-3);
  EXPECT_GT(std::abs(lin[10000] - lin[9999] - 0.71), 0.05);

  const auto sq = extrapolate_bn(measured, sqrt_form(-0.34, 2.86), 400);
  for (int n = 5; 4 * n <= 400; ++n) {
    EXPECT_NEAR(sq[4 * n - 1] + 0.34, 2.0 * (sq[n - 1] + 0.34), 1e-12);
  }

  EXPECT_THROW(extrapolate_bn(measured, sqrt_form(3.0, -1.0), 20), UnphysicalExtrapolation);
}

TEST(Autocorrelation, TrivialChains) {
  const auto grid = uniform_grid(5.0, 0.25);
  for (double c : autocorrelation({0.0, 0.0, 0.0}, grid).values) EXPECT_DOUBLE_EQ(c, 1.0);
  const auto two_level = autocorrelation({1.0, 0.0, 0.0}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(two_level.values[i], std::cos(grid[i]), 1e-9);
  EXPECT_EQ(two_level.chain_length, 3u);
}

TEST(Autocorrelation, ShortTimeTaylor) {
  const std::vector<double> b{2.4494897427831779, 3.872983346207417, 4.5166359162544847, 5.5157528417945585,
                              6.1406671538225934, 6.5963381183228789, 7.0534462505600626, 7.6254208446603347};
  const auto mu = moments_from_b(b, 4);
  ChainOptions closed;
  closed.closed = true;
  const double t = 0.1;
  const double taylor = 1.0 - mu[1] * t * t / 2 + mu[2] * std::pow(t, 4) / 24 - mu[3] * std::pow(t, 6) / 720 +
                        mu[4] * std::pow(t, 8) / 40320;
  const auto series = autocorrelation(b, {0.0, t}, closed);
  EXPECT_EQ(series.values[0], 1.0);
  EXPECT_NEAR(series.values[1], taylor, 1e-8);

  // C is even in t: no linear term at the origin
  const double h = 1e-4;
  const double c_h = autocorrelation(b, {h}, closed).values[0];
  EXPECT_LT(std::abs((c_h - 1.0) / h + mu[1] * h / 2), 1e-10);
}

TEST(Autocorrelation, NormConservedAndBounded) {
  const auto b = extrapolate_bn({1.2, 2.0, 2.9, 3.5, 4.4}, linear_log(0.8, 0.6, 1.0), 4000);
  const auto series = autocorrelation(b, uniform_grid(3.0, 0.1));
  EXPECT_LT(series.norm_drift, 1e-8);
  for (double c : series.values) EXPECT_LE(std::abs(c), 1.0 + 1e-6);
}

TEST(Autocorrelation, ReflectionIsReported) {
  const std::vector<double> b(10, 2.0);
  EXPECT_THROW(autocorrelation(b, uniform_grid(8.0, 0.5)), ChainReflection);
  ChainOptions closed;
  closed.closed = true;
  EXPECT_NO_THROW(autocorrelation(b, uniform_grid(8.0, 0.5), closed));
}

TEST(Autocorrelation, GridValidation) {
  EXPECT_THROW(autocorrelation({1.0}, {}), InvalidArgument);
  EXPECT_THROW(autocorrelation({1.0}, {0.0, 0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(autocorrelation({1.0}, {-0.1, 0.5}), InvalidArgument);
  EXPECT_THROW(autocorrelation({-1.0}, {0.0, 0.5}), InvalidArgument);
  const auto g = autocorrelation({1.0, 0.0}, {0.5, 1.0});
  ASSERT_EQ(g.times.size(), 2u);
  EXPECT_NEAR(g.values[0], std::cos(0.5), 1e-9);
  EXPECT_THROW(uniform_grid(1.0, 0.0), InvalidArgument);
  EXPECT_EQ(uniform_grid(1.0, 0.25).size(), 5u);
}

}  // namespace
}  // namespace quditops
