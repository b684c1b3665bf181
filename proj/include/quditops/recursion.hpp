#pragma once

// Fits of Lanczos sequences, their extrapolation, and the autocorrelation
// function from the semi-infinite chain
//   d phi_n / dt = b_n phi_{n-1} - b_{n+1} phi_{n+1},  phi_n(0) = delta_{n0},
//   C(t) = phi_0(t).

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/NonLinearOptimization>

#include "quditops/error.hpp"

namespace quditops {

enum class FitForm { linear_log, sqrt };

inline std::string to_string(FitForm f) { return f == FitForm::linear_log ? "linear_log" : "sqrt"; }

inline FitForm parse_fit_form(const std::string& s) {
  if (s == "linear_log" || s == "linear-log") return FitForm::linear_log;
  if (s == "sqrt") return FitForm::sqrt;
  throw InvalidArgument("unknown fit form '" + s + "'");
}

/// b_n ~ alpha n + gamma + (-1)^n alpha / (log n + c)   (linear_log)
/// b_n ~ alpha + gamma sqrt(n)                          (sqrt; c unused)
struct FitParams {
  FitForm form = FitForm::sqrt;
  double alpha = 0.0;
  double gamma = 0.0;
  double c = 0.0;
  int n_min = 2;
  int n_max = 0;
  double rms = 0.0;

  double operator()(double n) const {
    if (form == FitForm::sqrt) return alpha + gamma * std::sqrt(n);
    const double sign = (static_cast<long long>(n) % 2 == 0) ? 1.0 : -1.0;
    return alpha * n + gamma + sign * alpha / (std::log(n) + c);
  }
};

/// Extrapolation would produce a nonpositive coefficient.
class UnphysicalExtrapolation : public Error {
 public:
  using Error::Error;
};

/// Chain integration reached its far end; a longer chain is needed.
class ChainReflection : public Error {
 public:
  using Error::Error;
};

namespace detail {

struct LinearLogResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  std::vector<double> n;
  std::vector<double> b;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(n.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    for (std::size_t i = 0; i < n.size(); ++i) {
      const double sign = (static_cast<long long>(n[i]) % 2 == 0) ? 1.0 : -1.0;
      f[static_cast<Eigen::Index>(i)] = x[0] * n[i] + x[1] + sign * x[0] / (std::log(n[i]) + x[2]) - b[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    for (std::size_t i = 0; i < n.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double sign = (static_cast<long long>(n[i]) % 2 == 0) ? 1.0 : -1.0;
      const double den = std::log(n[i]) + x[2];
      j(r, 0) = n[i] + sign / den;
      j(r, 1) = 1.0;
      j(r, 2) = -sign * x[0] / (den * den);
    }
    return 0;
  }
};

inline double rms_of(const FitParams& p, const std::vector<double>& n, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double r = p(n[i]) - b[i];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(n.size()));
}

}  // namespace detail

/// Least-squares fit over n in [n_min, n_max] (1-based; n_max = 0 uses all).
inline FitParams fit_bn(const std::vector<double>& b, FitForm form, int n_min = 2, int n_max = 0) {
  if (n_min < 1) throw InvalidArgument("fit_bn: n_min must be at least 1");
  const int last = n_max > 0 ? std::min<int>(n_max, static_cast<int>(b.size())) : static_cast<int>(b.size());
  std::vector<double> ns, bs;
  for (int n = n_min; n <= last; ++n) {
    ns.push_back(n);
    bs.push_back(b[static_cast<std::size_t>(n - 1)]);
  }
  if (ns.size() < 4) throw InvalidArgument("fit_bn: need at least 4 points in the fit range");
  FitParams out;
  out.form = form;
  out.n_min = n_min;
  out.n_max = last;
  const auto m = static_cast<Eigen::Index>(ns.size());

  if (form == FitForm::sqrt) {
    Eigen::MatrixXd design(m, 2);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      design(i, 0) = 1.0;
      design(i, 1) = std::sqrt(ns[static_cast<std::size_t>(i)]);
      rhs[i] = bs[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd x = design.colPivHouseholderQr().solve(rhs);
    out.alpha = x[0];
    out.gamma = x[1];
    out.rms = detail::rms_of(out, ns, bs);
    return out;
  }

  // log n + c must stay positive over the range
  const double c_floor = -std::log(static_cast<double>(n_min));
  std::optional<FitParams> best;
  for (double c0 : {0.5, 1.0, 2.0, 4.0}) {
    // linear solve for (alpha, gamma) at fixed c gives the starting point
    Eigen::MatrixXd design(m, 2);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double n = ns[static_cast<std::size_t>(i)];
      const double sign = (static_cast<long long>(n) % 2 == 0) ? 1.0 : -1.0;
      design(i, 0) = n + sign / (std::log(n) + c0);
      design(i, 1) = 1.0;
      rhs[i] = bs[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd lin = design.colPivHouseholderQr().solve(rhs);
    Eigen::VectorXd x(3);
    x << lin[0], lin[1], c0;
    detail::LinearLogResidual functor{ns, bs};
    Eigen::LevenbergMarquardt<detail::LinearLogResidual> lm(functor);
    lm.parameters.xtol = 1e-15;
    lm.parameters.ftol = 1e-15;
    lm.parameters.maxfev = 4000;
    const auto status = lm.minimize(x);
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) continue;
    if (!x.allFinite() || x[2] <= c_floor) continue;
    FitParams cand = out;
    cand.alpha = x[0];
    cand.gamma = x[1];
    cand.c = x[2];
    cand.rms = detail::rms_of(cand, ns, bs);
    if (!std::isfinite(cand.rms)) continue;
    if (!best || cand.rms < best->rms) best = cand;
  }
  if (!best) throw Error("fit_bn: linear_log fit did not converge from any start");
  return *best;
}

/// Measured values verbatim, then the fit evaluated at n = len+1 .. n_total.
inline std::vector<double> extrapolate_bn(const std::vector<double>& measured, const FitParams& fit,
                                          std::size_t n_total) {
  if (n_total < measured.size()) throw InvalidArgument("extrapolate_bn: n_total shorter than input");
  std::vector<double> out = measured;
  out.reserve(n_total);
  for (std::size_t n = measured.size() + 1; n <= n_total; ++n) {
    const double value = fit(static_cast<double>(n));
    if (!(value > 0.0)) {
      throw UnphysicalExtrapolation("extrapolated b_" + std::to_string(n) + " = " + std::to_string(value) +
                                    " is not positive");
    }
    out.push_back(value);
  }
  return out;
}

struct AutocorrSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t chain_length = 0;
  std::string fingerprint;
  double norm_drift = 0.0;  // max |sum_n phi_n^2 - 1| over the grid
};

struct ChainOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// Largest |phi| allowed on the last chain site before reporting reflection.
  double reflection_tol = 1e-8;
  /// The chain genuinely ends (Krylov space exhausted); skips the reflection check.
  bool closed = false;
};

/// C(t) = phi_0(t) on a chain with couplings b_1..b_N (sites 0..N).
inline AutocorrSeries autocorrelation(const std::vector<double>& b, const std::vector<double>& t_grid,
                                      const ChainOptions& opts = {}) {
  if (t_grid.empty()) throw InvalidArgument("autocorrelation: empty time grid");
  if (t_grid.front() < 0.0) throw InvalidArgument("autocorrelation: times must be nonnegative");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("autocorrelation: time grid must increase");
  }
  for (double x : b) {
    if (!(x >= 0.0)) throw InvalidArgument("autocorrelation: coefficients must be nonnegative");
  }
  using State = std::vector<double>;
  const std::size_t sites = b.size() + 1;
  State phi(sites, 0.0);
  phi[0] = 1.0;
  auto rhs = [&b, sites](const State& x, State& dx, double) {
    for (std::size_t n = 0; n < sites; ++n) {
      double v = 0.0;
      if (n > 0) v += b[n - 1] * x[n - 1];
      if (n + 1 < sites) v -= b[n] * x[n + 1];
      dx[n] = v;
    }
  };
  AutocorrSeries out;
  out.chain_length = b.size();
  std::vector<double> grid = t_grid;
  if (grid.front() > 0.0) grid.insert(grid.begin(), 0.0);
  const bool prepended = grid.size() != t_grid.size();
  std::vector<double> values;
  double worst_edge = 0.0;
  double drift = 0.0;
  auto observer = [&](const State& x, double) {
    values.push_back(x[0]);
    worst_edge = std::max(worst_edge, std::abs(x[sites - 1]));
    double s = 0.0;
    for (double v : x) s += v * v;
    drift = std::max(drift, std::abs(s - 1.0));
  };
  namespace odeint = boost::numeric::odeint;
  if (sites == 1 || grid.size() == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) values.push_back(1.0);
  } else {
    auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>{});
    const double dt0 = std::min(1e-3, (grid[1] - grid[0]) / 4);
    odeint::integrate_times(stepper, rhs, phi, grid.begin(), grid.end(), dt0, observer);
  }
  if (!opts.closed && sites > 1 && worst_edge > opts.reflection_tol) {
    throw ChainReflection("autocorrelation: |phi_N| reached " + std::to_string(worst_edge) +
                          "; extend the chain beyond " + std::to_string(b.size()) + " coefficients");
  }
  if (prepended) values.erase(values.begin());
  out.times = t_grid;
  out.values = std::move(values);
  out.norm_drift = drift;
  std::ostringstream fp;
  fp << "chain N=" << b.size() << " dopri5 rtol=" << opts.rel_tol << " atol=" << opts.abs_tol
     << (opts.closed ? " closed" : " open");
  out.fingerprint = fp.str();
  return out;
}

/// Uniform grid 0, dt, 2 dt, ..., up to t_max inclusive.
inline std::vector<double> uniform_grid(double t_max, double dt) {
  if (!(dt > 0.0) || t_max < 0.0) throw InvalidArgument("uniform_grid: need dt > 0 and t_max >= 0");
  std::vector<double> out;
  const auto steps = static_cast<long long>(std::floor(t_max / dt + 1e-9));
  for (long long i = 0; i <= steps; ++i) out.push_back(static_cast<double>(i) * dt);
  return out;
}

}  // namespace quditops
