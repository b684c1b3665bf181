#pragma once

// Three-term Lanczos recursion for L = [H, .] under (A|B) = tr(A^dagger B)/dim H:
//   A_0 = A / |A|,  b_n A_n = L A_{n-1} - b_{n-1} A_{n-2}.
// Only the two previous vectors are retained, except in verification mode.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "quditops/error.hpp"
#include "quditops/liouvillian.hpp"
#include "quditops/operator_vector.hpp"
#include "quditops/term_list.hpp"

namespace quditops {

enum class Termination { max_iterations, subspace_exhausted, budget_exceeded };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::max_iterations: return "max_iterations";
    case Termination::subspace_exhausted: return "subspace_exhausted";
    case Termination::budget_exceeded: return "budget_exceeded";
  }
  return "?";
}

struct LanczosResult {
  std::vector<double> b;                   // b[i] is b_{i+1}
  std::vector<std::size_t> support_sizes;  // support_sizes[i] is |A_{i+1}|
  std::size_t initial_support = 0;         // |A_0|
  Termination terminated = Termination::max_iterations;
  int exhausted_at = 0;                    // n with b_n below threshold
  std::string message;
  std::string fingerprint;
  std::vector<OperatorVector> vectors;     // A_0..A_n in verification mode
};

/// Everything needed to continue a run: the last two Lanczos vectors.
struct LanczosState {
  int n = 0;  // index of `current`
  std::vector<double> b;
  std::vector<std::size_t> support_sizes;
  std::size_t initial_support = 0;
  OperatorVector previous;
  OperatorVector current;
};

inline std::size_t physical_memory_bytes() {
  const long pages = sysconf(_SC_PHYS_PAGES);
  const long page = sysconf(_SC_PAGE_SIZE);
  if (pages <= 0 || page <= 0) return std::size_t{8} << 30;
  return static_cast<std::size_t>(pages) * static_cast<std::size_t>(page);
}

struct LanczosOptions {
  int n_max = 10;
  /// Cap on stored amplitude entries (retained vectors plus the one being built).
  std::size_t entry_budget = 200'000'000;
  /// Memory envelope for stored entries and accumulators; 0 means 70% of RAM.
  std::size_t memory_bytes = 0;
  double exhaustion_threshold = 1e-10;
  /// Keep every A_n (orthogonality checks on short runs).
  bool keep_vectors = false;
  ApplyOptions apply{};
  /// Called after every completed step with the resumable state.
  std::function<void(const LanczosState&)> on_step;

  std::size_t effective_budget() const {
    const std::size_t mem = memory_bytes ? memory_bytes : physical_memory_bytes() / 10 * 7;
    const std::size_t acc = std::min(apply.accumulator_bytes, mem / 2);
    const std::size_t by_memory = (mem - acc) / sizeof(Entry);
    return std::min(entry_budget, by_memory);
  }
};

namespace detail {

inline LanczosResult lanczos_loop(const Liouvillian& liou, LanczosState state, const LanczosOptions& opts,
                                  std::vector<OperatorVector> kept) {
  LanczosResult result;
  result.b = state.b;
  result.support_sizes = state.support_sizes;
  result.initial_support = state.initial_support;
  result.vectors = std::move(kept);
  const std::size_t budget = opts.effective_budget();
  double growth = 4.0;
  for (int n = state.n + 1; n <= opts.n_max; ++n) {
    const double b_prev = state.b.empty() ? 0.0 : state.b.back();
    const std::size_t retained = state.previous.size() + state.current.size();
    if (retained >= budget) {
      result.terminated = Termination::budget_exceeded;
      result.message = "retained vectors exceed the entry budget before step " + std::to_string(n);
      return result;
    }
    ApplyOptions apply = opts.apply;
    apply.entry_limit = budget - retained;
    apply.expected_entries = static_cast<std::size_t>(growth * static_cast<double>(state.current.size())) + 16;
    double bn = 0.0;
    std::size_t support = 0;
    std::optional<OperatorVector> next;
    try {
      if (n == opts.n_max && !opts.keep_vectors) {
        const auto r = liou.residual_norm(state.current, -b_prev, &state.previous, apply);
        bn = r.norm;
        support = r.support;
      } else {
        next = liou.apply_axpy(state.current, -b_prev, &state.previous, apply);
        bn = norm(*next);
        support = next->size();
      }
    } catch (const BudgetExceeded& e) {
      result.terminated = Termination::budget_exceeded;
      result.message = std::string("step ") + std::to_string(n) + ": " + e.what();
      return result;
    } catch (const CapacityExceeded& e) {
      result.terminated = Termination::budget_exceeded;
      result.message = std::string("step ") + std::to_string(n) + ": " + e.what();
      return result;
    }
    if (bn < opts.exhaustion_threshold) {
      result.terminated = Termination::subspace_exhausted;
      result.exhausted_at = n;
      return result;
    }
    if (state.current.size() > 0) {
      growth = std::max(1.0, static_cast<double>(support) / static_cast<double>(state.current.size()));
    }
    result.b.push_back(bn);
    result.support_sizes.push_back(support);
    state.b.push_back(bn);
    state.support_sizes.push_back(support);
    if (next) {
      next->scale(1.0 / bn);
      state.previous = std::move(state.current);
      state.current = std::move(*next);
      state.n = n;
      if (opts.keep_vectors) result.vectors.push_back(state.current);
      if (opts.on_step) opts.on_step(state);
    }
  }
  result.terminated = Termination::max_iterations;
  return result;
}

}  // namespace detail

inline LanczosResult run_lanczos(const TermList& h, const OperatorVector& a, const LanczosOptions& opts) {
  if (!h.hermitian()) throw InvalidArgument("run_lanczos: Hamiltonian must be Hermitian");
  if (!(h.space() == a.space())) throw DimensionMismatch("observable and Hamiltonian spaces differ");
  if (opts.n_max < 1) throw InvalidArgument("run_lanczos: n_max must be at least 1");
  const double a_norm = norm(a);
  if (a_norm == 0.0) throw InvalidArgument("run_lanczos: observable is zero");
  const Liouvillian liou(h, true);
  LanczosState state{0, {}, {}, a.size(), OperatorVector(a.space_ptr()), a.scaled(1.0 / a_norm)};
  std::vector<OperatorVector> kept;
  if (opts.keep_vectors) kept.push_back(state.current);
  return detail::lanczos_loop(liou, std::move(state), opts, std::move(kept));
}

/// Continues from a checkpointed state up to opts.n_max.
inline LanczosResult resume_lanczos(const TermList& h, LanczosState state, const LanczosOptions& opts) {
  if (!h.hermitian()) throw InvalidArgument("resume_lanczos: Hamiltonian must be Hermitian");
  if (!(h.space() == state.current.space())) throw DimensionMismatch("checkpoint and Hamiltonian spaces differ");
  const Liouvillian liou(h, true);
  return detail::lanczos_loop(liou, std::move(state), opts, {});
}

/// mu_0, mu_2, ..., mu_{2 k_max}: diagonal moments of the tridiagonal matrix
/// with zero diagonal and off-diagonals b_1, b_2, ...
inline std::vector<double> moments_from_b(const std::vector<double>& b, int k_max) {
  if (b.empty()) throw InvalidArgument("moments_from_b: empty coefficient list");
  if (k_max < 0 || static_cast<std::size_t>(k_max) > b.size()) {
    throw InvalidArgument("moments_from_b: k_max=" + std::to_string(k_max) + " needs " +
                          std::to_string(k_max) + " coefficients, got " + std::to_string(b.size()));
  }
  // (T^{2k})_00 = |T^k e_0|^2 since T is symmetric.
  std::vector<double> v(static_cast<std::size_t>(k_max) + 2, 0.0), w(v.size(), 0.0);
  v[0] = 1.0;
  std::vector<double> mu{1.0};
  auto offdiag = [&](std::size_t i) { return i < b.size() ? b[i] : 0.0; };
  for (int k = 1; k <= k_max; ++k) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      w[i] = (i > 0 ? offdiag(i - 1) * v[i - 1] : 0.0) + offdiag(i) * v[i + 1];
    }
    w.back() = offdiag(v.size() - 2) * v[v.size() - 2];
    std::swap(v, w);
    double s = 0.0;
    for (double x : v) s += x * x;
    mu.push_back(s);
  }
  return mu;
}

}  // namespace quditops
