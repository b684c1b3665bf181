#pragma once

// Matrix-free application of L = [H, .] to sparse operator vectors.
//
// Hamiltonian terms are grouped by support. For every group a table maps the
// local digits of an input string on that support to the list of output
// digits and coefficients sum_h c_h (omega^xi(h,P) - omega^xi(P,h)); zero
// commutators are decided on integer phases while the table is built. The
// kernels then only read digits, look up the table and write digits.
//
// Output is accumulated per hash bucket: a bucket collects the images whose
// key hash falls in one slice of the 64-bit range, in input order. The
// number of buckets bounds accumulator memory and never changes the result.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "quditops/error.hpp"
#include "quditops/operator_vector.hpp"
#include "quditops/term_list.hpp"

namespace quditops {

struct ApplyOptions {
  unsigned threads = 1;
  /// Number of hash buckets (power of two); 0 picks one from accumulator_bytes.
  std::size_t buckets = 0;
  std::size_t accumulator_bytes = std::size_t{1} << 30;
  /// Expected output size used to pick the bucket count; 0 means 8 x input.
  std::size_t expected_entries = 0;
  /// Abort with BudgetExceeded once the stored output passes this count.
  std::size_t entry_limit = static_cast<std::size_t>(-1);
};

/// Norm and support of L A + beta B computed without storing it.
struct ResidualNorm {
  double norm = 0.0;
  std::size_t support = 0;
};

class Liouvillian {
 public:
  struct Outcome {
    PackedKey placed = 0;  // output digits at the group's positions (offset 0 based)
    Complex coeff{};
  };

  struct Group {
    std::vector<Site> offsets;
    std::vector<int> positions;  // linear positions (finite) or x offsets (chain)
    PackedKey mask = 0;          // digit mask over positions
    int extent = 0;              // largest x offset (chain)
    std::vector<std::uint32_t> start;
    std::vector<Outcome> outcomes;
  };

  explicit Liouvillian(const TermList& h, bool require_hermitian = false) : space_(h.space_ptr()) {
    if (require_hermitian && !h.hermitian()) {
      throw InvalidArgument("Liouvillian: Hamiltonian is not Hermitian");
    }
    build_groups(h);
  }

  const OperatorSpace& space() const { return *space_; }
  std::span<const Group> groups() const { return groups_; }

  /// Calls emit(key, coefficient) for every nonzero [h, P] with h a term (or,
  /// in translation-invariant mode, a translate of a unit-cell term).
  template <typename Emit>
  void for_each_image(PackedKey key, Complex amp, Emit&& emit) const {
    if (!space_->translation_invariant()) {
      finite_images(key, amp, emit);
    } else if (space_->sparse()) {
      plane_images(key, amp, emit);
    } else {
      chain_images(key, amp, emit);
    }
  }

  OperatorVector apply(const OperatorVector& a, const ApplyOptions& opts = {}) const {
    return apply_axpy(a, Complex{}, nullptr, opts);
  }

  /// L A + beta B with the same bucketed accumulation as apply().
  OperatorVector apply_axpy(const OperatorVector& a, Complex beta, const OperatorVector* b,
                            const ApplyOptions& opts = {}) const {
    check(a, b);
    const std::size_t nb = bucket_count(a, opts);
    std::vector<std::vector<Entry>> parts(nb);
    std::atomic<std::size_t> stored{0};
    run_buckets(nb, opts.threads, [&](std::size_t bucket) {
      parts[bucket] = accumulate(a, beta, b, bucket, nb);
      if (stored.fetch_add(parts[bucket].size()) + parts[bucket].size() > opts.entry_limit) {
        throw BudgetExceeded("Liouvillian output exceeds the entry limit");
      }
    });
    std::vector<Entry> out;
    out.reserve(stored.load());
    for (auto& part : parts) {
      out.insert(out.end(), part.begin(), part.end());
      std::vector<Entry>().swap(part);
    }
    return OperatorVector::from_sorted(space_, std::move(out));
  }

  /// Norm and pruned support of L A + beta B. Only amplitude magnitudes are
  /// kept between buckets, so the debris cut matches apply_axpy().
  ResidualNorm residual_norm(const OperatorVector& a, Complex beta, const OperatorVector* b,
                             const ApplyOptions& opts = {}) const {
    check(a, b);
    const std::size_t nb = bucket_count(a, opts);
    std::vector<std::vector<double>> magnitudes(nb);
    run_buckets(nb, opts.threads, [&](std::size_t bucket) {
      auto part = accumulate(a, beta, b, bucket, nb);
      auto& mags = magnitudes[bucket];
      mags.reserve(part.size());
      for (const auto& e : part) mags.push_back(std::abs(e.amp));
    });
    double max_mag = 0.0;
    for (const auto& mags : magnitudes) {
      for (double m : mags) max_mag = std::max(max_mag, m);
    }
    const double cut = kPruneRelative * max_mag;
    ResidualNorm r;
    double total = 0.0;
    for (const auto& mags : magnitudes) {
      for (double m : mags) {
        if (m < cut || m == 0.0) continue;
        total += m * m;
        ++r.support;
      }
    }
    r.norm = std::sqrt(total);
    return r;
  }

 private:
  void check(const OperatorVector& a, const OperatorVector* b) const {
    if (!(a.space() == *space_)) {
      throw DimensionMismatch("operator vector and Hamiltonian live in different spaces");
    }
    if (b) a.require_compatible(*b);
  }

  std::size_t bucket_count(const OperatorVector& a, const ApplyOptions& opts) const {
    std::size_t nb = opts.buckets;
    if (nb == 0) {
      const std::size_t expected = opts.expected_entries ? opts.expected_entries : 8 * a.size();
      // flat_hash_map slot plus growth slack
      const double bytes = 72.0 * static_cast<double>(expected);
      nb = 1;
      while (static_cast<double>(nb) * static_cast<double>(opts.accumulator_bytes) < bytes) nb *= 2;
    }
    if (!std::has_single_bit(nb)) throw InvalidArgument("bucket count must be a power of two");
    const std::size_t t = std::bit_ceil(std::max<std::size_t>(opts.threads, 1));
    return std::max(nb, std::min<std::size_t>(t, 1024));
  }

  template <typename Work>
  static void run_buckets(std::size_t nb, unsigned threads, Work&& work) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(nb)));
    if (threads == 1) {
      for (std::size_t bucket = 0; bucket < nb; ++bucket) work(bucket);
      return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t bucket = t; bucket < nb; bucket += threads) work(bucket);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<Entry> accumulate(const OperatorVector& a, Complex beta, const OperatorVector* b,
                                std::size_t bucket, std::size_t nb) const {
    const int shift = 64 - std::countr_zero(nb);
    auto in_bucket = [&](std::uint64_t h) { return nb == 1 || (h >> shift) == bucket; };
    absl::flat_hash_map<PackedKey, Complex, PackedKeyHash> acc;
    for (const auto& e : a.entries()) {
      for_each_image(e.key, e.amp, [&](PackedKey k, Complex c) {
        if (in_bucket(key_hash(k))) acc[k] += c;
      });
    }
    if (b && beta != Complex{}) {
      for (const auto& e : b->entries()) {
        if (in_bucket(key_hash(e.key))) acc[e.key] += beta * e.amp;
      }
    }
    std::vector<Entry> out;
    out.reserve(acc.size());
    for (const auto& [k, v] : acc) out.push_back({k, v});
    acc = {};
    std::sort(out.begin(), out.end(), EntryOrder{});
    return out;
  }

  // ---------------------------------------------------------------- tables

  void build_groups(const TermList& h) {
    const int d = space_->d();
    const int bits = space_->digit_bits();
    const std::uint64_t radix = static_cast<std::uint64_t>(d) * d;
    std::map<std::vector<Site>, std::vector<PhasedString>> by_support;
    for (const auto& t : h.terms()) {
      std::vector<Site> support;
      for (const auto& f : t.string.factors()) support.push_back(f.site);
      by_support[support].push_back(t);
    }
    for (auto& [support, terms] : by_support) {
      Group g;
      g.offsets = support;
      const std::size_t k = support.size();
      std::uint64_t patterns = 1;
      for (std::size_t j = 0; j < k; ++j) {
        patterns *= radix;
        if (patterns > (std::uint64_t{1} << 22)) {
          throw UnsupportedMode("Hamiltonian term support too large for the commutator table");
        }
      }
      for (const Site& s : support) {
        if (space_->sparse()) {
          g.positions.push_back(0);
        } else if (space_->translation_invariant()) {
          if (s.y != 0) throw InvalidArgument("planar term on a one-dimensional lattice");
          g.positions.push_back(s.x);
          g.extent = std::max(g.extent, s.x);
        } else {
          g.positions.push_back(space_->lattice().linear_index(s));
        }
      }
      if (!space_->sparse()) {
        for (int p : g.positions) {
          if (p >= space_->capacity()) throw CapacityExceeded("term extends past key capacity");
          g.mask |= space_->digit_mask() << (p * bits);
        }
      }
      g.start.reserve(patterns + 1);
      g.start.push_back(0);
      std::vector<std::pair<std::uint64_t, Complex>> row;
      for (std::uint64_t pat = 0; pat < patterns; ++pat) {
        std::vector<Factor> local;
        std::uint64_t rest = pat;
        for (std::size_t j = 0; j < k; ++j) {
          const int digit = static_cast<int>(rest % radix);
          rest /= radix;
          if (digit) {
            local.push_back({support[j], static_cast<std::uint8_t>(digit / d),
                             static_cast<std::uint8_t>(digit % d)});
          }
        }
        const WeylString p(d, std::move(local));
        row.clear();
        for (const auto& term : terms) {
          auto c = commutator(term.string, p);
          if (!c) continue;
          std::uint64_t out_pat = 0, scale = 1;
          for (std::size_t j = 0; j < k; ++j) {
            auto e = c->string.at(support[j]);
            out_pat += static_cast<std::uint64_t>(space_->digit_of(e.v, e.w)) * scale;
            scale *= radix;
          }
          const Complex coeff = term.coeff * c->coeff();
          auto it = std::find_if(row.begin(), row.end(), [&](const auto& r) { return r.first == out_pat; });
          if (it == row.end()) {
            row.emplace_back(out_pat, coeff);
          } else {
            it->second += coeff;
          }
        }
        for (const auto& [out_pat, coeff] : row) {
          if (coeff == Complex{}) continue;
          Outcome o;
          o.coeff = coeff;
          std::uint64_t rest_out = out_pat;
          for (std::size_t j = 0; j < k; ++j) {
            const auto digit = static_cast<unsigned>(rest_out % radix);
            rest_out /= radix;
            if (space_->sparse()) {
              // sparse outcomes keep the digits packed by group index
              o.placed |= PackedKey(digit) << (j * bits);
            } else {
              o.placed |= PackedKey(digit) << (g.positions[j] * bits);
            }
          }
          g.outcomes.push_back(o);
        }
        g.start.push_back(static_cast<std::uint32_t>(g.outcomes.size()));
      }
      groups_.push_back(std::move(g));
    }
    radix_ = radix;
  }

  // --------------------------------------------------------------- kernels

  template <typename Emit>
  void finite_images(PackedKey key, Complex amp, Emit& emit) const {
    const int bits = space_->digit_bits();
    for (const auto& g : groups_) {
      if ((key & g.mask) == 0) continue;
      std::uint64_t pat = 0, scale = 1;
      for (int p : g.positions) {
        pat += static_cast<std::uint64_t>((key >> (p * bits)) & space_->digit_mask()) * scale;
        scale *= radix_;
      }
      const PackedKey base = key & ~g.mask;
      for (auto i = g.start[pat]; i < g.start[pat + 1]; ++i) {
        emit(base | g.outcomes[i].placed, amp * g.outcomes[i].coeff);
      }
    }
  }

  template <typename Emit>
  void chain_images(PackedKey key, Complex amp, Emit& emit) const {
    const int bits = space_->digit_bits();
    const int cap = space_->capacity();
    const int used_bits = kKeyBits - (static_cast<std::uint64_t>(key >> 64)
                                          ? std::countl_zero(static_cast<std::uint64_t>(key >> 64))
                                          : 64 + std::countl_zero(static_cast<std::uint64_t>(key)));
    const int span = (used_bits + bits - 1) / bits;
    const PackedKey dmask = space_->digit_mask();
    for (const auto& g : groups_) {
      for (int t = -g.extent; t < span; ++t) {
        std::uint64_t pat = 0, scale = 1;
        for (int off : g.positions) {
          const int pos = t + off;
          if (pos >= 0 && pos < span) {
            pat += static_cast<std::uint64_t>((key >> (pos * bits)) & dmask) * scale;
          }
          scale *= radix_;
        }
        const auto lo = g.start[pat], hi = g.start[pat + 1];
        if (lo == hi) continue;
        const int sh = t < 0 ? -t : 0;
        if (std::max(span, t + g.extent + 1) + sh > cap) {
          throw CapacityExceeded("operator support exceeds packed chain capacity of " +
                                 std::to_string(cap) + " sites");
        }
        const int place = (t + sh) * bits;
        const PackedKey base = (key << (sh * bits)) & ~(g.mask << place);
        for (auto i = lo; i < hi; ++i) {
          PackedKey out = base | (g.outcomes[i].placed << place);
          const auto low = static_cast<std::uint64_t>(out);
          const int tz = low ? std::countr_zero(low)
                             : 64 + std::countr_zero(static_cast<std::uint64_t>(out >> 64));
          out >>= (tz / bits) * bits;
          emit(out, amp * g.outcomes[i].coeff);
        }
      }
    }
  }

  template <typename Emit>
  void plane_images(PackedKey key, Complex amp, Emit& emit) const {
    const int bits = space_->digit_bits();
    const int rb = space_->record_bits();
    const int cap = space_->capacity();
    const unsigned dmask = (1u << bits) - 1;
    Site sites[64];
    int digits[64];
    int n = 0;
    for (PackedKey rest = key; rest != 0 && n < cap; rest >>= rb, ++n) {
      const auto rec = static_cast<unsigned>(rest & space_->record_mask());
      const Factor f = space_->record_factor(rec);
      sites[n] = f.site;
      digits[n] = static_cast<int>(rec & dmask);
    }
    auto digit_at = [&](Site s) {
      for (int i = 0; i < n; ++i) {
        if (sites[i] == s) return digits[i];
      }
      return 0;
    };
    Site shifts[256];
    for (const auto& g : groups_) {
      const int k = static_cast<int>(g.offsets.size());
      int ns = 0;
      for (int i = 0; i < n; ++i) {
        for (const Site& o : g.offsets) {
          const Site t = sites[i] - o;
          if (std::find(shifts, shifts + ns, t) == shifts + ns) shifts[ns++] = t;
        }
      }
      for (int si = 0; si < ns; ++si) {
        const Site t = shifts[si];
        std::uint64_t pat = 0, scale = 1;
        for (const Site& o : g.offsets) {
          pat += static_cast<std::uint64_t>(digit_at(t + o)) * scale;
          scale *= radix_;
        }
        for (auto i = g.start[pat]; i < g.start[pat + 1]; ++i) {
          Site out_sites[80];
          int out_digits[80];
          int m = 0;
          for (int j = 0; j < n; ++j) {
            bool covered = false;
            for (const Site& o : g.offsets) covered |= (t + o) == sites[j];
            if (!covered) {
              out_sites[m] = sites[j];
              out_digits[m++] = digits[j];
            }
          }
          for (int j = 0; j < k; ++j) {
            const int dgt = static_cast<int>((g.outcomes[i].placed >> (j * bits)) & dmask);
            if (dgt) {
              out_sites[m] = t + g.offsets[j];
              out_digits[m++] = dgt;
            }
          }
          if (m == 0) continue;
          if (m > cap) throw CapacityExceeded("operator weight exceeds planar key capacity");
          // insertion sort by site, then anchor at the first site
          for (int a = 1; a < m; ++a) {
            for (int b = a; b > 0 && out_sites[b] < out_sites[b - 1]; --b) {
              std::swap(out_sites[b], out_sites[b - 1]);
              std::swap(out_digits[b], out_digits[b - 1]);
            }
          }
          const Site anchor = out_sites[0];
          PackedKey out = 0;
          for (int j = 0; j < m; ++j) {
            const Site rel = out_sites[j] - anchor;
            if (!space_->record_fits(rel)) {
              throw CapacityExceeded("operator extent exceeds planar key range");
            }
            out |= PackedKey(space_->make_record(rel, out_digits[j])) << (j * rb);
          }
          emit(out, amp * g.outcomes[i].coeff);
        }
      }
    }
  }

  SpacePtr space_;
  std::vector<Group> groups_;
  std::uint64_t radix_ = 4;
};

inline OperatorVector apply_liouvillian(const TermList& h, const OperatorVector& a,
                                        const ApplyOptions& opts = {}) {
  return Liouvillian(h).apply(a, opts);
}

}  // namespace quditops
