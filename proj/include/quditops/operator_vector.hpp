#pragma once

// Sparse complex combinations of Weyl strings.
//
// Entries are stored in a vector sorted by (key_hash(key), key). The order is
// fixed by the key alone, so merges, inner products and accumulation are
// reproducible bit for bit, and any power-of-two split of the hash range is a
// contiguous slice of the vector.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "quditops/error.hpp"
#include "quditops/operator_space.hpp"
#include "quditops/weyl_string.hpp"

namespace quditops {

/// Relative threshold below which amplitudes are treated as cancellation debris.
inline constexpr double kPruneRelative = 1e-14;

struct Entry {
  PackedKey key = 0;
  Complex amp{};

  friend bool operator==(const Entry&, const Entry&) = default;
};

struct EntryOrder {
  bool operator()(const Entry& a, const Entry& b) const {
    const auto ha = key_hash(a.key);
    const auto hb = key_hash(b.key);
    return ha != hb ? ha < hb : a.key < b.key;
  }
};

inline bool key_before(PackedKey a, PackedKey b) {
  const auto ha = key_hash(a);
  const auto hb = key_hash(b);
  return ha != hb ? ha < hb : a < b;
}

class OperatorVector {
 public:
  explicit OperatorVector(SpacePtr space) : space_(std::move(space)) {
    if (!space_) throw InvalidArgument("OperatorVector needs an operator space");
  }

  /// Sums the given terms. Identity strings are rejected in translation
  /// invariant mode (they have no anchor).
  static OperatorVector from_terms(SpacePtr space, std::span<const PhasedString> terms) {
    std::vector<Entry> entries;
    entries.reserve(terms.size());
    for (const auto& t : terms) entries.push_back({space->encode(t.string), t.coeff});
    return from_unsorted(std::move(space), std::move(entries));
  }

  /// Sorts entries, adds amplitudes of repeated keys in input order, prunes.
  static OperatorVector from_unsorted(SpacePtr space, std::vector<Entry> entries) {
    std::stable_sort(entries.begin(), entries.end(), EntryOrder{});
    std::vector<Entry> merged;
    merged.reserve(entries.size());
    for (const auto& e : entries) {
      if (!merged.empty() && merged.back().key == e.key) {
        merged.back().amp += e.amp;
      } else {
        merged.push_back(e);
      }
    }
    return from_sorted(std::move(space), std::move(merged));
  }

  /// Adopts entries already in storage order with unique keys, then prunes.
  static OperatorVector from_sorted(SpacePtr space, std::vector<Entry> entries) {
    OperatorVector out(std::move(space));
    out.entries_ = std::move(entries);
    out.prune();
    return out;
  }

  const OperatorSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  int d() const { return space_->d(); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const Entry> entries() const { return entries_; }

  Complex amplitude(const WeylString& p) const {
    const PackedKey key = space_->encode(p);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, PackedKey k) { return key_before(e.key, k); });
    return (it != entries_.end() && it->key == key) ? it->amp : Complex{};
  }

  /// Decoded (coefficient, string) pairs in storage order.
  std::vector<PhasedString> terms() const {
    std::vector<PhasedString> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back({e.amp, space_->decode(e.key)});
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, std::abs(e.amp));
    return m;
  }

  void scale(Complex factor) {
    for (auto& e : entries_) e.amp *= factor;
    prune();
  }

  OperatorVector scaled(Complex factor) const {
    OperatorVector out = *this;
    out.scale(factor);
    return out;
  }

  /// Drops amplitudes below kPruneRelative times the largest magnitude.
  void prune() {
    const double cut = kPruneRelative * max_abs();
    std::erase_if(entries_, [cut](const Entry& e) { return std::abs(e.amp) < cut || e.amp == Complex{}; });
  }

  void require_compatible(const OperatorVector& other) const {
    if (space_ != other.space_ && !(*space_ == *other.space_)) {
      if (space_->d() != other.space_->d()) {
        throw DimensionMismatch("operator vectors have different qudit dimensions");
      }
      throw DimensionMismatch("operator vectors live in different lattice modes");
    }
  }

  std::vector<Entry>& mutable_entries() { return entries_; }

 private:
  SpacePtr space_;
  std::vector<Entry> entries_;
};

/// (A|B) = tr(A^dagger B) / dim H. Weyl strings are orthonormal, so this is
/// the sparse dot product; in translation-invariant mode it is the per-site
/// density of the implicit translation sums.
inline Complex inner(const OperatorVector& a, const OperatorVector& b) {
  a.require_compatible(b);
  auto ea = a.entries();
  auto eb = b.entries();
  Complex acc{};
  std::size_t i = 0, j = 0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i].key == eb[j].key) {
      acc += std::conj(ea[i].amp) * eb[j].amp;
      ++i;
      ++j;
    } else if (key_before(ea[i].key, eb[j].key)) {
      ++i;
    } else {
      ++j;
    }
  }
  return acc;
}

inline double norm(const OperatorVector& a) {
  double acc = 0.0;
  for (const auto& e : a.entries()) acc += std::norm(e.amp);
  return std::sqrt(acc);
}

/// Returns B + alpha A, pruned.
inline OperatorVector axpy(Complex alpha, const OperatorVector& a, const OperatorVector& b) {
  a.require_compatible(b);
  auto ea = a.entries();
  auto eb = b.entries();
  std::vector<Entry> out;
  out.reserve(ea.size() + eb.size());
  std::size_t i = 0, j = 0;
  while (i < ea.size() || j < eb.size()) {
    if (j == eb.size() || (i < ea.size() && key_before(ea[i].key, eb[j].key))) {
      out.push_back({ea[i].key, alpha * ea[i].amp});
      ++i;
    } else if (i == ea.size() || key_before(eb[j].key, ea[i].key)) {
      out.push_back(eb[j]);
      ++j;
    } else {
      out.push_back({eb[j].key, eb[j].amp + alpha * ea[i].amp});
      ++i;
      ++j;
    }
  }
  return OperatorVector::from_sorted(b.space_ptr(), std::move(out));
}

/// Each string mapped to its adjoint, coefficients conjugated.
inline OperatorVector adjoint(const OperatorVector& a) {
  std::vector<Entry> out;
  out.reserve(a.size());
  for (const auto& e : a.entries()) {
    auto adj = adjoint(a.space().decode(e.key));
    out.push_back({a.space().encode(adj.string), std::conj(e.amp) * adj.coeff()});
  }
  return OperatorVector::from_unsorted(a.space_ptr(), std::move(out));
}

}  // namespace quditops
