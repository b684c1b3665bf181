#pragma once

// Packed 128-bit keys for Weyl strings.
//
// Every string stored in an OperatorVector is encoded into a single
// unsigned 128-bit integer. A local factor X^v Z^w is the digit v*d + w.
//
//   finite lattices        dense digits at the linear site index
//   infinite chain         dense digits at the offset from the anchor site
//   infinite plane         sparse records (dx, dy + 8, digit) sorted by site,
//                          anchored at the lexicographically smallest site
//
// Translation-invariant strings are anchored so that each translation class
// has exactly one key.

#include <bit>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "quditops/error.hpp"
#include "quditops/lattice.hpp"
#include "quditops/weyl_string.hpp"

namespace quditops {

using PackedKey = unsigned __int128;

inline constexpr int kKeyBits = 128;

/// Deterministic 64-bit mix of a key; fixes the storage order of vectors.
inline std::uint64_t key_hash(PackedKey key) noexcept {
  auto mix = [](std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  };
  const auto lo = static_cast<std::uint64_t>(key);
  const auto hi = static_cast<std::uint64_t>(key >> 64);
  return mix(lo ^ mix(hi + 0x9e3779b97f4a7c15ULL));
}

struct PackedKeyHash {
  std::size_t operator()(PackedKey key) const noexcept { return key_hash(key); }
};

/// Translates `p` so its smallest site (x first, then y) sits at the origin.
/// Returns the anchored string and the applied shift.
inline std::pair<WeylString, Site> canonical_anchor(const WeylString& p) {
  if (p.is_identity()) throw InvalidArgument("canonical_anchor: identity string has no anchor");
  const Site shift = Site{0, 0} - p.factors().front().site;
  return {p.translated(shift), shift};
}

class OperatorSpace {
 public:
  static constexpr int kCoordBits = 4;
  static constexpr int kDyBias = 8;

  OperatorSpace(int d, LatticeSpec lattice) : d_(d), lattice_(lattice) {
    if (d < 2 || d > 255) throw InvalidArgument("qudit dimension must be in [2, 255]");
    lattice_.validate();
    digit_bits_ = std::bit_width(static_cast<unsigned>(d * d - 1));
    digit_mask_ = (PackedKey{1} << digit_bits_) - 1;
    if (sparse()) {
      record_bits_ = 2 * kCoordBits + digit_bits_;
      capacity_ = kKeyBits / record_bits_;
    } else {
      capacity_ = kKeyBits / digit_bits_;
      if (lattice_.finite() && lattice_.site_count() > capacity_) {
        throw CapacityExceeded("lattice has " + std::to_string(lattice_.site_count()) +
                               " sites but a packed key holds " + std::to_string(capacity_) +
                               " at d=" + std::to_string(d));
      }
    }
  }

  static std::shared_ptr<const OperatorSpace> make(int d, LatticeSpec lattice) {
    return std::make_shared<const OperatorSpace>(d, lattice);
  }

  int d() const { return d_; }
  const LatticeSpec& lattice() const { return lattice_; }
  bool translation_invariant() const { return !lattice_.finite(); }
  /// True for the infinite plane, whose keys are sparse site records.
  bool sparse() const { return translation_invariant() && lattice_.dimension == 2; }
  int digit_bits() const { return digit_bits_; }
  PackedKey digit_mask() const { return digit_mask_; }
  int record_bits() const { return record_bits_; }
  /// Number of positions (dense keys) or records (sparse keys) a key holds.
  int capacity() const { return capacity_; }

  int digit_of(int v, int w) const { return v * d_ + w; }

  int digit_at(PackedKey key, int position) const {
    return static_cast<int>((key >> (position * digit_bits_)) & digit_mask_);
  }

  PackedKey encode(const WeylString& p) const {
    if (p.d() != d_) throw DimensionMismatch("string dimension does not match operator space");
    if (p.is_identity()) {
      if (translation_invariant()) {
        throw InvalidArgument("identity string has no anchor in translation-invariant mode");
      }
      return 0;
    }
    if (lattice_.finite()) return encode_finite(p);
    const WeylString anchored = canonical_anchor(p).first;
    return lattice_.dimension == 1 ? encode_chain(anchored) : encode_plane(anchored);
  }

  WeylString decode(PackedKey key) const {
    std::vector<Factor> factors;
    if (sparse()) {
      for (int r = 0; r < capacity_ && key != 0; ++r) {
        const auto rec = static_cast<unsigned>(key & record_mask());
        key >>= record_bits_;
        factors.push_back(record_factor(rec));
      }
    } else {
      for (int pos = 0; key != 0; ++pos) {
        const int digit = static_cast<int>(key & digit_mask_);
        key >>= digit_bits_;
        if (digit == 0) continue;
        Site s = lattice_.finite() ? lattice_.site_at(pos) : Site{pos, 0};
        factors.push_back({s, static_cast<std::uint8_t>(digit / d_),
                           static_cast<std::uint8_t>(digit % d_)});
      }
    }
    return WeylString(d_, std::move(factors));
  }

  // Sparse record helpers, shared with the planar Liouvillian kernel.
  PackedKey record_mask() const { return (PackedKey{1} << record_bits_) - 1; }

  Factor record_factor(unsigned rec) const {
    const int digit = static_cast<int>(rec & ((1u << digit_bits_) - 1));
    const int dy = static_cast<int>((rec >> digit_bits_) & ((1u << kCoordBits) - 1)) - kDyBias;
    const int dx = static_cast<int>(rec >> (digit_bits_ + kCoordBits));
    return {Site{dx, dy}, static_cast<std::uint8_t>(digit / d_), static_cast<std::uint8_t>(digit % d_)};
  }

  bool record_fits(Site s) const {
    return s.x >= 0 && s.x < (1 << kCoordBits) && s.y >= -kDyBias &&
           s.y < (1 << kCoordBits) - kDyBias;
  }

  unsigned make_record(Site s, int digit) const {
    return (static_cast<unsigned>(s.x) << (digit_bits_ + kCoordBits)) |
           (static_cast<unsigned>(s.y + kDyBias) << digit_bits_) | static_cast<unsigned>(digit);
  }

  friend bool operator==(const OperatorSpace& a, const OperatorSpace& b) {
    return a.d_ == b.d_ && a.lattice_ == b.lattice_;
  }

 private:
  PackedKey encode_finite(const WeylString& p) const {
    PackedKey key = 0;
    for (const auto& f : p.factors()) {
      const int pos = lattice_.linear_index(f.site);
      const PackedKey shifted = PackedKey(digit_of(f.v, f.w)) << (pos * digit_bits_);
      if ((key >> (pos * digit_bits_)) & digit_mask_) {
        throw InvalidArgument("two factors reduce to the same lattice site");
      }
      key |= shifted;
    }
    return key;
  }

  PackedKey encode_chain(const WeylString& anchored) const {
    PackedKey key = 0;
    for (const auto& f : anchored.factors()) {
      if (f.site.y != 0) throw InvalidArgument("planar site on a one-dimensional lattice");
      if (f.site.x >= capacity_) {
        throw CapacityExceeded("string span exceeds packed key capacity of " +
                               std::to_string(capacity_) + " sites");
      }
      key |= PackedKey(digit_of(f.v, f.w)) << (f.site.x * digit_bits_);
    }
    return key;
  }

  PackedKey encode_plane(const WeylString& anchored) const {
    if (static_cast<int>(anchored.weight()) > capacity_) {
      throw CapacityExceeded("string weight exceeds packed key capacity of " +
                             std::to_string(capacity_) + " sites");
    }
    PackedKey key = 0;
    int r = 0;
    for (const auto& f : anchored.factors()) {
      if (!record_fits(f.site)) throw CapacityExceeded("string extent exceeds packed key range");
      key |= PackedKey(make_record(f.site, digit_of(f.v, f.w))) << (r * record_bits_);
      ++r;
    }
    return key;
  }

  int d_;
  LatticeSpec lattice_;
  int digit_bits_ = 0;
  PackedKey digit_mask_ = 0;
  int record_bits_ = 0;
  int capacity_ = 0;
};

using SpacePtr = std::shared_ptr<const OperatorSpace>;

}  // namespace quditops
