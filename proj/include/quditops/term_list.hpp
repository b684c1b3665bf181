#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "quditops/operator_space.hpp"
#include "quditops/operator_vector.hpp"
#include "quditops/weyl_string.hpp"

namespace quditops {

/// A Hamiltonian as a list of phased strings. In translation-invariant mode
/// the list is one unit cell, implicitly summed over all translations.
class TermList {
 public:
  /// Identity terms are dropped: a constant shift commutes with everything.
  TermList(SpacePtr space, std::vector<PhasedString> terms) : space_(std::move(space)) {
    if (!space_) throw InvalidArgument("TermList needs an operator space");
    for (auto& t : terms) {
      if (t.string.d() != space_->d()) throw DimensionMismatch("term dimension mismatch");
      if (t.coeff == Complex{}) throw InvalidArgument("TermList: zero coefficient");
      if (t.string.is_identity()) continue;
      if (space_->translation_invariant()) {
        t.string = canonical_anchor(t.string).first;
      } else {
        std::vector<Factor> reduced(t.string.factors().begin(), t.string.factors().end());
        for (auto& f : reduced) f.site = space_->lattice().reduce(f.site);
        t.string = WeylString(space_->d(), std::move(reduced));
      }
      terms_.push_back(std::move(t));
    }
    hermitian_ = check_hermitian();
  }

  const OperatorSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::span<const PhasedString> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool hermitian() const { return hermitian_; }

  /// The terms summed into one vector (anchored per unit cell when translation invariant).
  OperatorVector as_vector() const { return OperatorVector::from_terms(space_, terms_); }

  /// Same terms plus the adjoint of every term.
  TermList with_hermitian_closure() const {
    std::vector<PhasedString> all = terms_;
    for (const auto& t : terms_) {
      auto adj = adjoint(t.string);
      all.push_back({std::conj(t.coeff) * adj.coeff(), adj.string});
    }
    return TermList(space_, std::move(all));
  }

 private:
  // The summed term set must equal its adjoint with conjugated coefficients.
  bool check_hermitian() const {
    const OperatorVector h = as_vector();
    const OperatorVector diff = axpy(-1.0, adjoint(h), h);
    const double scale = std::max(h.max_abs(), 1e-300);
    for (const auto& e : diff.entries()) {
      if (std::abs(e.amp) > 1e-12 * scale) return false;
    }
    return true;
  }

  SpacePtr space_;
  std::vector<PhasedString> terms_;
  bool hermitian_ = true;
};

}  // namespace quditops
