#pragma once

// Meet groupoids of compact open cosets: abstract interface plus the generic
// operations (axiom checking, Haar values from the index primitive, coset
// searches, possible values of a partial automorphism, extendibility of
// finite injections).

#include <optional>

#include "strings.hpp"
#include "machines.hpp"

namespace tdlc {

// Element handle. Handle 0 is always the empty element.
using Elt = std::uint32_t;
constexpr Elt kEmpty = 0;

class MeetGroupoid {
 public:
  virtual ~MeetGroupoid() = default;

  // Partial composition; nullopt when undefined. Composition with the empty
  // element is undefined.
  virtual std::optional<Elt> compose(Elt a, Elt b) = 0;
  virtual Elt inverse(Elt a) = 0;  // inverse(0) = 0
  virtual Elt meet(Elt a, Elt b) = 0;
  // |U : U cap V| for subgroups U, V (the Haar primitive).
  virtual mpz_class index(Elt u, Elt v) = 0;
  // Deterministic enumeration of the domain; at(0) = 0 (the empty element).
  virtual Elt at(std::size_t n) = 0;
  virtual std::string print(Elt a) = 0;

  // Derived operations.
  bool subset(Elt a, Elt b);                 // A subseteq B
  Elt left_unit(Elt a);                      // A A^-1
  Elt right_unit(Elt a);                     // A^-1 A
  bool is_subgroup(Elt a);
  bool is_left_coset_of(Elt a, Elt u);       // A^-1 A = U
  bool is_right_coset_of(Elt a, Elt u);      // A A^-1 = U
};

// Haar measure from the index primitive, normalized by mu(U0) = 1:
// for A : U -> V, mu(A) = mu(V) = |V : U0 cap V| / |U0 : U0 cap V|.
mpq_class haar(MeetGroupoid& w, Elt a, Elt u0);

struct AxiomReport {
  bool ok = true;
  std::string detail;
};
// Check the meet-groupoid axioms on the first n enumerated elements.
AxiomReport check_axioms(MeetGroupoid& w, std::size_t n);

// All left cosets of V inside U (V, U subgroups, V subseteq U), found by
// scanning the enumeration; there are exactly |U : V| of them.
std::vector<Elt> left_cosets_within(MeetGroupoid& w, Elt v, Elt u, Fuel fuel);

// The meet computed by the general recipe (search for the largest
// C : U0 cap U1 -> V0 cap V1 below both), for cross-checking the primitive.
std::optional<Elt> meet_via_sides(MeetGroupoid& w, Elt a0, Elt a1, Fuel fuel);

// The possible values p(F) over all automorphisms p of the
// groupoid induced by left translation, given that p(U) = L (U a subgroup, L
// a left coset of U). Finitely many; found by coset searches.
std::vector<Elt> possible_values(MeetGroupoid& w, Elt u, Elt l, Elt f, Fuel fuel);

// Extendibility of a finite injection {A_i -> B_i} to such an automorphism:
// every B_i A_i^-1 must be defined and their meet nonempty. Pairs with both
// sides empty are trivially consistent; mixed empty pairs are not extendible.
// Returns the meet witness (the coset of possible translators) or nullopt.
std::optional<Elt> extendibility_witness(MeetGroupoid& w,
                                         const std::vector<std::pair<Elt, Elt>>& pairs);
inline bool extendible(MeetGroupoid& w, const std::vector<std::pair<Elt, Elt>>& pairs) {
  bool any = false;
  for (auto& [a, b] : pairs) {
    if (a == kEmpty || b == kEmpty) {
      if (a != b) return false;
    } else {
      any = true;
    }
  }
  if (!any) return true;  // only empty -> empty constraints
  return extendibility_witness(w, pairs).has_value();
}

}  // namespace tdlc
