#pragma once

// The two effective conversions between Baire presentations and Haar
// computable meet groupoids: wcomp (the groupoid of compact open cosets of a
// Baire presentation, with its deterministic coset enumeration) and gcomp
// (the closed subgroup of S_infinity acting on a groupoid by translations),
// plus the isomorphism phi between a group and gcomp(wcomp(group)), the
// computable action on cosets, and inversion of bijective homomorphisms.

#include <map>
#include <memory>

#include "groupoid.hpp"
#include "machines.hpp"

namespace tdlc {

// ---- products of path tuples ----------------------------------------------------

// k paths interleaved flat: position j carries strand j mod k.
ClcTree tuple_tree(const ClcTree& t, unsigned k);
std::vector<Str> tuple_strands(const Str& s, unsigned k);
// The word machine f_1^e1 ... f_k^ek (e_i = -1 when invert[i]) folded with the
// group operation, as a unary machine on the k-strand interleaving.
MonotoneMachine word_machine(const BairePresentation& g, const std::vector<bool>& invert);
// Decide X_1^e1 ... X_k^ek subseteq Y (all codes of compact sets of g's tree).
bool product_subset(const BairePresentation& g, const std::vector<StringSet>& parts,
                    const std::vector<bool>& invert, const StringSet& target, Fuel fuel);

// ---- canonical code enumeration ---------------------------------------------------

// weight(sigma) = |sigma| + sum of entries; weight(set) = sum (weight+1).
unsigned code_weight(const StringSet& u);
// All nonempty canonical antichains of compact-coned strings with weight <= w,
// sorted by (weight, graded set order). Deterministic.
std::vector<StringSet> canonical_codes_by_weight(const ClcTree& t, unsigned max_weight);

// ---- wcomp -----------------------------------------------------------------------

// The meet groupoid of compact open cosets of a Baire presentation. Element n
// is the n-th coset A_n in the dovetailing enumeration (A_0 = empty): stage s
// certifies single-cone subgroup candidates {sigma} of weight <= s via the
// inclusion tests U*U <= U and U^-1 <= U, and certifies single-cone left
// cosets B = {tau} of each known subgroup U, for pairs with combined weight
// <= s, via B*U <= B and B^-1*B <= U. All inclusions are exact machine-image
// checks, so the enumeration is deterministic and reproducible.
class WcompGroupoid final : public MeetGroupoid {
 public:
  WcompGroupoid(BairePresentation g, Fuel step_fuel);

  const BairePresentation& presentation() const { return g_; }
  // Canonical code of A_n (empty set for n = 0).
  StringSet code(Elt n);
  // Enumeration index of a canonical coset code (extends the enumeration).
  Elt elt_of(const StringSet& canonical);
  // Number of cosets enumerated so far (grows lazily).
  std::size_t enumerated() const { return elems_.size(); }

  std::optional<Elt> compose(Elt a, Elt b) override;
  Elt inverse(Elt a) override;
  Elt meet(Elt a, Elt b) override;
  mpz_class index(Elt u, Elt v) override;
  Elt at(std::size_t n) override;
  std::string print(Elt a) override;

  // The subgroup units computed directly from the codes (A = g V and A = U g).
  Elt right_unit_elt(Elt a);
  Elt left_unit_elt(Elt a);

 private:
  bool incl(const std::vector<Elt>& parts, const std::vector<bool>& invert, Elt target);
  bool incl_codes(const std::vector<StringSet>& parts, const std::vector<bool>& invert,
                  const StringSet& target);
  void advance_stage();
  void ensure(std::size_t n);
  Elt intern(const StringSet& canonical, bool subgroup);
  void extend_pool(unsigned cap);

  BairePresentation g_;
  Fuel fuel_;
  unsigned stage_ = 0;
  std::vector<StringSet> elems_;  // elems_[0] = empty code
  std::map<StringSet, Elt> intern_;
  std::vector<Str> pool_;              // compact-coned tree strings, graded order
  std::vector<unsigned> pool_wt_;      // weight of each pool string
  unsigned pool_cap_ = 0;              // weight up to which pool_ is complete
  std::size_t sub_scan_ = 0;           // next pool index for subgroup candidates
  std::vector<Elt> subgroups_;         // enumerated subgroup elements
  std::vector<std::size_t> sub_ptr_;   // per subgroup: next pool index to certify
  std::map<Elt, std::vector<Elt>> cosets_of_;  // subgroup -> its enumerated left cosets
  std::map<std::string, bool> incl_cache_;
  std::map<std::pair<Elt, Elt>, std::optional<Elt>> compose_cache_;
  std::map<Elt, Elt> inverse_cache_, runit_cache_, lunit_cache_;
  std::map<std::pair<Elt, Elt>, Elt> meet_cache_;
};

// ---- gcomp -----------------------------------------------------------------------

// Designated-subgroup-first numbering of a groupoid: number 0 denotes the
// first enumerated subgroup, which trades places with the empty element's
// original successor position; all other numbers follow enumeration order.
class GroupoidView {
 public:
  explicit GroupoidView(std::shared_ptr<MeetGroupoid> w, Fuel fuel);
  MeetGroupoid& groupoid() { return *w_; }
  Elt handle(unsigned number);
  unsigned number(Elt h);

 private:
  std::size_t swap(std::size_t i) const;
  std::shared_ptr<MeetGroupoid> w_;
  Fuel fuel_;
  std::size_t j0_;
  std::map<Elt, unsigned> rev_;
  std::size_t scanned_ = 0;
};

// The group of meet-groupoid automorphisms induced by translations, presented
// on interleaved permutation strings over the view numbering. Paths p encode
// p oplus p^-1; membership is extendibility of the coded finite injection;
// cones of strings of length >= 2 are compact with bounds from the possible
// value sets at the designated subgroup.
BairePresentation gcomp(std::shared_ptr<MeetGroupoid> w, Fuel step_fuel);
BairePresentation gcomp(std::shared_ptr<MeetGroupoid> w, std::shared_ptr<GroupoidView> view,
                        Fuel step_fuel);

// ---- the isomorphism, the action, and inversion of homomorphisms -------------------

// The unique coset B (of the same subgroup A is a left coset of) with
// [sigma] A subseteq B for some prefix sigma of g; i.e. B = gA.
Elt act(WcompGroupoid& w, const PathHandle& g, Elt a, Fuel fuel);
// Right action A g = (g^-1 A^-1)^-1.
Elt act_right(WcompGroupoid& w, const PathHandle& g, Elt a, Fuel fuel);

// Length-n prefix of Phi(g) in gcomp(wcomp(G)) under the given view: position
// 2i carries the number of g A_i, position 2i+1 the number of g^-1 A_i.
Str phi_prefix(WcompGroupoid& w, GroupoidView& view, const PathHandle& g, std::size_t n,
               Fuel fuel);

// A path through the tree extending sigma: always take the least child label.
PathHandle canonical_path(const ClcTree& t, const Str& sigma, Fuel fuel);
// The subtree of t spanned by the cones of a compact code.
ClcTree restrict_tree(const ClcTree& t, const StringSet& code);

// Inverse of a computable bijective homomorphism psi : G -> H, assembled from
// local inverses on the coset cover a_i U of G: inputs are dispatched to the
// local inverse of the coset whose psi-image contains them.
MonotoneMachine invert_homomorphism(std::shared_ptr<WcompGroupoid> wg,
                                    std::shared_ptr<WcompGroupoid> wh,
                                    const MonotoneMachine& psi, Fuel fuel);

}  // namespace tdlc
