#pragma once

// The group S_inf of permutations of N presented on the tree of interleaved
// strings h ⊕ h^-1, its computable group-operation machines, the code-set
// operations I (inverse) and M (product) on c.l.c. subtrees, and the
// automorphism groups Aut(T_d) of regular trees as computable closed
// subgroups.

#include <map>

#include "machines.hpp"
#include "strings.hpp"

namespace tdlc {

// Membership in Tree(S_inf): both strands injective and mutually inverse
// where defined.
bool sinf_member(const Str& eta);

// Eq.-(1) style finite injection determined by eta = sigma ⊕ tau:
// pairs (i,k) with sigma(i) = k or tau(k) = i.
// Throws Inconsistent if the pairs do not form an injection.
std::vector<std::pair<unsigned, unsigned>> alpha_of(const Str& eta);

// Group operation machines. op(f, g) computes the composition f o g
// (g applied first); inv swaps the strands.
MonotoneMachine sinf_op();
MonotoneMachine sinf_inv();

// Inverse and product of compact open subsets, by code sets over a c.l.c.
// subtree T of Tree(S_inf): K_{set_inverse(u)} = (K_u)^-1 and
// K_{set_product(u,v)} = K_u K_v.
StringSet set_inverse(const ClcTree& T, const StringSet& u);
StringSet set_product(const ClcTree& T, const StringSet& u, const StringSet& v);

// The d-regular tree with breadth-first vertex numbering (vertex 0 has d
// neighbours 1..d; every other vertex has d-1 children).
class RegularTree {
 public:
  explicit RegularTree(unsigned d);
  unsigned degree() const { return d_; }
  unsigned parent(unsigned v);
  unsigned depth(unsigned v);
  unsigned distance(unsigned u, unsigned v);
  std::vector<unsigned> neighbours(unsigned v);
  // Largest vertex code at depth <= k (clamped to unsigned range).
  unsigned level_end(unsigned k);

 private:
  void ensure(unsigned v);
  unsigned d_;
  std::vector<unsigned> parent_, depth_;
  std::size_t processed_ = 0;
};

// An automorphism of T_d built greedily from seed constraints: vertices are
// assigned in BFS order, each child receiving the least unused neighbour of
// its parent's image. Seeds fix the images of initial vertices; the seeded
// vertices must be distance-preserving and form a connected set containing
// the root.
class TreeAut {
 public:
  TreeAut(std::shared_ptr<RegularTree> t, std::vector<std::pair<unsigned, unsigned>> seeds);
  unsigned fwd(unsigned v);
  unsigned bwd(unsigned v);
  PathHandle path();  // the interleaved fwd ⊕ bwd path in Tree(S_inf)

 private:
  void ensure(unsigned v);
  std::shared_ptr<RegularTree> t_;
  std::map<unsigned, unsigned> fwd_, bwd_;
  unsigned next_ = 0;
};

// Tree(Aut(T_d)) as a c.l.c. tree: membership = the finite injection
// alpha_eta preserves graph distance; cones of strings of length >= 2 are
// compact, with branching bounds from distance spheres.
ClcTree aut_tree(std::shared_ptr<RegularTree> t);

}  // namespace tdlc
