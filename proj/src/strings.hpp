#pragma once

// Finite strings over the naturals, computable leafless (c.l.c.) trees, and
// the algebra of compact-open code sets (finite antichains of cone roots).

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace tdlc {

using Str = std::vector<unsigned>;

enum class ErrKind {
  Parse,
  FuelExhausted,
  Undefined,      // partial operation applied outside its domain
  NonInjective,
  BadArgument,
  Inconsistent,
};

struct Error : std::runtime_error {
  ErrKind kind;
  Error(ErrKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// ---- basic string utilities -------------------------------------------------

bool is_prefix(const Str& a, const Str& b);          // a is a prefix of b
bool comparable(const Str& a, const Str& b);         // one is a prefix of the other
bool shortlex_less(const Str& a, const Str& b);
std::string show_str(const Str& s);                  // "[0,3,1]"
Str parse_fstr(const std::string& text);             // parse "[0,3,1]"; throws Error(Parse)

inline Str concat(Str a, const Str& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}
inline Str take(const Str& a, std::size_t n) {
  return Str(a.begin(), a.begin() + std::min(n, a.size()));
}

// ---- computable leafless trees ----------------------------------------------

// A c.l.c. tree: decidable membership, decidable compactness of cones, and a
// branching bound: whenever [sigma] is a compact cone and rho extends sigma in
// the tree, rho(i) <= bound(sigma, i).
struct ClcTree {
  std::function<bool(const Str&)> member;
  std::function<bool(const Str&)> compact;
  std::function<unsigned(const Str&, std::size_t)> bound;
};

ClcTree full_tree(unsigned arity);  // the full arity-branching tree, all cones compact

// Labels i with sigma^i in the tree. Requires [sigma] compact (else the search
// space is unbounded).
std::vector<unsigned> child_labels(const ClcTree& t, const Str& sigma);

// All extensions of sigma in the tree of the given length (>= |sigma|).
// Requires [sigma] compact.
std::vector<Str> expand_to(const ClcTree& t, const Str& sigma, std::size_t len);

// ---- strong indices ---------------------------------------------------------

// h(w) = prod_{i<|w|} p_i^(w_i + 1), with h(empty) = 1.
mpz_class string_code(const Str& w);
// n_u = sum_{w in u} 2^h(w).
mpz_class strong_index(const std::vector<Str>& u);

// ---- code sets ---------------------------------------------------------------

// A finite set of strings of a tree, denoting the union of their cones.
// Members are kept sorted in shortlex order with no duplicates.
struct StringSet {
  std::vector<Str> members;

  StringSet() = default;
  explicit StringSet(std::vector<Str> m);
  bool empty() const { return members.empty(); }
  bool operator==(const StringSet& o) const { return members == o.members; }
  bool operator<(const StringSet& o) const;  // graded order used for enumerations
};

std::string show_set(const StringSet& u);

// The unique prefix-free antichain denoting the same union of cones:
// drop strings with a proper prefix present, then merge complete sibling
// families into their parent (when the parent's cone is compact), to fixpoint.
StringSet canonicalize(const ClcTree& t, const StringSet& u);

StringSet cone_union(const ClcTree& t, const StringSet& u, const StringSet& v);
StringSet cone_intersect(const ClcTree& t, const StringSet& u, const StringSet& v);
// Decide union-of-cones(u) subseteq union-of-cones(v). Strings of u must have
// compact cones (or be covered outright).
bool cone_subset(const ClcTree& t, const StringSet& u, const StringSet& v);

}  // namespace tdlc
