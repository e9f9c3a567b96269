#pragma once

// Monotone (oracle-free) machines on paths of c.l.c. trees: evaluation on
// paths, modulus of uniform continuity on compact path sets, inversion of an
// injective machine, deciding image inclusions, root normalization, and
// pruning dead branches against a dense sequence of computable paths.

#include <memory>
#include <span>

#include "strings.hpp"

namespace tdlc {

using Fuel = std::uint64_t;

inline void spend(Fuel& fuel, Fuel amount = 1) {
  if (fuel < amount) throw Error(ErrKind::FuelExhausted, "fuel exhausted");
  fuel -= amount;
}

// A computable path: prefix(n) returns the first n entries.
struct PathHandle {
  std::function<Str(std::size_t)> prefix;
};

PathHandle path_from(Str head, unsigned repeat = 0);  // head followed by constant tail

// A monotone machine. step() maps input prefixes to the committed output
// prefix; committed output never shrinks and never changes as inputs extend.
// Binary machines consume the two prefixes truncated to equal length.
struct MonotoneMachine {
  int arity = 1;
  std::uint64_t mid = 0;  // identity for memoization by callers
  std::function<Str(std::span<const Str>, Fuel&)> step;
};

MonotoneMachine make_machine(int arity, std::function<Str(std::span<const Str>, Fuel&)> step);

Str run_machine(const MonotoneMachine& m, const Str& a, Fuel& fuel);
Str run_machine(const MonotoneMachine& m, const Str& a, const Str& b, Fuel& fuel);

// Evaluate on a path (or pair of paths) until >= n output entries are
// committed; throws FuelExhausted if the output does not reach length n.
Str eval_path(const MonotoneMachine& m, const PathHandle& f, std::size_t n, Fuel fuel);
Str eval_path(const MonotoneMachine& m, const PathHandle& f, const PathHandle& g, std::size_t n,
              Fuel fuel);

// Interleave two trees / deinterleave strings: position 2i+b is strand b.
ClcTree pair_tree(const ClcTree& a, const ClcTree& b);
std::pair<Str, Str> deinterleave(const Str& s);
Str interleave(const Str& a, const Str& b);
// View a binary machine as a unary machine on interleaved strings.
MonotoneMachine pair_machine(const MonotoneMachine& m);

// Least L >= |root| such that every length-L extension of root in K has
// committed output length >= n. Requires [root] compact in K.
std::size_t modulus(const MonotoneMachine& m, const ClcTree& K, const Str& root, std::size_t n,
                    Fuel& fuel);

// Decide M([u]) subseteq [w], where u codes a compact subset of K's paths and
// w codes a set of output cones.
bool image_subset(const MonotoneMachine& m, const ClcTree& K, const StringSet& u,
                  const StringSet& w, Fuel fuel);

// Inverse of an injective machine on the compact path set of K (the root cone
// of K must be compact). The returned machine throws Undefined on inputs that
// are provably not in the image, and NonInjective if injectivity fails on the
// examined depth before `inj_limit` widenings.
MonotoneMachine invert_bijection(const MonotoneMachine& m, const ClcTree& K, Fuel per_step_fuel,
                                 std::size_t inj_limit = 64);

// Root normalization: relabel the minimal compact-coned strings of T as the
// root's children, so only the root branches infinitely.
struct RootNormal {
  ClcTree tree;
  std::function<Str(std::size_t)> minimal;    // i-th minimal compact string of T
  std::function<Str(const Str&)> from_norm;   // i^tau -> sigma_i tau
  std::function<std::optional<Str>(const Str&)> to_norm;  // inverse, when sigma_i prefix exists
};
RootNormal root_normalize(const ClcTree& t, Fuel enum_fuel);

// A topological group presented on the paths of a c.l.c. tree: the group
// operation and inverse act on paths through monotone machines.
struct BairePresentation {
  ClcTree tree;
  MonotoneMachine op;   // binary: (f, g) -> f g
  MonotoneMachine inv;  // unary: f -> f^-1
};

// Enumerate strings of t in graded order (weight = length + entry sum), up to
// the given weight. Works for trees with unbounded branching.
std::vector<Str> strings_by_weight(const ClcTree& t, unsigned max_weight);

// Prune: given a subtree S of T (decidable membership, possibly with dead
// branches) and a dense family of computable paths of [S], return the
// leafless tree of strings extendible to a path of S. `witness` may shortcut
// the search (an accelerated scan of the same dense family): true = some
// dense point extends sigma, false = no path of S extends sigma, nullopt =
// fall back to the alternating search over `dense`.
ClcTree prune(const ClcTree& T, std::function<bool(const Str&)> in_S,
              std::function<PathHandle(std::size_t)> dense,
              std::function<std::optional<bool>(const Str&)> witness, Fuel fuel);

}  // namespace tdlc
