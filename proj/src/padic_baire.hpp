#pragma once

// Baire presentations of the fields Q_p and F_p((t)) on digit trees, matrix
// trees over them, and the groups SL_n and GL_n: ring machines, determinant,
// adjugate inverse, the pruned SL_n tree, and the GL_n -> SL_{n+1} embedding.

#include <gmpxx.h>

#include "machines.hpp"
#include "strings.hpp"

namespace tdlc {

// ---- exact p-adic ball arithmetic ---------------------------------------------

// The set of x in Q_p with x == center (mod p^prec Z_p). center lies in
// Z[1/p]; prec <= some entries may carry no information (prec very negative).
struct PadicBall {
  mpq_class center = 0;
  long prec = 0;
};

PadicBall pb_add(unsigned p, const PadicBall& a, const PadicBall& b);
PadicBall pb_neg(const PadicBall& a);
PadicBall pb_mul(unsigned p, const PadicBall& a, const PadicBall& b);
// Inverse; carries no information (very negative prec) while 0 cannot be
// excluded from the ball.
PadicBall pb_inv(unsigned p, const PadicBall& a);
// p-adic valuation of a nonzero rational.
long qval(unsigned p, const mpq_class& x);

// ---- the tree Q of p-adic numbers ----------------------------------------------

// Strings r^sigma with first entry r (a natural) and digits sigma(i) < p,
// denoting p^{-r} sum_i p^i sigma(i); canonical: sigma(0) != 0 when r > 0.
ClcTree q_tree(unsigned p);

// Ball described by a Q-string prefix (empty prefix = no information).
PadicBall ball_of(unsigned p, const Str& s);
// Longest canonical Q-string prefix every member of the ball extends.
Str emit_qstr(unsigned p, const PadicBall& ball);
// Canonical string prefix of the exact point x in Z[1/p], of the given length.
Str qstr_of(unsigned p, const mpq_class& x, std::size_t len);
// Exact value denoted by a finite string (zero tail).
mpq_class qstr_value(unsigned p, const Str& s);
PathHandle q_path(unsigned p, const mpq_class& x);

// Ring machines on Q-paths: normalization (identity on paths, canonicalizes
// committed prefixes), negation, addition, multiplication.
MonotoneMachine qp_normalize(unsigned p);
MonotoneMachine qp_neg(unsigned p);
MonotoneMachine qp_add(unsigned p);
MonotoneMachine qp_mul(unsigned p);

// ---- matrix trees ---------------------------------------------------------------

// Interleaving of n^2 Q-strings; strand i occupies positions k n^2 + i.
ClcTree matrix_tree(unsigned p, unsigned n);
Str matrix_strand(const Str& s, unsigned strands, unsigned i);
// Interleaved prefix from strand strings (as long as every needed entry exists).
Str matrix_interleave(const std::vector<Str>& strands);
// Path of the exact matrix with entries in Z[1/p], row-major.
PathHandle matrix_path(unsigned p, unsigned n, const std::vector<mpq_class>& entries);

// Entry balls of a matrix-tree prefix, row-major (n^2 of them).
std::vector<PadicBall> matrix_balls(unsigned p, unsigned n, const Str& s);
// Exact determinant of a rational matrix.
mpq_class det_exact(unsigned n, const std::vector<mpq_class>& m);

MonotoneMachine matrix_mul(unsigned p, unsigned n);
MonotoneMachine matrix_det(unsigned p, unsigned n);
// Inverse of a determinant-one matrix path (its adjugate).
MonotoneMachine sl_inv(unsigned p, unsigned n);

// ---- SL_n and GL_n ---------------------------------------------------------------

// Deterministic enumeration of SL_n(Z[1/p]): the k-th matrix (row-major
// exact entries). Index 0 is the identity.
std::vector<mpq_class> sl_dense_matrix(unsigned p, unsigned n, std::size_t k);

// The pruned, dead-end-free tree of determinant-one matrix paths.
ClcTree sl_n_tree(unsigned p, unsigned n, Fuel fuel);

// GL_n(Q_p) as a closed subgroup of SL_{n+1}(Q_p): A -> diag(A, (det A)^-1).
// The presentation's tree lives inside matrix_tree(p, n+1); op and inv are
// the SL_{n+1} machines.
BairePresentation gl_embed(unsigned p, unsigned n);
// The embedding itself, as a machine from matrix_tree(p, n) paths.
MonotoneMachine gl_embed_map(unsigned p, unsigned n);

// ---- F_p((t)) --------------------------------------------------------------------

// Exact Laurent-series ball: x == center (mod t^prec F_p[[t]]), center a
// Laurent polynomial over F_p.
struct LaurentBall {
  long lo = 0;                  // exponent of digits[0]
  std::vector<unsigned> digits; // coefficient of t^(lo+i), values < p
  long prec = 0;
};

LaurentBall lb_add(unsigned p, const LaurentBall& a, const LaurentBall& b);
LaurentBall lb_neg(unsigned p, const LaurentBall& a);
LaurentBall lb_mul(unsigned p, const LaurentBall& a, const LaurentBall& b);

// Strings r^sigma denoting t^{-r} sum_i t^i sigma(i); same shape as q_tree.
ClcTree laurent_tree(unsigned p);
LaurentBall lball_of(unsigned p, const Str& s);
Str emit_lstr(unsigned p, const LaurentBall& ball);

MonotoneMachine lau_normalize(unsigned p);
MonotoneMachine lau_neg(unsigned p);
MonotoneMachine lau_add(unsigned p);
MonotoneMachine lau_mul(unsigned p);

}  // namespace tdlc
