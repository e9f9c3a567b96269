#pragma once

// Concrete meet groupoids of compact open cosets:
//   W(Q_p)       cosets D_{r,a} = preimage of a under pi_r : Q_p -> Q_p/p^r Z_p,
//                a in the Pruefer group Z[1/p]/Z;
//   W(Z_p)       the restriction to cosets contained in U_0 = Z_p;
//   W(Z x| Q_p)  cosets g^z D_{r,a} of the scale group (g acts by division by p);
//   W(F_p((t)))  the Laurent-series analogue, values in the carry-free group
//                C_p^(omega) (finite digit vectors mod p).

#include <map>

#include "groupoid.hpp"

namespace tdlc {

// n-th integer in the fixed order 0, -1, 1, -2, 2, ...
mpz_class zigzag(std::size_t n);

// Pruefer group Z[1/p]/Z: rationals in [0,1) with p-power denominator.
mpq_class prufer_frac(const mpq_class& q);                  // reduce mod 1
unsigned prufer_level(const mpq_class& a, unsigned p);      // least m with p^m a = 0
mpq_class prufer_shift(const mpq_class& a, const mpz_class& k, unsigned p);  // p^k a mod 1 (k >= 0)

class QpGroupoid final : public MeetGroupoid {
 public:
  struct Coset {
    mpz_class r;
    mpq_class a;  // in [0,1), denominator a power of p
    bool operator==(const Coset& o) const { return r == o.r && a == o.a; }
    bool operator<(const Coset& o) const { return r != o.r ? r < o.r : a < o.a; }
  };

  explicit QpGroupoid(unsigned p, bool restrict_to_zp = false);

  unsigned p() const { return p_; }
  Elt coset(const mpz_class& r, const mpq_class& a);  // D_{r,a}
  const Coset& data(Elt e) const;
  Elt parse(const std::string& text);  // "D[p=2;r=-1;a=3/4]"

  std::optional<Elt> compose(Elt a, Elt b) override;
  Elt inverse(Elt a) override;
  Elt meet(Elt a, Elt b) override;
  mpz_class index(Elt u, Elt v) override;
  Elt at(std::size_t n) override;
  std::string print(Elt a) override;

 private:
  bool valid(const Coset& c) const;
  unsigned p_;
  bool zp_;
  std::vector<Coset> table_;
  std::map<Coset, Elt> intern_;
  std::vector<Elt> enum_;
  unsigned enum_weight_ = 0;
};

// The restriction of W(Q_p) to cosets of Z_p.
inline QpGroupoid zp_groupoid(unsigned p) { return QpGroupoid(p, true); }

class SemidirectGroupoid final : public MeetGroupoid {
 public:
  struct Coset {
    mpz_class z;
    mpz_class r;
    mpq_class a;
    bool operator==(const Coset& o) const { return z == o.z && r == o.r && a == o.a; }
    bool operator<(const Coset& o) const {
      if (z != o.z) return z < o.z;
      if (r != o.r) return r < o.r;
      return a < o.a;
    }
  };

  explicit SemidirectGroupoid(unsigned p);

  unsigned p() const { return p_; }
  Elt coset(const mpz_class& z, const mpz_class& r, const mpq_class& a);  // g^z D_{r,a}
  const Coset& data(Elt e) const;
  Elt parse(const std::string& text);  // "E[p=2;z=2;r=0;a=1/2]"

  std::optional<Elt> compose(Elt a, Elt b) override;
  Elt inverse(Elt a) override;
  Elt meet(Elt a, Elt b) override;
  mpz_class index(Elt u, Elt v) override;
  Elt at(std::size_t n) override;
  std::string print(Elt a) override;

 private:
  unsigned p_;
  std::vector<Coset> table_;
  std::map<Coset, Elt> intern_;
  std::vector<Elt> enum_;
  unsigned enum_weight_ = 0;
};

// Carry-free digit vectors: d[i] is the coefficient of t^-(i+1), last digit
// nonzero (canonical form).
using LaurentVal = std::vector<unsigned>;
LaurentVal laurent_add(const LaurentVal& x, const LaurentVal& y, unsigned p);
LaurentVal laurent_neg(const LaurentVal& x, unsigned p);
LaurentVal laurent_shift(const LaurentVal& x, const mpz_class& k);  // t^k x, k >= 0

class LaurentGroupoid final : public MeetGroupoid {
 public:
  struct Coset {
    mpz_class r;
    LaurentVal a;
    bool operator==(const Coset& o) const { return r == o.r && a == o.a; }
    bool operator<(const Coset& o) const { return r != o.r ? r < o.r : a < o.a; }
  };

  explicit LaurentGroupoid(unsigned p);

  unsigned p() const { return p_; }
  Elt coset(const mpz_class& r, const LaurentVal& a);
  const Coset& data(Elt e) const;
  Elt parse(const std::string& text);  // "L[p=2;r=1;a=1,0,1]"

  std::optional<Elt> compose(Elt a, Elt b) override;
  Elt inverse(Elt a) override;
  Elt meet(Elt a, Elt b) override;
  mpz_class index(Elt u, Elt v) override;
  Elt at(std::size_t n) override;
  std::string print(Elt a) override;

 private:
  unsigned p_;
  std::vector<Coset> table_;
  std::map<Coset, Elt> intern_;
  std::vector<Elt> enum_;
  unsigned enum_weight_ = 0;
};

}  // namespace tdlc
