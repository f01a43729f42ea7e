#pragma once

// Exact rational re-reading of the four existence results, used as a test
// oracle for the floating-point classifier. Kept free of any sigmaevo code.

#include <gmpxx.h>

#include <random>
#include <string>

namespace oracle {

struct Tuple {
  long n;
  mpq_class s1, s2, p1, p2, q, m;
};

inline mpq_class half_floor(long n) { return mpq_class(n / 2); }

struct Constants {
  mpq_class r_inv, gamma, alpha, beta, k1, k2;
};

inline Constants constants(const Tuple& t) {
  Constants c;
  const mpq_class one(1), n(t.n);
  const mpq_class lead = 2 + half_floor(t.n);
  c.r_inv = one + one / t.q - one / t.m;
  c.gamma = c.r_inv * lead;
  c.alpha = (one / t.m - one / t.q) * (lead + n * (one / t.s2 - one / t.s1));
  c.beta = (one / t.m - one / t.q) * (lead + n * (one / t.s1 - one / t.s2));
  c.k1 = (one + c.gamma + c.alpha) / 2;
  c.k2 = (one + c.gamma + c.beta) / 2;
  return c;
}

// q/m <= p <= n/(n - 2qσ), the upper bound written multiplied out since n > 2qσ
// wherever it is used.
inline bool lower_ok(const Tuple& t, const mpq_class& p) { return t.q / t.m <= p; }
inline bool upper_ok(const Tuple& t, const mpq_class& p, const mpq_class& s) {
  const mpq_class d = t.n - 2 * t.q * s;
  return d > 0 && p * d <= t.n;
}

inline bool gn_first(const Tuple& t) {
  const mpq_class n(t.n);
  if (!lower_ok(t, t.p1) || !lower_ok(t, t.p2)) return false;
  if (n <= 2 * t.q * t.s2) return true;
  if (n <= 2 * t.q * t.s1) return upper_ok(t, t.p1, t.s2);
  if (n * (t.q - t.m) <= 2 * t.q * t.q * t.s2) return upper_ok(t, t.p1, t.s2) && upper_ok(t, t.p2, t.s1);
  return false;
}

inline bool gn_second(const Tuple& t) {
  const mpq_class n(t.n);
  if (!lower_ok(t, t.p1) || !lower_ok(t, t.p2)) return false;
  if (n <= 2 * t.q * t.s1) return true;
  if (n <= 2 * t.q * t.s2) return upper_ok(t, t.p2, t.s1);
  if (n * (t.q - t.m) <= 2 * t.q * t.q * t.s1) return upper_ok(t, t.p1, t.s2) && upper_ok(t, t.p2, t.s1);
  return false;
}

// 1 + 2mσ(1+κ)/(n − 2mσκ); `defined` is false when the denominator is <= 0.
struct Threshold {
  bool defined = false;
  mpq_class value;
};

inline Threshold threshold(const Tuple& t, const mpq_class& s, const mpq_class& k) {
  Threshold th;
  const mpq_class d = t.n - 2 * t.m * s * k;
  if (d <= 0) return th;
  th.defined = true;
  th.value = 1 + 2 * t.m * s * (1 + k) / d;
  return th;
}

// Left part of the loss condition: m(1+pb+pb(1+pa)κ) < (n/2)((pb−1)/σa + pb(pa−1)/σb).
inline bool loss_part(const Tuple& t, const mpq_class& pa, const mpq_class& pb, const mpq_class& sa,
                      const mpq_class& sb, const mpq_class& k) {
  const mpq_class lhs = t.m * (1 + pb + pb * (1 + pa) * k);
  const mpq_class rhs = mpq_class(t.n, 2) * ((pb - 1) / sa + pb * (pa - 1) / sb);
  return lhs < rhs;
}

// Returns one of Thm11B_noloss, Thm12B_noloss, Thm11_loss, Thm12_loss, none.
// No-loss results are preferred, and the first family wins a tie.
inline std::string classify(const Tuple& t) {
  const Constants c = constants(t);
  const mpq_class mx = t.s1 > t.s2 ? t.s1 : t.s2;
  const bool dim = mpq_class(t.n) > mx;
  const bool fam1 = dim && t.s1 >= t.s2 && gn_first(t);
  const bool fam2 = dim && t.s2 >= t.s1 && gn_second(t);
  const Threshold th1 = threshold(t, t.s2, c.k1);
  const Threshold th2 = threshold(t, t.s1, c.k2);
  const mpq_class lo = t.p1 < t.p2 ? t.p1 : t.p2;

  const bool b11 = fam1 && th1.defined && lo > th1.value;
  const bool b12 = fam2 && th2.defined && lo > th2.value;
  if (b11) return "Thm11B_noloss";
  if (b12) return "Thm12B_noloss";
  const bool a11 = fam1 && th1.defined && t.p1 <= th1.value && th1.value < t.p2 &&
                   loss_part(t, t.p1, t.p2, t.s1, t.s2, c.k1);
  const bool a12 = fam2 && th2.defined && t.p2 <= th2.value && th2.value < t.p1 &&
                   loss_part(t, t.p2, t.p1, t.s2, t.s1, c.k2);
  if (a11) return "Thm11_loss";
  if (a12) return "Thm12_loss";
  return "none";
}

// Random valid tuples with small-denominator rational entries. A third of them
// sit near n = 7, q = 4, m = 1 where the loss results live, and a sixth near
// n = 15, q = 8 with large exponents, where the no-loss results also
// hold with unequal orders.
class Sampler {
 public:
  explicit Sampler(unsigned seed) : rng_(seed) {}

  Tuple next() {
    Tuple t;
    const long regime = uniform(0, 5);
    if (regime == 0) {
      t.n = uniform(13, 16);
      t.q = 8;
      t.m = 1;
      t.s1 = pick({mpq_class(1), mpq_class(3, 2)});
      t.s2 = pick({mpq_class(1), mpq_class(3, 2)});
      t.p1 = frac(20, 40);
      t.p2 = frac(20, 40);
      return t;
    }
    if (regime <= 2) {
      t.n = 7;
      t.q = 4;
      t.m = pick({mpq_class(1), mpq_class(1), mpq_class(5, 4)});
      t.s1 = pick({mpq_class(1), mpq_class(1), mpq_class(1), mpq_class(3, 2), mpq_class(2)});
      t.s2 = pick({mpq_class(1), mpq_class(1), mpq_class(1), mpq_class(3, 2), mpq_class(2)});
      t.p1 = frac(4, 14);
      t.p2 = frac(4, 14);
      return t;
    }
    t.n = uniform(1, 12);
    t.q = pick({mpq_class(3, 2), mpq_class(2), mpq_class(3), mpq_class(4), mpq_class(5), mpq_class(8)});
    do {
      t.m = pick({mpq_class(1), mpq_class(1), mpq_class(5, 4), mpq_class(3, 2), mpq_class(2), mpq_class(3)});
    } while (!(t.m < t.q));
    t.s1 = pick({mpq_class(1), mpq_class(4, 3), mpq_class(3, 2), mpq_class(2), mpq_class(5, 2), mpq_class(3)});
    t.s2 = pick({mpq_class(1), mpq_class(4, 3), mpq_class(3, 2), mpq_class(2), mpq_class(5, 2), mpq_class(3)});
    t.p1 = frac(1, 16);
    t.p2 = frac(1, 16);
    return t;
  }

 private:
  long uniform(long a, long b) { return std::uniform_int_distribution<long>(a, b)(rng_); }
  mpq_class pick(std::initializer_list<mpq_class> xs) {
    auto it = xs.begin();
    std::advance(it, uniform(0, static_cast<long>(xs.size()) - 1));
    return *it;
  }
  // Rational strictly above 1 in (lo, hi] with denominator up to 6.
  mpq_class frac(long lo, long hi) {
    mpq_class x;
    do {
      const long den = uniform(1, 6);
      x = mpq_class(uniform(lo * den, hi * den), den);
      x.canonicalize();
    } while (!(x > 1));
    return x;
  }

  std::mt19937_64 rng_;
};

}  // namespace oracle
