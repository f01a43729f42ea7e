#pragma once

// Fourier-side propagators of w_tt + (-Δ)^σ w + (-Δ)^σ w_t = 0. Per mode with
// s = |ξ|^{2σ} the symbol solves  ŵ'' + s ŵ' + s ŵ = 0, so
//   ŵ(t) = K0(t) ŵ0 + K1(t) ŵ1,
//   K1 = (e^{λ1 t} − e^{λ2 t})/(λ1 − λ2),  K0 = (λ1 e^{λ2 t} − λ2 e^{λ1 t})/(λ1 − λ2),
// with λ1,2 = (−s ± sqrt(s² − 4s))/2. All evaluations below are real and stay
// finite through the double root s = 4.

#include <cmath>
#include <complex>
#include <utility>

#include "sigmaevo/core.hpp"

namespace sigmaevo {

struct RootPair {
  std::complex<double> lambda1;  // "+" branch
  std::complex<double> lambda2;  // "−" branch
  double rho = 0.0;
  double sigma = 1.0;
};

inline double symbol_power(double rho, double sigma) { return std::pow(rho, 2.0 * sigma); }

inline RootPair char_roots(double sigma, double rho) {
  if (!(rho >= 0.0)) throw InvalidParameters("char_roots: rho must be >= 0");
  const double s = symbol_power(rho, sigma);
  RootPair out{{0.0, 0.0}, {0.0, 0.0}, rho, sigma};
  if (s == 0.0) return out;
  if (s < 4.0) {
    const double b = 0.5 * std::sqrt(s * (4.0 - s));
    out.lambda1 = {-0.5 * s, b};
    out.lambda2 = {-0.5 * s, -b};
  } else {
    const double c = 0.5 * std::sqrt(s * (s - 4.0));
    const double l2 = -0.5 * s - c;
    out.lambda2 = {l2, 0.0};
    out.lambda1 = {s / l2, 0.0};  // Vieta, avoids cancellation in −s/2 + c
  }
  return out;
}

/// Leading-order root behaviour for small |ξ|: −|ξ|^{2σ} ± i|ξ|^σ.
inline std::pair<std::complex<double>, std::complex<double>> small_freq_reference(double rho,
                                                                                  double sigma) {
  const double s = symbol_power(rho, sigma);
  const double w = std::pow(rho, sigma);
  return {{-s, w}, {-s, -w}};
}

/// Leading-order root behaviour for large |ξ|: λ1 ~ −1, λ2 ~ −|ξ|^{2σ}.
inline std::pair<std::complex<double>, std::complex<double>> large_freq_reference(double rho,
                                                                                  double sigma) {
  return {{-1.0, 0.0}, {-symbol_power(rho, sigma), 0.0}};
}

namespace detail {

inline constexpr double series_switch = 1e-4;

// sin(x)/x
inline double sinc(double x) {
  if (std::abs(x) < series_switch) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// (1 − e^{−x})/x for x >= 0: the divided difference of the exponential.
inline double one_minus_exp_over(double x) {
  if (std::abs(x) < series_switch) return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
  return -std::expm1(-x) / x;
}

}  // namespace detail

/// Values of K0, K1 and their time derivatives at (t, ρ). Imaginary parts of
/// the conjugate-root combination cancel exactly, so values are stored real.
struct KernelEval {
  double k0 = 1.0;
  double k1 = 0.0;
  double k0dot = 0.0;
  double k1dot = 1.0;
};

/// Same as kernel_eval but parameterised by s = ρ^{2σ} directly.
inline KernelEval kernel_eval_symbol(double t, double s) {
  KernelEval k;
  if (t == 0.0) return k;
  if (s < 4.0) {
    // λ = −s/2 ± i b
    const double b = 0.5 * std::sqrt(s * (4.0 - s));
    const double damp = std::exp(-0.5 * s * t);
    const double sin_over_b = t * detail::sinc(b * t);
    const double cs = std::cos(b * t);
    k.k1 = damp * sin_over_b;
    k.k0 = damp * (cs + 0.5 * s * sin_over_b);
    k.k1dot = damp * (cs - 0.5 * s * sin_over_b);
  } else {
    const double c = 0.5 * std::sqrt(s * (s - 4.0));
    const double l2 = -0.5 * s - c;
    const double l1 = s / l2;
    const double delta = 2.0 * c;
    const double e1 = std::exp(l1 * t);
    // K1 = e^{λ1 t}(1 − e^{−Δt})/Δ
    k.k1 = e1 * t * detail::one_minus_exp_over(delta * t);
    k.k0 = e1 - l1 * k.k1;
    if (delta * t > 1.0)
      k.k1dot = (l1 * e1 - l2 * std::exp(l2 * t)) / delta;
    else
      k.k1dot = e1 + l2 * k.k1;
  }
  k.k0dot = -s * k.k1;
  return k;
}

inline KernelEval kernel_eval(double t, double rho, double sigma) {
  if (!(t >= 0.0)) throw InvalidParameters("kernel_eval: t must be >= 0");
  if (!(rho >= 0.0)) throw InvalidParameters("kernel_eval: rho must be >= 0");
  return kernel_eval_symbol(t, symbol_power(rho, sigma));
}

/// Time integrals of K1 needed by exponential Duhamel quadrature over one step h:
///   first  = ∫_0^h K1(τ) dτ            = (1 − K0(h))/s
///   second = ∫_0^h K1(h − τ) τ dτ      = (h − K1(h) − s·first)/s
struct DuhamelWeights {
  double first = 0.0;
  double second = 0.0;
};

inline DuhamelWeights duhamel_weights_symbol(double h, double s, const KernelEval& at_h) {
  DuhamelWeights w;
  if (h == 0.0) return w;
  if (s * h * h < 1e-3 && s * h < 1.0) {
    // Taylor series of K1: a0 = 0, a1 = 1, a_{j+2} = −s (a_{j+1} + a_j).
    double a_prev = 0.0, a_cur = 1.0;
    double hp = h * h;  // h^{j+1} for j = 1
    double fact = 2.0;  // (j+1)!
    double fact3 = 6.0;  // (j+2)!
    for (int j = 1; j < 40; ++j) {
      const double t1 = a_cur * hp / fact;
      const double t2 = a_cur * hp * h / fact3;
      w.first += t1;
      w.second += t2;
      if (std::abs(t1) < 1e-18 * std::abs(w.first) && std::abs(t2) < 1e-18 * std::abs(w.second)) break;
      const double a_next = -s * (a_cur + a_prev);
      a_prev = a_cur;
      a_cur = a_next;
      hp *= h;
      fact *= (j + 2);
      fact3 *= (j + 3);
    }
    return w;
  }
  w.first = (1.0 - at_h.k0) / s;
  w.second = (h - at_h.k1 - s * w.first) / s;
  return w;
}

inline DuhamelWeights duhamel_weights(double h, double rho, double sigma) {
  const double s = symbol_power(rho, sigma);
  return duhamel_weights_symbol(h, s, kernel_eval_symbol(h, s));
}

/// Smooth low-frequency cut-off: 1 on [0, ρ0], 0 on [2ρ0, ∞), cosine taper in
/// between, ρ0 = 2^{1/σ}/4 so the support stays inside the oscillatory regime.
inline double cutoff_radius(double sigma) { return std::pow(2.0, 1.0 / sigma) / 4.0; }

inline double cutoff_chi(double rho, double sigma) {
  const double r0 = cutoff_radius(sigma);
  if (rho <= r0) return 1.0;
  if (rho >= 2.0 * r0) return 0.0;
  return 0.5 * (1.0 + std::cos(pi * (rho / r0 - 1.0)));
}

}  // namespace sigmaevo
