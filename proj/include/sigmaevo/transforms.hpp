#pragma once

// Physical <-> spectral transforms with the convention
//   f̂(ξ) = ∫ f(x) e^{−i x·ξ} dx,   f(x) = (2π)^{−n} ∫ f̂(ξ) e^{i x·ξ} dξ.
//
// full mode   (n = 1, 2): uniform grid on [−L, L)^n, FFT with the phase of the
//                         left box edge folded in.
// radial mode (odd n <= 7): radial profiles on r_i = i·Δr, Δr = r_max/N,
//                         frequencies ρ_j = j·π/r_max, trapezoid quadrature of
//                         f̂(ρ) = ω_{n−1} ∫ f(r) Λ_n(rρ) r^{n−1} dr,
//                         where Λ_n(x) = (2k+1)!!·j_k(x)/x^k, k = (n−3)/2, is the
//                         normalised spherical Bessel kernel (Λ_n(0) = 1).

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sigmaevo/core.hpp"
#include "sigmaevo/multiplier_kernels.hpp"

namespace sigmaevo {

enum class GridMode { full, radial };

inline const char* to_string(GridMode m) { return m == GridMode::full ? "full" : "radial"; }

struct GridSpec {
  GridMode mode = GridMode::radial;
  int n = 3;
  int points = 512;      // samples per axis (full) or radial samples N (radial)
  double extent = 40.0;  // half-width L (full) or r_max (radial)

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline void validate(const GridSpec& g) {
  if (g.points < 2) throw InvalidParameters("grid: points must be >= 2");
  if (!(g.extent > 0.0) || !std::isfinite(g.extent)) throw InvalidParameters("grid: extent must be positive");
  if (g.mode == GridMode::full) {
    if (g.n != 1 && g.n != 2) throw InvalidParameters("grid: full mode supports n = 1 or 2");
    if ((g.points & (g.points - 1)) != 0) throw InvalidParameters("grid: full-mode points must be a power of two");
  } else {
    if (g.n < 1 || g.n > 7 || g.n % 2 == 0)
      throw InvalidParameters("grid: radial mode supports odd n <= 7");
  }
}

/// Surface area of the unit sphere in R^n, ω_{n−1} = 2π^{n/2}/Γ(n/2).
inline double sphere_area(int n) { return 2.0 * std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n); }

namespace detail {

// Λ_n(x) given sin x and cos x, so callers with an exactly reduced phase keep
// full relative accuracy at large x.
inline double radial_kernel_trig(int n, double x, double sx, double cx) {
  const int k = (n - 3) / 2;  // −1, 0, 1, 2
  if (n == 1) return cx;
  if (x < 1.0) {
    // Λ = (2k+1)!! Σ_m (−x²/2)^m / (m! (2k+2m+1)!!)
    double term = 1.0, sum = 1.0;
    const double h = -0.5 * x * x;
    for (int m = 1; m < 20; ++m) {
      term *= h / (m * (2.0 * k + 2.0 * m + 1.0));
      sum += term;
      if (std::abs(term) < 1e-18) break;
    }
    return sum;
  }
  // Upward recurrence j_{k+1} = ((2k+1)/x) j_k − j_{k−1} from j_{−1} = cos x/x, j_0 = sin x/x.
  double jm1 = cx / x;
  double j = sx / x;
  for (int i = 0; i < k; ++i) {
    const double next = (2.0 * i + 1.0) / x * j - jm1;
    jm1 = j;
    j = next;
  }
  double dfact = 1.0;  // (2k+1)!!
  for (int i = 3; i <= 2 * k + 1; i += 2) dfact *= i;
  return dfact * j / std::pow(x, k);
}

}  // namespace detail

/// Normalised spherical Bessel kernel Λ_n for odd n <= 7: the angular average
/// of e^{i x·θ} over the unit sphere of R^n evaluated at |x| = x.
inline double radial_kernel(int n, double x) {
  x = std::abs(x);
  return detail::radial_kernel_trig(n, x, std::sin(x), std::cos(x));
}

namespace detail {

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

inline FftwBuffer fftw_buffer(std::size_t n) { return FftwBuffer(fftw_alloc_complex(n)); }

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlan {
  fftw_plan plan = nullptr;
  FftwPlan() = default;
  explicit FftwPlan(fftw_plan p) : plan(p) {}
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  ~FftwPlan() {
    if (plan != nullptr) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

// Symmetric N×N matrix Λ_n(π·i·j/N), shared across grids of equal (n, N).
inline std::shared_ptr<const std::vector<double>> radial_matrix(int n, int N) {
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::weak_ptr<const std::vector<double>>> cache;
  std::lock_guard lock(mtx);
  auto& slot = cache[{n, N}];
  if (auto hit = slot.lock()) return hit;
  auto mat = std::make_shared<std::vector<double>>(static_cast<std::size_t>(N) * N);
  const double scale = pi / N;
  const long long period = 2LL * N;
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      const long long ij = static_cast<long long>(i) * j;
      const double phase = scale * static_cast<double>(ij % period);
      const double v = radial_kernel_trig(n, scale * static_cast<double>(ij), std::sin(phase), std::cos(phase));
      (*mat)[static_cast<std::size_t>(i) * N + j] = v;
      (*mat)[static_cast<std::size_t>(j) * N + i] = v;
    }
  std::shared_ptr<const std::vector<double>> out = std::move(mat);
  slot = out;
  return out;
}

}  // namespace detail

/// Immutable discretisation shared by all fields living on it.
class Grid {
 public:
  static std::shared_ptr<const Grid> make(const GridSpec& spec) {
    validate(spec);
    return std::shared_ptr<const Grid>(new Grid(spec));
  }

  const GridSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return radius_.size(); }
  int dimension() const noexcept { return spec_.n; }

  /// |x| of each physical sample.
  std::span<const double> radius() const noexcept { return radius_; }
  /// |ξ| of each spectral node.
  std::span<const double> rho() const noexcept { return rho_; }
  /// Quadrature weights W with ∫ f dx ≈ Σ W_i f_i.
  std::span<const double> physical_weights() const noexcept { return wphys_; }
  /// Quadrature weights with (2π)^{−n} ∫ g dξ ≈ Σ W_j g_j.
  std::span<const double> spectral_weights() const noexcept { return wspec_; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const {
    check_sizes(in.size(), out.size());
    if (spec_.mode == GridMode::radial) {
      std::vector<double> g(in.size());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = in[i] * wphys_[i];
      apply_radial(g, [&](std::size_t j, double v) { out[j] = {v, 0.0}; });
      return;
    }
    const std::size_t n = size();
    auto a = detail::fftw_buffer(n);
    auto b = detail::fftw_buffer(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i][0] = in[i];
      a[i][1] = 0.0;
    }
    fftw_execute_dft(fwd_->plan, a.get(), b.get());
    const double cell = wphys_[0];
    for (std::size_t k = 0; k < n; ++k)
      out[k] = std::complex<double>(b[k][0], b[k][1]) * (cell * phase_[k]);
  }

  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
    check_sizes(out.size(), in.size());
    if (spec_.mode == GridMode::radial) {
      std::vector<double> g(in.size());
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = in[j].real() * wspec_[j];
      apply_radial(g, [&](std::size_t i, double v) { out[i] = v; });
      return;
    }
    const std::size_t n = size();
    auto a = detail::fftw_buffer(n);
    auto b = detail::fftw_buffer(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k][0] = in[k].real() * phase_[k];
      a[k][1] = in[k].imag() * phase_[k];
    }
    fftw_execute_dft(bwd_->plan, a.get(), b.get());
    const double scale = 1.0 / (wphys_[0] * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) out[i] = b[i][0] * scale;
  }

  /// Signed frequency index of FFT slot k along one axis (full mode).
  int signed_index(int k) const noexcept { return k < spec_.points / 2 ? k : k - spec_.points; }

 private:
  explicit Grid(const GridSpec& spec) : spec_(spec) {
    spec.mode == GridMode::radial ? build_radial() : build_full();
  }

  void check_sizes(std::size_t a, std::size_t b) const {
    if (a != size() || b != size()) throw GridMismatch("transform: buffer size does not match grid");
  }

  void build_radial() {
    const int N = spec_.points;
    const int n = spec_.n;
    const double dr = spec_.extent / N;
    const double drho = pi / spec_.extent;
    const double omega = sphere_area(n);
    const double norm = omega / std::pow(2.0 * pi, n);
    radius_.resize(N);
    rho_.resize(N);
    wphys_.resize(N);
    wspec_.resize(N);
    for (int i = 0; i < N; ++i) {
      const double w = i == 0 ? 0.5 : 1.0;
      radius_[i] = i * dr;
      rho_[i] = i * drho;
      wphys_[i] = omega * std::pow(radius_[i], n - 1) * w * dr;
      wspec_[i] = norm * std::pow(rho_[i], n - 1) * w * drho;
    }
    matrix_ = detail::radial_matrix(n, N);
  }

  void build_full() {
    const int M = spec_.points;
    const int n = spec_.n;
    const double L = spec_.extent;
    const double dx = 2.0 * L / M;
    const double dxi = pi / L;
    const std::size_t total = n == 1 ? M : static_cast<std::size_t>(M) * M;
    radius_.resize(total);
    rho_.resize(total);
    phase_.resize(total);
    wphys_.assign(total, std::pow(dx, n));
    wspec_.assign(total, std::pow(dxi / (2.0 * pi), n));
    for (std::size_t idx = 0; idx < total; ++idx) {
      const int ix = static_cast<int>(idx % M);
      const int iy = n == 1 ? 0 : static_cast<int>(idx / M);
      const double x = -L + ix * dx;
      const double y = n == 1 ? 0.0 : -L + iy * dx;
      radius_[idx] = std::hypot(x, y);
      const int kx = signed_index(ix);
      const int ky = n == 1 ? 0 : signed_index(iy);
      rho_[idx] = dxi * std::hypot(static_cast<double>(kx), static_cast<double>(ky));
      // e^{iLξ} = (−1)^{k}
      phase_[idx] = ((kx + ky) % 2 == 0) ? 1.0 : -1.0;
    }
    auto a = detail::fftw_buffer(total);
    auto b = detail::fftw_buffer(total);
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (n == 1) {
      fwd_ = std::make_shared<detail::FftwPlan>(fftw_plan_dft_1d(M, a.get(), b.get(), FFTW_FORWARD, FFTW_ESTIMATE));
      bwd_ = std::make_shared<detail::FftwPlan>(fftw_plan_dft_1d(M, a.get(), b.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
    } else {
      fwd_ = std::make_shared<detail::FftwPlan>(fftw_plan_dft_2d(M, M, a.get(), b.get(), FFTW_FORWARD, FFTW_ESTIMATE));
      bwd_ = std::make_shared<detail::FftwPlan>(fftw_plan_dft_2d(M, M, a.get(), b.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
    }
  }

  template <class Sink>
  void apply_radial(const std::vector<double>& g, Sink&& sink) const {
    const std::size_t N = g.size();
    const double* row = matrix_->data();
    for (std::size_t j = 0; j < N; ++j, row += N) {
      double acc = 0.0;
      for (std::size_t i = 0; i < N; ++i) acc += row[i] * g[i];
      sink(j, acc);
    }
  }

  GridSpec spec_;
  std::vector<double> radius_, rho_, wphys_, wspec_, phase_;
  std::shared_ptr<const std::vector<double>> matrix_;
  std::shared_ptr<detail::FftwPlan> fwd_, bwd_;
};

using GridPtr = std::shared_ptr<const Grid>;

struct SpatialField {
  GridPtr grid;
  std::vector<double> values;

  SpatialField() = default;
  explicit SpatialField(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}
  SpatialField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size()) throw GridMismatch("field: value count does not match grid");
  }
};

struct SpectralField {
  GridPtr grid;
  std::vector<std::complex<double>> values;

  SpectralField() = default;
  explicit SpectralField(GridPtr g) : grid(std::move(g)), values(grid->size()) {}
  SpectralField(GridPtr g, std::vector<std::complex<double>> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size()) throw GridMismatch("field: value count does not match grid");
  }
};

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
  return a && b && (a == b || a->spec() == b->spec());
}

inline void require_same_grid(const GridPtr& a, const GridPtr& b, const char* where) {
  if (!same_grid(a, b)) throw GridMismatch(std::string(where) + ": fields live on different grids");
}

/// Builds a field by sampling f(|x|).
template <class F>
SpatialField sample_radial(const GridPtr& grid, F&& f) {
  SpatialField out(grid);
  const auto r = grid->radius();
  for (std::size_t i = 0; i < r.size(); ++i) out.values[i] = f(r[i]);
  return out;
}

inline SpectralField to_spectral(const SpatialField& f) {
  if (!f.grid) throw GridMismatch("to_spectral: field has no grid");
  SpectralField out(f.grid);
  f.grid->forward(f.values, out.values);
  return out;
}

inline SpatialField to_physical(const SpectralField& f) {
  if (!f.grid) throw GridMismatch("to_physical: field has no grid");
  SpatialField out(f.grid);
  f.grid->inverse(f.values, out.values);
  return out;
}

/// Pointwise product with a radial symbol m(|ξ|).
template <class Symbol>
SpectralField apply_multiplier(SpectralField f, Symbol&& symbol) {
  const auto rho = f.grid->rho();
  for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] *= symbol(rho[k]);
  return f;
}

/// |ξ|^a, with the ξ = 0 value 0 for a > 0.
inline auto riesz_symbol(double a) {
  return [a](double rho) { return a == 0.0 ? 1.0 : (rho == 0.0 ? 0.0 : std::pow(rho, a)); };
}

/// ⟨ξ⟩^a = (1 + |ξ|²)^{a/2}.
inline auto bessel_symbol(double a) {
  return [a](double rho) { return std::pow(1.0 + rho * rho, 0.5 * a); };
}

inline auto cutoff_symbol(double sigma) {
  return [sigma](double rho) { return cutoff_chi(rho, sigma); };
}

/// ‖f‖_{L^q}; q = ∞ gives the sample maximum. Scaled by max|f| so large q
/// does not underflow.
inline double lq_norm(std::span<const double> values, std::span<const double> weights, double q) {
  if (!(q >= 1.0)) throw InvalidParameters("lq_norm: exponent must be >= 1");
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0 || std::isinf(q)) return peak;
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += std::pow(std::abs(values[i]) / peak, q) * weights[i];
  return peak * std::pow(acc, 1.0 / q);
}

inline double lq_norm(const SpatialField& f, double q) {
  return lq_norm(f.values, f.grid->physical_weights(), q);
}

/// L² norm computed on the frequency side, (2π)^{−n}∫|f̂|² dξ.
inline double spectral_l2_norm(const SpectralField& f) {
  const auto w = f.grid->spectral_weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) acc += std::norm(f.values[k]) * w[k];
  return std::sqrt(acc);
}

/// ‖(w0,w1)‖ = ‖w0‖_{L^m} + ‖⟨D⟩^{2σ} w0‖_{L^q} + ‖w1‖_{L^m} + ‖w1‖_{L^q}.
inline double data_norm(const SpatialField& w0, const SpatialField& w1, double sigma_j, double q, double m) {
  require_same_grid(w0.grid, w1.grid, "data_norm");
  const auto smooth = to_physical(apply_multiplier(to_spectral(w0), bessel_symbol(2.0 * sigma_j)));
  return lq_norm(w0, m) + lq_norm(smooth, q) + lq_norm(w1, m) + lq_norm(w1, q);
}

/// max|f| over the outer 5% of the domain; a proxy for truncation error.
inline double boundary_mass(const SpatialField& f) {
  const double edge = 0.95 * f.grid->spec().extent;
  const auto r = f.grid->radius();
  double out = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    bool outer = r[i] >= edge;
    if (f.grid->spec().mode == GridMode::full) {
      // box: any coordinate in the outer shell
      const int M = f.grid->spec().points;
      const double dx = 2.0 * f.grid->spec().extent / M;
      const int ix = static_cast<int>(i % M);
      const int iy = f.grid->spec().n == 1 ? M / 2 : static_cast<int>(i / M);
      const double x = -f.grid->spec().extent + ix * dx;
      const double y = -f.grid->spec().extent + iy * dx;
      outer = std::max(std::abs(x), std::abs(y)) >= edge;
    }
    if (outer) out = std::max(out, std::abs(f.values[i]));
  }
  return out;
}

inline constexpr double boundary_mass_warning = 1e-8;

/// f(r) = (2π)^{−n} ω_{n−1} Σ_j ĝ(ρ_j) Λ_n(r ρ_j) ρ_j^{n−1} dρ_j for arbitrary
/// radial nodes; `rho_weights` are the plain 1-D quadrature weights.
inline std::vector<double> radial_inverse_quadrature(int n, std::span<const double> rho_nodes,
                                                     std::span<const double> rho_weights,
                                                     std::span<const double> values,
                                                     std::span<const double> r_nodes) {
  if (n < 1 || n > 7 || n % 2 == 0) throw InvalidParameters("radial quadrature: odd n <= 7 required");
  const double norm = sphere_area(n) / std::pow(2.0 * pi, n);
  std::vector<double> g(rho_nodes.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = norm * values[j] * std::pow(rho_nodes[j], n - 1) * rho_weights[j];
  std::vector<double> out(r_nodes.size(), 0.0);
  for (std::size_t i = 0; i < r_nodes.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g[j] != 0.0) acc += g[j] * radial_kernel(n, r_nodes[i] * rho_nodes[j]);
    out[i] = acc;
  }
  return out;
}

}  // namespace sigmaevo
