#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "uwsr/errors.hpp"

namespace uwsr {

// Daubechies-4 (four vanishing moments) orthogonal scaling filter.
struct QmfFilter {
  std::array<double, 8> h{};

  double scaling(int k) const { return (k >= 0 && k < 8) ? h[static_cast<std::size_t>(k)] : 0.0; }

  // g(k) = (-1)^k h(1-k); nonzero for k in [-6, 1].
  double wavelet(int k) const { return ((k % 2 == 0) ? 1.0 : -1.0) * scaling(1 - k); }
};

inline QmfFilter build_filter() {
  return QmfFilter{{0.2303778133088964, 0.7148465705529154, 0.6308807679298587,
                    -0.02798376941685985, -0.18703481171909309, 0.030841381835560764,
                    0.0328830116668852, -0.010597401785069032}};
}

enum class WaveletKind { Phi, Psi, PsiIntegral };

// Tabulation of phi, psi and the antiderivative of psi on [0, 7] with
// `resolution` samples per unit. psi is the integer translate supported on
// [0, 7].
class WaveletTable {
public:
  static constexpr int kSupport = 7;

  WaveletTable(int resolution, std::vector<double> phi, std::vector<double> psi, int iterations)
      : resolution_(resolution), phi_(std::move(phi)), psi_(std::move(psi)), iterations_(iterations) {
    const auto n = static_cast<std::size_t>(kSupport * resolution_ + 1);
    if (phi_.size() != n || psi_.size() != n) throw std::invalid_argument("wavelet table size mismatch");
    psi_integral_ = cumulative_trapezoid(psi_, resolution_);
  }

  int resolution() const noexcept { return resolution_; }
  int cascade_iterations() const noexcept { return iterations_; }
  const std::vector<double>& phi() const noexcept { return phi_; }
  const std::vector<double>& psi() const noexcept { return psi_; }
  const std::vector<double>& psi_integral() const noexcept { return psi_integral_; }

  const std::vector<double>& values(WaveletKind kind) const noexcept {
    switch (kind) {
      case WaveletKind::Phi: return phi_;
      case WaveletKind::Psi: return psi_;
      default: return psi_integral_;
    }
  }

  // Standard-level value f(t), linearly interpolated.
  double sample(WaveletKind kind, double t) const noexcept {
    const auto& v = values(kind);
    const double u = t * resolution_;
    if (!(u > 0.0)) return 0.0;
    const double last = static_cast<double>(v.size() - 1);
    if (u >= last) return kind == WaveletKind::PsiIntegral ? v.back() : 0.0;
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    return v[i] + f * (v[i + 1] - v[i]);
  }

  // 2^{j/2} f(2^j x - k) for phi/psi, 2^{-j/2} Psi(2^j x - k) for the antiderivative.
  double evaluate(WaveletKind kind, int j, std::int64_t k, double x) const noexcept {
    const double s = std::ldexp(1.0, j);
    const double t = s * x - static_cast<double>(k);
    const double amp = kind == WaveletKind::PsiIntegral ? 1.0 / std::sqrt(s) : std::sqrt(s);
    return amp * sample(kind, t);
  }

  static std::vector<double> cumulative_trapezoid(const std::vector<double>& f, int resolution) {
    std::vector<double> out(f.size(), 0.0);
    const double half_step = 0.5 / resolution;
    for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + half_step * (f[i - 1] + f[i]);
    return out;
  }

private:
  int resolution_;
  std::vector<double> phi_;
  std::vector<double> psi_;
  std::vector<double> psi_integral_;
  int iterations_;
};

// Cascade algorithm: integer samples of phi from the fixed point of the
// two-scale operator, then exact dyadic refinement up to `resolution`.
inline WaveletTable cascade(const QmfFilter& filter, int resolution, int max_iterations = 500,
                            double tolerance = 1e-14) {
  if (resolution < 64 || (resolution & (resolution - 1)) != 0)
    throw std::invalid_argument("grid resolution must be a power of two >= 64");

  constexpr int n_int = WaveletTable::kSupport + 1;
  const double sqrt2 = std::sqrt(2.0);
  std::vector<double> v(n_int, 1.0 / n_int);
  int iterations = 0;
  bool converged = false;
  while (iterations < max_iterations) {
    std::vector<double> next(n_int, 0.0);
    for (int n = 0; n < n_int; ++n)
      for (int m = 0; m < n_int; ++m) next[n] += sqrt2 * filter.scaling(2 * n - m) * v[m];
    double sum = 0.0;
    for (double x : next) sum += x;
    if (!std::isfinite(sum) || std::abs(sum) < 1e-300) break;
    double diff = 0.0;
    for (int n = 0; n < n_int; ++n) {
      next[n] /= sum;
      diff = std::max(diff, std::abs(next[n] - v[n]));
    }
    v = std::move(next);
    ++iterations;
    if (diff < tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericError("cascade did not converge; defective filter");

  std::vector<double> phi = v;
  for (int step = 1; step < resolution; step *= 2) {
    const int n_new = WaveletTable::kSupport * 2 * step + 1;
    std::vector<double> next(static_cast<std::size_t>(n_new), 0.0);
    for (int idx = 0; idx < n_new; ++idx) {
      if (idx % 2 == 0) {
        next[idx] = phi[idx / 2];
        continue;
      }
      double s = 0.0;
      for (int k = 0; k < 8; ++k) {
        const int src = idx - k * step;
        if (src >= 0 && src < static_cast<int>(phi.size())) s += filter.h[k] * phi[src];
      }
      next[idx] = sqrt2 * s;
    }
    phi = std::move(next);
  }

  const int n = WaveletTable::kSupport * resolution + 1;
  std::vector<double> psi(static_cast<std::size_t>(n), 0.0);
  for (int k = -6; k <= 1; ++k) {
    const double g = sqrt2 * filter.wavelet(k);
    for (int i = 0; i < n; ++i) {
      const int src = 2 * i - (k + 6) * resolution;
      if (src >= 0 && src < n) psi[i] += g * phi[src];
    }
  }
  return WaveletTable(resolution, std::move(phi), std::move(psi), iterations);
}

}  // namespace uwsr
