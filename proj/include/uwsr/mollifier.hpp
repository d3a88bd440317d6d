#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "uwsr/wavelet.hpp"

namespace uwsr {

// Unnormalized bump exp(1/(x^2-1)) on (-1, 1).
inline double bump(double x) noexcept {
  const double x2 = x * x;
  return x2 < 1.0 ? std::exp(1.0 / (x2 - 1.0)) : 0.0;
}

// Integral of the bump over [-1, 1]. The integrand is flat to all orders at
// the endpoints, so the trapezoid rule converges spectrally.
inline double bump_mass() {
  static const double mass = [] {
    constexpr int n = 1 << 14;
    double s = 0.0;
    for (int i = 1; i < n; ++i) s += bump(-1.0 + 2.0 * i / n);
    return s * 2.0 / n;
  }();
  return mass;
}

// K_eps(x) = K(x/eps)/eps with K the unit-mass bump, plus its weights
// against the piecewise-linear hat functions of the grid m/resolution, so a
// weighted sum of table samples is the exact convolution of the interpolant.
class MollifierKernel {
public:
  MollifierKernel(double width, int resolution) : width_(width), resolution_(resolution) {
    if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("mollifier width must be positive");
    if (resolution <= 0) throw std::invalid_argument("resolution must be positive");
    half_ = static_cast<int>(std::ceil(width * resolution));
    weights_.assign(static_cast<std::size_t>(2 * half_ + 1), 0.0);
    double total = 0.0;
    for (int m = 0; m <= half_; ++m) {
      const double w = hat_weight(m);
      weights_[half_ + m] = w;
      weights_[half_ - m] = w;
      total += m == 0 ? w : 2.0 * w;
    }
    for (double& w : weights_) w /= total;
  }
  double width() const noexcept { return width_; }
  int resolution() const noexcept { return resolution_; }
  double normalization() const { return bump_mass(); }

  double operator()(double x) const noexcept { return bump(x / width_) / (width_ * bump_mass()); }

  // Discrete weights for offsets m = -half()..half().
  int half() const noexcept { return half_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

private:
  double width_;
  int resolution_;
  int half_ = 0;
  std::vector<double> weights_;

  // Integral of K_eps(y) (1 - |R y - m|) over the hat's support.
  double hat_weight(int m) const {
    static constexpr std::array<double, 8> x{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                             -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                             0.7966664774136267,  0.9602898564975363};
    static constexpr std::array<double, 8> w{0.1012285362903763, 0.2223810344533745, 0.3137066238773981,
                                             0.3626837833783620, 0.3626837833783620, 0.3137066238773981,
                                             0.2223810344533745, 0.1012285362903763};
    constexpr int sub = 8;
    const double h = 1.0 / (resolution_ * sub);
    double s = 0.0;
    for (int side = -1; side <= 1; side += 2)
      for (int p = 0; p < sub; ++p) {
        const double a = (m + side * p / static_cast<double>(sub)) / resolution_;
        const double mid = a + 0.5 * side * h;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double y = mid + 0.5 * h * x[i];
          s += w[i] * (*this)(y) * std::max(0.0, 1.0 - std::abs(resolution_ * y - m));
        }
      }
    return 0.5 * h * s;
  }
};

inline MollifierKernel build_kernel(double width, int resolution = 1024) { return {width, resolution}; }

enum class MollifiedKind { PhiBar, PsiBar, PsiBarIntegral, PhiBarIntegral };

// Standard-level mollified phi, psi and their antiderivatives for one width.
// Arrays cover t in [-half/R, 7 + half/R]; antiderivatives keep their final
// value as a constant tail. Mollified samples are smooth on the grid scale and
// use four-point cubic interpolation; width 0 keeps the linear raw tables.
class MollifiedTable {
public:
  MollifiedTable(const WaveletTable& table, double width) : width_(width), resolution_(table.resolution()) {
    if (width < 0.0 || !std::isfinite(width)) throw std::invalid_argument("mollifier width must be nonnegative");
    if (width >= 1.0) throw std::invalid_argument("mollifier width must be < 1 in base-level coordinates");
    if (width == 0.0) {
      offset_ = 0;
      phi_ = table.phi();
      psi_ = table.psi();
      psi_int_ = WaveletTable::cumulative_trapezoid(psi_, resolution_);
      phi_int_ = WaveletTable::cumulative_trapezoid(phi_, resolution_);
    } else {
      cubic_ = true;
      const MollifierKernel kernel(width, resolution_);
      offset_ = kernel.half();
      phi_ = convolve(table.phi(), kernel.weights());
      psi_ = convolve(table.psi(), kernel.weights());
      psi_int_ = cumulative_cubic(psi_, resolution_);
      phi_int_ = cumulative_cubic(phi_, resolution_);
    }
  }

  double width() const noexcept { return width_; }
  int resolution() const noexcept { return resolution_; }
  int offset() const noexcept { return offset_; }
  bool cubic() const noexcept { return cubic_; }
  double lower() const noexcept { return -static_cast<double>(offset_) / resolution_; }
  double upper() const noexcept { return WaveletTable::kSupport + static_cast<double>(offset_) / resolution_; }

  const std::vector<double>& values(MollifiedKind kind) const noexcept {
    switch (kind) {
      case MollifiedKind::PhiBar: return phi_;
      case MollifiedKind::PsiBar: return psi_;
      case MollifiedKind::PsiBarIntegral: return psi_int_;
      default: return phi_int_;
    }
  }

  double tail(MollifiedKind kind) const noexcept {
    if (kind == MollifiedKind::PsiBarIntegral) return psi_int_.back();
    if (kind == MollifiedKind::PhiBarIntegral) return phi_int_.back();
    return 0.0;
  }

  double sample(MollifiedKind kind, double t) const noexcept {
    const auto& v = values(kind);
    const double u = t * resolution_ + offset_;
    if (!(u > 0.0)) return 0.0;
    const double last = static_cast<double>(v.size() - 1);
    if (u >= last) return tail(kind);
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    if (!cubic_) return v[i] + f * (v[i + 1] - v[i]);
    const double tl = tail(kind);
    const double vm = i > 0 ? v[i - 1] : 0.0;
    const double vp = i + 2 < v.size() ? v[i + 2] : tl;
    return -f * (f - 1.0) * (f - 2.0) / 6.0 * vm + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * v[i] -
           (f + 1.0) * f * (f - 2.0) / 2.0 * v[i + 1] + (f + 1.0) * f * (f - 1.0) / 6.0 * vp;
  }

  // Running integral of the four-point cubic interpolant; samples beyond the
  // ends are zero.
  static std::vector<double> cumulative_cubic(const std::vector<double>& f, int resolution) {
    std::vector<double> out(f.size(), 0.0);
    auto at = [&](std::ptrdiff_t i) {
      return (i < 0 || i >= static_cast<std::ptrdiff_t>(f.size())) ? 0.0 : f[static_cast<std::size_t>(i)];
    };
    const double scale = 1.0 / (24.0 * resolution);
    for (std::size_t i = 1; i < f.size(); ++i) {
      const auto c = static_cast<std::ptrdiff_t>(i) - 1;
      out[i] = out[i - 1] + scale * (-at(c - 1) + 13.0 * at(c) + 13.0 * at(c + 1) - at(c + 2));
    }
    return out;
  }

private:
  static std::vector<double> convolve(const std::vector<double>& f, const std::vector<double>& w) {
    std::vector<double> out(f.size() + w.size() - 1, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] == 0.0) continue;
      for (std::size_t m = 0; m < w.size(); ++m) out[i + m] += f[i] * w[m];
    }
    return out;
  }

  double width_;
  int resolution_;
  int offset_ = 0;
  bool cubic_ = false;
  std::vector<double> phi_, psi_, psi_int_, phi_int_;
};

inline MollifiedTable mollify_base(const WaveletTable& table, const MollifierKernel& kernel) {
  if (kernel.resolution() != table.resolution())
    throw std::invalid_argument("kernel and table resolutions differ");
  return MollifiedTable(table, kernel.width());
}

// One mollified table per level j, of width 2^j eps, evaluated through the
// rescaling identity.
class MollifiedBasis {
public:
  MollifiedBasis(std::shared_ptr<const WaveletTable> table, double epsilon, int levels)
      : table_(std::move(table)), epsilon_(epsilon) {
    if (!table_) throw std::invalid_argument("null wavelet table");
    if (epsilon < 0.0 || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be nonnegative");
    if (levels < 1) levels = 1;
    levels_.reserve(static_cast<std::size_t>(levels));
    for (int j = 0; j < levels; ++j) levels_.emplace_back(*table_, std::ldexp(epsilon, j));
  }

  const WaveletTable& base() const noexcept { return *table_; }
  std::shared_ptr<const WaveletTable> base_ptr() const noexcept { return table_; }
  double epsilon() const noexcept { return epsilon_; }
  int levels() const noexcept { return static_cast<int>(levels_.size()); }
  const MollifiedTable& level(int j) const { return levels_.at(static_cast<std::size_t>(j)); }

  double evaluate(MollifiedKind kind, int j, std::int64_t k, double x) const {
    const double s = std::ldexp(1.0, j);
    const double t = s * x - static_cast<double>(k);
    const bool integral = kind == MollifiedKind::PsiBarIntegral || kind == MollifiedKind::PhiBarIntegral;
    return (integral ? 1.0 / std::sqrt(s) : std::sqrt(s)) * level(j).sample(kind, t);
  }

private:
  std::shared_ptr<const WaveletTable> table_;
  double epsilon_;
  std::vector<MollifiedTable> levels_;
};

}  // namespace uwsr
