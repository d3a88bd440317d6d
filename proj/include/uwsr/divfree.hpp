#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwsr/cloud.hpp"
#include "uwsr/errors.hpp"

namespace uwsr {

enum class KernelFamily { TrigSqrt, Center };

inline KernelFamily parse_kernel_family(const std::string& s) {
  if (s == "trig-sqrt") return KernelFamily::TrigSqrt;
  if (s == "center") return KernelFamily::Center;
  throw ParseError("unknown kernel family '" + s + "'");
}

inline const char* to_string(KernelFamily f) { return f == KernelFamily::TrigSqrt ? "trig-sqrt" : "center"; }

// Divergence-free field F = curl G. In 3-D G is a vector potential, in 2-D a
// stream function with F = (dG/dy, -dG/dx).
//   trig-sqrt: G = (w2_1 cos t, w2_2 sin t, w2_3 sqrt(t + s)), t = w1.x
//              (2-D: G = w2_1 cos t + w2_2 sin t + w2_3 sqrt(t + s))
//   center:    G = w2 / |x - c|   (2-D: G = w2_1 / |x - c|)
template <int Dim>
class DivFreeKernel {
public:
  static DivFreeKernel trig_sqrt(const Vec<Dim>& w1, const Eigen::Vector3d& w2, double shift) {
    if (!(w1.norm() > 0.0) || !(w2.norm() > 0.0)) throw std::invalid_argument("degenerate kernel weights");
    DivFreeKernel k;
    k.family_ = KernelFamily::TrigSqrt;
    k.w1_ = w1;
    k.w2_ = w2;
    k.shift_ = shift;
    return k;
  }

  // Shift chosen so that t + s >= 1 over the whole box.
  static DivFreeKernel trig_sqrt(const Vec<Dim>& w1, const Eigen::Vector3d& w2, const Box<Dim>& box) {
    double m = 0.0;
    for (unsigned c = 0; c < (1u << Dim); ++c) {
      Vec<Dim> corner;
      for (int d = 0; d < Dim; ++d) corner[d] = ((c >> d) & 1u) ? box.hi[d] : box.lo[d];
      m = std::max(m, std::abs(w1.dot(corner)));
    }
    return trig_sqrt(w1, w2, 1.0 + m);
  }

  static DivFreeKernel center(const Eigen::Vector3d& w2, const Vec<Dim>& c) {
    if (!(w2.norm() > 0.0)) throw std::invalid_argument("degenerate kernel weights");
    DivFreeKernel k;
    k.family_ = KernelFamily::Center;
    k.w2_ = w2;
    k.center_ = c;
    return k;
  }

  KernelFamily family() const noexcept { return family_; }
  const Vec<Dim>& w1() const noexcept { return w1_; }
  const Eigen::Vector3d& w2() const noexcept { return w2_; }
  double shift() const noexcept { return shift_; }
  const Vec<Dim>& center_point() const noexcept { return center_; }

  Vec<Dim> operator()(const Vec<Dim>& p) const {
    if (family_ == KernelFamily::TrigSqrt) {
      const double t = w1_.dot(p);
      const double arg = t + shift_;
      if (!(arg > 0.0)) throw NumericError("sqrt domain violated: kernel shift does not cover the query point");
      const double ga = -w2_[0] * std::sin(t);
      const double gb = w2_[1] * std::cos(t);
      const double gc = w2_[2] / (2.0 * std::sqrt(arg));
      if constexpr (Dim == 3) {
        return Vec<Dim>(gc * w1_[1] - gb * w1_[2], ga * w1_[2] - gc * w1_[0], gb * w1_[0] - ga * w1_[1]);
      } else {
        const double g = ga + gb + gc;
        return Vec<Dim>(g * w1_[1], -g * w1_[0]);
      }
    }
    const Vec<Dim> d = p - center_;
    const double r = d.norm();
    if (!(r > 0.0)) throw NumericError("center-family kernel evaluated at its singularity");
    const double inv_r3 = 1.0 / (r * r * r);
    if constexpr (Dim == 3) {
      return -inv_r3 * d.cross(w2_);
    } else {
      return w2_[0] * inv_r3 * Vec<Dim>(-d[1], d[0]);
    }
  }

private:
  KernelFamily family_ = KernelFamily::TrigSqrt;
  Vec<Dim> w1_ = Vec<Dim>::Zero();
  Eigen::Vector3d w2_ = Eigen::Vector3d::Zero();
  double shift_ = 1.0;
  Vec<Dim> center_ = Vec<Dim>::Zero();
};

template <int Dim>
double cross_norm(const Vec<Dim>& a, const Vec<Dim>& b) {
  if constexpr (Dim == 3) {
    return a.cross(b).norm();
  } else {
    return std::abs(a[0] * b[1] - a[1] * b[0]);
  }
}

// Seeded kernels: w1 uniform in [-5,5]^Dim with |w1| >= 0.1 and no two w1
// parallel within 1e-6; w2 uniform direction with magnitude in [0.5, 1.5].
// Center-family centers lie outside the box.
template <int Dim>
std::vector<DivFreeKernel<Dim>> sample_kernels(std::size_t count, std::uint64_t seed, const Box<Dim>& box,
                                               KernelFamily family = KernelFamily::TrigSqrt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(-5.0, 5.0);
  std::uniform_real_distribution<double> magnitude(0.5, 1.5);
  std::uniform_real_distribution<double> distance(1.5, 3.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto unit3 = [&] {
    Eigen::Vector3d v;
    do {
      v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    } while (v.norm() < 1e-12);
    return v.normalized();
  };

  std::vector<DivFreeKernel<Dim>> out;
  out.reserve(count);
  std::vector<Vec<Dim>> accepted;
  while (out.size() < count) {
    if (family == KernelFamily::TrigSqrt) {
      Vec<Dim> w1;
      for (int d = 0; d < Dim; ++d) w1[d] = freq(rng);
      if (w1.norm() < 0.1) continue;
      bool parallel = false;
      for (const auto& a : accepted)
        if (cross_norm<Dim>(w1, a) / (w1.norm() * a.norm()) < 1e-6) {
          parallel = true;
          break;
        }
      if (parallel) continue;
      const Eigen::Vector3d w2 = unit3() * magnitude(rng);
      accepted.push_back(w1);
      out.push_back(DivFreeKernel<Dim>::trig_sqrt(w1, w2, box));
    } else {
      const Eigen::Vector3d w2 = unit3() * magnitude(rng);
      Vec<Dim> dir;
      do {
        for (int d = 0; d < Dim; ++d) dir[d] = gauss(rng);
      } while (dir.norm() < 1e-12);
      const double radius = 0.5 * box.diagonal() * distance(rng);
      out.push_back(DivFreeKernel<Dim>::center(w2, box.center() + radius * dir.normalized()));
    }
  }
  return out;
}

}  // namespace uwsr
