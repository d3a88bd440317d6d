#pragma once

#include <Eigen/Core>

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "uwsr/uwsr.hpp"

namespace uwsr::test {

inline std::shared_ptr<const WaveletTable> shared_table() {
  static const auto table = std::make_shared<const WaveletTable>(cascade(build_filter(), 1024));
  return table;
}

// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

// Nearly equal-area points on a sphere with their outward normals.
struct SphereQuadrature {
  PointList<3> points;
  PointList<3> normals;
  double area = 0.0;
};

inline SphereQuadrature fibonacci_sphere(std::size_t count, double radius, const Eigen::Vector3d& center) {
  SphereQuadrature q;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
    const double r = std::sqrt(1.0 - z * z);
    const double t = golden * static_cast<double>(i);
    const Eigen::Vector3d n(r * std::cos(t), r * std::sin(t), z);
    q.points.push_back(center + radius * n);
    q.normals.push_back(n);
  }
  q.area = 4.0 * kPi * radius * radius / static_cast<double>(count);
  return q;
}

// Stacked mu_i = sigma n_i.
inline Eigen::VectorXd stacked_normals(const PointList<3>& normals, double sigma) {
  Eigen::VectorXd mu(3 * static_cast<Eigen::Index>(normals.size()));
  for (std::size_t i = 0; i < normals.size(); ++i) mu.segment<3>(3 * static_cast<Eigen::Index>(i)) = sigma * normals[i];
  return mu;
}

}  // namespace uwsr::test
