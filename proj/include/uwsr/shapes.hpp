#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwsr/cloud.hpp"
#include "uwsr/isosurface.hpp"

namespace uwsr {

inline constexpr double kPi = 3.14159265358979323846;

// Points with their true outward normals. Planar shapes lie in z = 0.
struct ShapeSample {
  PointList<3> points;
  PointList<3> normals;
};

inline ShapeSample sample_sphere(std::size_t count, std::uint64_t seed, double radius = 1.0,
                                 const Eigen::Vector3d& center = Eigen::Vector3d::Zero()) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ShapeSample s;
  while (s.points.size() < count) {
    const Eigen::Vector3d v(gauss(rng), gauss(rng), gauss(rng));
    if (v.norm() < 1e-12) continue;
    const Eigen::Vector3d n = v.normalized();
    s.points.push_back(center + radius * n);
    s.normals.push_back(n);
  }
  return s;
}

// Area-uniform torus around the z axis.
inline ShapeSample sample_torus(std::size_t count, std::uint64_t seed, double major = 1.0, double minor = 0.4) {
  if (!(minor > 0.0 && major > minor)) throw std::invalid_argument("torus radii must satisfy major > minor > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ShapeSample s;
  while (s.points.size() < count) {
    const double u = angle(rng), v = angle(rng), w = uni(rng);
    if (w > (major + minor * std::cos(v)) / (major + minor)) continue;
    const Eigen::Vector3d ring(std::cos(u), std::sin(u), 0.0);
    const Eigen::Vector3d n(std::cos(v) * std::cos(u), std::cos(v) * std::sin(u), std::sin(v));
    s.points.push_back(major * ring + minor * n);
    s.normals.push_back(n);
  }
  return s;
}

inline ShapeSample sample_circle(std::size_t count, std::uint64_t seed, double radius = 1.0, bool inward = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  ShapeSample s;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = angle(rng);
    const Eigen::Vector3d n(std::cos(t), std::sin(t), 0.0);
    s.points.push_back(radius * n);
    s.normals.push_back(inward ? Eigen::Vector3d(-n) : n);
  }
  return s;
}

// Annulus between two concentric circles; the inner ring's outward normal
// points toward the center.
inline ShapeSample sample_rings(std::size_t count, std::uint64_t seed, double inner = 0.5, double outer = 1.0) {
  if (!(inner > 0.0 && outer > inner)) throw std::invalid_argument("ring radii must satisfy outer > inner > 0");
  const std::size_t n_inner = count / 2;
  ShapeSample s = sample_circle(n_inner, seed, inner, true);
  const ShapeSample o = sample_circle(count - n_inner, seed + 1, outer, false);
  s.points.insert(s.points.end(), o.points.begin(), o.points.end());
  s.normals.insert(s.normals.end(), o.normals.begin(), o.normals.end());
  return s;
}

// Isotropic Gaussian noise with sigma = fraction * bounding diagonal; axes
// with zero extent (planar data) are left untouched.
inline PointList<3> perturb(const PointList<3>& points, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0)) throw std::invalid_argument("noise fraction must be nonnegative");
  if (points.empty()) return {};
  const Box<3> box = bounding_box<3>(points);
  const double sigma = fraction * box.diagonal();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  PointList<3> out = points;
  for (auto& p : out)
    for (int d = 0; d < 3; ++d) {
      const double g = gauss(rng);
      if (box.hi[d] > box.lo[d]) p[d] += sigma * g;
    }
  return out;
}

// Subdivided icosahedron projected onto the sphere.
inline Mesh sphere_mesh(int subdivisions, double radius = 1.0,
                        const Eigen::Vector3d& center = Eigen::Vector3d::Zero()) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Mesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : m.vertices) v.normalize();
  m.triangles = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const int id = static_cast<int>(m.vertices.size());
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& tri : m.triangles) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    m.triangles = std::move(next);
  }
  for (auto& v : m.vertices) v = center + radius * v;
  return m;
}

inline Mesh torus_mesh(int segments_major, int segments_minor, double major = 1.0, double minor = 0.4) {
  Mesh m;
  for (int i = 0; i < segments_major; ++i)
    for (int j = 0; j < segments_minor; ++j) {
      const double u = 2.0 * kPi * i / segments_major, v = 2.0 * kPi * j / segments_minor;
      m.vertices.emplace_back((major + minor * std::cos(v)) * std::cos(u), (major + minor * std::cos(v)) * std::sin(u),
                              minor * std::sin(v));
    }
  auto id = [&](int i, int j) { return (i % segments_major) * segments_minor + (j % segments_minor); };
  for (int i = 0; i < segments_major; ++i)
    for (int j = 0; j < segments_minor; ++j) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

template <int Dim>
PointList<Dim> project(const PointList<3>& points) {
  PointList<Dim> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.template head<Dim>());
  return out;
}

}  // namespace uwsr
