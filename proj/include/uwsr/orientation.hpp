#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "uwsr/cloud.hpp"

namespace uwsr {

template <int Dim>
struct OrientedCloud {
  PointList<Dim> points;
  PointList<Dim> normals;
  std::vector<double> areas;
  std::vector<bool> degenerate;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t degenerate_count() const {
    std::size_t n = 0;
    for (bool d : degenerate) n += d ? 1 : 0;
    return n;
  }
};

// Normals mu_i/|mu_i| and area elements |mu_i| mapped back to original
// units. Rows below 1e-12 of the largest row norm are flagged and get the
// placeholder normal e_last.
template <int Dim>
OrientedCloud<Dim> extract_normals(const Eigen::VectorXd& mu, const NormalizedCloud<Dim>& cloud) {
  const std::size_t m = cloud.size();
  if (mu.size() != static_cast<Eigen::Index>(Dim * m)) throw std::invalid_argument("surface element size mismatch");
  if (!mu.allFinite()) throw std::invalid_argument("surface elements contain non-finite entries");
  double max_norm = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    max_norm = std::max(max_norm, mu.segment<Dim>(static_cast<Eigen::Index>(Dim * i)).norm());
  if (!(max_norm > 0.0)) throw std::invalid_argument("all surface elements are zero; no orientation information");

  const double area_factor = std::pow(cloud.transform.scale, -(Dim - 1));
  OrientedCloud<Dim> out;
  out.points.reserve(m);
  out.normals.reserve(m);
  out.areas.reserve(m);
  out.degenerate.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec<Dim> v = mu.segment<Dim>(static_cast<Eigen::Index>(Dim * i));
    const double n = v.norm();
    out.points.push_back(cloud.transform.to_original(cloud.points[i]));
    if (n < 1e-12 * max_norm) {
      Vec<Dim> placeholder = Vec<Dim>::Zero();
      placeholder[Dim - 1] = 1.0;
      out.normals.push_back(placeholder);
      out.areas.push_back(0.0);
      out.degenerate.push_back(true);
    } else {
      out.normals.push_back(v / n);
      out.areas.push_back(n * area_factor);
      out.degenerate.push_back(false);
    }
  }
  return out;
}

// Fraction of normals with positive dot product against the truth.
template <int Dim>
double pgp90(std::span<const Vec<Dim>> estimated, std::span<const Vec<Dim>> truth) {
  if (estimated.size() != truth.size()) throw std::invalid_argument("pgp90: size mismatch");
  if (estimated.empty()) throw std::invalid_argument("pgp90: empty input");
  std::size_t good = 0;
  for (std::size_t i = 0; i < estimated.size(); ++i) good += estimated[i].dot(truth[i]) > 0.0 ? 1 : 0;
  return static_cast<double>(good) / static_cast<double>(estimated.size());
}

template <int Dim>
double pgp90(const OrientedCloud<Dim>& estimated, const PointList<Dim>& truth) {
  return pgp90<Dim>(std::span<const Vec<Dim>>(estimated.normals), std::span<const Vec<Dim>>(truth));
}

// Mean angle in degrees between matched unit normals.
template <int Dim>
double mean_angle_degrees(const PointList<Dim>& a, const PointList<Dim>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("mean angle: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double c = std::clamp(a[i].normalized().dot(b[i].normalized()), -1.0, 1.0);
    s += std::acos(c);
  }
  return s / static_cast<double>(a.size()) * 180.0 / 3.14159265358979323846;
}

// Corners of the unit cube, where the indicator must be exterior.
template <int Dim>
PointList<Dim> cube_corners() {
  PointList<Dim> out;
  for (unsigned c = 0; c < (1u << Dim); ++c) {
    Vec<Dim> p;
    for (int d = 0; d < Dim; ++d) p[d] = ((c >> d) & 1u) ? 1.0 : 0.0;
    out.push_back(p);
  }
  return out;
}

}  // namespace uwsr
