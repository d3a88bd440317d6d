#pragma once

#include <Eigen/Core>

#include <span>
#include <stdexcept>
#include <vector>

namespace uwsr {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using PointList = std::vector<Vec<Dim>>;

template <int Dim>
struct Box {
  Vec<Dim> lo;
  Vec<Dim> hi;

  Vec<Dim> center() const { return 0.5 * (lo + hi); }
  double diagonal() const { return (hi - lo).norm(); }

  static Box unit() { return {Vec<Dim>::Zero(), Vec<Dim>::Ones()}; }
};

template <int Dim>
Box<Dim> bounding_box(std::span<const Vec<Dim>> points) {
  if (points.empty()) throw std::invalid_argument("bounding box of an empty point set");
  Box<Dim> b{points.front(), points.front()};
  for (const auto& p : points) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

// unit = scale * (x - source_center) + target_center
template <int Dim>
struct SimilarityTransform {
  double scale = 1.0;
  Vec<Dim> source_center = Vec<Dim>::Zero();
  Vec<Dim> target_center = Vec<Dim>::Zero();

  Vec<Dim> to_unit(const Vec<Dim>& x) const { return scale * (x - source_center) + target_center; }
  Vec<Dim> to_original(const Vec<Dim>& u) const { return (u - target_center) / scale + source_center; }

  static SimilarityTransform identity() { return {}; }
};

template <int Dim>
struct NormalizedCloud {
  PointList<Dim> points;
  SimilarityTransform<Dim> transform;
  double margin = 0.1;

  std::size_t size() const noexcept { return points.size(); }
  Box<Dim> bounds() const { return bounding_box<Dim>(points); }
};

// Isotropic scale and translation placing the cloud's bounding box centered
// in [margin, 1-margin]^Dim, with its largest extent spanning that interval.
template <int Dim>
NormalizedCloud<Dim> normalize(std::span<const Vec<Dim>> points, double margin = 0.1) {
  if (points.size() < 4) throw std::invalid_argument("normalize requires at least 4 points");
  if (!(margin >= 0.0 && margin < 0.5)) throw std::invalid_argument("margin must lie in [0, 0.5)");
  for (const auto& p : points)
    if (!p.allFinite()) throw std::invalid_argument("non-finite input coordinate");
  const Box<Dim> box = bounding_box<Dim>(points);
  const double extent = (box.hi - box.lo).maxCoeff();
  if (!(extent > 0.0)) throw std::invalid_argument("degenerate cloud: zero bounding-box extent");

  NormalizedCloud<Dim> out;
  out.margin = margin;
  out.transform.scale = (1.0 - 2.0 * margin) / extent;
  out.transform.source_center = box.center();
  out.transform.target_center = Vec<Dim>::Constant(0.5);
  out.points.reserve(points.size());
  for (const auto& p : points) out.points.push_back(out.transform.to_unit(p));
  return out;
}

template <int Dim>
NormalizedCloud<Dim> normalize(const PointList<Dim>& points, double margin = 0.1) {
  return normalize<Dim>(std::span<const Vec<Dim>>(points), margin);
}

// Unit-cube coordinates used as-is.
template <int Dim>
NormalizedCloud<Dim> identity_cloud(PointList<Dim> points) {
  NormalizedCloud<Dim> out;
  out.points = std::move(points);
  out.margin = 0.0;
  return out;
}

}  // namespace uwsr
