#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwsr/cloud.hpp"
#include "uwsr/isosurface.hpp"

namespace uwsr {

// Exact nearest-neighbour k-d tree over a fixed point set.
template <int Dim>
class KdTree {
public:
  explicit KdTree(std::span<const Vec<Dim>> points) : points_(points.begin(), points.end()) {
    if (points_.empty()) throw std::invalid_argument("k-d tree over an empty point set");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * points_.size() / kLeaf + 2);
    build(0, points_.size());
  }

  std::size_t size() const noexcept { return points_.size(); }

  // Squared distance and index of the nearest point.
  std::pair<double, std::size_t> nearest(const Vec<Dim>& q) const {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    search(0, q, best, best_i);
    return {best, best_i};
  }

private:
  static constexpr std::size_t kLeaf = 8;

  struct Node {
    std::size_t begin, end;
    int axis = -1;
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    if (end - begin <= kLeaf) return id;
    Vec<Dim> lo = points_[order_[begin]], hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (!(hi[axis] > lo[axis])) return id;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::size_t id, const Vec<Dim>& q, double& best, std::size_t& best_i) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const double d = (points_[order_[i]] - q).squaredNorm();
        if (d < best || (d == best && order_[i] < best_i)) {
          best = d;
          best_i = order_[i];
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, best, best_i);
    if (diff * diff <= best) search(far, q, best, best_i);
  }

  std::vector<Vec<Dim>> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

struct SampledSurface {
  std::vector<Eigen::Vector3d> samples;
  std::string source;
};

// Area-weighted uniform samples on the mesh surface.
inline SampledSurface sample_mesh(const Mesh& mesh, std::size_t count, std::uint64_t seed,
                                  std::string source = "mesh") {
  if (count == 0) throw std::invalid_argument("sample count must be positive");
  if (mesh.triangles.empty()) throw std::invalid_argument("cannot sample an empty mesh");
  std::vector<double> cumulative;
  cumulative.reserve(mesh.triangles.size());
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    total += 0.5 * (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]).norm();
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw std::invalid_argument("cannot sample a zero-area mesh");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  SampledSurface out;
  out.source = std::move(source);
  out.samples.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double r = uni(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    if (it == cumulative.end()) --it;
    const auto& t = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(uni(rng));
    const double r2 = uni(rng);
    out.samples.push_back((1.0 - r1) * mesh.vertices[t[0]] + r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                          r1 * r2 * mesh.vertices[t[2]]);
  }
  return out;
}

struct ChamferResult {
  double cd = 0.0;
  double cd_x1e4 = 0.0;
};

// Mean squared nearest-neighbour distance from `from` to the tree's points.
inline double one_sided_chamfer(std::span<const Eigen::Vector3d> from, const KdTree<3>& to) {
  double s = 0.0;
  for (const auto& p : from) s += to.nearest(p).first;
  return s / static_cast<double>(from.size());
}

// Symmetric squared Chamfer distance, optionally divided by scale^2 (pass the
// reference bounding-box diagonal for unit-diagonal normalization).
inline ChamferResult chamfer(const SampledSurface& s1, const SampledSurface& s2, double scale = 1.0) {
  if (s1.samples.empty() || s2.samples.empty()) throw std::invalid_argument("chamfer of an empty sample set");
  if (!(scale > 0.0)) throw std::invalid_argument("chamfer scale must be positive");
  const std::span<const Eigen::Vector3d> a(s1.samples), b(s2.samples);
  const KdTree<3> ta(a), tb(b);
  const double ab = one_sided_chamfer(a, tb);
  const double ba = one_sided_chamfer(b, ta);
  ChamferResult r;
  r.cd = (ab + ba) / (scale * scale);
  r.cd_x1e4 = r.cd * 1e4;
  return r;
}

}  // namespace uwsr
