#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "uwsr/assembly.hpp"
#include "uwsr/basis.hpp"
#include "uwsr/cloud.hpp"
#include "uwsr/mc_tables.hpp"
#include "uwsr/mollifier.hpp"

namespace uwsr {

// Corner values over [0,1]^Dim with 2^depth + 1 corners per axis; the last
// axis varies fastest.
template <int Dim>
struct ImplicitGrid {
  int depth = 0;
  int n = 0;
  std::vector<double> values;
  double iso = 0.5;

  std::size_t index(const std::array<int, Dim>& c) const noexcept {
    std::size_t idx = 0;
    for (int d = 0; d < Dim; ++d) idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(c[d]);
    return idx;
  }
  double at(const std::array<int, Dim>& c) const noexcept { return values[index(c)]; }
  double spacing() const noexcept { return 1.0 / (n - 1); }

  Vec<Dim> corner(const std::array<int, Dim>& c) const {
    Vec<Dim> p;
    for (int d = 0; d < Dim; ++d) p[d] = c[d] * spacing();
    return p;
  }

  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
  bool iso_in_range() const { return !values.empty() && iso > min() && iso < max(); }

  double fraction_outside(double lo = -0.2, double hi = 1.2) const {
    if (values.empty()) return 0.0;
    std::size_t out = 0;
    for (double v : values) out += (v < lo || v > hi) ? 1 : 0;
    return static_cast<double>(out) / static_cast<double>(values.size());
  }
};

// Reconstructed indicator: coefficients c = A mu computed once, evaluated
// through the unmollified bases.
template <int Dim>
class ImplicitField {
public:
  ImplicitField(const BasisSet<Dim>& bases, const MollifiedBasis& mb, const NormalizedCloud<Dim>& cloud,
                const Eigen::VectorXd& mu)
      : op_(bases, mb, std::span<const Vec<Dim>>(cloud.points)), table_(mb.base_ptr()) {
    coefficients_ = op_.coefficients(mu);
  }

  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
  const BasisSet<Dim>& bases() const noexcept { return op_.bases(); }

  Eigen::VectorXd evaluate(std::span<const Vec<Dim>> queries) const { return op_.evaluate(coefficients_, queries); }
  Eigen::VectorXd evaluate(const PointList<Dim>& queries) const {
    return evaluate(std::span<const Vec<Dim>>(queries));
  }

  // Separable evaluation on the dyadic grid by per-axis tensor contraction.
  ImplicitGrid<Dim> evaluate_grid(int depth) const {
    if (depth < 1 || depth > 10) throw std::invalid_argument("grid depth must lie in [1, 10]");
    ImplicitGrid<Dim> grid;
    grid.depth = depth;
    grid.n = (1 << depth) + 1;
    const Eigen::Index n = grid.n;
    Eigen::Index total = 1;
    for (int d = 0; d < Dim; ++d) total *= n;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(total);

    for (const auto& f : op_.bases().families()) {
      if (f.size() == 0) continue;
      std::array<Eigen::MatrixXd, Dim> fac;
      for (int d = 0; d < Dim; ++d) {
        fac[d].resize(n, f.k_count[d]);
        const auto kind = f.wavelet_on(d) ? WaveletKind::Psi : WaveletKind::Phi;
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index c = 0; c < f.k_count[d]; ++c)
            fac[d](i, c) = table_->evaluate(kind, f.level, f.k_min[d] + c, static_cast<double>(i) / (n - 1));
      }
      const double* coef = coefficients_.data() + f.offset;
      if constexpr (Dim == 2) {
        const Eigen::Map<const RowMatrix> c(coef, f.k_count[0], f.k_count[1]);
        const RowMatrix t1 = c * fac[1].transpose();
        const RowMatrix out = fac[0] * t1;
        acc += Eigen::Map<const Eigen::VectorXd>(out.data(), total);
      } else {
        const Eigen::Index c0 = f.k_count[0], c1 = f.k_count[1], c2 = f.k_count[2];
        const Eigen::Map<const RowMatrix> c(coef, c0 * c1, c2);
        const RowMatrix t1 = c * fac[2].transpose();
        RowMatrix t2(c0, n * n);
        for (Eigen::Index k0 = 0; k0 < c0; ++k0) {
          const RowMatrix slab = fac[1] * t1.middleRows(k0 * c1, c1);
          t2.row(k0) = Eigen::Map<const Eigen::RowVectorXd>(slab.data(), n * n);
        }
        const RowMatrix out = fac[0] * t2;
        acc += Eigen::Map<const Eigen::VectorXd>(out.data(), total);
      }
    }
    grid.values.assign(acc.data(), acc.data() + acc.size());
    for (double v : grid.values)
      if (!std::isfinite(v)) throw NumericError("non-finite grid value");
    return grid;
  }

private:
  CoefficientOperator<Dim> op_;
  std::shared_ptr<const WaveletTable> table_;
  Eigen::VectorXd coefficients_;
};

template <int Dim>
Eigen::VectorXd evaluate_field(const Eigen::VectorXd& mu, const NormalizedCloud<Dim>& cloud, const BasisSet<Dim>& bases,
                               const MollifiedBasis& mb, std::span<const Vec<Dim>> queries) {
  return ImplicitField<Dim>(bases, mb, cloud, mu).evaluate(queries);
}

// Mean field value over the input points.
template <int Dim>
double compute_isovalue(const ImplicitField<Dim>& field, const NormalizedCloud<Dim>& cloud) {
  if (cloud.size() == 0) throw std::invalid_argument("isovalue of an empty cloud");
  return field.evaluate(cloud.points).mean();
}

template <int Dim>
double compute_isovalue(const Eigen::VectorXd& mu, const NormalizedCloud<Dim>& cloud, const BasisSet<Dim>& bases,
                        const MollifiedBasis& mb) {
  return compute_isovalue(ImplicitField<Dim>(bases, mb, cloud, mu), cloud);
}

struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const noexcept { return triangles.empty(); }

  double signed_volume() const {
    double v = 0.0;
    for (const auto& t : triangles)
      v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]])) / 6.0;
    return v;
  }

  double area() const {
    double a = 0.0;
    for (const auto& t : triangles)
      a += 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
    return a;
  }
};

namespace detail {

// Vertex on the edge from corner a to corner b (flat indices, b = a + stride
// along `axis`), keyed globally so neighbouring cells share it. Intersections
// at a corner reuse the corner key.
template <class Grid, class Coord>
int edge_vertex(const Grid& grid, std::size_t a, std::size_t b, int axis, int dims, const Coord& pa, const Coord& pb,
                std::unordered_map<std::int64_t, int>& keys, std::vector<Coord>& out) {
  const double va = grid.values[a], vb = grid.values[b];
  const double t = (grid.iso - va) / (vb - va);
  std::int64_t key;
  Coord p;
  if (t <= 0.0) {
    key = -static_cast<std::int64_t>(a) - 1;
    p = pa;
  } else if (t >= 1.0) {
    key = -static_cast<std::int64_t>(b) - 1;
    p = pb;
  } else {
    key = static_cast<std::int64_t>(a) * dims + axis;
    p = pa + t * (pb - pa);
  }
  auto [it, inserted] = keys.try_emplace(key, static_cast<int>(out.size()));
  if (inserted) out.push_back(p);
  return it->second;
}

}  // namespace detail

// Table-driven extraction at grid.iso with linear edge interpolation;
// triangles are wound so normals point toward decreasing field values.
inline Mesh marching_cubes(const ImplicitGrid<3>& grid, const SimilarityTransform<3>& transform,
                           std::vector<std::string>* warnings = nullptr) {
  Mesh mesh;
  if (!grid.iso_in_range()) {
    if (warnings) warnings->push_back("iso-value outside the grid value range; surface is empty");
    return mesh;
  }
  const int n = grid.n;
  std::unordered_map<std::int64_t, int> keys;
  std::vector<Eigen::Vector3d> unit_vertices;

  for (int x = 0; x + 1 < n; ++x)
    for (int y = 0; y + 1 < n; ++y)
      for (int z = 0; z + 1 < n; ++z) {
        std::array<std::size_t, 8> idx{};
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          idx[c] = grid.index({x + mc::kCorner[c][0], y + mc::kCorner[c][1], z + mc::kCorner[c][2]});
          if (grid.values[idx[c]] < grid.iso) cube |= 1 << c;
        }
        const int edges = mc::kEdgeTable[cube];
        if (edges == 0) continue;
        std::array<int, 12> vert{};
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          int c0 = mc::kEdge[e][0], c1 = mc::kEdge[e][1];
          if (idx[c0] > idx[c1]) std::swap(c0, c1);
          int axis = 0;
          for (int d = 0; d < 3; ++d)
            if (mc::kCorner[c0][d] != mc::kCorner[c1][d]) axis = d;
          const Eigen::Vector3d pa = grid.corner({x + mc::kCorner[c0][0], y + mc::kCorner[c0][1], z + mc::kCorner[c0][2]});
          const Eigen::Vector3d pb = grid.corner({x + mc::kCorner[c1][0], y + mc::kCorner[c1][1], z + mc::kCorner[c1][2]});
          vert[e] = detail::edge_vertex(grid, idx[c0], idx[c1], axis, 3, pa, pb, keys, unit_vertices);
        }
        for (int i = 0; mc::kTriTable[cube][i] != -1; i += 3) {
          const std::array<int, 3> t{vert[mc::kTriTable[cube][i]], vert[mc::kTriTable[cube][i + 1]],
                                     vert[mc::kTriTable[cube][i + 2]]};
          if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
          const double area = 0.5 * (unit_vertices[t[1]] - unit_vertices[t[0]])
                                        .cross(unit_vertices[t[2]] - unit_vertices[t[0]])
                                        .norm();
          if (area <= 1e-14) continue;
          mesh.triangles.push_back(t);
        }
      }

  // Compact vertices referenced by the kept triangles.
  std::vector<int> remap(unit_vertices.size(), -1);
  for (auto& t : mesh.triangles)
    for (int& v : t) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(unit_vertices[v]);
      }
      v = remap[v];
    }

  // Orient toward decreasing field: the enclosed high-value region must have
  // positive volume.
  if (mesh.signed_volume() < 0.0)
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  for (auto& v : mesh.vertices) v = transform.to_original(v);
  if (mesh.empty() && warnings) warnings->push_back("marching cubes produced no triangles");
  return mesh;
}

struct Polyline {
  std::vector<Eigen::Vector2d> points;
  bool closed = false;

  // Positive for counter-clockwise loops.
  double signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
      a += points[i].x() * points[i + 1].y() - points[i + 1].x() * points[i].y();
    if (closed && points.size() > 2)
      a += points.back().x() * points.front().y() - points.front().x() * points.back().y();
    return 0.5 * a;
  }
};

// Contours at grid.iso with the high-value side on the left, so outer
// boundaries run counter-clockwise and holes clockwise. Saddles are resolved
// by the cell-center average.
inline std::vector<Polyline> marching_squares_2d(const ImplicitGrid<2>& grid, const SimilarityTransform<2>& transform,
                                                 std::vector<std::string>* warnings = nullptr) {
  std::vector<Polyline> lines;
  if (!grid.iso_in_range()) {
    if (warnings) warnings->push_back("iso-value outside the grid value range; contour set is empty");
    return lines;
  }
  const int n = grid.n;
  std::unordered_map<std::int64_t, int> keys;
  std::vector<Eigen::Vector2d> unit_vertices;
  std::vector<std::array<int, 2>> segments;

  constexpr std::array<std::array<int, 2>, 4> corner{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  for (int x = 0; x + 1 < n; ++x)
    for (int y = 0; y + 1 < n; ++y) {
      std::array<std::size_t, 4> idx{};
      std::array<bool, 4> inside{};
      double center = 0.0;
      for (int c = 0; c < 4; ++c) {
        idx[c] = grid.index({x + corner[c][0], y + corner[c][1]});
        inside[c] = grid.values[idx[c]] > grid.iso;
        center += 0.25 * grid.values[idx[c]];
      }
      struct Crossing {
        int vertex;
        bool entry;
      };
      std::vector<Crossing> cross;
      for (int e = 0; e < 4; ++e) {
        const int c0 = e, c1 = (e + 1) % 4;
        if (inside[c0] == inside[c1]) continue;
        int a = c0, b = c1;
        if (idx[a] > idx[b]) std::swap(a, b);
        const int axis = corner[a][0] != corner[b][0] ? 0 : 1;
        const Eigen::Vector2d pa = grid.corner({x + corner[a][0], y + corner[a][1]});
        const Eigen::Vector2d pb = grid.corner({x + corner[b][0], y + corner[b][1]});
        const int v = detail::edge_vertex(grid, idx[a], idx[b], axis, 2, pa, pb, keys, unit_vertices);
        cross.push_back({v, !inside[c0]});
      }
      const std::size_t k = cross.size();
      if (k == 2) {
        const auto& exit = cross[0].entry ? cross[1] : cross[0];
        const auto& entry = cross[0].entry ? cross[0] : cross[1];
        if (exit.vertex != entry.vertex) segments.push_back({exit.vertex, entry.vertex});
      } else if (k == 4) {
        const bool connected = center > grid.iso;
        for (std::size_t i = 0; i < 4; ++i) {
          if (cross[i].entry) continue;
          const std::size_t partner = connected ? (i + 1) % 4 : (i + 3) % 4;
          if (cross[i].vertex != cross[partner].vertex) segments.push_back({cross[i].vertex, cross[partner].vertex});
        }
      }
    }

  std::unordered_map<int, std::size_t> from;
  std::vector<bool> has_pred(unit_vertices.size(), false);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    from.emplace(segments[s][0], s);
    has_pred[segments[s][1]] = true;
  }
  std::vector<bool> used(segments.size(), false);
  auto trace = [&](std::size_t s0) {
    Polyline line;
    std::size_t s = s0;
    line.points.push_back(unit_vertices[segments[s][0]]);
    while (!used[s]) {
      used[s] = true;
      const int next = segments[s][1];
      if (next == segments[s0][0]) {
        line.closed = true;
        break;
      }
      line.points.push_back(unit_vertices[next]);
      auto it = from.find(next);
      if (it == from.end()) break;
      s = it->second;
    }
    for (auto& p : line.points) p = transform.to_original(p);
    lines.push_back(std::move(line));
  };
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s] && !has_pred[segments[s][0]]) trace(s);
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s]) trace(s);
  if (lines.empty() && warnings) warnings->push_back("marching squares produced no contours");
  return lines;
}

}  // namespace uwsr
