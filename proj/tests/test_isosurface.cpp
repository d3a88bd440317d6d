#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <utility>

#include "support.hpp"

using namespace uwsr;

namespace {

template <int Dim, class F>
ImplicitGrid<Dim> analytic_grid(int depth, double iso, F&& f) {
  ImplicitGrid<Dim> g;
  g.depth = depth;
  g.n = (1 << depth) + 1;
  g.iso = iso;
  std::size_t total = 1;
  for (int d = 0; d < Dim; ++d) total *= static_cast<std::size_t>(g.n);
  g.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::array<int, Dim> c{};
    std::size_t r = i;
    for (int d = Dim - 1; d >= 0; --d) {
      c[d] = static_cast<int>(r % static_cast<std::size_t>(g.n));
      r /= static_cast<std::size_t>(g.n);
    }
    g.values[g.index(c)] = f(g.corner(c));
  }
  return g;
}

// Indicator-like field, 1 inside the ball and 0 far outside.
ImplicitGrid<3> ball_grid(int depth, double radius) {
  return analytic_grid<3>(depth, 0.5, [&](const Vec<3>& p) {
    return 0.5 - ((p - Vec<3>::Constant(0.5)).norm() - radius) * 4.0;
  });
}

ImplicitGrid<2> ring_grid(int depth, double inner, double outer) {
  return analytic_grid<2>(depth, 0.5, [&](const Vec<2>& p) {
    const double r = (p - Vec<2>::Constant(0.5)).norm();
    return 0.5 + 4.0 * std::min(r - inner, outer - r);
  });
}

struct CircleRun {
  PipelineConfig config;
  ShapeSample sample;
  PipelineResult<2> result;
};

const CircleRun& circle_run() {
  static const CircleRun run = [] {
    CircleRun r;
    r.config.dim = 2;
    r.sample = sample_circle(200, 1);
    r.result = run_pipeline<2>(r.config, project<2>(r.sample.points), true);
    return r;
  }();
  return run;
}

}  // namespace

TEST(MarchingCubes, SphereVerticesNearRadius) {
  const double radius = 0.3;
  const auto g = ball_grid(5, radius);
  std::vector<std::string> warnings;
  const Mesh m = marching_cubes(g, SimilarityTransform<3>::identity(), &warnings);
  ASSERT_FALSE(m.empty());
  EXPECT_TRUE(warnings.empty());
  for (const auto& v : m.vertices) EXPECT_NEAR((v - Vec<3>::Constant(0.5)).norm(), radius, 1.5 * g.spacing());
}

TEST(MarchingCubes, WatertightOutwardAndNondegenerate) {
  const Mesh m = marching_cubes(ball_grid(5, 0.3), SimilarityTransform<3>::identity());
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
    const Vec<3> n = (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
    EXPECT_GT(n.norm(), 0.0);
    const Vec<3> centroid = (m.vertices[t[0]] + m.vertices[t[1]] + m.vertices[t[2]]) / 3.0;
    EXPECT_GT(n.dot(centroid - Vec<3>::Constant(0.5)), 0.0);
  }
  for (const auto& [edge, count] : edges) EXPECT_EQ(count, 2);
  EXPECT_NEAR(m.signed_volume(), 4.0 / 3.0 * kPi * 0.027, 0.03 * 4.0 / 3.0 * kPi * 0.027);
}

TEST(MarchingCubes, MapsToOriginalUnits) {
  SimilarityTransform<3> t;
  t.scale = 0.1;
  t.source_center = Vec<3>(10, 0, 0);
  t.target_center = Vec<3>::Constant(0.5);
  const Mesh m = marching_cubes(ball_grid(4, 0.3), t);
  for (const auto& v : m.vertices) EXPECT_NEAR((v - Vec<3>(10, 0, 0)).norm(), 3.0, 1.5 * 10.0 / 16.0);
}

TEST(MarchingCubes, ConstantGridIsEmptyWithWarning) {
  const auto g = analytic_grid<3>(3, 0.5, [](const Vec<3>&) { return 0.2; });
  std::vector<std::string> warnings;
  EXPECT_TRUE(marching_cubes(g, SimilarityTransform<3>::identity(), &warnings).empty());
  EXPECT_FALSE(warnings.empty());
}

TEST(MarchingSquares, CircleSingleCounterClockwiseLoop) {
  const double radius = 0.3;
  const auto g = analytic_grid<2>(7, 0.5, [&](const Vec<2>& p) {
    return 0.5 - 4.0 * ((p - Vec<2>::Constant(0.5)).norm() - radius);
  });
  const auto lines = marching_squares_2d(g, SimilarityTransform<2>::identity());
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_TRUE(lines[0].closed);
  EXPECT_GT(lines[0].signed_area(), 0.0);
  for (const auto& p : lines[0].points)
    EXPECT_LT(std::abs((p - Vec<2>::Constant(0.5)).norm() - radius) / radius, 0.02);
}

TEST(MarchingSquares, AnnulusOuterCcwInnerCw) {
  const auto lines = marching_squares_2d(ring_grid(7, 0.15, 0.35), SimilarityTransform<2>::identity());
  ASSERT_EQ(lines.size(), 2u);
  const auto& outer = std::abs(lines[0].signed_area()) > std::abs(lines[1].signed_area()) ? lines[0] : lines[1];
  const auto& inner = &outer == &lines[0] ? lines[1] : lines[0];
  EXPECT_TRUE(outer.closed);
  EXPECT_TRUE(inner.closed);
  EXPECT_GT(outer.signed_area(), 0.0);
  EXPECT_LT(inner.signed_area(), 0.0);
  EXPECT_NEAR(outer.signed_area(), kPi * 0.35 * 0.35, 0.02 * kPi * 0.35 * 0.35);
  EXPECT_NEAR(-inner.signed_area(), kPi * 0.15 * 0.15, 0.03 * kPi * 0.15 * 0.15);
}

TEST(MarchingSquares, ConstantGridIsEmpty) {
  const auto g = analytic_grid<2>(4, 0.5, [](const Vec<2>&) { return 0.9; });
  std::vector<std::string> warnings;
  EXPECT_TRUE(marching_squares_2d(g, SimilarityTransform<2>::identity(), &warnings).empty());
  EXPECT_FALSE(warnings.empty());
}

TEST(ImplicitGrid, FractionOutside) {
  ImplicitGrid<2> g;
  g.n = 2;
  g.values = {-0.5, 0.0, 1.0, 1.3};
  EXPECT_DOUBLE_EQ(g.fraction_outside(), 0.5);
  EXPECT_DOUBLE_EQ(g.min(), -0.5);
  EXPECT_DOUBLE_EQ(g.max(), 1.3);
}

TEST(ImplicitField, GridMatchesPointwiseEvaluation) {
  const auto& r = circle_run().result;
  const auto grid = r.field->evaluate_grid(5);
  PointList<2> corners;
  std::vector<double> expected;
  for (int x = 0; x < grid.n; x += 3)
    for (int y = 0; y < grid.n; y += 5) {
      corners.push_back(grid.corner({x, y}));
      expected.push_back(grid.at({x, y}));
    }
  const Eigen::VectorXd direct = r.field->evaluate(corners);
  for (std::size_t i = 0; i < corners.size(); ++i) EXPECT_NEAR(direct[static_cast<Eigen::Index>(i)], expected[i], 1e-10);
  EXPECT_THROW(r.field->evaluate_grid(0), std::invalid_argument);
}

TEST(ImplicitField, GridMatchesPointwiseEvaluation3d) {
  const auto s = sample_sphere(150, 3);
  PipelineConfig c;
  c.depth = 2;
  const auto r = run_pipeline<3>(c, s.points, false);
  const auto grid = r.field->evaluate_grid(3);
  PointList<3> corners;
  std::vector<double> expected;
  for (int x = 0; x < grid.n; x += 2)
    for (int y = 0; y < grid.n; y += 3)
      for (int z = 0; z < grid.n; z += 4) {
        corners.push_back(grid.corner({x, y, z}));
        expected.push_back(grid.at({x, y, z}));
      }
  const Eigen::VectorXd direct = r.field->evaluate(corners);
  for (std::size_t i = 0; i < corners.size(); ++i) EXPECT_NEAR(direct[static_cast<Eigen::Index>(i)], expected[i], 1e-10);
}

TEST(ImplicitField, ZeroMuGivesEmptySurface) {
  const auto& run = circle_run();
  const auto& r = run.result;
  auto mb = std::make_shared<const MollifiedBasis>(test::shared_table(), r.epsilon, run.config.depth);
  const auto bases = enumerate_bases<2>(run.config.depth, r.cloud, r.epsilon);
  const ImplicitField<2> field(bases, *mb, r.cloud, Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(r.cloud.size())));
  EXPECT_EQ(field.coefficients().norm(), 0.0);
  auto grid = field.evaluate_grid(4);
  grid.iso = 0.0;
  std::vector<std::string> warnings;
  EXPECT_TRUE(marching_squares_2d(grid, r.cloud.transform, &warnings).empty());
  EXPECT_FALSE(warnings.empty());
}

TEST(IsoValue, CircleIndicatorProperties) {
  const auto& r = circle_run().result;
  ASSERT_TRUE(r.iso.has_value());
  EXPECT_GE(*r.iso, 0.3);
  EXPECT_LE(*r.iso, 0.7);
  const Eigen::VectorXd at_points = r.field->evaluate(r.cloud.points);
  EXPECT_LT((at_points.array() - *r.iso).abs().maxCoeff(), 0.1);
  const double center = r.field->evaluate(PointList<2>{r.cloud.transform.to_unit(Vec<2>::Zero())})[0];
  EXPECT_NEAR(center, 1.0, 0.2);
  EXPECT_NEAR(r.field->evaluate(PointList<2>{Vec<2>(0.02, 0.02)})[0], 0.0, 0.1);
  EXPECT_NEAR(compute_isovalue(*r.field, r.cloud), *r.iso, 1e-12);
}

TEST(IsoValue, CircleContourCloseToTruth) {
  const auto& r = circle_run().result;
  ASSERT_EQ(r.contours.size(), 1u);
  EXPECT_TRUE(r.contours[0].closed);
  EXPECT_GT(r.contours[0].signed_area(), 0.0);
  double err = 0.0;
  for (const auto& p : r.contours[0].points) err = std::max(err, std::abs(p.norm() - 1.0));
  EXPECT_LT(err, 0.1);
}

TEST(IsoValue, RecenteringReducesPointDeviation) {
  const auto& r = circle_run().result;
  EXPECT_LE(r.point_deviation_iso, r.point_deviation_half);
}

TEST(IsoValue, CircleFieldMostlyInRange) {
  EXPECT_LT(circle_run().result.field_outside_fraction, 0.01);
}

TEST(IsoValue, HalfSpaceKernelCdfAtBoundaryIsHalf) {
  const MollifierKernel k(0.1, 1024);
  const auto& w = k.weights();
  double cdf = 0.5 * w[static_cast<std::size_t>(k.half())];
  for (int i = 0; i < k.half(); ++i) cdf += w[static_cast<std::size_t>(i)];
  EXPECT_NEAR(cdf, 0.5, 1e-12);

  const auto [x, gw] = test::gauss_legendre(64);
  double continuous = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) continuous += 0.05 * gw[i] * k(0.05 * (x[i] - 1.0));
  EXPECT_NEAR(continuous, 0.5, 1e-8);
}

TEST(Mesh, AreaAndVolumeOfTetrahedron) {
  Mesh m;
  m.vertices = {Vec<3>(0, 0, 0), Vec<3>(1, 0, 0), Vec<3>(0, 1, 0), Vec<3>(0, 0, 1)};
  m.triangles = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  EXPECT_NEAR(m.signed_volume(), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(m.area(), 1.5 + std::sqrt(3.0) / 2.0, 1e-15);
}

TEST(EndToEnd, SphereMeshCloseToAnalyticSphere) {
  const auto s = sample_sphere(1000, 1);
  const auto r = run_pipeline<3>(PipelineConfig{}, s.points, true);
  ASSERT_FALSE(r.mesh.empty());
  const Mesh truth = sphere_mesh(5);
  const double diag = bounding_box<3>(std::span<const Vec<3>>(truth.vertices)).diagonal();
  const auto cd = chamfer(sample_mesh(r.mesh, 20000, 3), sample_mesh(truth, 20000, 4), diag);
  EXPECT_LT(cd.cd, 5e-4);
  EXPECT_GT(r.mesh.signed_volume(), 0.0);
  EXPECT_LT(r.field_outside_fraction, 0.01);
}
