#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "support.hpp"

using namespace uwsr;

namespace {

template <int Dim>
PointList<Dim> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointList<Dim> out(n);
  for (auto& p : out)
    for (int d = 0; d < Dim; ++d) p[d] = u(rng);
  return out;
}

SampledSurface fibonacci_samples(std::size_t n, double radius) {
  SampledSurface s;
  s.samples = test::fibonacci_sphere(n, radius, Vec<3>::Zero()).points;
  return s;
}

Mesh unit_square() {
  Mesh m;
  m.vertices = {Vec<3>(0, 0, 0), Vec<3>(1, 0, 0), Vec<3>(1, 1, 0), Vec<3>(0, 1, 0)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace

TEST(KdTree, MatchesBruteForce3d) {
  const auto pts = random_points<3>(2000, 1);
  const KdTree<3> tree{std::span<const Vec<3>>(pts)};
  EXPECT_EQ(tree.size(), pts.size());
  for (const auto& q : random_points<3>(300, 2)) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::min(best, (p - q).squaredNorm());
    const auto [d, i] = tree.nearest(q);
    EXPECT_DOUBLE_EQ(d, best);
    EXPECT_DOUBLE_EQ((pts[i] - q).squaredNorm(), best);
  }
}

TEST(KdTree, MatchesBruteForce2dWithDuplicates) {
  auto pts = random_points<2>(500, 3);
  pts.insert(pts.end(), pts.begin(), pts.begin() + 100);
  const KdTree<2> tree{std::span<const Vec<2>>(pts)};
  for (const auto& q : random_points<2>(200, 4)) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::min(best, (p - q).squaredNorm());
    EXPECT_DOUBLE_EQ(tree.nearest(q).first, best);
  }
  EXPECT_EQ(tree.nearest(pts[7]).first, 0.0);
}

TEST(KdTree, EmptyRejected) {
  EXPECT_THROW(KdTree<3>(std::span<const Vec<3>>()), std::invalid_argument);
}

TEST(SampleMesh, SingleTriangleSamplesInside) {
  Mesh m;
  m.vertices = {Vec<3>(0, 0, 0), Vec<3>(2, 0, 0), Vec<3>(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  const auto s = sample_mesh(m, 5000, 7);
  ASSERT_EQ(s.samples.size(), 5000u);
  Vec<3> mean = Vec<3>::Zero();
  for (const auto& p : s.samples) {
    EXPECT_EQ(p.z(), 0.0);
    EXPECT_GE(p.x(), -1e-15);
    EXPECT_GE(p.y(), -1e-15);
    EXPECT_LE(p.x() / 2.0 + p.y(), 1.0 + 1e-12);
    mean += p;
  }
  mean /= 5000.0;
  EXPECT_NEAR(mean.x(), 2.0 / 3.0, 0.02);
  EXPECT_NEAR(mean.y(), 1.0 / 3.0, 0.01);
}

TEST(SampleMesh, UnitSquareUniform) {
  const auto s = sample_mesh(unit_square(), 20000, 1);
  Vec<3> mean = Vec<3>::Zero();
  std::size_t upper = 0;
  for (const auto& p : s.samples) {
    mean += p;
    upper += p.y() > p.x() ? 1 : 0;
  }
  mean /= 20000.0;
  EXPECT_NEAR(mean.x(), 0.5, 0.01);
  EXPECT_NEAR(mean.y(), 0.5, 0.01);
  EXPECT_NEAR(static_cast<double>(upper) / 20000.0, 0.5, 0.015);
}

TEST(SampleMesh, Errors) {
  EXPECT_THROW(sample_mesh(unit_square(), 0, 1), std::invalid_argument);
  EXPECT_THROW(sample_mesh(Mesh{}, 10, 1), std::invalid_argument);
  Mesh flat;
  flat.vertices = {Vec<3>(0, 0, 0), Vec<3>(1, 0, 0), Vec<3>(2, 0, 0)};
  flat.triangles = {{0, 1, 2}};
  EXPECT_THROW(sample_mesh(flat, 10, 1), std::invalid_argument);
}

TEST(SampleMesh, Deterministic) {
  const auto a = sample_mesh(sphere_mesh(2), 500, 11, "a");
  const auto b = sample_mesh(sphere_mesh(2), 500, 11, "b");
  const auto c = sample_mesh(sphere_mesh(2), 500, 12);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
  EXPECT_EQ(a.source, "a");
}

TEST(Chamfer, IdenticalSetsAreZero) {
  const auto s = sample_mesh(sphere_mesh(3), 3000, 1);
  EXPECT_EQ(chamfer(s, s).cd, 0.0);
}

TEST(Chamfer, Symmetric) {
  const auto a = sample_mesh(sphere_mesh(3), 2000, 1);
  const auto b = sample_mesh(torus_mesh(32, 16), 2500, 2);
  EXPECT_DOUBLE_EQ(chamfer(a, b).cd, chamfer(b, a).cd);
}

TEST(Chamfer, MonotoneUnderTranslation) {
  const auto a = sample_mesh(sphere_mesh(3), 2000, 1);
  double previous = -1.0;
  for (double shift : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    SampledSurface b = a;
    for (auto& p : b.samples) p.x() += shift;
    const double cd = chamfer(a, b).cd;
    EXPECT_GT(cd, previous);
    previous = cd;
  }
}

TEST(Chamfer, ConcentricSpheresTwoDeltaSquared) {
  for (double delta : {0.005, 0.01, 0.05}) {
    const auto a = fibonacci_samples(20000, 1.0);
    const auto b = fibonacci_samples(20000, 1.0 + delta);
    EXPECT_NEAR(chamfer(a, b).cd, 2.0 * delta * delta, 0.1 * 2.0 * delta * delta);
  }
}

TEST(Chamfer, ScaleNormalization) {
  const auto a = fibonacci_samples(4000, 1.0);
  const auto b = fibonacci_samples(4000, 1.1);
  const auto raw = chamfer(a, b);
  const auto unit = chamfer(a, b, 2.0 * std::sqrt(3.0));
  EXPECT_NEAR(unit.cd, raw.cd / 12.0, 1e-15);
  EXPECT_NEAR(unit.cd_x1e4, unit.cd * 1e4, 1e-12);
  EXPECT_THROW(chamfer(a, b, 0.0), std::invalid_argument);
  EXPECT_THROW(chamfer(a, SampledSurface{}), std::invalid_argument);
}

TEST(Pgp, FractionWithinNinetyDegrees) {
  PointList<3> truth(4, Vec<3>(0, 0, 1));
  PointList<3> est{Vec<3>(0, 0, 1), Vec<3>(1, 0, 0.01), Vec<3>(0, 1, -0.01), Vec<3>(0, 0, -1)};
  EXPECT_DOUBLE_EQ(pgp90<3>(std::span<const Vec<3>>(est), std::span<const Vec<3>>(truth)), 0.5);
}

TEST(AnalyticMeshes, SphereAndTorusGeometry) {
  const Mesh s = sphere_mesh(4);
  EXPECT_NEAR(s.area(), 4.0 * kPi, 0.01 * 4.0 * kPi);
  EXPECT_NEAR(s.signed_volume(), 4.0 / 3.0 * kPi, 0.01 * 4.0 / 3.0 * kPi);
  const Mesh t = torus_mesh(128, 64);
  EXPECT_NEAR(t.area(), 4.0 * kPi * kPi * 0.4, 0.01 * 4.0 * kPi * kPi * 0.4);
  EXPECT_NEAR(std::abs(t.signed_volume()), 2.0 * kPi * kPi * 0.16, 0.01 * 2.0 * kPi * kPi * 0.16);
}
