#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "support.hpp"

using namespace uwsr;

namespace {

// Trapezoid integral of a table sampled at 1/resolution.
double table_integral(const std::vector<double>& v, int resolution) {
  double s = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) s += 0.5 * (v[i - 1] + v[i]);
  return s / resolution;
}

}  // namespace

TEST(Filter, SumsToSqrtTwo) {
  const QmfFilter f = build_filter();
  double s = 0.0;
  for (double h : f.h) s += h;
  EXPECT_NEAR(s, std::sqrt(2.0), 1e-12);
}

TEST(Filter, ShiftOrthonormality) {
  const QmfFilter f = build_filter();
  for (int m = 0; m <= 3; ++m) {
    double s = 0.0;
    for (int k = 0; k < 8; ++k) s += f.scaling(k) * f.scaling(k + 2 * m);
    EXPECT_NEAR(s, m == 0 ? 1.0 : 0.0, 1e-12) << "shift " << m;
  }
}

TEST(Filter, FourVanishingMoments) {
  const QmfFilter f = build_filter();
  for (int p = 0; p < 4; ++p) {
    double s = 0.0;
    for (int k = 0; k < 8; ++k) s += ((k % 2 == 0) ? 1.0 : -1.0) * std::pow(k, p) * f.scaling(k);
    EXPECT_NEAR(s, 0.0, 1e-10) << "moment " << p;
  }
}

TEST(Filter, QuadratureMirror) {
  const QmfFilter f = build_filter();
  EXPECT_DOUBLE_EQ(f.wavelet(0), f.scaling(1));
  EXPECT_DOUBLE_EQ(f.wavelet(1), -f.scaling(0));
  EXPECT_EQ(f.wavelet(2), 0.0);
  EXPECT_EQ(f.wavelet(-7), 0.0);
  EXPECT_NE(f.wavelet(-6), 0.0);
  for (int m = -3; m <= 3; ++m) {
    double s = 0.0;
    for (int k = -8; k < 10; ++k) s += f.wavelet(k) * f.scaling(k + 2 * m);
    EXPECT_NEAR(s, 0.0, 1e-12) << "shift " << m;
  }
}

TEST(Cascade, RejectsBadResolution) {
  EXPECT_THROW(cascade(build_filter(), 32), std::invalid_argument);
  EXPECT_THROW(cascade(build_filter(), 1000), std::invalid_argument);
}

TEST(Cascade, CoarseTableIntegralsAndSupport) {
  const WaveletTable t = cascade(build_filter(), 256);
  EXPECT_NEAR(table_integral(t.phi(), 256), 1.0, 1e-8);
  EXPECT_EQ(t.sample(WaveletKind::Phi, -0.1), 0.0);
  EXPECT_EQ(t.sample(WaveletKind::Phi, 7.1), 0.0);
  EXPECT_NEAR(t.phi().front(), 0.0, 1e-12);
  EXPECT_NEAR(t.phi().back(), 0.0, 1e-12);
  EXPECT_GT(t.cascade_iterations(), 0);
}

TEST(Cascade, UnitShiftOrthogonality) {
  const WaveletTable t = cascade(build_filter(), 256);
  const auto& phi = t.phi();
  double s = 0.0;
  for (std::size_t i = 256; i < phi.size(); ++i) s += phi[i] * phi[i - 256];
  EXPECT_NEAR(s / 256.0, 0.0, 1e-6);
}

TEST(Cascade, FineTableMoments) {
  const auto t = test::shared_table();
  EXPECT_NEAR(table_integral(t->phi(), 1024), 1.0, 1e-8);
  EXPECT_NEAR(table_integral(t->psi(), 1024), 0.0, 1e-8);
  EXPECT_NEAR(t->psi_integral().back(), 0.0, 1e-8);
  EXPECT_EQ(t->psi_integral().front(), 0.0);
  EXPECT_NEAR(t->sample(WaveletKind::PsiIntegral, 7.5), 0.0, 1e-8);
}

TEST(Cascade, TwoScaleRelations) {
  const auto t = test::shared_table();
  const QmfFilter f = build_filter();
  double phi_err = 0.0, psi_err = 0.0;
  for (int i = 0; i <= 7 * 1024; i += 3) {
    const double x = i / 1024.0;
    double phi = 0.0, psi = 0.0;
    for (int k = 0; k < 8; ++k) phi += f.scaling(k) * t->sample(WaveletKind::Phi, 2.0 * x - k);
    for (int k = -6; k <= 1; ++k) psi += f.wavelet(k) * t->sample(WaveletKind::Phi, 2.0 * x - (k + 6));
    phi_err = std::max(phi_err, std::abs(std::sqrt(2.0) * phi - t->sample(WaveletKind::Phi, x)));
    psi_err = std::max(psi_err, std::abs(std::sqrt(2.0) * psi - t->sample(WaveletKind::Psi, x)));
  }
  EXPECT_LT(phi_err, 1e-8);
  EXPECT_LT(psi_err, 1e-8);
}

TEST(Cascade, PartitionOfUnity) {
  const auto t = test::shared_table();
  for (double x : {0.0, 0.123, 0.5, 0.77, 0.9991}) {
    double s = 0.0;
    for (int k = -7; k <= 1; ++k) s += t->sample(WaveletKind::Phi, x - k);
    EXPECT_NEAR(s, 1.0, 1e-6) << "x = " << x;
  }
}

TEST(Cascade, FineTableWithinTenSeconds) {
  const auto start = std::chrono::steady_clock::now();
  const WaveletTable t = cascade(build_filter(), 1024);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(sec, 10.0);
  EXPECT_EQ(t.phi().size(), 7u * 1024u + 1u);
}

TEST(Evaluate, OutsideSupportIsZero) {
  const auto t = test::shared_table();
  EXPECT_EQ(t->evaluate(WaveletKind::Psi, 0, 0, 8.0), 0.0);
  EXPECT_EQ(t->evaluate(WaveletKind::Psi, 0, 0, -0.5), 0.0);
  EXPECT_EQ(t->evaluate(WaveletKind::Phi, 2, 3, 0.5), 0.0);
}

TEST(Evaluate, DilationAndTranslation) {
  const auto t = test::shared_table();
  for (double x : {0.1, 0.37, 1.2, 2.9}) {
    EXPECT_NEAR(t->evaluate(WaveletKind::Phi, 1, 0, x), std::sqrt(2.0) * t->sample(WaveletKind::Phi, 2.0 * x), 1e-14);
    EXPECT_NEAR(t->evaluate(WaveletKind::Psi, 2, 3, x), 2.0 * t->sample(WaveletKind::Psi, 4.0 * x - 3.0), 1e-14);
    EXPECT_NEAR(t->evaluate(WaveletKind::PsiIntegral, 2, -1, x),
                0.5 * t->sample(WaveletKind::PsiIntegral, 4.0 * x + 1.0), 1e-14);
  }
}

TEST(Evaluate, PairwiseOrthonormality) {
  const auto t = test::shared_table();
  struct Fn {
    WaveletKind kind;
    int j;
    int k;
  };
  const std::vector<Fn> fns{{WaveletKind::Phi, 0, -3}, {WaveletKind::Phi, 0, 0}, {WaveletKind::Phi, 0, 2},
                            {WaveletKind::Psi, 0, -2}, {WaveletKind::Psi, 0, 0}, {WaveletKind::Psi, 0, 1},
                            {WaveletKind::Psi, 1, -1}, {WaveletKind::Psi, 1, 2}, {WaveletKind::Psi, 2, 0},
                            {WaveletKind::Psi, 2, 5}, {WaveletKind::Psi, 3, 4}, {WaveletKind::Psi, 3, 9}};
  const double lo = -8.0, hi = 16.0, h = 1.0 / (8.0 * 1024.0);
  const auto n = static_cast<std::size_t>((hi - lo) / h) + 1;
  std::vector<std::vector<double>> samples;
  for (const auto& f : fns) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = t->evaluate(f.kind, f.j, f.k, lo + h * static_cast<double>(i));
    samples.push_back(std::move(v));
  }
  for (std::size_t a = 0; a < fns.size(); ++a)
    for (std::size_t b = a; b < fns.size(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += samples[a][i] * samples[b][i];
      s *= h;
      EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-5) << "pair " << a << ", " << b;
    }
}
