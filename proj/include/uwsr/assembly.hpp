#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwsr/basis.hpp"
#include "uwsr/cloud.hpp"
#include "uwsr/divfree.hpp"
#include "uwsr/errors.hpp"
#include "uwsr/mollifier.hpp"

namespace uwsr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Nonzero run of one 1-D factor over a family's translation range; `start`
// is relative to the range's first translation.
struct FactorWindow {
  std::int64_t start = 0;
  std::vector<double> values;
};

namespace detail {

// Support of f(t) in level coordinates; integral kinds extend to +infinity.
struct Support {
  double lower;
  double upper;
  bool tail;
};

inline FactorWindow make_window(const Support& sup, int level, std::int64_t k_min, std::int64_t k_count, double x,
                                auto&& eval) {
  FactorWindow w;
  const double t = std::ldexp(x, level);
  std::int64_t lo = sup.tail ? k_min : static_cast<std::int64_t>(std::floor(t - sup.upper));
  std::int64_t hi = static_cast<std::int64_t>(std::ceil(t - sup.lower));
  lo = std::max(lo, k_min);
  hi = std::min(hi, k_min + k_count - 1);
  if (hi < lo) return w;
  w.start = lo - k_min;
  w.values.resize(static_cast<std::size_t>(hi - lo + 1));
  std::size_t nnz = 0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double v = eval(k);
    w.values[static_cast<std::size_t>(k - lo)] = v;
    if (v != 0.0) ++nnz;
  }
  if (!sup.tail && nnz > static_cast<std::size_t>(std::ceil(sup.upper - sup.lower)))
    throw NumericError("basis sparsity bound exceeded at level " + std::to_string(level));
  return w;
}

template <int Dim, int D = 0, class F>
void tensor_loop(const std::array<const FactorWindow*, Dim>& w, const std::array<std::size_t, Dim>& strides,
                 std::size_t base, double prod, F& f) {
  const FactorWindow& win = *w[D];
  for (std::size_t i = 0; i < win.values.size(); ++i) {
    const double p = prod * win.values[i];
    if (p == 0.0) continue;
    const std::size_t idx = base + (static_cast<std::size_t>(win.start) + i) * strides[D];
    if constexpr (D + 1 == Dim) {
      f(idx, p);
    } else {
      tensor_loop<Dim, D + 1>(w, strides, idx, p, f);
    }
  }
}

}  // namespace detail

inline FactorWindow wavelet_window(const WaveletTable& table, WaveletKind kind, int level, std::int64_t k_min,
                                   std::int64_t k_count, double x) {
  const detail::Support sup{0.0, static_cast<double>(WaveletTable::kSupport), kind == WaveletKind::PsiIntegral};
  return detail::make_window(sup, level, k_min, k_count, x,
                             [&](std::int64_t k) { return table.evaluate(kind, level, k, x); });
}

inline FactorWindow mollified_window(const MollifiedBasis& mb, MollifiedKind kind, int level, std::int64_t k_min,
                                     std::int64_t k_count, double x) {
  const auto& t = mb.level(level);
  const bool tail = kind == MollifiedKind::PsiBarIntegral || kind == MollifiedKind::PhiBarIntegral;
  const detail::Support sup{t.lower(), t.upper(), tail};
  return detail::make_window(sup, level, k_min, k_count, x,
                             [&](std::int64_t k) { return mb.evaluate(kind, level, k, x); });
}

// Factored operators A (unknowns -> basis coefficients, built from the
// divergence fields at the points) and B_f (coefficients -> unmollified
// field values at queries), applied without forming either matrix.
template <int Dim>
class CoefficientOperator {
public:
  CoefficientOperator(const BasisSet<Dim>& bases, const MollifiedBasis& mb, std::span<const Vec<Dim>> points)
      : bases_(bases), table_(mb.base_ptr()), points_(points.size()) {
    levels_ = bases_.max_level() + 1;
    if (mb.levels() < levels_) throw std::invalid_argument("mollified tables missing for some levels");
    windows_.resize(points_ * static_cast<std::size_t>(levels_ * Dim * kKinds));
    for (std::size_t i = 0; i < points_; ++i) {
      for (const auto& f : bases_.families()) {
        for (int d = 0; d < Dim; ++d) {
          const auto kind = field_factor_kind(BasisIndex<Dim>{f.type, f.level, {}}, d);
          auto& w = window(i, f.level, d, kind);
          if (!w.values.empty() || w.start < 0) continue;
          w = mollified_window(mb, kind, f.level, f.k_min[d], f.k_count[d], points[i][d]);
          if (w.values.empty()) w.start = -1;
        }
      }
    }
  }

  const BasisSet<Dim>& bases() const noexcept { return bases_; }
  std::size_t points() const noexcept { return points_; }
  Eigen::Index unknowns() const noexcept { return static_cast<Eigen::Index>(Dim * points_); }

  // c = A mu
  Eigen::VectorXd coefficients(const Eigen::VectorXd& mu) const {
    check_unknowns(mu);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bases_.size()));
    for (std::size_t i = 0; i < points_; ++i) {
      for (const auto& f : bases_.families()) {
        const int a = f.integral_axis();
        const double m = mu[static_cast<Eigen::Index>(Dim * i + a)];
        if (m == 0.0) continue;
        auto add = [&](std::size_t idx, double p) { c[static_cast<Eigen::Index>(f.offset + idx)] += m * p; };
        visit(i, f, add);
      }
    }
    return c;
  }

  // mu = A^T c
  Eigen::VectorXd coefficients_transpose(const Eigen::VectorXd& c) const {
    if (c.size() != static_cast<Eigen::Index>(bases_.size())) throw std::invalid_argument("coefficient size mismatch");
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(unknowns());
    for (std::size_t i = 0; i < points_; ++i) {
      for (const auto& f : bases_.families()) {
        double s = 0.0;
        auto acc = [&](std::size_t idx, double p) { s += c[static_cast<Eigen::Index>(f.offset + idx)] * p; };
        visit(i, f, acc);
        mu[static_cast<Eigen::Index>(Dim * i + f.integral_axis())] += s;
      }
    }
    return mu;
  }

  // B_f(Q) c
  Eigen::VectorXd evaluate(const Eigen::VectorXd& c, std::span<const Vec<Dim>> queries) const {
    if (c.size() != static_cast<Eigen::Index>(bases_.size())) throw std::invalid_argument("coefficient size mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(queries.size()));
    for (std::size_t q = 0; q < queries.size(); ++q) {
      double s = 0.0;
      for (const auto& f : bases_.families()) {
        std::array<FactorWindow, Dim> win;
        if (!query_windows(f, queries[q], win)) continue;
        auto acc = [&](std::size_t idx, double p) { s += c[static_cast<Eigen::Index>(f.offset + idx)] * p; };
        run(win, f, acc);
      }
      out[static_cast<Eigen::Index>(q)] = s;
    }
    return out;
  }

  // B_f(Q)^T y
  Eigen::VectorXd evaluate_transpose(const Eigen::VectorXd& y, std::span<const Vec<Dim>> queries) const {
    if (y.size() != static_cast<Eigen::Index>(queries.size())) throw std::invalid_argument("query size mismatch");
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bases_.size()));
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const double yq = y[static_cast<Eigen::Index>(q)];
      if (yq == 0.0) continue;
      for (const auto& f : bases_.families()) {
        std::array<FactorWindow, Dim> win;
        if (!query_windows(f, queries[q], win)) continue;
        auto add = [&](std::size_t idx, double p) { c[static_cast<Eigen::Index>(f.offset + idx)] += yq * p; };
        run(win, f, add);
      }
    }
    return c;
  }

  // Largest number of nonzero A entries in any column (one point, one axis).
  std::size_t max_column_nonzeros() const {
    std::size_t best = 0;
    for (std::size_t i = 0; i < points_; ++i) {
      std::array<std::size_t, Dim> per_axis{};
      for (const auto& f : bases_.families()) {
        std::size_t n = 0;
        auto count = [&](std::size_t, double) { ++n; };
        visit(i, f, count);
        per_axis[f.integral_axis()] += n;
      }
      for (auto n : per_axis) best = std::max(best, n);
    }
    return best;
  }

private:
  static constexpr int kKinds = 4;

  FactorWindow& window(std::size_t i, int level, int d, MollifiedKind kind) {
    return windows_[((i * levels_ + level) * Dim + d) * kKinds + static_cast<int>(kind)];
  }
  const FactorWindow& window(std::size_t i, int level, int d, MollifiedKind kind) const {
    return windows_[((i * levels_ + level) * Dim + d) * kKinds + static_cast<int>(kind)];
  }

  template <class F>
  void visit(std::size_t i, const BasisFamily<Dim>& f, F& fn) const {
    if (f.size() == 0) return;
    std::array<const FactorWindow*, Dim> w{};
    const BasisIndex<Dim> b{f.type, f.level, {}};
    for (int d = 0; d < Dim; ++d) {
      w[d] = &window(i, f.level, d, field_factor_kind(b, d));
      if (w[d]->values.empty()) return;
    }
    detail::tensor_loop<Dim>(w, f.strides(), 0, 1.0, fn);
  }

  bool query_windows(const BasisFamily<Dim>& f, const Vec<Dim>& q, std::array<FactorWindow, Dim>& win) const {
    if (f.size() == 0) return false;
    for (int d = 0; d < Dim; ++d) {
      win[d] = wavelet_window(*table_, f.wavelet_on(d) ? WaveletKind::Psi : WaveletKind::Phi, f.level, f.k_min[d],
                              f.k_count[d], q[d]);
      if (win[d].values.empty()) return false;
    }
    return true;
  }

  template <class F>
  void run(const std::array<FactorWindow, Dim>& win, const BasisFamily<Dim>& f, F& fn) const {
    std::array<const FactorWindow*, Dim> w{};
    for (int d = 0; d < Dim; ++d) w[d] = &win[d];
    detail::tensor_loop<Dim>(w, f.strides(), 0, 1.0, fn);
  }

  void check_unknowns(const Eigen::VectorXd& mu) const {
    if (mu.size() != unknowns()) throw std::invalid_argument("unknown vector size mismatch");
  }

  BasisSet<Dim> bases_;
  std::shared_ptr<const WaveletTable> table_;
  std::size_t points_;
  int levels_ = 1;
  std::vector<FactorWindow> windows_;
};

// Dense M x (Dim M) block B_f(P) A(P), accumulated per family as a product of
// per-axis sums S_d(i,l) = sum_k u_k(p_i,d) v_k(p_l,d), processed in row
// blocks to bound memory.
template <int Dim>
Eigen::MatrixXd assemble_nonhomogeneous(std::span<const Vec<Dim>> points, const BasisSet<Dim>& bases,
                                        const MollifiedBasis& mb) {
  const auto m = static_cast<Eigen::Index>(points.size());
  const int levels = bases.max_level() + 1;
  if (mb.levels() < levels) throw std::invalid_argument("mollified tables missing for some levels");
  const WaveletTable& table = mb.base();

  // Factor tables per (level, axis): columns are translations.
  enum Factor { UPhi, UPsi, VPhiBar, VPsiBar, VPsiInt, VPhiInt, kFactors };
  std::vector<Eigen::MatrixXd> factors(static_cast<std::size_t>(levels * Dim * kFactors));
  auto factor = [&](int l, int d, int f) -> Eigen::MatrixXd& { return factors[(l * Dim + d) * kFactors + f]; };
  std::vector<std::array<std::int64_t, 2>> ranges(static_cast<std::size_t>(levels * Dim), {0, 0});
  std::vector<bool> level_used(static_cast<std::size_t>(levels), false);
  for (const auto& f : bases.families()) {
    level_used[f.level] = true;
    for (int d = 0; d < Dim; ++d) ranges[f.level * Dim + d] = {f.k_min[d], f.k_count[d]};
  }
  for (int l = 0; l < levels; ++l) {
    if (!level_used[l]) continue;
    for (int d = 0; d < Dim; ++d) {
      const auto [k0, kc] = ranges[l * Dim + d];
      for (int f = 0; f < kFactors; ++f) factor(l, d, f).setZero(m, kc);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double x = points[static_cast<std::size_t>(i)][d];
        for (std::int64_t c = 0; c < kc; ++c) {
          const std::int64_t k = k0 + c;
          factor(l, d, UPhi)(i, c) = table.evaluate(WaveletKind::Phi, l, k, x);
          factor(l, d, UPsi)(i, c) = table.evaluate(WaveletKind::Psi, l, k, x);
          factor(l, d, VPhiBar)(i, c) = mb.evaluate(MollifiedKind::PhiBar, l, k, x);
          factor(l, d, VPsiBar)(i, c) = mb.evaluate(MollifiedKind::PsiBar, l, k, x);
          factor(l, d, VPsiInt)(i, c) = mb.evaluate(MollifiedKind::PsiBarIntegral, l, k, x);
          factor(l, d, VPhiInt)(i, c) = mb.evaluate(MollifiedKind::PhiBarIntegral, l, k, x);
        }
      }
    }
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, Dim * m);
  const Eigen::Index block = std::max<Eigen::Index>(1, std::min<Eigen::Index>(m, 4'000'000 / std::max<Eigen::Index>(m, 1)));
  enum Combo { PhiPhi, PsiPsi, PsiInt, PhiInt, kCombos };
  constexpr std::array<std::array<int, 2>, kCombos> combo_factors{{{UPhi, VPhiBar}, {UPsi, VPsiBar}, {UPsi, VPsiInt}, {UPhi, VPhiInt}}};

  for (Eigen::Index r0 = 0; r0 < m; r0 += block) {
    const Eigen::Index nr = std::min(block, m - r0);
    std::vector<Eigen::MatrixXd> sums(static_cast<std::size_t>(levels * Dim * kCombos));
    auto sum = [&](int l, int d, int combo) -> const Eigen::MatrixXd& {
      auto& s = sums[(l * Dim + d) * kCombos + combo];
      if (s.size() == 0) {
        const auto& u = factor(l, d, combo_factors[combo][0]);
        const auto& v = factor(l, d, combo_factors[combo][1]);
        s.noalias() = u.middleRows(r0, nr) * v.transpose();
      }
      return s;
    };
    Eigen::MatrixXd prod(nr, m);
    for (const auto& f : bases.families()) {
      if (f.size() == 0) continue;
      const int a = f.integral_axis();
      for (int d = 0; d < Dim; ++d) {
        int combo;
        if (d == a) combo = f.is_scaling() ? PhiInt : PsiInt;
        else combo = f.wavelet_on(d) ? PsiPsi : PhiPhi;
        if (d == 0) prod = sum(f.level, d, combo);
        else prod.array() *= sum(f.level, d, combo).array();
      }
      for (Eigen::Index l = 0; l < m; ++l) out.col(Dim * l + a).segment(r0, nr) += prod.col(l);
    }
  }
  return out;
}

// Row r holds the concatenated F_r(p_i).
template <int Dim>
Eigen::MatrixXd assemble_homogeneous(std::span<const Vec<Dim>> points, std::span<const DivFreeKernel<Dim>> kernels) {
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd h(static_cast<Eigen::Index>(kernels.size()), Dim * m);
  for (std::size_t r = 0; r < kernels.size(); ++r)
    for (Eigen::Index i = 0; i < m; ++i) {
      const Vec<Dim> f = kernels[r](points[static_cast<std::size_t>(i)]);
      for (int d = 0; d < Dim; ++d) h(static_cast<Eigen::Index>(r), Dim * i + d) = f[d];
    }
  return h;
}

struct ConstraintSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  Eigen::Index points = 0;
  Eigen::Index homogeneous_rows = 0;
  double homogeneous_scale = 1.0;

  Eigen::Index rows() const noexcept { return matrix.rows(); }
  Eigen::Index unknowns() const noexcept { return matrix.cols(); }
};

struct AssemblyOptions {
  // Mean row norm of the homogeneous block relative to the non-homogeneous
  // block; nonpositive keeps the raw curl rows.
  double homogeneous_weight = 0.5;
};

inline double mean_row_norm(const Eigen::MatrixXd& m) {
  return m.rows() == 0 ? 0.0 : m.rowwise().norm().mean();
}

template <int Dim>
ConstraintSystem assemble(const NormalizedCloud<Dim>& cloud, const BasisSet<Dim>& bases, const MollifiedBasis& mb,
                          std::span<const DivFreeKernel<Dim>> kernels, const AssemblyOptions& options = {}) {
  if (cloud.size() == 0) throw std::invalid_argument("cannot assemble an empty cloud");
  const std::span<const Vec<Dim>> pts(cloud.points);
  const auto m = static_cast<Eigen::Index>(cloud.size());
  const auto nh = static_cast<Eigen::Index>(kernels.size());

  ConstraintSystem sys;
  sys.points = m;
  sys.homogeneous_rows = nh;
  sys.matrix.resize(m + nh, Dim * m);
  sys.matrix.topRows(m) = assemble_nonhomogeneous<Dim>(pts, bases, mb);
  if (nh > 0) {
    Eigen::MatrixXd h = assemble_homogeneous<Dim>(pts, kernels);
    if (options.homogeneous_weight > 0.0) {
      const double hn = mean_row_norm(h);
      if (hn > 0.0) sys.homogeneous_scale = options.homogeneous_weight * mean_row_norm(sys.matrix.topRows(m)) / hn;
      h *= sys.homogeneous_scale;
    }
    sys.matrix.bottomRows(nh) = h;
  }
  if (!sys.matrix.allFinite()) throw NumericError("assembled system contains non-finite entries");
  sys.rhs = Eigen::VectorXd::Zero(m + nh);
  sys.rhs.head(m).setConstant(0.5);
  return sys;
}

}  // namespace uwsr
