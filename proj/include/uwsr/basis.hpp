#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "uwsr/cloud.hpp"
#include "uwsr/mollifier.hpp"
#include "uwsr/wavelet.hpp"

namespace uwsr {

// Tensor-product basis function: bit d of `type` selects psi (1) or phi (0)
// on axis d. type 0 is the scaling layer.
template <int Dim>
struct BasisIndex {
  unsigned type = 0;
  int level = 0;
  std::array<std::int64_t, Dim> k{};

  bool is_scaling() const noexcept { return type == 0; }
  bool wavelet_on(int d) const noexcept { return ((type >> d) & 1u) != 0; }

  // Axis carrying the antiderivative factor of the divergence field.
  int integral_axis() const noexcept {
    for (int d = 0; d < Dim; ++d)
      if (wavelet_on(d)) return d;
    return 0;
  }

  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

// All bases sharing (level, type); their translations form a box.
template <int Dim>
struct BasisFamily {
  int level = 0;
  unsigned type = 0;
  std::array<std::int64_t, Dim> k_min{};
  std::array<std::int64_t, Dim> k_count{};
  std::size_t offset = 0;

  bool is_scaling() const noexcept { return type == 0; }
  bool wavelet_on(int d) const noexcept { return ((type >> d) & 1u) != 0; }
  int integral_axis() const noexcept { return BasisIndex<Dim>{type, level, {}}.integral_axis(); }

  std::size_t size() const noexcept {
    std::size_t n = 1;
    for (auto c : k_count) n *= static_cast<std::size_t>(c);
    return n;
  }

  // Row-major flattening, last axis fastest.
  std::array<std::size_t, Dim> strides() const noexcept {
    std::array<std::size_t, Dim> s{};
    std::size_t acc = 1;
    for (int d = Dim - 1; d >= 0; --d) {
      s[d] = acc;
      acc *= static_cast<std::size_t>(k_count[d]);
    }
    return s;
  }
};

// Translation range [first, last] along one axis at level j for which the
// support [k, k+7]/2^j meets [lo - eps, hi + eps].
inline std::array<std::int64_t, 2> translation_range(int level, double lo, double hi, double epsilon) {
  const double s = std::ldexp(1.0, level);
  const auto first = static_cast<std::int64_t>(std::ceil(s * (lo - epsilon))) - WaveletTable::kSupport;
  const auto last = static_cast<std::int64_t>(std::floor(s * (hi + epsilon)));
  return {first, last};
}

template <int Dim>
class BasisSet {
public:
  BasisSet() = default;
  explicit BasisSet(std::vector<BasisFamily<Dim>> families) : families_(std::move(families)) {
    std::size_t offset = 0;
    for (auto& f : families_) {
      f.offset = offset;
      offset += f.size();
    }
    size_ = offset;
  }

  std::size_t size() const noexcept { return size_; }
  const std::vector<BasisFamily<Dim>>& families() const noexcept { return families_; }

  int max_level() const noexcept {
    int m = 0;
    for (const auto& f : families_) m = std::max(m, f.level);
    return m;
  }

  BasisIndex<Dim> at(std::size_t flat) const {
    for (const auto& f : families_) {
      if (flat < f.offset + f.size()) {
        std::size_t r = flat - f.offset;
        BasisIndex<Dim> b{f.type, f.level, {}};
        const auto st = f.strides();
        for (int d = 0; d < Dim; ++d) {
          b.k[d] = f.k_min[d] + static_cast<std::int64_t>(r / st[d]);
          r %= st[d];
        }
        return b;
      }
    }
    throw std::out_of_range("basis index out of range");
  }

  std::vector<BasisIndex<Dim>> indices() const {
    std::vector<BasisIndex<Dim>> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(at(i));
    return out;
  }

private:
  std::vector<BasisFamily<Dim>> families_;
  std::size_t size_ = 0;
};

// Scaling layer at level 0 plus wavelet layers 0..max_level-1 with every
// nonzero type, restricted to supports meeting the eps-dilated bounds.
template <int Dim>
BasisSet<Dim> enumerate_bases(int max_level, const Box<Dim>& bounds, double epsilon) {
  if (max_level < 0) throw std::invalid_argument("maximum level must be nonnegative");
  if (epsilon < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
  std::vector<BasisFamily<Dim>> families;
  auto make = [&](int level, unsigned type) {
    BasisFamily<Dim> f;
    f.level = level;
    f.type = type;
    for (int d = 0; d < Dim; ++d) {
      const auto r = translation_range(level, bounds.lo[d], bounds.hi[d], epsilon);
      f.k_min[d] = r[0];
      f.k_count[d] = std::max<std::int64_t>(0, r[1] - r[0] + 1);
    }
    return f;
  };
  families.push_back(make(0, 0u));
  for (int j = 0; j < max_level; ++j)
    for (unsigned e = 1; e < (1u << Dim); ++e) families.push_back(make(j, e));
  return BasisSet<Dim>(std::move(families));
}

template <int Dim>
BasisSet<Dim> enumerate_bases(int max_level, const NormalizedCloud<Dim>& cloud, double epsilon) {
  return enumerate_bases<Dim>(max_level, cloud.bounds(), epsilon);
}

// Unmollified tensor-product basis value.
template <int Dim>
double basis_value(const BasisIndex<Dim>& b, const WaveletTable& table, const Vec<Dim>& x) {
  double v = 1.0;
  for (int d = 0; d < Dim && v != 0.0; ++d)
    v *= table.evaluate(b.wavelet_on(d) ? WaveletKind::Psi : WaveletKind::Phi, b.level, b.k[d], x[d]);
  return v;
}

// Mollified tensor-product basis value.
template <int Dim>
double mollified_basis_value(const BasisIndex<Dim>& b, const MollifiedBasis& mb, const Vec<Dim>& x) {
  double v = 1.0;
  for (int d = 0; d < Dim && v != 0.0; ++d)
    v *= mb.evaluate(b.wavelet_on(d) ? MollifiedKind::PsiBar : MollifiedKind::PhiBar, b.level, b.k[d], x[d]);
  return v;
}

// Per-axis factor kind of the divergence field of basis b.
template <int Dim>
MollifiedKind field_factor_kind(const BasisIndex<Dim>& b, int d) {
  if (d == b.integral_axis())
    return b.is_scaling() ? MollifiedKind::PhiBarIntegral : MollifiedKind::PsiBarIntegral;
  return b.wavelet_on(d) ? MollifiedKind::PsiBar : MollifiedKind::PhiBar;
}

// Vector field whose divergence is the mollified basis function; the only
// nonzero component is the antiderivative axis.
template <int Dim>
Vec<Dim> field_A(const BasisIndex<Dim>& b, const MollifiedBasis& mb, const Vec<Dim>& x) {
  double v = 1.0;
  for (int d = 0; d < Dim && v != 0.0; ++d) v *= mb.evaluate(field_factor_kind(b, d), b.level, b.k[d], x[d]);
  Vec<Dim> out = Vec<Dim>::Zero();
  out[b.integral_axis()] = v;
  return out;
}

}  // namespace uwsr
