#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uwsr/assembly.hpp"
#include "uwsr/basis.hpp"
#include "uwsr/cloud.hpp"
#include "uwsr/divfree.hpp"
#include "uwsr/errors.hpp"
#include "uwsr/isosurface.hpp"
#include "uwsr/mollifier.hpp"
#include "uwsr/orientation.hpp"
#include "uwsr/solver.hpp"
#include "uwsr/wavelet.hpp"

namespace uwsr {

struct PipelineConfig {
  int depth = 3;
  std::optional<double> epsilon;
  double alpha = 2.0;
  double reg_unit = 2.5e-5;
  RegularizationSource reg_source = RegularizationSource::Auto;
  std::string nh = "2M";
  double h_weight = 0.5;
  std::uint64_t seed = 0;
  int grid_depth = 6;
  int dim = 3;
  double tol = 1e-7;
  int max_iter = 2000;
  KernelFamily kernel_family = KernelFamily::TrigSqrt;
  std::optional<SolvePath> force_path;
  int resolution = 1024;
  double margin = 0.1;

  double resolved_epsilon() const { return epsilon.value_or(0.5 * std::ldexp(1.0, -depth)); }

  void validate() const {
    if (depth < 0 || depth > 8) throw std::invalid_argument("depth must lie in [0, 8]");
    if (resolved_epsilon() < 0.0 || !std::isfinite(resolved_epsilon()))
      throw std::invalid_argument("epsilon must be nonnegative");
    if (std::ldexp(resolved_epsilon(), std::max(depth - 1, 0)) >= 1.0)
      throw std::invalid_argument("epsilon too large: 2^(depth-1) * epsilon must stay below 1");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be nonnegative");
    if (reg_unit < 0.0) throw std::invalid_argument("regularization unit must be nonnegative");
    if (grid_depth < 1 || grid_depth > 10) throw std::invalid_argument("grid depth must lie in [1, 10]");
    if (dim != 2 && dim != 3) throw std::invalid_argument("mode must be 2d or 3d");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_iter < 1) throw std::invalid_argument("max-iter must be positive");
    if (!(margin >= 0.0 && margin < 0.5)) throw std::invalid_argument("margin must lie in [0, 0.5)");
  }
};

// "2M", "0.5M", "M" or an absolute count.
inline std::size_t resolve_homogeneous_count(const std::string& text, std::size_t points) {
  if (text.empty()) throw ParseError("empty homogeneous-constraint count");
  try {
    std::size_t used = 0;
    if (text.back() == 'M' || text.back() == 'm') {
      const std::string head = text.substr(0, text.size() - 1);
      const double mult = head.empty() ? 1.0 : std::stod(head, &used);
      if (!head.empty() && used != head.size()) throw ParseError("");
      if (!(mult >= 0.0) || !std::isfinite(mult)) throw ParseError("");
      return static_cast<std::size_t>(std::llround(mult * static_cast<double>(points)));
    }
    const long long n = std::stoll(text, &used);
    if (used != text.size() || n < 0) throw ParseError("");
    return static_cast<std::size_t>(n);
  } catch (const std::logic_error&) {
    throw ParseError("invalid homogeneous-constraint count '" + text + "'");
  } catch (const ParseError&) {
    throw ParseError("invalid homogeneous-constraint count '" + text + "'");
  }
}

template <int Dim>
struct PipelineResult {
  NormalizedCloud<Dim> cloud;
  Eigen::VectorXd mu;
  OrientedCloud<Dim> oriented;
  SolveReport solve;
  std::size_t bases = 0;
  std::size_t homogeneous_rows = 0;
  double homogeneous_scale = 1.0;
  double epsilon = 0.0;
  double corner_mean = 0.0;
  bool flipped = false;
  std::shared_ptr<const ImplicitField<Dim>> field;
  std::optional<double> iso;
  double point_deviation_iso = 0.0;
  double point_deviation_half = 0.0;
  std::optional<ImplicitGrid<Dim>> grid;
  double field_outside_fraction = 0.0;
  Mesh mesh;
  std::vector<Polyline> contours;
  std::vector<std::pair<std::string, double>> timings;
  double total_seconds = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

class StageClock {
public:
  explicit StageClock(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}

  template <class F>
  auto run(const std::string& name, F&& fn) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    auto record = [&] {
      sink_.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    };
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record();
      } else {
        auto out = fn();
        record();
        return out;
      }
    } catch (const StageError&) {
      throw;
    } catch (const ParseError& e) {
      throw StageError(name, StageError::Cause::Parse, e.what());
    } catch (const NumericError& e) {
      throw StageError(name, StageError::Cause::Numeric, e.what());
    } catch (const std::invalid_argument& e) {
      throw StageError(name, StageError::Cause::Parse, e.what());
    } catch (const std::exception& e) {
      throw StageError(name, StageError::Cause::Other, e.what());
    }
  }

private:
  std::vector<std::pair<std::string, double>>& sink_;
};

}  // namespace detail

// Normalize, tabulate, enumerate, assemble, solve, orient, and (when
// `extract` is set) recentre the iso-value and extract the surface.
template <int Dim>
PipelineResult<Dim> run_pipeline(const PipelineConfig& config, const PointList<Dim>& points, bool extract = true) {
  static_assert(Dim == 2 || Dim == 3);
  const auto t0 = std::chrono::steady_clock::now();
  PipelineResult<Dim> res;
  detail::StageClock clock(res.timings);

  clock.run("config", [&] { config.validate(); });
  res.epsilon = config.resolved_epsilon();
  res.cloud = clock.run("normalize", [&] { return normalize<Dim>(points, config.margin); });
  const std::size_t m = res.cloud.size();

  auto basis = clock.run("tables", [&] {
    auto table = std::make_shared<const WaveletTable>(cascade(build_filter(), config.resolution));
    return std::make_shared<const MollifiedBasis>(table, res.epsilon, std::max(config.depth, 1));
  });
  const BasisSet<Dim> bases =
      clock.run("bases", [&] { return enumerate_bases<Dim>(config.depth, res.cloud, res.epsilon); });
  res.bases = bases.size();

  const auto kernels = clock.run("kernels", [&] {
    const std::size_t nh = resolve_homogeneous_count(config.nh, m);
    return sample_kernels<Dim>(nh, config.seed, Box<Dim>::unit(), config.kernel_family);
  });
  res.homogeneous_rows = kernels.size();

  ConstraintSystem sys = clock.run("assembly", [&] {
    AssemblyOptions opts;
    opts.homogeneous_weight = config.h_weight;
    return assemble<Dim>(res.cloud, bases, *basis, std::span<const DivFreeKernel<Dim>>(kernels), opts);
  });
  res.homogeneous_scale = sys.homogeneous_scale;

  const SolveResult sol = clock.run("solve", [&] {
    SolverConfig sc;
    sc.cg.tolerance = config.tol;
    sc.cg.max_iterations = config.max_iter;
    sc.regularization.alpha = config.alpha;
    sc.regularization.unit = config.reg_unit;
    sc.regularization.source = config.reg_source;
    sc.force_path = config.force_path;
    return solve(sys, sc);
  });
  sys = ConstraintSystem{};
  res.solve = sol.report;
  res.mu = sol.mu;
  if (res.solve.hit_iteration_cap)
    res.warnings.push_back("CG hit the iteration cap before reaching the requested tolerance");

  clock.run("orientation", [&] {
    auto field = std::make_shared<ImplicitField<Dim>>(bases, *basis, res.cloud, res.mu);
    res.corner_mean = field->evaluate(cube_corners<Dim>()).mean();
    if (res.corner_mean > 0.5) {
      res.flipped = true;
      res.mu = -res.mu;
      field = std::make_shared<ImplicitField<Dim>>(bases, *basis, res.cloud, res.mu);
    }
    res.field = field;
    res.oriented = extract_normals<Dim>(res.mu, res.cloud);
    if (const auto n = res.oriented.degenerate_count(); n > 0)
      res.warnings.push_back(std::to_string(n) + " degenerate surface elements");
  });

  if (extract) {
    clock.run("isovalue", [&] {
      const Eigen::VectorXd at_points = res.field->evaluate(res.cloud.points);
      res.iso = at_points.mean();
      res.point_deviation_iso = (at_points.array() - *res.iso).abs().mean();
      res.point_deviation_half = (at_points.array() - 0.5).abs().mean();
    });
    res.grid = clock.run("grid", [&] {
      auto g = res.field->evaluate_grid(config.grid_depth);
      g.iso = *res.iso;
      return g;
    });
    res.field_outside_fraction = res.grid->fraction_outside();
    clock.run("extraction", [&] {
      if constexpr (Dim == 3) {
        res.mesh = marching_cubes(*res.grid, res.cloud.transform, &res.warnings);
      } else {
        res.contours = marching_squares_2d(*res.grid, res.cloud.transform, &res.warnings);
      }
    });
  }
  res.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

inline nlohmann::json config_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["depth"] = c.depth;
  j["epsilon"] = c.resolved_epsilon();
  j["alpha"] = c.alpha;
  j["reg_unit"] = c.reg_unit;
  j["reg_source"] = to_string(c.reg_source);
  j["nh"] = c.nh;
  j["h_weight"] = c.h_weight;
  j["seed"] = c.seed;
  j["grid_depth"] = c.grid_depth;
  j["mode"] = c.dim == 2 ? "2d" : "3d";
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["kernel_family"] = to_string(c.kernel_family);
  j["force_path"] = c.force_path ? nlohmann::json(to_string(*c.force_path)) : nlohmann::json(nullptr);
  j["resolution"] = c.resolution;
  j["margin"] = c.margin;
  return j;
}

template <int Dim>
nlohmann::json report_json(const PipelineConfig& config, const PipelineResult<Dim>& r,
                           std::optional<double> pgp = std::nullopt) {
  nlohmann::json j;
  j["schema"] = 1;
  j["mode"] = Dim == 2 ? "2d" : "3d";
  j["config"] = config_json(config);
  j["points"] = r.cloud.size();
  j["bases"] = r.bases;
  j["homogeneous_rows"] = r.homogeneous_rows;
  j["homogeneous_scale"] = r.homogeneous_scale;
  j["solve"] = {{"iterations", r.solve.iterations},
                {"relative_residual", r.solve.relative_residual},
                {"path", to_string(r.solve.path)},
                {"seconds", r.solve.seconds},
                {"hit_iteration_cap", r.solve.hit_iteration_cap}};
  j["sign"] = {{"corner_mean", r.corner_mean}, {"flipped", r.flipped}};
  j["degenerate_normals"] = r.oriented.degenerate_count();
  if (r.iso) {
    j["v_iso"] = *r.iso;
    j["mean_point_deviation"] = {{"v_iso", r.point_deviation_iso}, {"half", r.point_deviation_half}};
    j["field_outside_fraction"] = r.field_outside_fraction;
    if constexpr (Dim == 3) {
      j["mesh"] = {{"vertices", r.mesh.vertices.size()}, {"triangles", r.mesh.triangles.size()}};
    } else {
      std::size_t closed = 0;
      for (const auto& c : r.contours) closed += c.closed ? 1 : 0;
      j["contours"] = {{"count", r.contours.size()}, {"closed", closed}};
    }
  } else {
    j["v_iso"] = nullptr;
  }
  j["pgp90"] = pgp ? nlohmann::json(*pgp) : nlohmann::json(nullptr);
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [name, sec] : r.timings) t[name] = sec;
  j["timings"] = t;
  j["total_seconds"] = r.total_seconds;
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace uwsr
