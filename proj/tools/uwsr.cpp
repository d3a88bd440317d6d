#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "uwsr/uwsr.hpp"

namespace fs = std::filesystem;

namespace {

struct PipelineFlags {
  uwsr::PipelineConfig config;
  std::string input;
  std::string output_dir = ".";
  std::string mode = "3d";
  std::string kernel_family = "trig-sqrt";
  std::string force_path;
  std::string reg_source = "auto";
  std::optional<double> epsilon;
};

void add_pipeline_flags(CLI::App& cmd, PipelineFlags& f) {
  cmd.add_option("input", f.input, "Input point cloud (.xyz or .ply)")->required();
  cmd.add_option("--depth", f.config.depth, "Maximum wavelet level D_max")->capture_default_str();
  cmd.add_option("--epsilon", f.epsilon, "Mollifier width in unit-cube coordinates (default 0.5*2^-depth)");
  cmd.add_option("--alpha", f.config.alpha, "Regularization factor")->capture_default_str();
  cmd.add_option("--reg-unit", f.config.reg_unit, "Ridge unit multiplying alpha*10M*diag")->capture_default_str();
  cmd.add_option("--reg-source", f.reg_source, "Ridge diagonal: auto, columns (B^T B) or rows (B B^T)")
      ->check(CLI::IsMember({"auto", "columns", "rows"}))
      ->capture_default_str();
  cmd.add_option("--nh", f.config.nh, "Homogeneous constraints: count or multiple of M (e.g. 2M)")->capture_default_str();
  cmd.add_option("--h-weight", f.config.h_weight,
                 "Mean row norm of curl rows relative to the point rows (<= 0 keeps raw rows)")
      ->capture_default_str();
  cmd.add_option("--seed", f.config.seed, "Kernel sampling seed")->capture_default_str();
  cmd.add_option("--grid-depth", f.config.grid_depth, "Extraction grid has 2^d+1 corners per axis")->capture_default_str();
  cmd.add_option("--mode", f.mode, "2d or 3d")->check(CLI::IsMember({"2d", "3d"}))->capture_default_str();
  cmd.add_option("--tol", f.config.tol, "CG relative residual tolerance")->capture_default_str();
  cmd.add_option("--max-iter", f.config.max_iter, "CG iteration cap")->capture_default_str();
  cmd.add_option("--kernel-family", f.kernel_family, "trig-sqrt or center")
      ->check(CLI::IsMember({"trig-sqrt", "center"}))
      ->capture_default_str();
  cmd.add_option("--force-path", f.force_path, "Force the solve path")->check(CLI::IsMember({"min-norm", "lsq"}));
  cmd.add_option("--output-dir", f.output_dir, "Directory for output artifacts")->capture_default_str();
}

uwsr::PipelineConfig finalize(PipelineFlags& f) {
  uwsr::PipelineConfig c = f.config;
  c.epsilon = f.epsilon;
  c.dim = f.mode == "2d" ? 2 : 3;
  c.kernel_family = uwsr::parse_kernel_family(f.kernel_family);
  c.reg_source = uwsr::parse_regularization_source(f.reg_source);
  if (!f.force_path.empty()) c.force_path = uwsr::parse_solve_path(f.force_path);
  c.validate();
  return c;
}

template <int Dim>
int run_pipeline_command(PipelineFlags& flags, bool extract) {
  const uwsr::PipelineConfig config = finalize(flags);
  const uwsr::PointFile input = uwsr::load_points(flags.input);
  const auto points = uwsr::project<Dim>(input.points);
  const auto result = uwsr::run_pipeline<Dim>(config, points, extract);

  std::optional<double> pgp;
  if (input.normals) pgp = uwsr::pgp90(result.oriented, uwsr::project<Dim>(*input.normals));
  const nlohmann::json report = uwsr::report_json(config, result, pgp);

  const fs::path dir(flags.output_dir);
  const std::string stem = fs::path(flags.input).stem().string();
  std::vector<std::pair<fs::path, std::string>> artifacts;
  artifacts.emplace_back(dir / (stem + "_oriented.ply"), uwsr::to_oriented_ply(result.oriented));
  if (extract) {
    if constexpr (Dim == 3) {
      artifacts.emplace_back(dir / (stem + "_mesh.obj"), uwsr::to_obj(result.mesh));
      artifacts.emplace_back(dir / (stem + "_mesh.ply"), uwsr::to_ply(result.mesh));
    } else {
      artifacts.emplace_back(dir / (stem + "_contours.svg"), uwsr::to_svg(result.contours, &result.oriented));
      artifacts.emplace_back(dir / (stem + "_contours.csv"), uwsr::to_csv(result.contours));
    }
  }
  artifacts.emplace_back(dir / (stem + "_report.json"), report.dump(2) + "\n");

  fs::create_directories(dir);
  for (const auto& [path, content] : artifacts) uwsr::write_file(path, content);

  std::cout << "points " << result.cloud.size() << ", bases " << result.bases << ", homogeneous rows "
            << result.homogeneous_rows << "\n"
            << "solve " << uwsr::to_string(result.solve.path) << ": " << result.solve.iterations
            << " iterations, relative residual " << result.solve.relative_residual << "\n";
  if (result.iso) std::cout << "v_iso " << *result.iso << "\n";
  if (pgp) std::cout << "pgp90 " << *pgp << "\n";
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& [path, content] : artifacts) std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int dispatch_pipeline(PipelineFlags& flags, bool extract) {
  return flags.mode == "2d" ? run_pipeline_command<2>(flags, extract) : run_pipeline_command<3>(flags, extract);
}

struct MetricsFlags {
  std::string recon, truth, oriented, truth_normals;
  std::size_t samples = 20000;
  std::uint64_t seed = 0;
  bool unit_diagonal = false;
};

int run_metrics(const MetricsFlags& f) {
  if (f.recon.empty() != f.truth.empty()) throw uwsr::ParseError("--recon and --truth must be given together");
  if (f.oriented.empty() != f.truth_normals.empty())
    throw uwsr::ParseError("--oriented and --truth-normals must be given together");
  if (f.recon.empty() && f.oriented.empty()) throw uwsr::ParseError("nothing to evaluate");
  nlohmann::json out;
  if (!f.recon.empty()) {
    const uwsr::Mesh recon = uwsr::load_mesh(f.recon);
    const uwsr::Mesh truth = uwsr::load_mesh(f.truth);
    const auto s1 = uwsr::sample_mesh(recon, f.samples, f.seed, f.recon);
    const auto s2 = uwsr::sample_mesh(truth, f.samples, f.seed + 1, f.truth);
    const double scale =
        f.unit_diagonal ? uwsr::bounding_box<3>(std::span<const Eigen::Vector3d>(truth.vertices)).diagonal() : 1.0;
    const auto cd = uwsr::chamfer(s1, s2, scale);
    out["cd"] = cd.cd;
    out["cd_x1e4"] = cd.cd_x1e4;
    out["unit_diagonal"] = f.unit_diagonal;
  }
  if (!f.oriented.empty()) {
    const auto est = uwsr::load_points(f.oriented);
    const auto truth = uwsr::load_points(f.truth_normals);
    if (!est.normals || !truth.normals) throw uwsr::ParseError("both point files must carry normals");
    out["pgp90"] = uwsr::pgp90<3>(std::span<const Eigen::Vector3d>(*est.normals),
                                  std::span<const Eigen::Vector3d>(*truth.normals));
  }
  std::cout << out.dump() << "\n";
  return 0;
}

struct PerturbFlags {
  std::string input, output;
  double noise = 0.005;
  std::uint64_t seed = 0;
};

int run_perturb(const PerturbFlags& f) {
  const auto in = uwsr::load_points(f.input);
  const auto noisy = uwsr::perturb(in.points, f.noise, f.seed);
  uwsr::write_file(f.output, uwsr::to_xyz(noisy, in.normals ? &*in.normals : nullptr));
  std::cout << "wrote " << f.output << "\n";
  return 0;
}

struct ShapeFlags {
  std::string shape = "sphere";
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  std::string output;
  std::string mesh;
};

int run_sample_shape(const ShapeFlags& f) {
  uwsr::ShapeSample s;
  std::optional<uwsr::Mesh> mesh;
  if (f.shape == "sphere") {
    s = uwsr::sample_sphere(f.count, f.seed);
    mesh = uwsr::sphere_mesh(5);
  } else if (f.shape == "torus") {
    s = uwsr::sample_torus(f.count, f.seed);
    mesh = uwsr::torus_mesh(256, 96);
  } else if (f.shape == "circle") {
    s = uwsr::sample_circle(f.count, f.seed);
  } else {
    s = uwsr::sample_rings(f.count, f.seed);
  }
  uwsr::write_file(f.output, uwsr::to_xyz(s.points, &s.normals));
  std::cout << "wrote " << f.output << "\n";
  if (!f.mesh.empty()) {
    if (!mesh) throw uwsr::ParseError("no reference mesh for planar shape '" + f.shape + "'");
    uwsr::write_file(f.mesh, uwsr::to_obj(*mesh));
    std::cout << "wrote " << f.mesh << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet surface reconstruction: orient point clouds and extract surfaces"};
  app.require_subcommand(1);

  PipelineFlags rec_flags, orient_flags;
  auto* rec = app.add_subcommand("reconstruct", "Orient a cloud and extract its surface");
  add_pipeline_flags(*rec, rec_flags);
  auto* orient = app.add_subcommand("orient", "Orient a cloud (stops after normals)");
  add_pipeline_flags(*orient, orient_flags);

  MetricsFlags met_flags;
  auto* met = app.add_subcommand("metrics", "Chamfer distance and/or PGP90");
  met->add_option("--recon", met_flags.recon, "Reconstructed mesh (.obj or .ply)");
  met->add_option("--truth", met_flags.truth, "Reference mesh (.obj or .ply)");
  met->add_option("--samples", met_flags.samples, "Samples per surface")->capture_default_str();
  met->add_option("--seed", met_flags.seed, "Sampling seed")->capture_default_str();
  met->add_flag("--unit-diagonal", met_flags.unit_diagonal, "Divide CD by the reference diagonal squared");
  met->add_option("--oriented", met_flags.oriented, "Oriented point cloud with normals");
  met->add_option("--truth-normals", met_flags.truth_normals, "Point cloud carrying ground-truth normals");

  PerturbFlags per_flags;
  auto* per = app.add_subcommand("perturb", "Add seeded isotropic Gaussian noise");
  per->add_option("input", per_flags.input, "Input point cloud")->required();
  per->add_option("output", per_flags.output, "Output .xyz")->required();
  per->add_option("--noise", per_flags.noise, "Sigma as a fraction of the bounding diagonal")->capture_default_str();
  per->add_option("--seed", per_flags.seed, "Noise seed")->capture_default_str();

  ShapeFlags shape_flags;
  auto* shp = app.add_subcommand("sample-shape", "Write an analytic test cloud with true normals");
  shp->add_option("--shape", shape_flags.shape, "sphere, torus, circle or rings")
      ->check(CLI::IsMember({"sphere", "torus", "circle", "rings"}))
      ->capture_default_str();
  shp->add_option("--count", shape_flags.count, "Number of points")->capture_default_str();
  shp->add_option("--seed", shape_flags.seed, "Sampling seed")->capture_default_str();
  shp->add_option("--output", shape_flags.output, "Output .xyz")->required();
  shp->add_option("--mesh", shape_flags.mesh, "Also write a reference mesh (.obj; sphere and torus)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : uwsr::kExitParse;
  }

  try {
    if (rec->parsed()) return dispatch_pipeline(rec_flags, true);
    if (orient->parsed()) return dispatch_pipeline(orient_flags, false);
    if (met->parsed()) return run_metrics(met_flags);
    if (per->parsed()) return run_perturb(per_flags);
    if (shp->parsed()) return run_sample_shape(shape_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return uwsr::exit_code(std::current_exception());
  }
  return 1;
}
