#pragma once

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "uwsr/assembly.hpp"
#include "uwsr/errors.hpp"

namespace uwsr {

enum class SolvePath { MinimalNorm, LeastSquares };

inline const char* to_string(SolvePath p) { return p == SolvePath::MinimalNorm ? "min-norm" : "lsq"; }

inline SolvePath parse_solve_path(const std::string& s) {
  if (s == "min-norm") return SolvePath::MinimalNorm;
  if (s == "lsq") return SolvePath::LeastSquares;
  throw ParseError("unknown solve path '" + s + "'");
}

// Which Gram diagonal scales the ridge: diag(B^T B) or diag(B B^T).
enum class RegularizationSource { Auto, Columns, Rows };

inline const char* to_string(RegularizationSource s) {
  switch (s) {
    case RegularizationSource::Columns: return "columns";
    case RegularizationSource::Rows: return "rows";
    default: return "auto";
  }
}

inline RegularizationSource parse_regularization_source(const std::string& s) {
  if (s == "auto") return RegularizationSource::Auto;
  if (s == "columns") return RegularizationSource::Columns;
  if (s == "rows") return RegularizationSource::Rows;
  throw ParseError("unknown regularization source '" + s + "'");
}

struct SolveOptions {
  double tolerance = 1e-7;
  int max_iterations = 2000;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  SolvePath path = SolvePath::LeastSquares;
  double seconds = 0.0;
  bool hit_iteration_cap = false;
};

struct SolveResult {
  Eigen::VectorXd mu;
  SolveReport report;
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Jacobi-preconditioned conjugate gradients for a symmetric positive-definite
// operator given as a callable.
template <class Op>
CgResult conjugate_gradient(Op&& apply, const Eigen::VectorXd& rhs, const Eigen::VectorXd& diagonal,
                            const SolveOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (options.max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (diagonal.size() != rhs.size()) throw std::invalid_argument("preconditioner size mismatch");

  CgResult out;
  out.x = Eigen::VectorXd::Zero(rhs.size());
  const double rhs_norm = rhs.norm();
  if (!std::isfinite(rhs_norm)) throw NumericError("non-finite right-hand side");
  if (rhs_norm == 0.0) {
    out.converged = true;
    return out;
  }
  const Eigen::VectorXd inv_diag =
      diagonal.unaryExpr([](double d) { return d > 0.0 ? 1.0 / d : 1.0; });

  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  Eigen::VectorXd ap(rhs.size());
  for (int it = 1; it <= options.max_iterations; ++it) {
    ap = apply(p);
    const double curvature = p.dot(ap);
    if (!(curvature > 0.0) || !std::isfinite(curvature)) {
      std::ostringstream msg;
      msg << "CG breakdown at iteration " << it << ": curvature p^T A p = " << curvature
          << ", relative residual " << r.norm() / rhs_norm;
      throw NumericError(msg.str());
    }
    const double step = rz / curvature;
    out.x += step * p;
    r -= step * ap;
    out.iterations = it;
    out.relative_residual = r.norm() / rhs_norm;
    if (out.relative_residual <= options.tolerance) {
      out.converged = true;
      return out;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return out;
}

namespace detail {

inline SolveReport finish_report(const CgResult& cg, SolvePath path, std::chrono::steady_clock::time_point start) {
  SolveReport rep;
  rep.iterations = cg.iterations;
  rep.relative_residual = cg.relative_residual;
  rep.path = path;
  rep.hit_iteration_cap = !cg.converged;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace detail

// Regularized Gram operator v -> B B^T v + G v (rows) or B^T B v + G v
// (columns), never formed explicitly.
class GramOperator {
public:
  GramOperator(const Eigen::MatrixXd& b, const Eigen::VectorXd& gamma, bool rows) : b_(b), gamma_(gamma), rows_(rows) {
    if (gamma.size() != (rows ? b.rows() : b.cols())) throw std::invalid_argument("regularization size mismatch");
  }

  Eigen::Index size() const noexcept { return gamma_.size(); }

  Eigen::VectorXd operator()(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out;
    if (rows_) {
      const Eigen::VectorXd t = b_.transpose() * v;
      out.noalias() = b_ * t;
    } else {
      const Eigen::VectorXd t = b_ * v;
      out.noalias() = b_.transpose() * t;
    }
    out += gamma_.cwiseProduct(v);
    return out;
  }

  Eigen::VectorXd diagonal() const {
    if (rows_) return b_.rowwise().squaredNorm() + gamma_;
    return b_.colwise().squaredNorm().transpose() + gamma_;
  }

private:
  const Eigen::MatrixXd& b_;
  const Eigen::VectorXd& gamma_;
  bool rows_;
};

// mu = B^T xi with (B B^T + G) xi = b; G is a diagonal over the rows.
inline SolveResult solve_minimal_norm(const Eigen::MatrixXd& b_mat, const Eigen::VectorXd& rhs,
                                      const Eigen::VectorXd& gamma, const SolveOptions& options = {}) {
  if (rhs.size() != b_mat.rows() || gamma.size() != b_mat.rows())
    throw std::invalid_argument("minimal-norm solve: dimension mismatch");
  const auto start = std::chrono::steady_clock::now();
  const GramOperator op(b_mat, gamma, true);
  const CgResult cg = conjugate_gradient(op, rhs, op.diagonal(), options);
  SolveResult res;
  res.mu = b_mat.transpose() * cg.x;
  res.report = detail::finish_report(cg, SolvePath::MinimalNorm, start);
  return res;
}

// (B^T B + G) mu = B^T b; G is a diagonal over the unknowns.
inline SolveResult solve_least_squares(const Eigen::MatrixXd& b_mat, const Eigen::VectorXd& rhs,
                                       const Eigen::VectorXd& gamma, const SolveOptions& options = {}) {
  if (rhs.size() != b_mat.rows() || gamma.size() != b_mat.cols())
    throw std::invalid_argument("least-squares solve: dimension mismatch");
  const auto start = std::chrono::steady_clock::now();
  const GramOperator op(b_mat, gamma, false);
  const Eigen::VectorXd atb = b_mat.transpose() * rhs;
  const CgResult cg = conjugate_gradient(op, atb, op.diagonal(), options);
  SolveResult res;
  res.mu = cg.x;
  res.report = detail::finish_report(cg, SolvePath::LeastSquares, start);
  return res;
}

// Least squares whenever the system has at least as many rows as unknowns.
inline SolvePath choose_path(Eigen::Index rows, Eigen::Index cols) {
  return rows >= cols ? SolvePath::LeastSquares : SolvePath::MinimalNorm;
}

struct RegularizationOptions {
  double alpha = 2.0;
  // Unit of the ridge relative to alpha * 10 M * diag; 1 is the unscaled form.
  double unit = 2.5e-5;
  RegularizationSource source = RegularizationSource::Auto;
};

inline double regularization_factor(const RegularizationOptions& reg, Eigen::Index points) {
  return reg.alpha * 10.0 * static_cast<double>(points) * reg.unit;
}

inline RegularizationSource resolve_source(RegularizationSource s, SolvePath path) {
  if (s != RegularizationSource::Auto) return s;
  return path == SolvePath::LeastSquares ? RegularizationSource::Columns : RegularizationSource::Rows;
}

// factor * diag(B^T B) (columns) or factor * diag(B B^T) (rows).
inline Eigen::VectorXd regularization_diagonal(const Eigen::MatrixXd& b_mat, double factor,
                                               RegularizationSource source) {
  if (source == RegularizationSource::Rows) return factor * b_mat.rowwise().squaredNorm();
  return factor * b_mat.colwise().squaredNorm().transpose();
}

struct SolverConfig {
  SolveOptions cg;
  RegularizationOptions regularization;
  std::optional<SolvePath> force_path;
};

inline SolveResult solve(const ConstraintSystem& sys, const SolverConfig& config) {
  if (config.regularization.alpha < 0.0 || config.regularization.unit < 0.0)
    throw std::invalid_argument("regularization must be nonnegative");
  const SolvePath path = config.force_path.value_or(choose_path(sys.rows(), sys.unknowns()));
  const RegularizationSource source = resolve_source(config.regularization.source, path);
  const Eigen::Index needed = path == SolvePath::LeastSquares ? sys.unknowns() : sys.rows();
  const Eigen::Index have = source == RegularizationSource::Columns ? sys.unknowns() : sys.rows();
  if (needed != have)
    throw std::invalid_argument(std::string("regularization source '") + to_string(source) +
                                "' has the wrong dimension for the " + to_string(path) + " path");
  const double factor = regularization_factor(config.regularization, sys.points);
  const Eigen::VectorXd gamma = regularization_diagonal(sys.matrix, factor, source);
  SolveResult res = path == SolvePath::LeastSquares ? solve_least_squares(sys.matrix, sys.rhs, gamma, config.cg)
                                                    : solve_minimal_norm(sys.matrix, sys.rhs, gamma, config.cg);
  if (!res.mu.allFinite()) throw NumericError("solution contains non-finite entries");
  return res;
}

}  // namespace uwsr
