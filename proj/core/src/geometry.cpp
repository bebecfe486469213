#include "safenav/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace safenav {

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& issue : issues) {
    os << "[" << issue.code << "] " << issue.message;
    if (issue.index >= 0) os << " (index " << issue.index << ")";
    os << ", margin " << issue.margin << "\n";
  }
  return os.str();
}

int cholesky_failure_pivot(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  Matrix l = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) return j;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = s / l(j, j);
    }
  }
  return -1;
}

ValidationReport validate_shape_matrix(const Matrix& shape, int index) {
  ValidationReport report;
  if (shape.rows() != shape.cols() || shape.rows() == 0) {
    report.add("shape_not_square", "shape matrix must be square and nonempty",
               index);
    return report;
  }
  const double scale = shape.cwiseAbs().maxCoeff();
  const double asym = (shape - shape.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-12 * scale)) {
    report.add("shape_not_symmetric",
               "shape matrix asymmetry exceeds 1e-12 * max|A|", index, asym);
    return report;
  }
  const Matrix sym = 0.5 * (shape + shape.transpose());
  int pivot = cholesky_failure_pivot(sym);
  if (pivot >= 0) {
    report.add("shape_not_spd",
               "shape matrix is not positive definite (pivot " +
                   std::to_string(pivot) + " nonpositive)",
               index, sym(pivot, pivot));
  }
  return report;
}

Ellipsoid::Ellipsoid(Vector center, Matrix shape) : center_(std::move(center)) {
  if (center_.size() == 0) {
    throw std::invalid_argument("Ellipsoid: empty center");
  }
  if (shape.rows() != center_.size() || shape.cols() != center_.size()) {
    throw std::invalid_argument("Ellipsoid: shape/center dimension mismatch");
  }
  ValidationReport report = validate_shape_matrix(shape);
  if (!report.ok()) {
    throw std::invalid_argument("Ellipsoid: " + report.issues.front().message);
  }
  shape_ = 0.5 * (shape + shape.transpose());
}

double h_value(const Ellipsoid& e, const Vector& p) {
  if (p.size() != e.center().size()) {
    throw std::invalid_argument("h_value: point dimension mismatch");
  }
  const Vector d = p - e.center();
  return 1.0 - d.dot(e.shape() * d);
}

Vector h_gradient(const Ellipsoid& e, const Vector& p) {
  if (p.size() != e.center().size()) {
    throw std::invalid_argument("h_gradient: point dimension mismatch");
  }
  return -2.0 * (e.shape() * (p - e.center()));
}

Matrix h_hessian(const Ellipsoid& e) { return -2.0 * e.shape(); }

ValidationReport validate_path_plan(const PathPlan& plan,
                                    double interior_margin) {
  ValidationReport report;
  const int n_segments = plan.segments();
  if (n_segments < 1) {
    report.add("plan_empty", "path plan needs at least one ellipsoid segment");
    return report;
  }
  if (static_cast<int>(plan.waypoints.size()) != n_segments + 1) {
    report.add("plan_count_mismatch",
               "waypoint count must equal ellipsoid count + 1, got " +
                   std::to_string(plan.waypoints.size()) + " waypoints for " +
                   std::to_string(n_segments) + " ellipsoids");
    return report;
  }
  const int n = plan.dim();
  for (int i = 0; i <= n_segments; ++i) {
    if (plan.waypoints[i].size() != n) {
      report.add("plan_dim_mismatch",
                 "waypoint " + std::to_string(i) + " has wrong dimension", i);
      return report;
    }
  }
  for (int i = 0; i < n_segments; ++i) {
    if (plan.ellipsoids[i].dim() != n) {
      report.add("plan_dim_mismatch",
                 "ellipsoid " + std::to_string(i) + " has wrong dimension", i);
      return report;
    }
  }

  // Endpoint membership x_i, x_{i+1} in C_i.
  for (int i = 0; i < n_segments; ++i) {
    const double h_start = h_value(plan.ellipsoids[i], plan.waypoints[i]);
    const double h_end = h_value(plan.ellipsoids[i], plan.waypoints[i + 1]);
    if (h_start < 0.0) {
      report.add("segment_membership",
                 "waypoint " + std::to_string(i) + " lies outside ellipsoid " +
                     std::to_string(i),
                 i, h_start);
    }
    if (h_end < 0.0) {
      report.add("segment_membership",
                 "waypoint " + std::to_string(i + 1) +
                     " lies outside ellipsoid " + std::to_string(i),
                 i, h_end);
    }
  }

  // Interior waypoints must sit strictly inside both adjacent ellipsoids,
  // otherwise the switching region around them is empty.
  for (int i = 1; i < n_segments; ++i) {
    const double h_prev = h_value(plan.ellipsoids[i - 1], plan.waypoints[i]);
    const double h_next = h_value(plan.ellipsoids[i], plan.waypoints[i]);
    if (!(h_prev > interior_margin)) {
      report.add("strict_interior",
                 "strict interior violated: waypoint " + std::to_string(i) +
                     " not inside ellipsoid " + std::to_string(i - 1),
                 i, h_prev);
    }
    if (!(h_next > interior_margin)) {
      report.add("strict_interior",
                 "strict interior violated: waypoint " + std::to_string(i) +
                     " not inside ellipsoid " + std::to_string(i),
                 i, h_next);
    }
  }
  return report;
}

}  // namespace safenav
