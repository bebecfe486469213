#pragma once

#include <Eigen/Dense>
#include <vector>

#include "safenav/validation.hpp"

namespace safenav {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Obstacle-free ellipsoid {p : (p - p0)^T A (p - p0) <= 1} with center p0 and
// symmetric positive definite shape matrix A. The construction symmetrizes A
// (asymmetry up to 1e-12 * max|A| is tolerated, anything worse throws) so all
// downstream quadratic forms see an exactly symmetric matrix.
class Ellipsoid {
 public:
  Ellipsoid(Vector center, Matrix shape);

  const Vector& center() const { return center_; }
  const Matrix& shape() const { return shape_; }
  int dim() const { return static_cast<int>(center_.size()); }

 private:
  Vector center_;
  Matrix shape_;
};

// Report-style checks for a candidate shape matrix (squareness, symmetry
// tolerance, positive definiteness via Cholesky pivots). `index` tags the
// issues with the ellipsoid's position in a sequence.
ValidationReport validate_shape_matrix(const Matrix& shape, int index = -1);

// Index of the first nonpositive Cholesky pivot, -1 when the matrix is SPD.
int cholesky_failure_pivot(const Matrix& a);

// h(p) = 1 - (p - p0)^T A (p - p0): 1 at the center, 0 on the boundary,
// negative outside.
double h_value(const Ellipsoid& e, const Vector& p);

// grad h(p) = -2 A (p - p0), returned as a column vector.
Vector h_gradient(const Ellipsoid& e, const Vector& p);

// Hessian of h, the constant matrix -2A.
Matrix h_hessian(const Ellipsoid& e);

// Waypoints x_0..x_N with one ellipsoid C_i per edge (x_i, x_{i+1}).
struct PathPlan {
  std::vector<Vector> waypoints;
  std::vector<Ellipsoid> ellipsoids;

  int segments() const { return static_cast<int>(ellipsoids.size()); }
  int dim() const {
    return waypoints.empty() ? 0 : static_cast<int>(waypoints.front().size());
  }
};

// Checks the path-plan invariants: counts, consistent dimensions, endpoint
// membership h_i(x_i) >= 0 and h_i(x_{i+1}) >= 0, and strict interior
// h_{i-1}(x_i) > interior_margin, h_i(x_i) > interior_margin for every
// interior waypoint (switching needs a nonempty overlap around x_i).
ValidationReport validate_path_plan(const PathPlan& plan,
                                    double interior_margin = 1e-9);

}  // namespace safenav
