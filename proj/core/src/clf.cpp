#include "safenav/clf.hpp"

#include <stdexcept>

namespace safenav {

namespace {

Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Definiteness via eigenvalues of the symmetric part; reports the offending
// extreme eigenvalue.
bool is_positive_definite(const Matrix& m, double* min_eig) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric_part(m));
  *min_eig = es.eigenvalues().minCoeff();
  return *min_eig > 0.0;
}

bool is_negative_definite(const Matrix& m, double* max_eig) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric_part(m));
  *max_eig = es.eigenvalues().maxCoeff();
  return *max_eig < 0.0;
}

}  // namespace

ClfParams ClfParams::defaults(int n) {
  ClfParams c;
  c.P1 = Matrix::Identity(n, n);
  c.P2 = -0.5 * Matrix::Identity(n, n);
  c.P3 = Matrix::Identity(n, n);
  c.gamma = 0.1;
  return c;
}

Matrix ClfParams::block() const {
  const int n = dim();
  Matrix p(2 * n, 2 * n);
  p.topLeftCorner(n, n) = P1;
  p.topRightCorner(n, n) = P2;
  p.bottomLeftCorner(n, n) = P2.transpose();
  p.bottomRightCorner(n, n) = P3;
  return p;
}

double clf_value(const ClfParams& c, const Vector& p_err, const Vector& v) {
  const int n = c.dim();
  if (p_err.size() != n || v.size() != n) {
    throw std::invalid_argument("clf_value: dimension mismatch");
  }
  return 0.5 * (p_err.dot(c.P1 * p_err) + 2.0 * p_err.dot(c.P2 * v) +
                v.dot(c.P3 * v));
}

double w3_value(const ClfParams& c, const Vector& p_err, const Vector& v) {
  return c.gamma * clf_value(c, p_err, v);
}

ClfValidation validate_clf_params(const ClfParams& c) {
  ClfValidation out;
  const int n = c.dim();
  auto add = [&out](std::string code, std::string msg, double margin) {
    out.issues.push_back({std::move(code), std::move(msg), -1, margin});
  };

  if (n == 0 || c.P1.cols() != n || c.P2.rows() != n || c.P2.cols() != n ||
      c.P3.rows() != n || c.P3.cols() != n) {
    add("clf_dims", "P1, P2, P3 must be square matrices of equal size", 0.0);
    return out;
  }
  if (!(c.gamma > 0.0)) {
    add("clf_gamma", "gamma must be positive", c.gamma);
  }

  double eig = 0.0;
  bool p1_ok = is_positive_definite(c.P1, &eig);
  if (!p1_ok) add("clf_p1_not_pd", "P1 not positive definite", eig);

  bool p2_ok = is_negative_definite(c.P2, &eig);
  if (!p2_ok) add("clf_p2_not_nd", "P2 not negative definite", eig);

  bool schur_ok = false;
  if (p1_ok) {
    const Matrix schur =
        c.P3 - c.P2.transpose() * c.P1.ldlt().solve(c.P2);
    schur_ok = is_positive_definite(schur, &eig);
    if (!schur_ok) {
      add("clf_schur_not_pd", "Schur complement not PD", eig);
    }
  }

  bool manifold_ok = false;
  Matrix p3_p2inv;
  if (p2_ok) {
    p3_p2inv = c.P3 * c.P2.fullPivLu().solve(Matrix::Identity(n, n));
    const Matrix m = p3_p2inv * c.P1 - c.P2.transpose();
    manifold_ok = is_negative_definite(m, &eig);
    if (!manifold_ok) {
      add("clf_manifold_not_nd", "P3 P2^{-1} P1 - P2^T not negative definite",
          eig);
    }
  }

  if (p1_ok && p2_ok && schur_ok && manifold_ok) {
    const Matrix m = p3_p2inv * c.P1 - c.P2.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> neg_m(symmetric_part(-m));
    Eigen::SelfAdjointEigenSolver<Matrix> p_block(c.block());
    const double kappa = p3_p2inv.jacobiSvd().singularValues()(0);
    out.max_safe_gamma = 2.0 * neg_m.eigenvalues().minCoeff() /
                         (p_block.eigenvalues().maxCoeff() *
                          (1.0 + kappa * kappa));
  }
  return out;
}

HalfSpaceConstraint clf_constraint(const ClfParams& c,
                                   const DynamicsModel& model,
                                   const Vector& goal, const Vector& p,
                                   const Vector& v) {
  const int n = c.dim();
  if (goal.size() != n || p.size() != n || v.size() != n || model.dim() != n) {
    throw std::invalid_argument("clf_constraint: dimension mismatch");
  }
  const Vector p_err = goal - p;  // d/dt p_err = -v
  const RowVector w2 = p_err.transpose() * c.P2 + v.transpose() * c.P3;

  HalfSpaceConstraint out;
  out.normal = w2 * model.input_map(p, v);
  out.offset = p_err.dot(c.P1 * v) + v.dot(c.P2.transpose() * v) -
               w2.dot(model.drift(p, v)) - w3_value(c, p_err, v);
  return out;
}

}  // namespace safenav
