#pragma once

#include "safenav/cbf.hpp"
#include "safenav/dynamics.hpp"
#include "safenav/geometry.hpp"

namespace safenav {

// Block-quadratic Lyapunov function
//   V(p_err, v) = 1/2 [p_err^T v^T] [[P1, P2], [P2^T, P3]] [p_err; v]
// with decay target W3 = gamma * V. Validity needs P1 SPD, the Schur
// complement P3 - P2^T P1^{-1} P2 SPD, P2 ND, and P3 P2^{-1} P1 - P2^T ND.
struct ClfParams {
  Matrix P1;
  Matrix P2;
  Matrix P3;
  double gamma = 0.1;

  static ClfParams defaults(int n);  // P1 = I, P2 = -I/2, P3 = I, gamma = 0.1
  int dim() const { return static_cast<int>(P1.rows()); }
  Matrix block() const;  // assembled 2n x 2n P
};

struct ClfValidation {
  std::vector<ValidationIssue> issues;
  // Largest gamma for which W3 = gamma*V provably stays below the decay
  // budget on the singular manifold p_err^T = -v^T P3 P2^{-1}:
  //   gamma_max = 2 lambda_min(-(P3 P2^{-1} P1 - P2^T)) /
  //               (lambda_max(P) (1 + |P3 P2^{-1}|_2^2)).
  // Zero when any definiteness check fails.
  double max_safe_gamma = 0.0;

  bool ok() const { return issues.empty(); }
};

double clf_value(const ClfParams& c, const Vector& p_err, const Vector& v);

// W3(p_err, v) = gamma * V(p_err, v).
double w3_value(const ClfParams& c, const Vector& p_err, const Vector& v);

ClfValidation validate_clf_params(const ClfParams& c);

// Half-space on u enforcing Vdot <= -W3 at (p, v) with p_err = goal - p:
//   normal = (p_err^T P2 + v^T P3) g(p,v)
//   offset = p_err^T P1 v + v^T P2^T v - (p_err^T P2 + v^T P3) f(p,v) - W3.
HalfSpaceConstraint clf_constraint(const ClfParams& c,
                                   const DynamicsModel& model,
                                   const Vector& goal, const Vector& p,
                                   const Vector& v);

}  // namespace safenav
