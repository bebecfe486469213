#pragma once

#include "safenav/dynamics.hpp"
#include "safenav/geometry.hpp"

namespace safenav {

// Gains of the cubic extended class-K-infinity pair alpha(s) = k1 s^3 and
// alpha'(s) = k2 s^3 used by the second-order barrier.
class BarrierGains {
 public:
  BarrierGains(double k1, double k2);
  double k1() const { return k1_; }
  double k2() const { return k2_; }

 private:
  double k1_;
  double k2_;
};

// Canonical inequality  normal * u <= offset  on the control input; shared
// form for assembled CBF and CLF constraints.
struct HalfSpaceConstraint {
  RowVector normal;
  double offset = 0.0;
};

double alpha(const BarrierGains& g, double s);             // k1 s^3
double alpha_derivative(const BarrierGains& g, double s);  // 3 k1 s^2
double alpha_prime(const BarrierGains& g, double s);       // k2 s^3

// h'(p,v) = dh/dp * v + alpha(h(p)) = -2 (p - p0)^T A v + k1 h(p)^3.
// The velocity-augmented barrier for the relative-degree-two plant.
double h_prime(const Ellipsoid& e, const BarrierGains& g, const Vector& p,
               const Vector& v);

// Half-space on u enforcing the barrier condition of h':
//   -2 v^T A v + 3 k1 h^2 (dh/dp v) - 2 (p-p0)^T A (f + g u) + alpha'(h') >= 0
// rearranged to  2 (p-p0)^T A g(p,v) u <= offset.  The normal vanishes
// exactly at the ellipsoid center; the constraint is emitted regardless so
// the QP layer can classify it as vacuous or infeasible-at-state.
HalfSpaceConstraint cbf_constraint(const Ellipsoid& e, const BarrierGains& g,
                                   const DynamicsModel& model, const Vector& p,
                                   const Vector& v);

}  // namespace safenav
