#include "safenav/cbf.hpp"

#include <stdexcept>

namespace safenav {

BarrierGains::BarrierGains(double k1, double k2) : k1_(k1), k2_(k2) {
  if (!(k1 > 0.0)) throw std::invalid_argument("BarrierGains: k1 must be > 0");
  if (!(k2 > 0.0)) throw std::invalid_argument("BarrierGains: k2 must be > 0");
}

double alpha(const BarrierGains& g, double s) { return g.k1() * s * s * s; }

double alpha_derivative(const BarrierGains& g, double s) {
  return 3.0 * g.k1() * s * s;
}

double alpha_prime(const BarrierGains& g, double s) {
  return g.k2() * s * s * s;
}

double h_prime(const Ellipsoid& e, const BarrierGains& g, const Vector& p,
               const Vector& v) {
  if (v.size() != e.center().size()) {
    throw std::invalid_argument("h_prime: velocity dimension mismatch");
  }
  return h_gradient(e, p).dot(v) + alpha(g, h_value(e, p));
}

HalfSpaceConstraint cbf_constraint(const Ellipsoid& e, const BarrierGains& g,
                                   const DynamicsModel& model, const Vector& p,
                                   const Vector& v) {
  const int n = e.dim();
  if (p.size() != n || v.size() != n || model.dim() != n) {
    throw std::invalid_argument("cbf_constraint: dimension mismatch");
  }
  const Matrix& a = e.shape();
  const Vector d = p - e.center();
  const RowVector grad_row = -2.0 * (d.transpose() * a);  // dh/dp
  const double h = h_value(e, p);
  const double hp = grad_row.dot(v) + alpha(g, h);

  HalfSpaceConstraint c;
  c.normal = -grad_row * model.input_map(p, v);  // 2 (p-p0)^T A g
  c.offset = -2.0 * v.dot(a * v) + alpha_derivative(g, h) * grad_row.dot(v) +
             grad_row.dot(model.drift(p, v)) + alpha_prime(g, hp);
  return c;
}

}  // namespace safenav
