#include "safenav/dynamics.hpp"

#include <stdexcept>
#include <string>

namespace safenav {

DoubleIntegrator::DoubleIntegrator(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("DoubleIntegrator: dimension must be >= 1");
}

Vector DoubleIntegrator::drift(const Vector&, const Vector&) const {
  return Vector::Zero(n_);
}

Matrix DoubleIntegrator::input_map(const Vector&, const Vector&) const {
  return Matrix::Identity(n_, n_);
}

DampedCoupled2D::DampedCoupled2D(double mass, double damping)
    : mass_(mass), damping_(damping) {
  if (!(mass > 0.0)) throw std::invalid_argument("DampedCoupled2D: mass must be > 0");
  if (!(damping > 0.0)) throw std::invalid_argument("DampedCoupled2D: damping must be > 0");
}

Vector DampedCoupled2D::drift(const Vector&, const Vector& v) const {
  return -(damping_ / mass_) * v;
}

Matrix DampedCoupled2D::input_map(const Vector&, const Vector&) const {
  Matrix g(2, 2);
  g << 1.0, -0.5, 0.0, 1.0;
  return g / mass_;
}

LinearModel::LinearModel(Matrix state_gain_p, Matrix state_gain_v,
                         Matrix input_gain)
    : state_gain_p_(std::move(state_gain_p)),
      state_gain_v_(std::move(state_gain_v)),
      input_gain_(std::move(input_gain)) {
  const auto n = input_gain_.rows();
  if (n == 0 || input_gain_.cols() != n) {
    throw std::invalid_argument("LinearModel: input matrix must be square");
  }
  if (state_gain_p_.rows() != n || state_gain_p_.cols() != n ||
      state_gain_v_.rows() != n || state_gain_v_.cols() != n) {
    throw std::invalid_argument("LinearModel: gain dimension mismatch");
  }
  Eigen::FullPivLU<Matrix> lu(input_gain_);
  if (lu.rank() < n) {
    throw std::invalid_argument("LinearModel: input matrix must have full rank");
  }
}

Vector LinearModel::drift(const Vector& p, const Vector& v) const {
  return state_gain_p_ * p + state_gain_v_ * v;
}

Matrix LinearModel::input_map(const Vector&, const Vector&) const {
  return input_gain_;
}

ValidationReport validate_input_map_rank(
    const DynamicsModel& model,
    const std::vector<std::pair<Vector, Vector>>& states) {
  ValidationReport report;
  const int n = model.dim();
  for (size_t k = 0; k < states.size(); ++k) {
    const Matrix g = model.input_map(states[k].first, states[k].second);
    if (g.rows() != n || g.cols() != n) {
      report.add("input_map_shape", "g(p,v) must be n x n",
                 static_cast<int>(k));
      continue;
    }
    Eigen::FullPivLU<Matrix> lu(g);
    if (lu.rank() < n) {
      report.add("input_map_rank",
                 "g(p,v) rank deficient at sample state " + std::to_string(k),
                 static_cast<int>(k),
                 static_cast<double>(lu.rank()));
    }
  }
  return report;
}

}  // namespace safenav
