#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "safenav/geometry.hpp"

namespace safenav {

// Lagrangian plant  pdot = v,  vdot = f(p,v) + g(p,v) u  with square g of
// full row rank at every state.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual int dim() const = 0;
  virtual Vector drift(const Vector& p, const Vector& v) const = 0;      // f
  virtual Matrix input_map(const Vector& p, const Vector& v) const = 0;  // g
};

// vdot = u.
class DoubleIntegrator final : public DynamicsModel {
 public:
  explicit DoubleIntegrator(int n);
  int dim() const override { return n_; }
  Vector drift(const Vector& p, const Vector& v) const override;
  Matrix input_map(const Vector& p, const Vector& v) const override;

 private:
  int n_;
};

// m*vx_dot = -b*vx + ux - 0.5*uy,  m*vy_dot = -b*vy + uy.
class DampedCoupled2D final : public DynamicsModel {
 public:
  DampedCoupled2D(double mass, double damping);
  int dim() const override { return 2; }
  Vector drift(const Vector& p, const Vector& v) const override;
  Matrix input_map(const Vector& p, const Vector& v) const override;
  double mass() const { return mass_; }
  double damping() const { return damping_; }

 private:
  double mass_;
  double damping_;
};

// f = Fp * p + Fv * v with a constant full-rank input matrix G.
class LinearModel final : public DynamicsModel {
 public:
  LinearModel(Matrix state_gain_p, Matrix state_gain_v, Matrix input_gain);
  int dim() const override { return static_cast<int>(input_gain_.rows()); }
  Vector drift(const Vector& p, const Vector& v) const override;
  Matrix input_map(const Vector& p, const Vector& v) const override;

 private:
  Matrix state_gain_p_;
  Matrix state_gain_v_;
  Matrix input_gain_;
};

// Full-row-rank check of g(p,v) at the given sample states (rank-revealing
// factorization). Issues name the failing sample index.
ValidationReport validate_input_map_rank(
    const DynamicsModel& model,
    const std::vector<std::pair<Vector, Vector>>& states);

}  // namespace safenav
