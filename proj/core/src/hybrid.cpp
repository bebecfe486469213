#include "safenav/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace safenav {

namespace {

constexpr double kMembershipTol = 1e-6;  // matches the integration tolerance
constexpr int kMaxGammaBackoffs = 20;
constexpr size_t kWorstFindings = 5;

// Deterministic uniforms built from raw engine bits; avoids the
// implementation-defined std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

Vector gaussian_vector(std::mt19937_64& rng, int n) {
  Vector out(n);
  int i = 0;
  while (i < n) {
    // Box-Muller
    const double u1 = std::max(uniform01(rng), 1e-300);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    out(i++) = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i < n) out(i++) = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  return out;
}

Vector unit_ball_vector(std::mt19937_64& rng, int n) {
  Vector g = gaussian_vector(rng, n);
  const double norm = g.norm();
  if (norm < 1e-300) return Vector::Zero(n);
  return g * (std::pow(uniform01(rng), 1.0 / n) / norm);
}

double angle_to_parallel(const RowVector& a, const RowVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return std::numbers::pi / 2.0;
  double c = std::abs(a.dot(b) / (na * nb));
  c = std::min(1.0, c);
  return std::acos(c);
}

void record_finding(AuditSegment& seg, AuditFinding finding) {
  seg.worst.push_back(std::move(finding));
  std::sort(seg.worst.begin(), seg.worst.end(),
            [](const AuditFinding& a, const AuditFinding& b) {
              return a.margin < b.margin;
            });
  if (seg.worst.size() > kWorstFindings) seg.worst.resize(kWorstFindings);
}

}  // namespace

ControllerParams ControllerParams::defaults(int n) {
  ControllerParams p;
  p.clf = ClfParams::defaults(n);
  p.cost = Matrix::Identity(n, n);
  return p;
}

ValidationReport validate_controller_params(const ControllerParams& params) {
  ValidationReport report;
  const int n = params.clf.dim();
  ClfValidation clf = validate_clf_params(params.clf);
  for (auto& issue : clf.issues) report.issues.push_back(issue);

  if (params.cost.rows() != n || params.cost.cols() != n) {
    report.add("cost_dims", "QP cost matrix must match the state dimension");
  } else {
    ValidationReport spd = validate_shape_matrix(params.cost);
    for (auto& issue : spd.issues) {
      report.add("cost_" + issue.code, "QP cost: " + issue.message, -1,
                 issue.margin);
    }
  }
  if (params.switch_margin < 0.0) {
    report.add("switch_margin", "switch margin must be nonnegative", -1,
               params.switch_margin);
  }
  if (!(params.goal_pos_tol > 0.0)) {
    report.add("goal_pos_tol", "goal position tolerance must be positive", -1,
               params.goal_pos_tol);
  }
  if (!(params.goal_vel_tol > 0.0)) {
    report.add("goal_vel_tol", "goal velocity tolerance must be positive", -1,
               params.goal_vel_tol);
  }
  return report;
}

ControlResult control(const ControllerParams& params, const PathPlan& plan,
                      const DynamicsModel& model, const SupervisorState& s,
                      const Vector& p, const Vector& v) {
  if (s.finished) {
    throw std::invalid_argument("control: supervisor already finished");
  }
  if (s.segment < 0 || s.segment >= plan.segments()) {
    throw std::invalid_argument("control: segment index out of range");
  }
  const Ellipsoid& ell = plan.ellipsoids[s.segment];
  const Vector& goal = plan.waypoints[s.segment + 1];

  ControlResult out;
  out.h = h_value(ell, p);
  out.h_prime = h_prime(ell, params.barrier, p, v);
  out.clf = clf_value(params.clf, goal - p, v);
  out.effective_gamma = params.clf.gamma;

  if (out.h < -kMembershipTol || out.h_prime < -kMembershipTol) {
    throw std::invalid_argument(
        "control: state outside the active safe sets (h=" +
        std::to_string(out.h) + ", h'=" + std::to_string(out.h_prime) + ")");
  }

  QpProblem qp;
  qp.cost = params.cost;
  qp.constraints = {clf_constraint(params.clf, model, goal, p, v),
                    cbf_constraint(ell, params.barrier, model, p, v)};

  ClfParams relaxed = params.clf;
  for (int retry = 0;; ++retry) {
    try {
      QpSolution sol = solve(qp);
      out.u = sol.u;
      out.active_set = sol.active_set;
      out.gamma_backoffs = retry;
      out.effective_gamma = relaxed.gamma;
      return out;
    } catch (const QpInfeasible&) {
      if (!params.gamma_backoff || retry >= kMaxGammaBackoffs) throw;
      relaxed.gamma *= 0.5;
      qp.constraints[0] = clf_constraint(relaxed, model, goal, p, v);
    }
  }
}

bool should_switch(const ControllerParams& params, const PathPlan& plan,
                   const SupervisorState& s, const Vector& p, const Vector& v) {
  if (s.finished || s.segment >= plan.segments() - 1) return false;
  const Ellipsoid& next = plan.ellipsoids[s.segment + 1];
  return h_value(next, p) >= params.switch_margin &&
         h_prime(next, params.barrier, p, v) >= params.switch_margin;
}

SupervisorState step_supervisor(const ControllerParams& params,
                                const PathPlan& plan, const SupervisorState& s,
                                const Vector& p, const Vector& v) {
  SupervisorState out = s;
  if (out.finished) return out;
  if (should_switch(params, plan, out, p, v)) {
    out.segment += 1;
  }
  if (out.segment == plan.segments() - 1) {
    const Vector& goal = plan.waypoints.back();
    if ((p - goal).norm() <= params.goal_pos_tol &&
        v.norm() <= params.goal_vel_tol) {
      out.finished = true;
    }
  }
  return out;
}

Vector feedback_linearization(const DynamicsModel& model, const Vector& p,
                              const Vector& v, const Vector& u_star) {
  const Matrix g = model.input_map(p, v);
  const Matrix ggt = g * g.transpose();
  return g.transpose() * ggt.ldlt().solve(-model.drift(p, v) + u_star);
}

int AuditReport::total_samples() const {
  int n = 0;
  for (const auto& s : segments) n += s.random_samples + s.manifold_samples;
  return n;
}

int AuditReport::total_infeasible() const {
  int n = 0;
  for (const auto& s : segments) n += s.infeasible;
  return n;
}

int AuditReport::total_ill_conditioned() const {
  int n = 0;
  for (const auto& s : segments) n += s.ill_conditioned;
  return n;
}

AuditReport audit_feasibility(const ControllerParams& params,
                              const PathPlan& plan, const DynamicsModel& model,
                              int samples, std::uint64_t seed) {
  if (samples <= 0) {
    throw std::invalid_argument("audit_feasibility: samples must be positive");
  }
  ValidationReport plan_report = validate_path_plan(plan);
  if (!plan_report.ok()) {
    throw std::invalid_argument("audit_feasibility: invalid path plan: " +
                                plan_report.issues.front().message);
  }
  ValidationReport params_report = validate_controller_params(params);
  if (!params_report.ok()) {
    throw std::invalid_argument("audit_feasibility: invalid controller: " +
                                params_report.issues.front().message);
  }

  const int n = plan.dim();
  AuditReport report;
  std::mt19937_64 rng(seed);

  const int manifold_target = samples / 5;
  const int random_target = samples - manifold_target;

  for (int seg = 0; seg < plan.segments(); ++seg) {
    AuditSegment out;
    out.segment = seg;
    out.min_parallel_angle = std::numbers::pi / 2.0;
    out.min_manifold_gap = std::numeric_limits<double>::infinity();

    const Ellipsoid& ell = plan.ellipsoids[seg];
    const Vector& start = plan.waypoints[seg];
    const Vector& goal = plan.waypoints[seg + 1];
    const double level = clf_value(params.clf, goal - start, Vector::Zero(n));

    // Factor the sublevel ellipsoid {z^T P z <= 2c} and the safe ellipsoid.
    Eigen::LLT<Matrix> p_llt(params.clf.block());
    Eigen::LLT<Matrix> a_llt(ell.shape());
    if (p_llt.info() != Eigen::Success || a_llt.info() != Eigen::Success) {
      throw std::runtime_error("audit_feasibility: factorization failed");
    }
    const Matrix lp_t = Matrix(p_llt.matrixL()).transpose();
    const Matrix la_t = Matrix(a_llt.matrixL()).transpose();
    const double radius = std::sqrt(std::max(0.0, 2.0 * level));

    auto evaluate = [&](const Vector& p, const Vector& v, bool on_manifold) {
      const HalfSpaceConstraint clf_row =
          clf_constraint(params.clf, model, goal, p, v);
      const HalfSpaceConstraint cbf_row =
          cbf_constraint(ell, params.barrier, model, p, v);

      const double angle = angle_to_parallel(clf_row.normal, cbf_row.normal);
      if (!on_manifold) {
        out.min_parallel_angle = std::min(out.min_parallel_angle, angle);
      } else {
        double gap = 0.0;
        halfspace_pair_feasible(clf_row, cbf_row, &gap);
        if (std::isfinite(gap)) {
          out.min_manifold_gap = std::min(out.min_manifold_gap, gap);
        }
      }

      QpProblem qp;
      qp.cost = params.cost;
      qp.constraints = {clf_row, cbf_row};
      try {
        (void)solve(qp);
      } catch (const QpInfeasible& e) {
        out.infeasible += 1;
        AuditFinding finding;
        finding.p = p;
        finding.v = v;
        finding.margin = e.margin;
        finding.parallel_angle = angle;
        finding.on_manifold = on_manifold;
        finding.exact = !halfspace_pair_feasible(clf_row, cbf_row, nullptr);
        record_finding(out, std::move(finding));
      } catch (const QpIllConditioned&) {
        out.ill_conditioned += 1;
      }
    };

    // Pool 1: uniform draws from the V-sublevel set, kept when inside the
    // segment's safe sets.
    long attempts = 0;
    const long attempt_cap = 2000L * random_target + 1000L;
    while (out.random_samples < random_target && attempts < attempt_cap) {
      ++attempts;
      const Vector z =
          radius * lp_t.triangularView<Eigen::Upper>().solve(
                       unit_ball_vector(rng, 2 * n));
      const Vector p = goal - z.head(n);
      const Vector v = z.tail(n);
      if (h_value(ell, p) < 0.0) continue;
      if (h_prime(ell, params.barrier, p, v) < 0.0) continue;
      out.random_samples += 1;
      evaluate(p, v, false);
    }

    // Pool 2: states constructed on the parallel-normal manifold
    // w2 = -t w1, the only place a two-constraint system can be empty.
    attempts = 0;
    const long probe_cap = 2000L * manifold_target + 1000L;
    Eigen::LDLT<Matrix> p3_ldlt(params.clf.P3);
    while (out.manifold_samples < manifold_target && attempts < probe_cap) {
      ++attempts;
      const Vector p =
          ell.center() +
          la_t.triangularView<Eigen::Upper>().solve(unit_ball_vector(rng, n));
      const RowVector w1 = 2.0 * ((p - ell.center()).transpose() * ell.shape());
      if (w1.norm() < 1e-12) continue;
      const double t = std::exp(uniform(rng, std::log(1e-2), std::log(1e2)));
      const Vector p_err = goal - p;
      const Vector v = p3_ldlt.solve(-t * w1.transpose() -
                                     params.clf.P2.transpose() * p_err);
      if (clf_value(params.clf, p_err, v) > level) continue;
      if (h_prime(ell, params.barrier, p, v) < 0.0) continue;
      out.manifold_samples += 1;
      evaluate(p, v, true);
    }

    report.segments.push_back(std::move(out));
  }
  return report;
}

}  // namespace safenav
