#pragma once

#include <cstdint>

#include "safenav/clf.hpp"
#include "safenav/qp.hpp"

namespace safenav {

// Hybrid mode of a run: current segment index plus the absorbing done flag.
struct SupervisorState {
  int segment = 0;
  bool finished = false;
};

// Every tunable of the per-segment QP controller and the switching rule.
struct ControllerParams {
  ClfParams clf;
  BarrierGains barrier{1.0, 1.0};
  Matrix cost;                  // H of the QP objective
  double switch_margin = 1e-6;  // eps_sw on the incoming h and h'
  double goal_pos_tol = 1e-2;
  double goal_vel_tol = 1e-2;
  bool gamma_backoff = false;

  static ControllerParams defaults(int n);
};

ValidationReport validate_controller_params(const ControllerParams& params);

struct ControlResult {
  Vector u;
  double h = 0.0;        // h_i(p) for the active segment
  double h_prime = 0.0;  // h'_i(p, v)
  double clf = 0.0;      // V(x_{i+1} - p, v)
  std::vector<int> active_set;  // 0 = CLF constraint, 1 = CBF constraint
  int gamma_backoffs = 0;       // retries taken before the QP became feasible
  double effective_gamma = 0.0;
};

// Segment-i control law: solve min 1/2 u^T H u subject to the CLF constraint
// toward x_{i+1} and the CBF constraint of C_i. Propagates QpInfeasible
// unless gamma_backoff is set, in which case gamma is halved up to 20 times
// (weakening only the decay demand, never safety) before giving up.
ControlResult control(const ControllerParams& params, const PathPlan& plan,
                      const DynamicsModel& model, const SupervisorState& s,
                      const Vector& p, const Vector& v);

// True when the state is inside the incoming safe sets with margin eps_sw:
// h_{i+1}(p) >= eps_sw and h'_{i+1}(p,v) >= eps_sw. Always false on the last
// segment.
bool should_switch(const ControllerParams& params, const PathPlan& plan,
                   const SupervisorState& s, const Vector& p, const Vector& v);

// Advances the segment when should_switch holds and raises `finished` when
// the last goal is met within the terminal tolerances. Finished is absorbing;
// the segment index never decreases and moves by at most one per call.
SupervisorState step_supervisor(const ControllerParams& params,
                                const PathPlan& plan, const SupervisorState& s,
                                const Vector& p, const Vector& v);

// u = g^T (g g^T)^{-1} (-f + u_star): input transformation that turns the
// plant into a double integrator driven by u_star. Not part of the control
// path; the audit and tests use it to cross-check feasibility findings.
Vector feedback_linearization(const DynamicsModel& model, const Vector& p,
                              const Vector& v, const Vector& u_star);

struct AuditFinding {
  Vector p;
  Vector v;
  double margin = 0.0;          // normalized infeasibility gap (negative)
  double parallel_angle = 0.0;  // angular distance to the parallel hazard
  bool on_manifold = false;     // from the antiparallel-normal probe pool
  bool exact = false;           // confirmed empty by the half-space predicate
};

struct AuditSegment {
  int segment = 0;
  int random_samples = 0;    // accepted states drawn from the sublevel region
  int manifold_samples = 0;  // accepted antiparallel-normal probes
  int infeasible = 0;
  int ill_conditioned = 0;
  double min_parallel_angle = 0.0;  // closest random sample to the hazard
  double min_manifold_gap = 0.0;    // worst normalized slack over the probes
  std::vector<AuditFinding> worst;  // most negative margins first, capped
};

struct AuditReport {
  std::vector<AuditSegment> segments;
  int total_samples() const;
  int total_infeasible() const;
  int total_ill_conditioned() const;
};

// Empirical feasibility audit of the per-segment QP. For segment i the state
// region is {p in C_i} x {v : h'_i(p,v) >= 0, V(x_{i+1}-p, v) <= V at the
// segment start (x_i, 0)}. Four fifths of the budget samples that region
// uniformly; the rest probes the parallel-normal manifold, where the two
// constraint normals are exactly antiparallel and emptiness is decidable in
// closed form, since random draws cannot hit that measure-zero hazard.
AuditReport audit_feasibility(const ControllerParams& params,
                              const PathPlan& plan, const DynamicsModel& model,
                              int samples, std::uint64_t seed);

}  // namespace safenav
