#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "safenav/hybrid.hpp"

namespace safenav {

// State feedback u(p, v) used by the integrator.
using ControlLaw = std::function<Vector(const Vector&, const Vector&)>;

struct TrajectoryRecord {
  double t = 0.0;
  Vector p;
  Vector v;
  Vector u;
  int segment = 0;
  double h = 0.0;
  double h_prime = 0.0;
  double clf = 0.0;
  int active_set = 0;     // bitmask: 1 = CLF row active, 2 = CBF row active
  bool switched = false;  // segment advanced at this instant
};

struct TrajectoryLog {
  int dim = 0;
  double dt = 0.0;
  std::vector<TrajectoryRecord> records;
};

// CSV with header t,p_1..p_n,v_1..v_n,u_1..u_n,segment,h,h_prime,V,
// active_set,switch and 17-significant-digit floats.
void write_csv(const TrajectoryLog& log, std::ostream& os);
TrajectoryLog read_csv(std::istream& is);

enum class SimOutcome { kReached, kTimeout, kInfeasible, kSafetyViolation };
std::string to_string(SimOutcome outcome);

// Thrown out of the closed loop when the QP becomes infeasible at an
// integration stage; carries the stage state.
class InfeasibleAtState : public std::runtime_error {
 public:
  InfeasibleAtState(const std::string& what, double t_in, Vector p_in,
                    Vector v_in)
      : std::runtime_error(what), t(t_in), p(std::move(p_in)),
        v(std::move(v_in)) {}
  double t;
  Vector p;
  Vector v;
};

struct SimOptions {
  double dt = 1e-3;
  double t_max = 60.0;
  bool zero_order_hold = false;  // freeze u over each step instead of
                                 // re-evaluating it at every RK4 stage
};

struct SimResult {
  SimOutcome outcome = SimOutcome::kTimeout;
  TrajectoryLog log;
  double final_t = 0.0;
  Vector final_p;
  Vector final_v;
  std::string detail;
  int gamma_backoff_total = 0;
  double control_lipschitz = 0.0;  // max |u(t+dt)-u(t)|/dt between switches
  double wall_time_sec = 0.0;
};

// One classical RK4 step of (pdot, vdot) = (v, f + g u). The control law is
// re-evaluated at every stage unless `hold` carries a frozen input.
void rk4_step(const DynamicsModel& model, const ControlLaw& law, Vector& p,
              Vector& v, double dt, const Vector* hold = nullptr);

// Closed-loop rollout from p = x_0, v = 0 with the supervisor stepped after
// every integration step. The log holds one record per step; records where
// the segment advanced carry the switch flag. Safety is re-checked post hoc
// against the logged h and h' (tolerance 1e-6).
SimResult simulate(const PathPlan& plan, const DynamicsModel& model,
                   const ControllerParams& params, const SimOptions& options);

struct RichardsonResult {
  double order = 0.0;
  bool exact = false;  // endpoint differences at rounding level
};

// Observed convergence order from endpoint differences of runs at the given
// step sizes (>= 3, sorted descending with a constant ratio).
RichardsonResult richardson_order(const DynamicsModel& model,
                                  const ControlLaw& law, const Vector& p0,
                                  const Vector& v0, double horizon,
                                  const std::vector<double>& dts);

}  // namespace safenav
