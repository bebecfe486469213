#include "safenav/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace safenav {

namespace {

constexpr double kSafetyTol = 1e-6;

void put_double(std::ostream& os, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  os << buf;
}

int active_set_mask(const std::vector<int>& active) {
  int mask = 0;
  for (int i : active) mask |= (1 << i);
  return mask;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

std::string to_string(SimOutcome outcome) {
  switch (outcome) {
    case SimOutcome::kReached: return "reached";
    case SimOutcome::kTimeout: return "timeout";
    case SimOutcome::kInfeasible: return "infeasible";
    case SimOutcome::kSafetyViolation: return "safety_violation";
  }
  return "unknown";
}

void rk4_step(const DynamicsModel& model, const ControlLaw& law, Vector& p,
              Vector& v, double dt, const Vector* hold) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
  auto acc = [&](const Vector& pp, const Vector& vv) -> Vector {
    const Vector u = hold ? *hold : law(pp, vv);
    return model.drift(pp, vv) + model.input_map(pp, vv) * u;
  };
  const Vector k1p = v;
  const Vector k1v = acc(p, v);
  const Vector k2p = v + 0.5 * dt * k1v;
  const Vector k2v = acc(p + 0.5 * dt * k1p, v + 0.5 * dt * k1v);
  const Vector k3p = v + 0.5 * dt * k2v;
  const Vector k3v = acc(p + 0.5 * dt * k2p, v + 0.5 * dt * k2v);
  const Vector k4p = v + dt * k3v;
  const Vector k4v = acc(p + dt * k3p, v + dt * k3v);
  p += (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  v += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

SimResult simulate(const PathPlan& plan, const DynamicsModel& model,
                   const ControllerParams& params, const SimOptions& options) {
  if (!(options.dt > 0.0)) {
    throw std::invalid_argument("simulate: dt must be > 0");
  }
  if (options.t_max < 0.0) {
    throw std::invalid_argument("simulate: t_max must be >= 0");
  }
  const int n = plan.dim();
  Vector p = plan.waypoints.front();
  Vector v = Vector::Zero(n);
  SupervisorState s;

  SimResult res;
  res.log.dim = n;
  res.log.dt = options.dt;
  const auto wall_start = std::chrono::steady_clock::now();

  bool switched_now = false;
  long step = 0;
  try {
    for (;;) {
      const double t = step * options.dt;
      TrajectoryRecord rec;
      rec.t = t;
      rec.p = p;
      rec.v = v;
      rec.segment = s.segment;
      rec.switched = switched_now;

      if (s.finished) {
        // Terminal record: the controller is no longer queried once the
        // supervisor has finished.
        const Ellipsoid& ell = plan.ellipsoids[s.segment];
        rec.u = Vector::Zero(n);
        rec.h = h_value(ell, p);
        rec.h_prime = h_prime(ell, params.barrier, p, v);
        rec.clf = clf_value(params.clf, plan.waypoints.back() - p, v);
        res.log.records.push_back(std::move(rec));
        res.outcome = SimOutcome::kReached;
        break;
      }

      ControlResult cr = control(params, plan, model, s, p, v);
      res.gamma_backoff_total += cr.gamma_backoffs;
      rec.u = cr.u;
      rec.h = cr.h;
      rec.h_prime = cr.h_prime;
      rec.clf = cr.clf;
      rec.active_set = active_set_mask(cr.active_set);
      res.log.records.push_back(std::move(rec));

      if (t >= options.t_max - 0.5 * options.dt) {
        res.outcome = SimOutcome::kTimeout;
        res.detail = "t_max reached before the goal";
        break;
      }

      const Vector frozen = cr.u;
      const double stage_t = t;
      ControlLaw law = [&](const Vector& pp, const Vector& vv) -> Vector {
        try {
          ControlResult stage = control(params, plan, model, s, pp, vv);
          res.gamma_backoff_total += stage.gamma_backoffs;
          return stage.u;
        } catch (const QpInfeasible& e) {
          throw InfeasibleAtState(e.what(), stage_t, pp, vv);
        }
      };
      rk4_step(model, law, p, v, options.dt,
               options.zero_order_hold ? &frozen : nullptr);
      ++step;

      const SupervisorState next = step_supervisor(params, plan, s, p, v);
      switched_now = next.segment != s.segment;
      s = next;
    }
  } catch (const InfeasibleAtState& e) {
    res.outcome = SimOutcome::kInfeasible;
    res.detail = e.what();
    res.final_t = e.t;
    res.final_p = e.p;
    res.final_v = e.v;
  } catch (const QpInfeasible& e) {
    res.outcome = SimOutcome::kInfeasible;
    res.detail = e.what();
  }

  if (!res.log.records.empty() && res.final_p.size() == 0) {
    res.final_t = res.log.records.back().t;
    res.final_p = res.log.records.back().p;
    res.final_v = res.log.records.back().v;
  }

  // Post-hoc safety scan against the logged barrier values.
  for (const auto& rec : res.log.records) {
    if (rec.h < -kSafetyTol || rec.h_prime < -kSafetyTol) {
      res.outcome = SimOutcome::kSafetyViolation;
      res.detail = "barrier violation at t=" + std::to_string(rec.t);
      res.final_t = rec.t;
      res.final_p = rec.p;
      res.final_v = rec.v;
      break;
    }
  }

  // Lipschitz monitor for the control signal, skipping pairs that span a
  // switch instant.
  for (size_t k = 0; k + 1 < res.log.records.size(); ++k) {
    const auto& a = res.log.records[k];
    const auto& b = res.log.records[k + 1];
    if (b.switched) continue;
    const double rate = (b.u - a.u).norm() / options.dt;
    res.control_lipschitz = std::max(res.control_lipschitz, rate);
  }

  res.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    wall_start)
          .count();
  return res;
}

void write_csv(const TrajectoryLog& log, std::ostream& os) {
  const int n = log.dim;
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",p_" << i;
  for (int i = 1; i <= n; ++i) os << ",v_" << i;
  for (int i = 1; i <= n; ++i) os << ",u_" << i;
  os << ",segment,h,h_prime,V,active_set,switch\n";
  for (const auto& rec : log.records) {
    put_double(os, rec.t);
    for (int i = 0; i < n; ++i) { os << ','; put_double(os, rec.p(i)); }
    for (int i = 0; i < n; ++i) { os << ','; put_double(os, rec.v(i)); }
    for (int i = 0; i < n; ++i) { os << ','; put_double(os, rec.u(i)); }
    os << ',' << rec.segment << ',';
    put_double(os, rec.h);
    os << ',';
    put_double(os, rec.h_prime);
    os << ',';
    put_double(os, rec.clf);
    os << ',' << rec.active_set << ',' << (rec.switched ? 1 : 0) << '\n';
  }
}

TrajectoryLog read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::invalid_argument("read_csv: empty input");
  }
  const auto header = split_csv_line(line);
  int n = 0;
  for (const auto& name : header) {
    if (name.rfind("p_", 0) == 0) ++n;
  }
  const size_t expected = 1 + 3 * static_cast<size_t>(n) + 6;
  if (n == 0 || header.size() != expected) {
    throw std::invalid_argument("read_csv: malformed header");
  }

  TrajectoryLog log;
  log.dim = n;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != expected) {
      throw std::invalid_argument("read_csv: malformed row");
    }
    TrajectoryRecord rec;
    size_t k = 0;
    rec.t = std::stod(f[k++]);
    rec.p = Vector(n);
    rec.v = Vector(n);
    rec.u = Vector(n);
    for (int i = 0; i < n; ++i) rec.p(i) = std::stod(f[k++]);
    for (int i = 0; i < n; ++i) rec.v(i) = std::stod(f[k++]);
    for (int i = 0; i < n; ++i) rec.u(i) = std::stod(f[k++]);
    rec.segment = std::stoi(f[k++]);
    rec.h = std::stod(f[k++]);
    rec.h_prime = std::stod(f[k++]);
    rec.clf = std::stod(f[k++]);
    rec.active_set = std::stoi(f[k++]);
    rec.switched = std::stoi(f[k++]) != 0;
    log.records.push_back(std::move(rec));
  }
  if (log.records.size() > 1) {
    log.dt = log.records[1].t - log.records[0].t;
  }
  return log;
}

RichardsonResult richardson_order(const DynamicsModel& model,
                                  const ControlLaw& law, const Vector& p0,
                                  const Vector& v0, double horizon,
                                  const std::vector<double>& dts) {
  if (dts.size() < 3) {
    throw std::invalid_argument("richardson_order: need at least 3 step sizes");
  }
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("richardson_order: horizon must be > 0");
  }
  const double ratio = dts[0] / dts[1];
  for (size_t i = 0; i + 1 < dts.size(); ++i) {
    if (!(dts[i] > dts[i + 1]) || !(dts[i + 1] > 0.0)) {
      throw std::invalid_argument(
          "richardson_order: step sizes must be positive and descending");
    }
    if (std::abs(dts[i] / dts[i + 1] - ratio) > 1e-9 * ratio) {
      throw std::invalid_argument(
          "richardson_order: step sizes must share a constant ratio");
    }
  }

  std::vector<Vector> endpoints;
  for (double dt : dts) {
    const long steps = std::lround(horizon / dt);
    Vector p = p0;
    Vector v = v0;
    for (long k = 0; k < steps; ++k) rk4_step(model, law, p, v, dt);
    Vector y(2 * p.size());
    y << p, v;
    endpoints.push_back(std::move(y));
  }

  double scale = 1.0;
  for (const auto& y : endpoints) scale = std::max(scale, y.norm());
  std::vector<double> diffs;
  for (size_t i = 0; i + 1 < endpoints.size(); ++i) {
    diffs.push_back((endpoints[i] - endpoints[i + 1]).norm());
  }

  RichardsonResult out;
  bool all_tiny = true;
  for (double d : diffs) all_tiny = all_tiny && d < 1e-12 * scale;
  if (all_tiny) {
    out.exact = true;
    return out;
  }

  double sum = 0.0;
  int count = 0;
  for (size_t i = 0; i + 1 < diffs.size(); ++i) {
    if (diffs[i + 1] < 1e-300) continue;
    sum += std::log(diffs[i] / diffs[i + 1]) / std::log(ratio);
    ++count;
  }
  if (count == 0) {
    out.exact = true;
    return out;
  }
  out.order = sum / count;
  return out;
}

}  // namespace safenav
