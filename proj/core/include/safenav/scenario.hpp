#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "safenav/sim.hpp"

namespace safenav {

// Axis-aligned box carried for rendering only; safety is defined by the
// ellipsoids, never by obstacle geometry.
struct ObstacleBox {
  Vector min;
  Vector max;
};

enum class ModelKind { kDoubleIntegrator, kDampedCoupled2D, kLinear };

// A full problem instance: plant, plan, controller gains, and integration
// settings, as loaded from a scenario file.
struct Scenario {
  std::string name;
  int n = 0;
  ModelKind model_kind = ModelKind::kDoubleIntegrator;
  double mass = 1.0;     // damped_coupled_2d
  double damping = 0.5;  // damped_coupled_2d
  Matrix state_gain_p;   // linear
  Matrix state_gain_v;   // linear
  Matrix input_gain;     // linear
  PathPlan plan;
  std::vector<ObstacleBox> obstacles;
  ControllerParams controller;
  double dt = 1e-3;
  double t_max = 60.0;

  std::unique_ptr<DynamicsModel> make_model() const;
};

// Malformed JSON text; position is reported as line/column.
class ScenarioParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally valid JSON that does not match the schema (missing, unknown,
// or wrongly shaped fields).
class ScenarioSchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Schema-conforming scenario whose contents fail the domain validators.
class ScenarioValidationError : public std::runtime_error {
 public:
  ScenarioValidationError(const std::string& what, ValidationReport report_in)
      : std::runtime_error(what), report(std::move(report_in)) {}
  ValidationReport report;
};

// Parses and fully validates a scenario document. Quadratic-form matrices
// (ellipsoid shapes, P1, P2, P3, H) are symmetrized on load; asymmetry
// beyond 1e-9 is rejected.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& scenario);

// Runs the scenario's closed loop with optional overrides of the sim block.
struct SimOverrides {
  std::optional<double> dt;
  std::optional<double> t_max;
  bool zero_order_hold = false;
};
SimResult run_scenario(const Scenario& scenario,
                       const SimOverrides& overrides = {});

// JSON run summary: outcome, terminal errors, per-segment barrier minima,
// switch times, step count, wall time. Throws on an empty log.
std::string write_summary(const SimResult& result, const Scenario& scenario);

// 2D projection of a run onto the given axis pair: safe-set ellipses (exact
// conic slice through the center for the chosen axes), obstacle boxes,
// waypoints, and the trajectory drawn as one path element per segment.
std::string render_svg(const TrajectoryLog& log, const Scenario& scenario,
                       std::pair<int, int> axes = {0, 1});

// Overlay of several runs of the same scenario (one path per run), used for
// gain sweeps.
std::string render_sweep_svg(const std::vector<TrajectoryLog>& logs,
                             const std::vector<std::string>& labels,
                             const Scenario& scenario,
                             std::pair<int, int> axes = {0, 1});

}  // namespace safenav
