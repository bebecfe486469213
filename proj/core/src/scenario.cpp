#include "safenav/scenario.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace safenav {

namespace {

using nlohmann::json;

constexpr double kLoadAsymmetryTol = 1e-9;

[[noreturn]] void schema_error(const std::string& msg) {
  throw ScenarioSchemaError("schema error: " + msg);
}

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional) {
  for (const auto& key : required) {
    if (!obj.contains(key)) schema_error(where + ": missing field '" + key + "'");
  }
  for (const auto& item : obj.items()) {
    if (!required.count(item.key()) && !optional.count(item.key())) {
      schema_error(where + ": unknown field '" + item.key() + "'");
    }
  }
}

double get_number(const json& obj, const std::string& where,
                  const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) schema_error(where + "." + key + " must be a number");
  return v.get<double>();
}

Vector parse_vector(const json& arr, const std::string& where, int expect) {
  if (!arr.is_array()) schema_error(where + " must be an array of numbers");
  if (expect >= 0 && static_cast<int>(arr.size()) != expect) {
    schema_error(where + " must have length " + std::to_string(expect));
  }
  Vector v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) schema_error(where + " must contain only numbers");
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

Matrix parse_matrix(const json& arr, const std::string& where, int rows,
                    int cols) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != rows) {
    schema_error(where + " must be a " + std::to_string(rows) + "x" +
                 std::to_string(cols) + " row-major array");
  }
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const Vector row = parse_vector(arr[r], where + " row", cols);
    m.row(r) = row.transpose();
  }
  return m;
}

// Quadratic-form matrices are symmetrized on load; larger asymmetry is a
// validation finding, not silently averaged away.
Matrix load_symmetric(const Matrix& m, const std::string& what,
                      ValidationReport& report, int index = -1) {
  const double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kLoadAsymmetryTol * scale) {
    report.add("matrix_asymmetry", what + " asymmetry exceeds 1e-9", index,
               asym);
  }
  return 0.5 * (m + m.transpose());
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json matrix_to_json(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    arr.push_back(row);
  }
  return arr;
}

std::pair<int, int> line_column(const std::string& text, size_t byte) {
  int line = 1;
  int col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::unique_ptr<DynamicsModel> Scenario::make_model() const {
  switch (model_kind) {
    case ModelKind::kDoubleIntegrator:
      return std::make_unique<DoubleIntegrator>(n);
    case ModelKind::kDampedCoupled2D:
      return std::make_unique<DampedCoupled2D>(mass, damping);
    case ModelKind::kLinear:
      return std::make_unique<LinearModel>(state_gain_p, state_gain_v,
                                           input_gain);
  }
  throw std::logic_error("Scenario: unknown model kind");
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ScenarioParseError("parse error at line " + std::to_string(line) +
                             ", column " + std::to_string(col) + ": " +
                             e.what());
  }
  if (!doc.is_object()) schema_error("top level must be an object");
  require_keys(doc, "scenario",
               {"name", "n", "dynamics", "waypoints", "ellipsoids", "sim"},
               {"obstacles", "controller"});

  Scenario s;
  if (!doc.at("name").is_string()) schema_error("name must be a string");
  s.name = doc.at("name").get<std::string>();
  if (!doc.at("n").is_number_integer() || doc.at("n").get<int>() < 1) {
    schema_error("n must be a positive integer");
  }
  s.n = doc.at("n").get<int>();

  ValidationReport report;

  // dynamics
  const json& dyn = doc.at("dynamics");
  if (!dyn.is_object() || !dyn.contains("type") ||
      !dyn.at("type").is_string()) {
    schema_error("dynamics must be an object with a string 'type'");
  }
  const std::string type = dyn.at("type").get<std::string>();
  if (type == "double_integrator") {
    require_keys(dyn, "dynamics", {"type"}, {});
    s.model_kind = ModelKind::kDoubleIntegrator;
  } else if (type == "damped_coupled_2d") {
    require_keys(dyn, "dynamics", {"type"}, {"mass", "damping"});
    s.model_kind = ModelKind::kDampedCoupled2D;
    s.mass = dyn.contains("mass") ? get_number(dyn, "dynamics", "mass") : 1.0;
    s.damping =
        dyn.contains("damping") ? get_number(dyn, "dynamics", "damping") : 0.5;
    if (s.n != 2) schema_error("damped_coupled_2d requires n = 2");
    if (!(s.mass > 0.0)) report.add("dynamics_mass", "mass must be > 0");
    if (!(s.damping > 0.0)) report.add("dynamics_damping", "damping must be > 0");
  } else if (type == "linear") {
    require_keys(dyn, "dynamics", {"type", "Fp", "Fv", "G"}, {});
    s.model_kind = ModelKind::kLinear;
    s.state_gain_p = parse_matrix(dyn.at("Fp"), "dynamics.Fp", s.n, s.n);
    s.state_gain_v = parse_matrix(dyn.at("Fv"), "dynamics.Fv", s.n, s.n);
    s.input_gain = parse_matrix(dyn.at("G"), "dynamics.G", s.n, s.n);
    Eigen::FullPivLU<Matrix> lu(s.input_gain);
    if (lu.rank() < s.n) {
      report.add("dynamics_rank", "linear input matrix G is rank deficient");
    }
  } else {
    schema_error("dynamics.type must be double_integrator, damped_coupled_2d, "
                 "or linear");
  }

  // waypoints and ellipsoids
  const json& wps = doc.at("waypoints");
  const json& ells = doc.at("ellipsoids");
  if (!wps.is_array() || wps.empty()) schema_error("waypoints must be a nonempty array");
  if (!ells.is_array() || ells.empty()) schema_error("ellipsoids must be a nonempty array");
  if (wps.size() != ells.size() + 1) {
    schema_error("waypoint count must equal ellipsoid count + 1 (got " +
                 std::to_string(wps.size()) + " and " +
                 std::to_string(ells.size()) + ")");
  }
  for (size_t i = 0; i < wps.size(); ++i) {
    s.plan.waypoints.push_back(
        parse_vector(wps[i], "waypoints[" + std::to_string(i) + "]", s.n));
  }
  for (size_t i = 0; i < ells.size(); ++i) {
    const std::string where = "ellipsoids[" + std::to_string(i) + "]";
    const json& e = ells[i];
    if (!e.is_object()) schema_error(where + " must be an object");
    require_keys(e, where, {"center", "shape"}, {});
    const Vector center = parse_vector(e.at("center"), where + ".center", s.n);
    Matrix shape = parse_matrix(e.at("shape"), where + ".shape", s.n, s.n);
    shape = load_symmetric(shape, where + ".shape", report,
                           static_cast<int>(i));
    ValidationReport spd = validate_shape_matrix(shape, static_cast<int>(i));
    report.merge(spd);
    if (spd.ok()) {
      s.plan.ellipsoids.emplace_back(center, shape);
    }
  }

  // obstacles (plot-only)
  if (doc.contains("obstacles")) {
    const json& obs = doc.at("obstacles");
    if (!obs.is_array()) schema_error("obstacles must be an array");
    for (size_t i = 0; i < obs.size(); ++i) {
      const std::string where = "obstacles[" + std::to_string(i) + "]";
      if (!obs[i].is_object()) schema_error(where + " must be an object");
      require_keys(obs[i], where, {"min", "max"}, {});
      ObstacleBox box;
      box.min = parse_vector(obs[i].at("min"), where + ".min", s.n);
      box.max = parse_vector(obs[i].at("max"), where + ".max", s.n);
      if (((box.max - box.min).array() <= 0.0).any()) {
        report.add("obstacle_degenerate", "obstacle box has nonpositive extent",
                   static_cast<int>(i));
      }
      s.obstacles.push_back(std::move(box));
    }
  }

  // controller (all fields optional, defaults otherwise)
  s.controller = ControllerParams::defaults(s.n);
  if (doc.contains("controller")) {
    const json& c = doc.at("controller");
    if (!c.is_object()) schema_error("controller must be an object");
    require_keys(c, "controller", {},
                 {"P1", "P2", "P3", "gamma", "k1", "k2", "H", "switch_margin",
                  "goal_pos_tol", "goal_vel_tol", "gamma_backoff"});
    if (c.contains("P1")) {
      s.controller.clf.P1 = load_symmetric(
          parse_matrix(c.at("P1"), "controller.P1", s.n, s.n), "controller.P1",
          report);
    }
    if (c.contains("P2")) {
      s.controller.clf.P2 = load_symmetric(
          parse_matrix(c.at("P2"), "controller.P2", s.n, s.n), "controller.P2",
          report);
    }
    if (c.contains("P3")) {
      s.controller.clf.P3 = load_symmetric(
          parse_matrix(c.at("P3"), "controller.P3", s.n, s.n), "controller.P3",
          report);
    }
    if (c.contains("gamma")) {
      s.controller.clf.gamma = get_number(c, "controller", "gamma");
    }
    double k1 = s.controller.barrier.k1();
    double k2 = s.controller.barrier.k2();
    if (c.contains("k1")) k1 = get_number(c, "controller", "k1");
    if (c.contains("k2")) k2 = get_number(c, "controller", "k2");
    if (!(k1 > 0.0)) report.add("controller_k1", "k1 must be > 0", -1, k1);
    if (!(k2 > 0.0)) report.add("controller_k2", "k2 must be > 0", -1, k2);
    if (k1 > 0.0 && k2 > 0.0) s.controller.barrier = BarrierGains(k1, k2);
    if (c.contains("H")) {
      s.controller.cost = load_symmetric(
          parse_matrix(c.at("H"), "controller.H", s.n, s.n), "controller.H",
          report);
    }
    if (c.contains("switch_margin")) {
      s.controller.switch_margin = get_number(c, "controller", "switch_margin");
    }
    if (c.contains("goal_pos_tol")) {
      s.controller.goal_pos_tol = get_number(c, "controller", "goal_pos_tol");
    }
    if (c.contains("goal_vel_tol")) {
      s.controller.goal_vel_tol = get_number(c, "controller", "goal_vel_tol");
    }
    if (c.contains("gamma_backoff")) {
      if (!c.at("gamma_backoff").is_boolean()) {
        schema_error("controller.gamma_backoff must be a boolean");
      }
      s.controller.gamma_backoff = c.at("gamma_backoff").get<bool>();
    }
  }

  // sim settings
  const json& sim = doc.at("sim");
  if (!sim.is_object()) schema_error("sim must be an object");
  require_keys(sim, "sim", {"dt", "t_max"}, {});
  s.dt = get_number(sim, "sim", "dt");
  s.t_max = get_number(sim, "sim", "t_max");
  if (!(s.dt > 0.0)) report.add("sim_dt", "sim.dt must be > 0", -1, s.dt);
  if (s.t_max < 0.0) report.add("sim_t_max", "sim.t_max must be >= 0", -1, s.t_max);

  // Domain validation runs only on structurally complete pieces.
  if (s.plan.ellipsoids.size() == ells.size() &&
      s.plan.waypoints.size() == s.plan.ellipsoids.size() + 1) {
    report.merge(validate_path_plan(s.plan));
  }
  report.merge(validate_controller_params(s.controller));
  if (report.ok()) {
    auto model = s.make_model();
    std::vector<std::pair<Vector, Vector>> samples;
    for (const auto& w : s.plan.waypoints) {
      samples.emplace_back(w, Vector::Zero(s.n));
    }
    report.merge(validate_input_map_rank(*model, samples));
  }

  if (!report.ok()) {
    throw ScenarioValidationError(
        "scenario validation failed:\n" + report.to_string(), report);
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ScenarioParseError("cannot open scenario file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["n"] = s.n;
  json dyn;
  switch (s.model_kind) {
    case ModelKind::kDoubleIntegrator:
      dyn["type"] = "double_integrator";
      break;
    case ModelKind::kDampedCoupled2D:
      dyn["type"] = "damped_coupled_2d";
      dyn["mass"] = s.mass;
      dyn["damping"] = s.damping;
      break;
    case ModelKind::kLinear:
      dyn["type"] = "linear";
      dyn["Fp"] = matrix_to_json(s.state_gain_p);
      dyn["Fv"] = matrix_to_json(s.state_gain_v);
      dyn["G"] = matrix_to_json(s.input_gain);
      break;
  }
  doc["dynamics"] = dyn;
  doc["waypoints"] = json::array();
  for (const auto& w : s.plan.waypoints) doc["waypoints"].push_back(vector_to_json(w));
  doc["ellipsoids"] = json::array();
  for (const auto& e : s.plan.ellipsoids) {
    json obj;
    obj["center"] = vector_to_json(e.center());
    obj["shape"] = matrix_to_json(e.shape());
    doc["ellipsoids"].push_back(obj);
  }
  if (!s.obstacles.empty()) {
    doc["obstacles"] = json::array();
    for (const auto& b : s.obstacles) {
      json obj;
      obj["min"] = vector_to_json(b.min);
      obj["max"] = vector_to_json(b.max);
      doc["obstacles"].push_back(obj);
    }
  }
  json ctrl;
  ctrl["P1"] = matrix_to_json(s.controller.clf.P1);
  ctrl["P2"] = matrix_to_json(s.controller.clf.P2);
  ctrl["P3"] = matrix_to_json(s.controller.clf.P3);
  ctrl["gamma"] = s.controller.clf.gamma;
  ctrl["k1"] = s.controller.barrier.k1();
  ctrl["k2"] = s.controller.barrier.k2();
  ctrl["H"] = matrix_to_json(s.controller.cost);
  ctrl["switch_margin"] = s.controller.switch_margin;
  ctrl["goal_pos_tol"] = s.controller.goal_pos_tol;
  ctrl["goal_vel_tol"] = s.controller.goal_vel_tol;
  ctrl["gamma_backoff"] = s.controller.gamma_backoff;
  doc["controller"] = ctrl;
  doc["sim"] = {{"dt", s.dt}, {"t_max", s.t_max}};
  return doc.dump(2) + "\n";
}

SimResult run_scenario(const Scenario& scenario, const SimOverrides& overrides) {
  SimOptions options;
  options.dt = overrides.dt.value_or(scenario.dt);
  options.t_max = overrides.t_max.value_or(scenario.t_max);
  options.zero_order_hold = overrides.zero_order_hold;
  auto model = scenario.make_model();
  return simulate(scenario.plan, *model, scenario.controller, options);
}

std::string write_summary(const SimResult& result, const Scenario& scenario) {
  if (result.log.records.empty()) {
    throw std::invalid_argument("write_summary: no records");
  }
  const Vector& goal = scenario.plan.waypoints.back();
  const auto& last = result.log.records.back();

  json seg_stats = json::array();
  for (int i = 0; i < scenario.plan.segments(); ++i) {
    double min_h = std::numeric_limits<double>::infinity();
    double min_hp = std::numeric_limits<double>::infinity();
    bool seen = false;
    for (const auto& rec : result.log.records) {
      if (rec.segment != i) continue;
      seen = true;
      min_h = std::min(min_h, rec.h);
      min_hp = std::min(min_hp, rec.h_prime);
    }
    if (!seen) continue;
    seg_stats.push_back({{"segment", i}, {"min_h", min_h},
                         {"min_h_prime", min_hp}});
  }

  json switches = json::array();
  for (const auto& rec : result.log.records) {
    if (rec.switched) switches.push_back(rec.t);
  }

  json doc;
  doc["scenario"] = scenario.name;
  doc["outcome"] = to_string(result.outcome);
  doc["final_time"] = last.t;
  doc["final_position_error"] = (last.p - goal).norm();
  doc["final_speed"] = last.v.norm();
  doc["segments"] = seg_stats;
  doc["switch_times"] = switches;
  doc["steps"] = result.log.records.size();
  doc["dt"] = result.log.dt;
  doc["gamma_backoffs"] = result.gamma_backoff_total;
  doc["control_lipschitz"] = result.control_lipschitz;
  doc["wall_time_sec"] = result.wall_time_sec;
  if (!result.detail.empty()) doc["detail"] = result.detail;
  return doc.dump(2) + "\n";
}

}  // namespace safenav
