#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "safenav/scenario.hpp"

namespace safenav {

namespace {

constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
  void include(double x, double y) {
    min_x = std::min(min_x, x);
    min_y = std::min(min_y, y);
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
  }
};

struct EllipseSlice {
  double cx, cy;      // center on the projection plane
  double r1, r2;      // semi-axes
  double angle_deg;   // rotation of the first axis
  double half_ext_x;  // axis-aligned bounding half-extents
  double half_ext_y;
};

// Exact conic slice through the center: the 2x2 principal submatrix of A on
// the chosen axes describes the intersection ellipse for axis-aligned views.
EllipseSlice slice_ellipsoid(const Ellipsoid& e, int ax, int ay) {
  Matrix s2(2, 2);
  s2 << e.shape()(ax, ax), e.shape()(ax, ay), e.shape()(ay, ax),
      e.shape()(ay, ay);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s2);
  const Vector evals = es.eigenvalues();
  const Matrix evecs = es.eigenvectors();

  EllipseSlice out;
  out.cx = e.center()(ax);
  out.cy = e.center()(ay);
  out.r1 = 1.0 / std::sqrt(evals(0));
  out.r2 = 1.0 / std::sqrt(evals(1));
  out.angle_deg = std::atan2(evecs(1, 0), evecs(0, 0)) * 180.0 / std::numbers::pi;
  const Matrix inv = s2.inverse();
  out.half_ext_x = std::sqrt(std::max(0.0, inv(0, 0)));
  out.half_ext_y = std::sqrt(std::max(0.0, inv(1, 1)));
  return out;
}

void check_axes(const Scenario& scenario, std::pair<int, int> axes) {
  if (scenario.n < 2) {
    throw std::invalid_argument("render_svg: projection needs n >= 2");
  }
  if (axes.first < 0 || axes.second < 0 || axes.first >= scenario.n ||
      axes.second >= scenario.n || axes.first == axes.second) {
    throw std::invalid_argument("render_svg: invalid projection axes");
  }
}

struct Canvas {
  std::ostringstream body;
  Bounds bounds;
  int ax, ay;

  void add_scene(const Scenario& scenario) {
    for (const auto& e : scenario.plan.ellipsoids) {
      const EllipseSlice s = slice_ellipsoid(e, ax, ay);
      bounds.include(s.cx - s.half_ext_x, s.cy - s.half_ext_y);
      bounds.include(s.cx + s.half_ext_x, s.cy + s.half_ext_y);
      body << "  <ellipse class=\"safe-set\" cx=\"" << fmt(s.cx) << "\" cy=\""
           << fmt(s.cy) << "\" rx=\"" << fmt(s.r1) << "\" ry=\"" << fmt(s.r2)
           << "\" transform=\"rotate(" << fmt(s.angle_deg) << " " << fmt(s.cx)
           << " " << fmt(s.cy)
           << ")\" fill=\"#d9d9d9\" fill-opacity=\"0.45\" stroke=\"#8a8a8a\"/>\n";
    }
    for (const auto& b : scenario.obstacles) {
      const double x = b.min(ax);
      const double y = b.min(ay);
      const double w = b.max(ax) - b.min(ax);
      const double h = b.max(ay) - b.min(ay);
      bounds.include(x, y);
      bounds.include(x + w, y + h);
      body << "  <rect class=\"obstacle\" x=\"" << fmt(x) << "\" y=\"" << fmt(y)
           << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
           << "\" fill=\"#3a3a3a\"/>\n";
    }
  }

  void add_polyline(const std::vector<const TrajectoryRecord*>& points,
                    const std::string& color, const std::string& cls,
                    double width) {
    if (points.size() < 2) return;
    body << "  <path class=\"" << cls << "\" d=\"";
    for (size_t i = 0; i < points.size(); ++i) {
      const double x = points[i]->p(ax);
      const double y = points[i]->p(ay);
      bounds.include(x, y);
      body << (i == 0 ? "M" : " L") << fmt(x) << " " << fmt(y);
    }
    body << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
         << fmt(width) << "\"/>\n";
  }

  void add_waypoints(const Scenario& scenario, double r) {
    for (const auto& w : scenario.plan.waypoints) {
      bounds.include(w(ax), w(ay));
      body << "  <circle class=\"waypoint\" cx=\"" << fmt(w(ax)) << "\" cy=\""
           << fmt(w(ay)) << "\" r=\"" << fmt(r)
           << "\" fill=\"#000000\"/>\n";
    }
  }

  std::string finish() const {
    const double pad =
        0.05 * std::max(bounds.max_x - bounds.min_x,
                        std::max(bounds.max_y - bounds.min_y, 1e-6));
    const double x0 = bounds.min_x - pad;
    const double y0 = bounds.min_y - pad;
    const double w = bounds.max_x - bounds.min_x + 2 * pad;
    const double h = bounds.max_y - bounds.min_y + 2 * pad;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
       << "viewBox=\"" << fmt(x0) << " " << fmt(-y0 - h) << " " << fmt(w)
       << " " << fmt(h) << "\" width=\"800\" height=\""
       << fmt(800.0 * h / w) << "\">\n"
       << "<g transform=\"scale(1,-1)\">\n"
       << body.str() << "</g>\n</svg>\n";
    return os.str();
  }
};

double stroke_width(const Canvas& canvas) {
  const double extent = std::max(canvas.bounds.max_x - canvas.bounds.min_x,
                                 canvas.bounds.max_y - canvas.bounds.min_y);
  return std::max(1e-3, 0.004 * extent);
}

}  // namespace

std::string render_svg(const TrajectoryLog& log, const Scenario& scenario,
                       std::pair<int, int> axes) {
  check_axes(scenario, axes);
  Canvas canvas;
  canvas.ax = axes.first;
  canvas.ay = axes.second;
  canvas.add_scene(scenario);

  // One path per segment, colored by segment index. A switch record belongs
  // to both polylines so the drawn path is continuous.
  std::vector<std::vector<const TrajectoryRecord*>> by_segment(
      scenario.plan.segments());
  const TrajectoryRecord* prev = nullptr;
  for (const auto& rec : log.records) {
    if (rec.segment < 0 || rec.segment >= scenario.plan.segments()) continue;
    if (prev && rec.segment != prev->segment) {
      by_segment[rec.segment].push_back(prev);
    }
    by_segment[rec.segment].push_back(&rec);
    prev = &rec;
  }
  const double width = stroke_width(canvas);
  for (int i = 0; i < scenario.plan.segments(); ++i) {
    canvas.add_polyline(by_segment[i], kPalette[i % kPalette.size()],
                        "trajectory-segment", width);
  }
  canvas.add_waypoints(scenario, 2.0 * width);
  return canvas.finish();
}

std::string render_sweep_svg(const std::vector<TrajectoryLog>& logs,
                             const std::vector<std::string>& labels,
                             const Scenario& scenario,
                             std::pair<int, int> axes) {
  check_axes(scenario, axes);
  if (labels.size() != logs.size()) {
    throw std::invalid_argument("render_sweep_svg: label/log count mismatch");
  }
  Canvas canvas;
  canvas.ax = axes.first;
  canvas.ay = axes.second;
  canvas.add_scene(scenario);
  const double width = stroke_width(canvas);
  for (size_t r = 0; r < logs.size(); ++r) {
    std::vector<const TrajectoryRecord*> pts;
    pts.reserve(logs[r].records.size());
    for (const auto& rec : logs[r].records) pts.push_back(&rec);
    canvas.body << "  <!-- " << labels[r] << " -->\n";
    canvas.add_polyline(pts, kPalette[r % kPalette.size()], "trajectory-run",
                        width);
  }
  canvas.add_waypoints(scenario, 2.0 * width);
  return canvas.finish();
}

}  // namespace safenav
