#include "core/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gripopt::post {

namespace {

constexpr double kDistanceTol = 1e-9;

std::vector<geom::Polygon> jaw_shapes(const ProblemSpec& problem, const ConfigVars& config,
                                      geom::Jaw jaw) {
  return shape::gripper_frame_shapes(problem, config, jaw);
}

}  // namespace

double min_contact_signed_distance(const ProblemSpec& problem, const ConfigVars& config) {
  std::vector<shape::ShapeContact> contacts = shape::gripper_frame_contacts(problem, config);
  std::vector<geom::Polygon> left = jaw_shapes(problem, config, geom::Jaw::Left);
  std::vector<geom::Polygon> right = jaw_shapes(problem, config, geom::Jaw::Right);
  double worst = std::numeric_limits<double>::infinity();
  for (const shape::ShapeContact& c : contacts) {
    const auto& shapes = c.jaw == geom::Jaw::Left ? left : right;
    for (const geom::Polygon& poly : shapes) {
      worst = std::min(worst, geom::signed_distance(c.frame.position, poly));
    }
  }
  return worst;
}

std::pair<double, double> contact_band(const ProblemSpec& problem, const ConfigVars& config) {
  std::vector<shape::ShapeContact> contacts = shape::gripper_frame_contacts(problem, config);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const shape::ShapeContact& c : contacts) {
    lo = std::min(lo, c.frame.position.y());
    hi = std::max(hi, c.frame.position.y());
  }
  double margin = 3.0 * problem.params.curvature_sigma;
  lo = std::max(problem.params.grid_low, lo - margin);
  hi = std::min(problem.params.grid_high, hi + margin);
  if (hi - lo < 1e-6) {
    double mid = 0.5 * (lo + hi);
    lo = mid - 1e-3;
    hi = mid + 1e-3;
  }
  return {lo, hi};
}

StageAResult stage_a(const ProblemSpec& problem, const ConfigVars& config,
                     const std::vector<stab::ThetaScan>& theta, double penalty_final) {
  StageAResult out;
  out.config = config;
  out.min_signed_distance = min_contact_signed_distance(problem, config);
  if (out.min_signed_distance >= -kDistanceTol) {
    out.ok = true;
    out.message = "contacts already accessible";
    return out;
  }
  out.repaired = true;

  ZLayout layout(problem);
  Eigen::VectorXd z0 = layout.pack(config);

  // Small search box centered on the input.
  alm::BoxBounds box = alm::config_box(problem, theta);
  const double angle_halfwidth = 5.0 * std::numbers::pi / 180.0;
  const double coord_halfwidth = 0.05;
  const double pose_halfwidth = 0.1 * problem.max_characteristic_length();
  for (int k = 0; k < problem.object_count(); ++k) {
    int o = layout.pose_offset(k);
    for (int j : {0, 1}) {
      box.low[o + j] = std::max(box.low[o + j], z0[o + j] - pose_halfwidth);
      box.high[o + j] = std::min(box.high[o + j], z0[o + j] + pose_halfwidth);
    }
    box.low[o + 2] = std::max(box.low[o + 2], z0[o + 2] - angle_halfwidth);
    box.high[o + 2] = std::min(box.high[o + 2], z0[o + 2] + angle_halfwidth);
    box.low[o + 3] = std::max(box.low[o + 3], z0[o + 3] - pose_halfwidth);
    box.high[o + 3] = std::min(box.high[o + 3], z0[o + 3] + pose_halfwidth);
    for (int c = 0; c < layout.coord_count(k); ++c) {
      int idx = layout.coord_index(k, c);
      box.low[idx] = std::max(box.low[idx], z0[idx] - coord_halfwidth);
      box.high[idx] = std::min(box.high[idx], z0[idx] + coord_halfwidth);
    }
  }

  auto min_distance_at = [&](const Eigen::VectorXd& z) {
    return min_contact_signed_distance(problem, layout.unpack(z));
  };
  auto violation_at = [&](const Eigen::VectorXd& z) {
    std::vector<shape::ShapeContact> contacts =
        shape::gripper_frame_contacts(problem, layout.unpack(z));
    ConfigVars cfg = layout.unpack(z);
    std::vector<geom::Polygon> left = jaw_shapes(problem, cfg, geom::Jaw::Left);
    std::vector<geom::Polygon> right = jaw_shapes(problem, cfg, geom::Jaw::Right);
    double acc = 0.0;
    for (const shape::ShapeContact& c : contacts) {
      const auto& shapes = c.jaw == geom::Jaw::Left ? left : right;
      for (const geom::Polygon& poly : shapes) {
        double sd = geom::signed_distance(c.frame.position, poly);
        if (sd < 0.0) acc += sd * sd;
      }
    }
    return acc;
  };

  // Feasibility restoration on the squared violation.
  Eigen::VectorXd z = z0;
  double v = violation_at(z);
  for (int iter = 0; iter < 60 && min_distance_at(z) < -kDistanceTol; ++iter) {
    const int n = static_cast<int>(z.size());
    Eigen::VectorXd gradient(n);
    for (int i = 0; i < n; ++i) {
      double h = 1e-7 * std::max(1.0, std::abs(z[i]));
      if (z[i] + h > box.high[i]) h = -h;
      Eigen::VectorXd zp = z;
      zp[i] += h;
      gradient[i] = (violation_at(zp) - v) / h;
    }
    double gnorm = gradient.cwiseAbs().maxCoeff();
    if (gnorm < 1e-18) break;
    bool moved = false;
    double t = 1.0 / gnorm;
    for (int bt = 0; bt < 30; ++bt) {
      Eigen::VectorXd zt = box.clamp(z - t * gradient);
      double vt = violation_at(zt);
      if (vt < v) {
        z = zt;
        v = vt;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }

  if (min_distance_at(z) < -kDistanceTol) {
    out.message = "no accessible configuration within the repair box";
    return out;
  }

  // Quality descent under the quadratic penalty, rejecting configurations
  // that lose contact accessibility.
  auto [band_lo, band_hi] = contact_band(problem, layout.unpack(z));
  std::vector<double> grid =
      shape::uniform_grid(band_lo, band_hi, problem.params.grid_intervals);
  alm::CandidateFilter filter = [&](const Eigen::VectorXd& zc) {
    return min_distance_at(zc) >= -kDistanceTol;
  };
  Eigen::VectorXd warm;
  alm::DescentResult refined = alm::project_descent(
      problem, layout, grid, box, z, Eigen::VectorXd(), penalty_final,
      problem.params.postprocess_iterations, &warm, &filter);

  Eigen::VectorXd z_final =
      min_distance_at(refined.z) >= -kDistanceTol ? refined.z : z;
  out.config = layout.unpack(z_final);
  out.min_signed_distance = min_distance_at(z_final);
  out.value = refined.value;
  out.ok = out.min_signed_distance >= -kDistanceTol;
  out.message = out.ok ? "repaired" : "repair left residual penetration";
  return out;
}

std::vector<double> refined_grid(const ProblemSpec& problem, const ConfigVars& config) {
  auto [lo, hi] = contact_band(problem, config);
  std::vector<double> heights = shape::uniform_grid(lo, hi, problem.params.grid_intervals);

  auto insert_height = [&](double y) {
    if (y > lo && y < hi) heights.push_back(y);
  };
  for (const shape::ShapeContact& c : shape::gripper_frame_contacts(problem, config)) {
    insert_height(c.frame.position.y());
  }
  for (const geom::Polygon& poly : jaw_shapes(problem, config, geom::Jaw::Left)) {
    for (const geom::Vec2& v : poly.vertices) insert_height(v.y());
  }

  std::sort(heights.begin(), heights.end());
  std::vector<double> grid;
  for (double y : heights) {
    if (grid.empty() || y - grid.back() > 1e-9) grid.push_back(y);
  }
  if (grid.size() < 2) grid = {lo, hi};
  return grid;
}

StageBResult stage_b(const ProblemSpec& problem, const ConfigVars& config) {
  StageBResult out;
  std::vector<double> grid = refined_grid(problem, config);

  shape::ShapeAssembly assembly = shape::assemble_shape(problem, config, grid);
  if (!assembly.ok()) {
    out.message = assembly.issue;
    return out;
  }
  shape::ShapeSolution sol = shape::solve_shape(problem, config, grid);
  if (sol.status != qp::Status::Optimal) {
    out.message = std::string("shape program ") + qp::status_name(sol.status);
    return out;
  }

  out.surface = sol.surface;
  out.objective = sol.objective;

  double contact_residual = 0.0;
  for (const shape::ShapeContact& c : shape::gripper_frame_contacts(problem, config)) {
    double y = c.frame.position.y();
    contact_residual = std::max(
        contact_residual, std::abs(shape::hermite_position(sol.surface, c.jaw, y) -
                                   c.frame.position.x()));
    contact_residual = std::max(
        contact_residual, std::abs(shape::hermite_slope(sol.surface, c.jaw, y) -
                                   c.frame.tangent.x() / c.frame.tangent.y()));
  }
  out.contact_residual = contact_residual;

  const shape::ShapeProgram& prog = *assembly.program;
  double bound_violation = 0.0;
  int np = sol.surface.point_count();
  double min_opening = std::numeric_limits<double>::infinity();
  for (const geom::ObjectConfig& oc : config.object_config) {
    min_opening = std::min(min_opening, oc.jaw_opening);
  }
  for (int i = 0; i < np; ++i) {
    double vl = sol.surface.positions[i];
    double vr = sol.surface.positions[np + i];
    bound_violation = std::max(bound_violation, vl - prog.upper_bounds[i]);
    bound_violation = std::max(bound_violation, prog.lower_bounds[i] - vr);
    bound_violation = std::max(bound_violation, vl - vr - min_opening);
  }
  out.bound_violation = std::max(bound_violation, 0.0);
  out.ok = true;
  out.message = "ok";
  return out;
}

}  // namespace gripopt::post
