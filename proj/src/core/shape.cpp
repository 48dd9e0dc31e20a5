#include "core/shape.hpp"

#include <cmath>
#include <stdexcept>

namespace gripopt::shape {

namespace {

constexpr double kHorizontalTangentTol = 1e-9;

struct Basis {
  double h00, h01, h10, h11;
};

Basis hermite_basis(double l) {
  double l2 = l * l;
  double l3 = l2 * l;
  return {2.0 * l3 - 3.0 * l2 + 1.0, -2.0 * l3 + 3.0 * l2, l3 - 2.0 * l2 + l, l3 - l2};
}

double bound_cap_for(const ProblemSpec& problem) {
  return 100.0 * std::max(1.0, problem.scene_radius() + problem.params.position_bound_x +
                                   problem.params.position_bound_y +
                                   std::abs(problem.params.opening_high));
}

}  // namespace

int locate_interval(const std::vector<double>& grid, double y) {
  if (grid.size() < 2) throw std::invalid_argument("locate_interval: grid too small");
  if (y < grid.front() || y > grid.back()) {
    throw std::invalid_argument("locate_interval: query outside grid span");
  }
  if (y <= grid.front()) return 0;
  int lo = 0;
  int hi = static_cast<int>(grid.size()) - 1;
  // Find i with grid[i] < y <= grid[i+1].
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (grid[mid] < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double hermite_position(const SurfaceParams& surface, geom::Jaw jaw, double y) {
  int i = locate_interval(surface.grid, y);
  double dy = surface.grid[i + 1] - surface.grid[i];
  double l = (y - surface.grid[i]) / dy;
  Basis h = hermite_basis(l);
  int a = surface.value_index(jaw, i);
  int b = surface.value_index(jaw, i + 1);
  return h.h00 * surface.positions[a] + h.h01 * surface.positions[b] +
         dy * (h.h10 * surface.slopes[a] + h.h11 * surface.slopes[b]);
}

double hermite_slope(const SurfaceParams& surface, geom::Jaw jaw, double y) {
  int i = locate_interval(surface.grid, y);
  double dy = surface.grid[i + 1] - surface.grid[i];
  double l = (y - surface.grid[i]) / dy;
  int a = surface.value_index(jaw, i);
  int b = surface.value_index(jaw, i + 1);
  return (6.0 * l * l - 6.0 * l) * (surface.positions[a] - surface.positions[b]) / dy +
         (3.0 * l * l - 4.0 * l + 1.0) * surface.slopes[a] +
         (3.0 * l * l - 2.0 * l) * surface.slopes[b];
}

std::pair<double, double> second_derivatives(const SurfaceParams& surface, geom::Jaw jaw,
                                             int interval) {
  double dy = surface.grid[interval + 1] - surface.grid[interval];
  int a = surface.value_index(jaw, interval);
  int b = surface.value_index(jaw, interval + 1);
  double va = surface.positions[a];
  double vb = surface.positions[b];
  double ma = surface.slopes[a];
  double mb = surface.slopes[b];
  double start = 6.0 * (vb - va) / (dy * dy) - 2.0 * (2.0 * ma + mb) / dy;
  double end = 6.0 * (va - vb) / (dy * dy) + 2.0 * (ma + 2.0 * mb) / dy;
  return {start, end};
}

Eigen::RowVectorXd position_row(const std::vector<double>& grid, geom::Jaw jaw, double y) {
  int np = static_cast<int>(grid.size());
  int i = locate_interval(grid, y);
  double dy = grid[i + 1] - grid[i];
  double l = (y - grid[i]) / dy;
  Basis h = hermite_basis(l);
  int base = jaw == geom::Jaw::Right ? np : 0;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(4 * np);
  row[base + i] = h.h00;
  row[base + i + 1] = h.h01;
  row[2 * np + base + i] = dy * h.h10;
  row[2 * np + base + i + 1] = dy * h.h11;
  return row;
}

Eigen::RowVectorXd slope_row(const std::vector<double>& grid, geom::Jaw jaw, double y) {
  int np = static_cast<int>(grid.size());
  int i = locate_interval(grid, y);
  double dy = grid[i + 1] - grid[i];
  double l = (y - grid[i]) / dy;
  int base = jaw == geom::Jaw::Right ? np : 0;
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(4 * np);
  row[base + i] = (6.0 * l * l - 6.0 * l) / dy;
  row[base + i + 1] = -(6.0 * l * l - 6.0 * l) / dy;
  row[2 * np + base + i] = 3.0 * l * l - 4.0 * l + 1.0;
  row[2 * np + base + i + 1] = 3.0 * l * l - 2.0 * l;
  return row;
}

std::vector<ShapeContact> gripper_frame_contacts(const ProblemSpec& problem,
                                                 const ConfigVars& config) {
  std::vector<ShapeContact> out;
  std::vector<int> local_count(problem.object_count(), 0);
  for (int i = 0; i < problem.contact_count(); ++i) {
    const ContactSpec& c = problem.contacts[i];
    const ObjectSpec& obj = problem.objects[c.object];
    int local = local_count[c.object]++;
    ShapeContact sc;
    sc.contact_id = i;
    sc.object = c.object;
    sc.jaw = c.jaw;
    sc.frame = geom::contact_geometry(obj.shape, obj.world_pose, c.edge,
                                      config.contact_coords[c.object][local],
                                      config.object_config[c.object], c.jaw);
    out.push_back(sc);
  }
  return out;
}

std::vector<geom::Polygon> gripper_frame_shapes(const ProblemSpec& problem,
                                                const ConfigVars& config, geom::Jaw jaw) {
  std::vector<geom::Polygon> shapes;
  for (int k = 0; k < problem.object_count(); ++k) {
    const ObjectSpec& obj = problem.objects[k];
    geom::Transform2 t =
        compose(geom::world_to_jaw(config.object_config[k], jaw), obj.world_pose);
    shapes.push_back(geom::transformed(obj.shape, t));
    for (const geom::Polygon& ob : obj.obstacles) shapes.push_back(geom::transformed(ob, t));
  }
  return shapes;
}

Eigen::MatrixXd shape_cost(const ProblemSpec& problem, const std::vector<double>& grid,
                           const std::vector<ShapeContact>& contacts) {
  const int np = static_cast<int>(grid.size());
  const int ny = np - 1;
  const int n = 4 * np;
  const double length_sum = problem.characteristic_length_sum();
  const double wp = problem.params.weight_curvature * length_sum * length_sum / ny;
  const double ws =
      problem.params.weight_path * ny * ny / (length_sum * length_sum);
  const double sigma = problem.params.curvature_sigma;

  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  auto accumulate = [&](const Eigen::RowVectorXd& row, double weight) {
    // J_S = 1/2 u'Qu, so each squared term contributes twice its weight.
    Q.selfadjointView<Eigen::Lower>().rankUpdate(row.transpose(), 2.0 * weight);
  };

  for (geom::Jaw jaw : {geom::Jaw::Left, geom::Jaw::Right}) {
    int base = jaw == geom::Jaw::Right ? np : 0;
    for (int i = 0; i < ny; ++i) {
      double dy = grid[i + 1] - grid[i];

      double gauss_start = 0.0, gauss_end = 0.0;
      for (const ShapeContact& c : contacts) {
        if (c.jaw != jaw) continue;
        double yc = c.frame.position.y();
        double d0 = grid[i] - yc;
        double d1 = grid[i + 1] - yc;
        gauss_start += std::exp(-d0 * d0 / (2.0 * sigma * sigma));
        gauss_end += std::exp(-d1 * d1 / (2.0 * sigma * sigma));
      }

      Eigen::RowVectorXd start = Eigen::RowVectorXd::Zero(n);
      start[base + i] = -6.0 / (dy * dy);
      start[base + i + 1] = 6.0 / (dy * dy);
      start[2 * np + base + i] = -4.0 / dy;
      start[2 * np + base + i + 1] = -2.0 / dy;

      Eigen::RowVectorXd end = Eigen::RowVectorXd::Zero(n);
      end[base + i] = 6.0 / (dy * dy);
      end[base + i + 1] = -6.0 / (dy * dy);
      end[2 * np + base + i] = 2.0 / dy;
      end[2 * np + base + i + 1] = 4.0 / dy;

      if (gauss_start > 0.0) accumulate(start, wp * gauss_start);
      if (gauss_end > 0.0) accumulate(end, wp * gauss_end);

      Eigen::RowVectorXd path = Eigen::RowVectorXd::Zero(n);
      path[base + i] = -1.0;
      path[base + i + 1] = 1.0;
      accumulate(path, ws);
    }
  }
  Eigen::MatrixXd full = Q.selfadjointView<Eigen::Lower>();
  return full;
}

ShapeAssembly assemble_shape(const ProblemSpec& problem, const ConfigVars& config,
                             const std::vector<double>& grid) {
  ShapeAssembly out;
  const int np = static_cast<int>(grid.size());
  const int n = 4 * np;

  std::vector<ShapeContact> contacts = gripper_frame_contacts(problem, config);

  double violation = 0.0;
  std::string issue;
  for (const ShapeContact& c : contacts) {
    double ty = std::abs(c.frame.tangent.y());
    if (ty < kHorizontalTangentTol) {
      violation += 1.0;
      issue = "contact tangent horizontal in the jaw frame";
    }
    double y = c.frame.position.y();
    if (y < grid.front()) {
      violation += grid.front() - y;
      issue = "contact below the grid span";
    } else if (y > grid.back()) {
      violation += y - grid.back();
      issue = "contact above the grid span";
    }
  }
  if (violation > 0.0) {
    out.violation = violation;
    out.issue = issue;
    return out;
  }

  ShapeProgram prog;
  prog.grid = grid;
  prog.bound_cap = bound_cap_for(problem);
  prog.Q = shape_cost(problem, grid, contacts);

  prog.H.resize(2 * static_cast<int>(contacts.size()), n);
  prog.g.resize(prog.H.rows());
  for (size_t i = 0; i < contacts.size(); ++i) {
    const ShapeContact& c = contacts[i];
    double y = c.frame.position.y();
    prog.H.row(2 * static_cast<int>(i)) = position_row(grid, c.jaw, y);
    prog.g[2 * static_cast<int>(i)] = c.frame.position.x();
    prog.H.row(2 * static_cast<int>(i) + 1) = slope_row(grid, c.jaw, y);
    prog.g[2 * static_cast<int>(i) + 1] = c.frame.tangent.x() / c.frame.tangent.y();
  }

  std::vector<double> upper =
      geom::sweep_upper_bounds(gripper_frame_shapes(problem, config, geom::Jaw::Left), grid);
  std::vector<double> lower =
      geom::sweep_lower_bounds(gripper_frame_shapes(problem, config, geom::Jaw::Right), grid);
  for (double& v : upper) v = std::min(v, prog.bound_cap);
  for (double& v : lower) v = std::max(v, -prog.bound_cap);
  prog.upper_bounds = upper;
  prog.lower_bounds = lower;

  double min_opening = std::numeric_limits<double>::infinity();
  for (const geom::ObjectConfig& oc : config.object_config) {
    min_opening = std::min(min_opening, oc.jaw_opening);
  }

  prog.A = Eigen::MatrixXd::Zero(3 * np, n);
  prog.b.resize(3 * np);
  for (int i = 0; i < np; ++i) {
    prog.A(i, i) = 1.0;  // left surface below the upper envelope
    prog.b[i] = upper[i];
    prog.A(np + i, np + i) = -1.0;  // right surface above the lower envelope
    prog.b[np + i] = -lower[i];
    prog.A(2 * np + i, i) = 1.0;  // jaw clearance at the smallest opening
    prog.A(2 * np + i, np + i) = -1.0;
    prog.b[2 * np + i] = min_opening;
  }

  out.program = std::move(prog);
  return out;
}

ShapeSolution solve_shape(const ProblemSpec& problem, const ConfigVars& config,
                          const std::vector<double>& grid) {
  ShapeAssembly assembly = assemble_shape(problem, config, grid);
  if (!assembly.ok()) {
    throw std::invalid_argument("solve_shape: " + assembly.issue);
  }
  const ShapeProgram& prog = *assembly.program;

  qp::Instance inst;
  inst.Q = prog.Q;
  inst.q = Eigen::VectorXd::Zero(prog.Q.rows());
  inst.A = prog.A;
  inst.b = prog.b;
  inst.H = prog.H;
  inst.g = prog.g;

  qp::Options opts;
  opts.regularization = problem.params.qp_regularization;
  qp::Result sol = qp::solve(inst, opts);

  ShapeSolution out;
  out.status = sol.status;
  out.kkt = sol.kkt;
  if (sol.status != qp::Status::Optimal) return out;

  out.objective = sol.objective;
  const int np = static_cast<int>(grid.size());
  out.surface.grid = grid;
  out.surface.positions = sol.x.head(2 * np);
  out.surface.slopes = sol.x.tail(2 * np);
  return out;
}

std::vector<double> uniform_grid(double low, double high, int intervals) {
  if (intervals < 1 || high <= low) throw std::invalid_argument("uniform_grid: bad span");
  std::vector<double> grid(intervals + 1);
  for (int i = 0; i <= intervals; ++i) {
    grid[i] = low + (high - low) * static_cast<double>(i) / intervals;
  }
  return grid;
}

}  // namespace gripopt::shape
