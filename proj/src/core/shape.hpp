#pragma once

#include "core/problem.hpp"
#include "core/qp.hpp"

#include <optional>
#include <string>

namespace gripopt::shape {

// Piecewise cubic Hermite surfaces for both jaws on a shared breakpoint grid.
// Layout of positions/slopes: [left 0..Ny, right 0..Ny].
struct SurfaceParams {
  std::vector<double> grid;
  Eigen::VectorXd positions;  // V
  Eigen::VectorXd slopes;     // M

  int point_count() const { return static_cast<int>(grid.size()); }
  int interval_count() const { return point_count() - 1; }
  int value_index(geom::Jaw jaw, int i) const {
    return (jaw == geom::Jaw::Right ? point_count() : 0) + i;
  }
};

// Interval index with grid[i] < y <= grid[i+1]; y == grid.front() maps to the
// first interval.  Throws outside the span.
int locate_interval(const std::vector<double>& grid, double y);

double hermite_position(const SurfaceParams& surface, geom::Jaw jaw, double y);
double hermite_slope(const SurfaceParams& surface, geom::Jaw jaw, double y);

// Second derivatives at the two ends of an interval.
std::pair<double, double> second_derivatives(const SurfaceParams& surface, geom::Jaw jaw,
                                             int interval);

// Constraint rows over u_S = [V; M].
Eigen::RowVectorXd position_row(const std::vector<double>& grid, geom::Jaw jaw, double y);
Eigen::RowVectorXd slope_row(const std::vector<double>& grid, geom::Jaw jaw, double y);

struct ShapeContact {
  int contact_id = 0;
  int object = 0;
  geom::Jaw jaw = geom::Jaw::Left;
  geom::ContactFrame frame;  // absolute position in the contact's jaw frame
};

std::vector<ShapeContact> gripper_frame_contacts(const ProblemSpec& problem,
                                                 const ConfigVars& config);

// All objects and obstacles imaged into one jaw frame, each under its own
// grasp configuration.
std::vector<geom::Polygon> gripper_frame_shapes(const ProblemSpec& problem,
                                                const ConfigVars& config, geom::Jaw jaw);

// Quadratic cost over u_S: Gaussian-weighted squared curvature near contacts
// plus a shortest-path surrogate, both normalized against grid resolution and
// object scale.
Eigen::MatrixXd shape_cost(const ProblemSpec& problem, const std::vector<double>& grid,
                           const std::vector<ShapeContact>& contacts);

struct ShapeProgram {
  Eigen::MatrixXd Q, A, H;
  Eigen::VectorXd b, g;
  std::vector<double> grid;
  std::vector<double> upper_bounds;  // per breakpoint, +inf clamped
  std::vector<double> lower_bounds;
  double bound_cap = 0.0;
};

struct ShapeAssembly {
  std::optional<ShapeProgram> program;
  double violation = 0.0;  // structural violation measure when empty
  std::string issue;

  bool ok() const { return program.has_value(); }
};

ShapeAssembly assemble_shape(const ProblemSpec& problem, const ConfigVars& config,
                             const std::vector<double>& grid);

struct ShapeSolution {
  qp::Status status = qp::Status::Failed;
  double objective = std::numeric_limits<double>::quiet_NaN();
  SurfaceParams surface;
  qp::KktReport kkt;
};

// Throws std::invalid_argument on structural failure (horizontal contact
// tangent or contact height outside the grid span).
ShapeSolution solve_shape(const ProblemSpec& problem, const ConfigVars& config,
                          const std::vector<double>& grid);

std::vector<double> uniform_grid(double low, double high, int intervals);

}  // namespace gripopt::shape
