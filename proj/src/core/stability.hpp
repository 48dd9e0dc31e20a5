#pragma once

#include "core/problem.hpp"
#include "core/qp.hpp"

#include <array>

namespace gripopt::stab {

// Contact geometry for one object's grasp, positions measured from the
// object origin in the jaw-axis-aligned gripper frame.
struct ContactSet {
  std::vector<geom::ContactFrame> frames;
  std::vector<geom::Jaw> jaws;
  int count() const { return static_cast<int>(frames.size()); }
};

ContactSet contact_set(const ProblemSpec& problem, int object, const ConfigVars& config);

// Columns per contact: [normal, tangent] forces mapped to the net planar
// wrench (fx, fy, torque) about the object origin.
Eigen::MatrixXd grasp_matrix(const ContactSet& contacts);

// Rows per contact (normal, tangent components), columns (left jaw, right
// jaw): horizontal jaw motion projected into each contact frame.
Eigen::MatrixXd hand_jacobian(const ContactSet& contacts);

// Single-object stability program over variables [r(3), q(2), c(2*Nc)]:
// object equilibrium under the external wrench, unit-stiffness compliance
// coupling, compressive springs, nonnegative squeeze preload, friction cones.
struct GraspProgram {
  Eigen::MatrixXd Q, A, H;
  Eigen::VectorXd b, g;
  int contact_count = 0;
  double length_scale = 1.0;

  int variable_count() const { return 5 + 2 * contact_count; }
};

GraspProgram assemble_single(const ContactSet& contacts, double length_scale,
                             const Eigen::Vector3d& wrench, double friction);

// Block-diagonal stacking of every object's program for the +torque batch
// followed by the -torque batch; only the equality right-hand side differs
// between the two batches.
struct ConsolidatedStability {
  Eigen::MatrixXd Q, A, H;
  Eigen::VectorXd b, g;

  struct Block {
    int object = 0;
    int wrench_sign = +1;
    int var_begin = 0, var_count = 0;
    int ineq_begin = 0, ineq_count = 0;
    int eq_begin = 0, eq_count = 0;
  };
  std::vector<Block> blocks;

  int variable_count() const { return static_cast<int>(Q.rows()); }
};

ConsolidatedStability consolidate_stability(const ProblemSpec& problem, const ConfigVars& config);

struct QualityBreakdown {
  qp::Status status = qp::Status::Failed;
  bool feasible = false;
  double total = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::array<double, 2>> per_object;  // +torque / -torque costs
  Eigen::VectorXd solution;
  qp::KktReport kkt;
};

QualityBreakdown grasp_quality(const ProblemSpec& problem, const ConfigVars& config);

// True when a squeezing equilibrium with strictly positive preload exists at
// this gripper angle (external wrench zero, preload normalized to one).
bool squeeze_feasible(const ProblemSpec& problem, int object, double gripper_angle);

// Orientation interval around a feasible seed where the squeeze stays
// feasible and no contacted edge tangent turns horizontal.  Invariant (up to
// a shift) to the object's orientation in the world.
struct ThetaScan {
  double low = 0.0;
  double high = 0.0;
  double seed = 0.0;
  bool full_circle = false;
};

ThetaScan theta_bounds(const ProblemSpec& problem, int object);

}  // namespace gripopt::stab
