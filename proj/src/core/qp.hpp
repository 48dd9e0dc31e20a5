#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <vector>

namespace gripopt::qp {

enum class Status { Optimal, Infeasible, Failed };

const char* status_name(Status s);

// Optional least-squares objective term weight/2 * ||rows x - target||^2.
// Carrying it unsquared keeps large penalty weights well conditioned.
struct PenaltyTerm {
  Eigen::MatrixXd rows;
  Eigen::VectorXd target;
  double weight = 0.0;
};

// minimize 1/2 x'Qx + q'x [+ penalty]  subject to  A x <= b,  H x = g,
// x_i >= 0 for i in nonneg.  Q must be positive semidefinite (it is
// symmetrized on ingest).
struct Instance {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  std::vector<int> nonneg;
  std::optional<PenaltyTerm> penalty;

  int size() const { return static_cast<int>(Q.rows()); }
  int inequality_count() const { return static_cast<int>(A.rows()); }
  int equality_count() const { return static_cast<int>(H.rows()); }

  static Instance quadratic(Eigen::MatrixXd Q, Eigen::VectorXd q);
};

struct KktReport {
  double stationarity = std::numeric_limits<double>::infinity();
  double primal_equality = 0.0;
  double primal_inequality = 0.0;
  double dual_feasibility = 0.0;
  double complementarity = std::numeric_limits<double>::infinity();
  double scale = 1.0;

  double worst() const;
  bool passes(double tol) const;  // all residuals <= tol * scale
};

struct Result {
  Status status = Status::Failed;
  Eigen::VectorXd x;
  Eigen::VectorXd ineq_duals;   // multipliers for A rows, >= 0
  Eigen::VectorXd eq_duals;     // multipliers for H rows
  Eigen::VectorXd bound_duals;  // multipliers for nonneg entries, aligned with Instance::nonneg
  Eigen::VectorXd penalty_duals;  // weight * (rows x - target), tracked unsquared
  double objective = std::numeric_limits<double>::quiet_NaN();
  KktReport kkt;
  int iterations = 0;
};

struct Options {
  double tolerance = 1e-9;
  int max_iterations = 200;
  double regularization = 0.0;  // extra diagonal added to Q before solving
  const Eigen::VectorXd* warm_start = nullptr;
};

Result solve(const Instance& inst, const Options& opts = {});

KktReport kkt_check(const Instance& inst, const Result& res);

}  // namespace gripopt::qp
