#pragma once

#include "core/problem.hpp"
#include "core/shape.hpp"
#include "core/stability.hpp"

#include <functional>
#include <memory>

namespace gripopt::alm {

// Equality system A(z) u = b(z) over u = [stability vars, stability slacks,
// shape vars, shape slacks], nonnegative slacks absorbing the inequalities
// and the shape rows scaled by the shape constraint weight.  Stored per
// independent block (one per stability program plus one for the shape
// program); blocks share no variables or rows, so the inner minimization
// decomposes exactly.
struct ConsolidatedSystem {
  struct Block {
    std::vector<int> var_index;  // global u indices
    std::vector<int> row_index;  // global row indices
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::MatrixXd Q;        // objective contribution, 1/2 x'Qx
    std::vector<int> nonneg;  // local slack positions
    bool is_shape = false;
  };

  std::vector<Block> blocks;
  int var_count = 0;
  int row_count = 0;

  int stability_var_count = 0, stability_slack_count = 0;
  int shape_var_count = 0, shape_slack_count = 0;
  int stability_ineq_rows = 0, stability_eq_rows = 0;
  int shape_ineq_rows = 0, shape_eq_rows = 0;

  Eigen::MatrixXd full_matrix() const;
  Eigen::VectorXd full_rhs() const;
  Eigen::MatrixXd full_objective() const;
  std::vector<int> slack_indices() const;
  Eigen::VectorXd residual(const Eigen::VectorXd& u) const;  // A u - b
};

int consolidated_row_count(const ProblemSpec& problem);

struct Consolidation {
  bool ok = false;
  double violation = 0.0;
  std::string issue;
  std::shared_ptr<const ConsolidatedSystem> system;
};

Consolidation consolidate(const ProblemSpec& problem, const ConfigVars& config,
                          const std::vector<double>& grid);

struct InnerSolution {
  bool ok = false;
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd u;
  Eigen::VectorXd residual;
  double residual_inf = std::numeric_limits<double>::infinity();
  double stability_cost = 0.0;
  double shape_cost = 0.0;
};

// Global minimum of the penalized Lagrangian over u with nonnegative slacks.
// An empty duals vector is treated as zero.
InnerSolution inner_min(const ConsolidatedSystem& system, const Eigen::VectorXd& duals,
                        double penalty, const Eigen::VectorXd* warm_start = nullptr,
                        double qp_regularization = 0.0);

struct Evaluation {
  bool structural_ok = false;
  bool solver_ok = false;
  double value = std::numeric_limits<double>::infinity();
  double violation = 0.0;
  std::string issue;
  InnerSolution inner;
  std::shared_ptr<const ConsolidatedSystem> system;
};

Evaluation evaluate_candidate(const ProblemSpec& problem, const ZLayout& layout,
                              const std::vector<double>& grid, const Eigen::VectorXd& z,
                              const Eigen::VectorXd& duals, double penalty,
                              const Eigen::VectorXd* warm_u = nullptr);

struct BoxBounds {
  Eigen::VectorXd low, high;
  Eigen::VectorXd clamp(const Eigen::VectorXd& z) const;
};

BoxBounds config_box(const ProblemSpec& problem, const std::vector<stab::ThetaScan>& theta);

using CandidateFilter = std::function<bool(const Eigen::VectorXd&)>;

struct DescentResult {
  Eigen::VectorXd z;
  double value = std::numeric_limits<double>::infinity();
  Evaluation eval;
  int iterations = 0;
};

// Projected quasi-descent with forward finite differences and backtracking;
// never returns a point worse than the start.  Candidates rejected by the
// filter are treated as unusable.
DescentResult project_descent(const ProblemSpec& problem, const ZLayout& layout,
                              const std::vector<double>& grid, const BoxBounds& box,
                              const Eigen::VectorXd& z0, const Eigen::VectorXd& duals,
                              double penalty, int max_iterations, Eigen::VectorXd* warm_u,
                              const CandidateFilter* filter = nullptr);

// duals += penalty * residual, then penalty *= growth.
void dual_penalty_update(Eigen::VectorXd& duals, double& penalty,
                         const Eigen::VectorXd& residual, double growth);

struct HistoryEntry {
  Eigen::VectorXd z;
  std::shared_ptr<const ConsolidatedSystem> system;  // null after structural failure
  double structural_value = 0.0;
};

struct RestoreChoice {
  int index = 0;
  double value = std::numeric_limits<double>::infinity();
};

// Re-evaluates every stored iterate under the current duals and penalty and
// picks the best one.
RestoreChoice restore_best(const std::vector<HistoryEntry>& history,
                           const Eigen::VectorXd& duals, double penalty,
                           Eigen::VectorXd* warm_u = nullptr, double qp_regularization = 0.0);

struct StartResult {
  int start_index = 0;
  Eigen::VectorXd z;
  double merit = std::numeric_limits<double>::infinity();  // at zero duals, final penalty
  double residual_inf = std::numeric_limits<double>::infinity();
  double penalty_final = 0.0;
  bool usable = false;
  std::vector<double> value_trace;
};

std::vector<StartResult> multistart_optimize(const ProblemSpec& problem,
                                             const std::vector<stab::ThetaScan>& theta);

}  // namespace gripopt::alm
