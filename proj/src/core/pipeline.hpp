#pragma once

#include "core/postprocess.hpp"
#include "core/solution.hpp"

namespace gripopt {

struct CandidateOutcome {
  int rank = 0;
  int start_index = 0;
  ConfigVars config;  // after stage A
  double merit = std::numeric_limits<double>::infinity();
  double residual_inf = std::numeric_limits<double>::infinity();
  bool survived = false;
  std::string discard_reason;
  post::StageAResult stage_a;
  post::StageBResult stage_b;
  stab::QualityBreakdown quality;
  double min_signed_distance = 0.0;
  double seconds = 0.0;
};

struct RunResult {
  bool setup_ok = true;
  std::string setup_message;
  std::vector<stab::ThetaScan> theta;
  std::vector<alm::StartResult> starts;
  std::vector<CandidateOutcome> candidates;  // the post-processed top candidates
  int survivor_count = 0;
  double total_seconds = 0.0;
};

RunResult run_pipeline(const ProblemSpec& problem);

io::SolutionRecord make_solution_record(const ProblemSpec& problem,
                                        const CandidateOutcome& outcome, int rank);

enum class RunStatus { Success, NoSolution, Failure };

// Full pipeline plus solution files and a ranking manifest in out_dir.
RunStatus run_to_directory(const ProblemSpec& problem, const std::string& out_dir,
                           std::string* message, RunResult* result_out = nullptr);

}  // namespace gripopt
