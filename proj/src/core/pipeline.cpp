#include "core/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace gripopt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

}  // namespace

RunResult run_pipeline(const ProblemSpec& problem) {
  RunResult out;
  auto t_start = Clock::now();

  out.theta.resize(problem.object_count());
  for (int k = 0; k < problem.object_count(); ++k) {
    auto it = problem.theta_overrides.find(k);
    if (it != problem.theta_overrides.end()) {
      out.theta[k] = {it->second.low, it->second.high, 0.5 * (it->second.low + it->second.high),
                      false};
      continue;
    }
    try {
      out.theta[k] = stab::theta_bounds(problem, k);
    } catch (const std::exception& e) {
      out.setup_ok = false;
      out.setup_message =
          "object '" + problem.objects[k].name + "': " + std::string(e.what());
      out.total_seconds = elapsed(t_start);
      return out;
    }
  }

  out.starts = alm::multistart_optimize(problem, out.theta);

  ZLayout layout(problem);
  double penalty_final =
      problem.params.penalty_initial * std::pow(problem.params.penalty_growth,
                                                problem.params.iterations);

  int n_candidates = std::min<int>(problem.params.top_candidates, out.starts.size());

  for (int c = 0; c < n_candidates; ++c) {
    const alm::StartResult& start = out.starts[c];
    CandidateOutcome outcome;
    auto t_cand = Clock::now();
    outcome.rank = c;
    outcome.start_index = start.start_index;
    outcome.merit = start.merit;
    outcome.residual_inf = start.residual_inf;
    outcome.config = layout.unpack(start.z);

    if (!start.usable) {
      outcome.discard_reason = "main phase produced no solvable system";
      outcome.seconds = elapsed(t_cand);
      out.candidates.push_back(std::move(outcome));
      continue;
    }

    if (problem.params.stage_a_enabled) {
      outcome.stage_a = post::stage_a(problem, outcome.config, out.theta, penalty_final);
      if (!outcome.stage_a.ok) {
        outcome.discard_reason = "stage A: " + outcome.stage_a.message;
        outcome.seconds = elapsed(t_cand);
        out.candidates.push_back(std::move(outcome));
        continue;
      }
      outcome.config = outcome.stage_a.config;
    } else {
      outcome.stage_a.ok = true;
      outcome.stage_a.message = "skipped";
      outcome.stage_a.config = outcome.config;
      outcome.stage_a.min_signed_distance =
          post::min_contact_signed_distance(problem, outcome.config);
    }
    outcome.min_signed_distance = post::min_contact_signed_distance(problem, outcome.config);

    outcome.stage_b = post::stage_b(problem, outcome.config);
    if (!outcome.stage_b.ok) {
      outcome.discard_reason = "stage B: " + outcome.stage_b.message;
      outcome.seconds = elapsed(t_cand);
      out.candidates.push_back(std::move(outcome));
      continue;
    }

    outcome.quality = stab::grasp_quality(problem, outcome.config);
    if (!outcome.quality.feasible) {
      outcome.discard_reason = "final stability program infeasible";
      outcome.seconds = elapsed(t_cand);
      out.candidates.push_back(std::move(outcome));
      continue;
    }

    outcome.survived = true;
    outcome.seconds = elapsed(t_cand);
    out.survivor_count += 1;
    out.candidates.push_back(std::move(outcome));
  }

  out.total_seconds = elapsed(t_start);
  return out;
}

io::SolutionRecord make_solution_record(const ProblemSpec& problem,
                                        const CandidateOutcome& outcome, int rank) {
  io::SolutionRecord rec;
  rec.problem = problem;
  rec.config = outcome.config;
  rec.surface = outcome.stage_b.surface;
  rec.rank = rank;
  rec.start_index = outcome.start_index;
  rec.seed = problem.params.seed;

  io::SolutionReport& r = rec.report;
  r.merit = outcome.merit;
  r.residual_inf = outcome.residual_inf;
  r.penalty_final = problem.params.penalty_initial *
                    std::pow(problem.params.penalty_growth, problem.params.iterations);
  r.min_signed_distance = outcome.min_signed_distance;
  r.stage_a_ok = outcome.stage_a.ok;
  r.stage_a_repaired = outcome.stage_a.repaired;
  r.stage_a_message = outcome.stage_a.message;
  r.stage_b_ok = outcome.stage_b.ok;
  r.contact_residual = outcome.stage_b.contact_residual;
  r.bound_violation = outcome.stage_b.bound_violation;
  r.shape_objective = outcome.stage_b.objective;
  r.stability_total = outcome.quality.total;
  r.stability_per_object = outcome.quality.per_object;
  return rec;
}

RunStatus run_to_directory(const ProblemSpec& problem, const std::string& out_dir,
                           std::string* message, RunResult* result_out) {
  namespace fs = std::filesystem;
  using nlohmann::json;

  RunResult result = run_pipeline(problem);
  if (result_out) *result_out = result;

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    if (message) *message = "cannot create output directory: " + ec.message();
    return RunStatus::Failure;
  }

  std::ostringstream manifest;
  manifest << json{{"schema", "gripperopt-manifest"},
                   {"version", 1},
                   {"seed", problem.params.seed},
                   {"starts", problem.params.starts},
                   {"survivors", result.survivor_count},
                   {"setup_ok", result.setup_ok},
                   {"setup_message", result.setup_message},
                   {"total_seconds", result.total_seconds}}
                .dump()
           << "\n";

  for (const alm::StartResult& s : result.starts) {
    manifest << json{{"type", "start"},
                     {"index", s.start_index},
                     {"merit", s.merit},
                     {"residual_inf", s.residual_inf},
                     {"usable", s.usable}}
                  .dump()
             << "\n";
  }

  int rank = 0;
  for (const CandidateOutcome& outcome : result.candidates) {
    std::string file;
    if (outcome.survived) {
      char name[64];
      std::snprintf(name, sizeof(name), "candidate_%02d.jsonl", rank);
      file = name;
      io::SolutionRecord rec = make_solution_record(problem, outcome, rank);
      io::save_solution((fs::path(out_dir) / file).string(), rec);
    }
    manifest << json{{"type", "candidate"},
                     {"rank", rank},
                     {"start_index", outcome.start_index},
                     {"survived", outcome.survived},
                     {"file", file},
                     {"discard_reason", outcome.discard_reason},
                     {"merit", outcome.merit},
                     {"residual_inf", outcome.residual_inf},
                     {"min_signed_distance", outcome.min_signed_distance},
                     {"seconds", outcome.seconds}}
                  .dump()
             << "\n";
    ++rank;
  }

  io::write_file_atomic((fs::path(out_dir) / "manifest.jsonl").string(), manifest.str());

  if (!result.setup_ok) {
    if (message) *message = result.setup_message;
    return RunStatus::NoSolution;
  }
  if (result.survivor_count == 0) {
    if (message) *message = "no candidate survived post-processing";
    return RunStatus::NoSolution;
  }
  if (message) {
    *message = std::to_string(result.survivor_count) + " candidate(s) written to " + out_dir;
  }
  return RunStatus::Success;
}

}  // namespace gripopt
