#pragma once

#include "core/problem_io.hpp"
#include "core/shape.hpp"

#include <array>

namespace gripopt::io {

struct SolutionReport {
  double merit = 0.0;
  double residual_inf = 0.0;
  double penalty_final = 0.0;
  double min_signed_distance = 0.0;
  bool stage_a_ok = false;
  bool stage_a_repaired = false;
  std::string stage_a_message;
  bool stage_b_ok = false;
  double contact_residual = 0.0;
  double bound_violation = 0.0;
  double shape_objective = 0.0;
  double stability_total = 0.0;
  std::vector<std::array<double, 2>> stability_per_object;
};

// Self-contained: carries the problem, the configuration and the final
// surfaces, so rendering never needs the original problem file.
struct SolutionRecord {
  ProblemSpec problem;
  ConfigVars config;
  shape::SurfaceParams surface;
  int rank = 0;
  int start_index = 0;
  std::uint64_t seed = 0;
  SolutionReport report;
};

std::string serialize_solution(const SolutionRecord& record);
void save_solution(const std::string& path, const SolutionRecord& record);
SolutionRecord parse_solution(const std::string& text);
SolutionRecord load_solution(const std::string& path);

}  // namespace gripopt::io
