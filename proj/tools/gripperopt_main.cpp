// Command-line front end; talks to the library exclusively through the
// C interface in gripperopt.h.

#include <gripperopt.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

int exit_code_for(gripperopt_status status) {
  switch (status) {
    case GRIPPEROPT_OK: return 0;
    case GRIPPEROPT_ERROR_IO:
    case GRIPPEROPT_ERROR_PARSE:
    case GRIPPEROPT_ERROR_VALIDATION:
    case GRIPPEROPT_ERROR_SCHEMA:
    case GRIPPEROPT_ERROR_INVALID_ARGUMENT: return 2;
    case GRIPPEROPT_ERROR_NO_SOLUTION: return 3;
    case GRIPPEROPT_ERROR_INTERNAL: return 4;
  }
  return 4;
}

int report_failure(gripperopt_status status, const std::string& what) {
  std::cerr << "error (" << gripperopt_status_name(status) << "): " << what << ": "
            << gripperopt_last_error() << "\n";
  return exit_code_for(status);
}

struct ProblemHandle {
  gripperopt_problem* ptr = nullptr;
  ~ProblemHandle() { gripperopt_problem_free(ptr); }
};

struct SolutionHandle {
  gripperopt_solution* ptr = nullptr;
  ~SolutionHandle() { gripperopt_solution_free(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { gripperopt_string_free(ptr); }
};

// Parameter overrides accepted by every subcommand that loads a problem.
struct ParamFlags {
  std::map<std::string, double> values;

  void attach(CLI::App* cmd) {
    auto add = [&](const std::string& flag, const std::string& name,
                   const std::string& help) {
      cmd->add_option_function<double>(
          flag, [this, name](double v) { values[name] = v; }, help);
    };
    add("--seed", "seed", "random seed for the multi-start search");
    add("--starts", "starts", "number of randomized initial guesses");
    add("--iters", "iterations", "main-phase iterations");
    add("--mu", "friction", "friction coefficient");
    add("--phi", "penalty_growth", "penalty growth factor");
    add("--rho0", "penalty_initial", "initial penalty");
    add("--rho-s", "shape_constraint_weight", "shape constraint row weight");
    add("--sigma", "curvature_sigma", "curvature cost length scale");
    add("--ws", "path_weight", "shortest-path cost weight");
    add("--wp", "curvature_weight", "curvature cost weight");
    add("--ny", "grid_intervals", "surface grid intervals");
    add("--grid-low", "grid_low", "surface grid lower end");
    add("--grid-high", "grid_high", "surface grid upper end");
    add("--pos-x", "position_bound_x", "gripper position bound, x");
    add("--pos-y", "position_bound_y", "gripper position bound, y");
    add("--top", "top_candidates", "candidates sent to post-processing");
    add("--stage-a", "stage_a", "run stage A post-processing (0/1)");
    add("--descent-iters", "descent_iterations", "descent budget per outer step");
  }

  gripperopt_status apply(gripperopt_problem* problem) const {
    for (const auto& [name, value] : values) {
      gripperopt_status s = gripperopt_problem_set_param(problem, name.c_str(), value);
      if (s != GRIPPEROPT_OK) return s;
    }
    return GRIPPEROPT_OK;
  }
};

gripperopt_status load_problem(const std::string& path, const ParamFlags& flags,
                               ProblemHandle& handle, bool quiet) {
  gripperopt_status s = gripperopt_problem_load(path.c_str(), &handle.ptr);
  if (s != GRIPPEROPT_OK) return s;
  s = flags.apply(handle.ptr);
  if (s != GRIPPEROPT_OK) return s;
  if (!quiet) {
    OwnedString summary;
    if (gripperopt_problem_summary(handle.ptr, &summary.ptr) == GRIPPEROPT_OK) {
      json j = json::parse(summary.ptr);
      for (const auto& w : j["warnings"]) {
        std::cerr << "warning: " << w.get<std::string>() << "\n";
      }
    }
  }
  return GRIPPEROPT_OK;
}

int cmd_validate(const std::string& path, const ParamFlags& flags) {
  ProblemHandle problem;
  gripperopt_status s = load_problem(path, flags, problem, false);
  if (s != GRIPPEROPT_OK) return report_failure(s, path);
  OwnedString summary;
  s = gripperopt_problem_summary(problem.ptr, &summary.ptr);
  if (s != GRIPPEROPT_OK) return report_failure(s, path);
  json j = json::parse(summary.ptr);
  std::cout << "ok: " << j["objects"].size() << " object(s), " << j["contacts"].get<int>()
            << " contact(s)\n";
  for (const auto& obj : j["objects"]) {
    std::cout << "  " << obj["name"].get<std::string>() << ": "
              << obj["vertices"].get<int>() << " vertices, " << obj["obstacles"].get<int>()
              << " obstacle(s)\n";
  }
  return 0;
}

int cmd_theta_bounds(const std::string& path, const ParamFlags& flags,
                     const std::string& only_object) {
  ProblemHandle problem;
  gripperopt_status s = load_problem(path, flags, problem, false);
  if (s != GRIPPEROPT_OK) return report_failure(s, path);

  OwnedString summary;
  gripperopt_problem_summary(problem.ptr, &summary.ptr);
  json j = json::parse(summary.ptr);

  int count = 0;
  gripperopt_problem_object_count(problem.ptr, &count);
  bool any_failed = false;
  for (int k = 0; k < count; ++k) {
    std::string name = j["objects"][k]["name"].get<std::string>();
    if (!only_object.empty() && name != only_object) continue;
    double lo = 0.0, hi = 0.0;
    s = gripperopt_problem_theta_bounds(problem.ptr, k, &lo, &hi);
    if (s != GRIPPEROPT_OK) {
      std::cout << name << ": no squeeze grasp (" << gripperopt_last_error() << ")\n";
      any_failed = true;
      continue;
    }
    std::cout << name << ": [" << lo * 180.0 / M_PI << ", " << hi * 180.0 / M_PI
              << "] deg\n";
  }
  return any_failed ? 3 : 0;
}

int cmd_solve(const std::string& path, const ParamFlags& flags, const std::string& out_dir) {
  ProblemHandle problem;
  gripperopt_status s = load_problem(path, flags, problem, false);
  if (s != GRIPPEROPT_OK) return report_failure(s, path);

  gripperopt_run_report report{};
  s = gripperopt_solve(problem.ptr, out_dir.c_str(), &report);
  if (s != GRIPPEROPT_OK) return report_failure(s, "solve");
  std::cout << report.survivors << "/" << report.candidates
            << " candidate(s) survived post-processing; best objective "
            << report.best_objective << "; " << report.total_seconds << " s\n"
            << "solutions written to " << out_dir << "\n";
  return 0;
}

int cmd_render(const std::string& path, const std::string& mode, const std::string& out_dir) {
  SolutionHandle solution;
  gripperopt_status s = gripperopt_solution_load(path.c_str(), &solution.ptr);
  if (s != GRIPPEROPT_OK) return report_failure(s, path);

  int count = 0;
  s = gripperopt_solution_render_count(solution.ptr, mode.c_str(), &count);
  if (s != GRIPPEROPT_OK) return report_failure(s, mode);

  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    OwnedString name, svg;
    s = gripperopt_solution_render(solution.ptr, mode.c_str(), i, &name.ptr, &svg.ptr);
    if (s != GRIPPEROPT_OK) return report_failure(s, mode);
    std::filesystem::path file = std::filesystem::path(out_dir) / name.ptr;
    std::ofstream f(file, std::ios::binary | std::ios::trunc);
    if (!f) {
      std::cerr << "error: cannot write " << file << "\n";
      return 4;
    }
    f << svg.ptr;
    std::cout << file.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-optimizes parallel-jaw gripper surfaces and grasp configurations for "
               "sets of polygonal objects."};
  app.require_subcommand(1);

  std::string problem_path, out_dir = "out", mode = "grasp", only_object;
  ParamFlags solve_flags, validate_flags, theta_flags;

  CLI::App* solve = app.add_subcommand("solve", "run the optimization pipeline");
  solve->add_option("problem", problem_path, "problem file")->required();
  solve->add_option("--out", out_dir, "output directory (default: out)");
  solve_flags.attach(solve);

  CLI::App* validate = app.add_subcommand("validate", "check a problem file");
  validate->add_option("problem", problem_path, "problem file")->required();
  validate_flags.attach(validate);

  CLI::App* theta = app.add_subcommand("theta-bounds",
                                       "admissible gripper orientations per object");
  theta->add_option("problem", problem_path, "problem file")->required();
  theta->add_option("--object", only_object, "restrict to one object");
  theta_flags.attach(theta);

  CLI::App* render = app.add_subcommand("render", "render a solution file to SVG");
  std::string solution_path;
  render->add_option("solution", solution_path, "solution file")->required();
  render->add_option("--mode", mode, "grasp | gripper_frames | sweep");
  render->add_option("--out", out_dir, "output directory (default: out)");

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) return cmd_solve(problem_path, solve_flags, out_dir);
  if (validate->parsed()) return cmd_validate(problem_path, validate_flags);
  if (theta->parsed()) return cmd_theta_bounds(problem_path, theta_flags, only_object);
  if (render->parsed()) return cmd_render(solution_path, mode, out_dir);
  return 2;
}
