#include "gripperopt.h"

#include "core/pipeline.hpp"
#include "core/problem_io.hpp"
#include "core/solution.hpp"
#include "core/stability.hpp"
#include "core/svg_render.hpp"

#include <json.hpp>

#include <cstring>
#include <new>
#include <string>

using nlohmann::json;

struct gripperopt_problem {
  gripopt::ProblemSpec spec;
  std::vector<std::string> warnings;
};

struct gripperopt_solution {
  gripopt::io::SolutionRecord record;
};

namespace {

thread_local std::string t_last_error;

gripperopt_status set_error(gripperopt_status status, const std::string& message) {
  t_last_error = message;
  return status;
}

gripperopt_status from_load_error(const gripopt::io::LoadError& e) {
  using K = gripopt::io::LoadErrorKind;
  switch (e.kind()) {
    case K::Io: return set_error(GRIPPEROPT_ERROR_IO, e.what());
    case K::Parse: return set_error(GRIPPEROPT_ERROR_PARSE, e.what());
    case K::Validation: return set_error(GRIPPEROPT_ERROR_VALIDATION, e.what());
    case K::Schema: return set_error(GRIPPEROPT_ERROR_SCHEMA, e.what());
  }
  return set_error(GRIPPEROPT_ERROR_INTERNAL, e.what());
}

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
gripperopt_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const gripopt::io::LoadError& e) {
    return from_load_error(e);
  } catch (const std::invalid_argument& e) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return set_error(GRIPPEROPT_ERROR_INTERNAL, e.what());
  } catch (...) {
    return set_error(GRIPPEROPT_ERROR_INTERNAL, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* gripperopt_version(void) { return "1.0.0"; }

const char* gripperopt_status_name(gripperopt_status status) {
  switch (status) {
    case GRIPPEROPT_OK: return "ok";
    case GRIPPEROPT_ERROR_IO: return "io-error";
    case GRIPPEROPT_ERROR_PARSE: return "parse-error";
    case GRIPPEROPT_ERROR_VALIDATION: return "validation-error";
    case GRIPPEROPT_ERROR_SCHEMA: return "schema-error";
    case GRIPPEROPT_ERROR_NO_SOLUTION: return "no-solution";
    case GRIPPEROPT_ERROR_INVALID_ARGUMENT: return "invalid-argument";
    case GRIPPEROPT_ERROR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* gripperopt_last_error(void) { return t_last_error.c_str(); }

void gripperopt_string_free(char* s) { delete[] s; }

gripperopt_status gripperopt_problem_load(const char* path, gripperopt_problem** out) {
  if (!path || !out) return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto loaded = gripopt::io::load_problem(path);
    *out = new gripperopt_problem{std::move(loaded.spec), std::move(loaded.warnings)};
    return GRIPPEROPT_OK;
  });
}

gripperopt_status gripperopt_problem_parse(const char* text, gripperopt_problem** out) {
  if (!text || !out) return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto loaded = gripopt::io::parse_problem(text);
    *out = new gripperopt_problem{std::move(loaded.spec), std::move(loaded.warnings)};
    return GRIPPEROPT_OK;
  });
}

void gripperopt_problem_free(gripperopt_problem* problem) { delete problem; }

gripperopt_status gripperopt_problem_summary(const gripperopt_problem* problem,
                                             char** out_json) {
  if (!problem || !out_json) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    json j;
    j["objects"] = json::array();
    for (const auto& obj : problem->spec.objects) {
      j["objects"].push_back({{"name", obj.name},
                              {"vertices", obj.shape.vertex_count()},
                              {"obstacles", obj.obstacles.size()}});
    }
    j["contacts"] = problem->spec.contact_count();
    j["warnings"] = problem->warnings;
    json params;
    for (const char* name :
         {"friction", "penalty_growth", "shape_constraint_weight", "curvature_sigma",
          "path_weight", "curvature_weight", "penalty_initial", "iterations",
          "grid_intervals", "grid_low", "grid_high", "position_bound_x", "position_bound_y",
          "opening_low", "opening_high", "contact_low", "contact_high", "starts", "seed",
          "top_candidates", "stage_a", "postprocess_iterations", "qp_regularization",
          "descent_iterations"}) {
      double v = 0.0;
      gripopt::io::get_param(problem->spec.params, name, v);
      params[name] = v;
    }
    j["params"] = params;
    *out_json = dup_string(j.dump());
    return *out_json ? GRIPPEROPT_OK
                     : set_error(GRIPPEROPT_ERROR_INTERNAL, "allocation failed");
  });
}

gripperopt_status gripperopt_problem_set_param(gripperopt_problem* problem, const char* name,
                                               double value) {
  if (!problem || !name) return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  if (!gripopt::io::set_param(problem->spec.params, name, value)) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT,
                     std::string("unknown parameter '") + name + "'");
  }
  return GRIPPEROPT_OK;
}

gripperopt_status gripperopt_problem_get_param(const gripperopt_problem* problem,
                                               const char* name, double* out_value) {
  if (!problem || !name || !out_value) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  }
  if (!gripopt::io::get_param(problem->spec.params, name, *out_value)) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT,
                     std::string("unknown parameter '") + name + "'");
  }
  return GRIPPEROPT_OK;
}

gripperopt_status gripperopt_problem_object_count(const gripperopt_problem* problem,
                                                  int* out_count) {
  if (!problem || !out_count) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  }
  *out_count = problem->spec.object_count();
  return GRIPPEROPT_OK;
}

gripperopt_status gripperopt_problem_theta_bounds(const gripperopt_problem* problem,
                                                  int object_index, double* out_low,
                                                  double* out_high) {
  if (!problem || !out_low || !out_high) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  }
  if (object_index < 0 || object_index >= problem->spec.object_count()) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "object index out of range");
  }
  return guarded([&] {
    auto it = problem->spec.theta_overrides.find(object_index);
    if (it != problem->spec.theta_overrides.end()) {
      *out_low = it->second.low;
      *out_high = it->second.high;
      return GRIPPEROPT_OK;
    }
    try {
      gripopt::stab::ThetaScan scan = gripopt::stab::theta_bounds(problem->spec, object_index);
      *out_low = scan.low;
      *out_high = scan.high;
      return GRIPPEROPT_OK;
    } catch (const std::runtime_error& e) {
      return set_error(GRIPPEROPT_ERROR_NO_SOLUTION, e.what());
    }
  });
}

gripperopt_status gripperopt_solve(const gripperopt_problem* problem, const char* out_dir,
                                   gripperopt_run_report* out_report) {
  if (!problem || !out_dir) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    std::string message;
    gripopt::RunResult result;
    gripopt::RunStatus status =
        gripopt::run_to_directory(problem->spec, out_dir, &message, &result);
    if (out_report) {
      out_report->candidates = static_cast<int>(result.candidates.size());
      out_report->survivors = result.survivor_count;
      out_report->best_objective = std::numeric_limits<double>::quiet_NaN();
      for (const auto& c : result.candidates) {
        if (c.survived) {
          out_report->best_objective = c.quality.total + c.stage_b.objective;
          break;
        }
      }
      out_report->total_seconds = result.total_seconds;
    }
    switch (status) {
      case gripopt::RunStatus::Success: return GRIPPEROPT_OK;
      case gripopt::RunStatus::NoSolution:
        return set_error(GRIPPEROPT_ERROR_NO_SOLUTION, message);
      case gripopt::RunStatus::Failure: return set_error(GRIPPEROPT_ERROR_INTERNAL, message);
    }
    return set_error(GRIPPEROPT_ERROR_INTERNAL, "unreachable");
  });
}

gripperopt_status gripperopt_solution_load(const char* path, gripperopt_solution** out) {
  if (!path || !out) return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto record = gripopt::io::load_solution(path);
    *out = new gripperopt_solution{std::move(record)};
    return GRIPPEROPT_OK;
  });
}

void gripperopt_solution_free(gripperopt_solution* solution) { delete solution; }

gripperopt_status gripperopt_solution_info(const gripperopt_solution* solution,
                                           char** out_json) {
  if (!solution || !out_json) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const gripopt::io::SolutionReport& r = solution->record.report;
    json j;
    j["rank"] = solution->record.rank;
    j["start_index"] = solution->record.start_index;
    j["seed"] = solution->record.seed;
    j["merit"] = r.merit;
    j["residual_inf"] = r.residual_inf;
    j["min_signed_distance"] = r.min_signed_distance;
    j["stability_total"] = r.stability_total;
    j["shape_objective"] = r.shape_objective;
    j["contact_residual"] = r.contact_residual;
    j["bound_violation"] = r.bound_violation;
    j["stage_a_ok"] = r.stage_a_ok;
    j["stage_b_ok"] = r.stage_b_ok;
    *out_json = dup_string(j.dump());
    return *out_json ? GRIPPEROPT_OK
                     : set_error(GRIPPEROPT_ERROR_INTERNAL, "allocation failed");
  });
}

gripperopt_status gripperopt_solution_render_count(const gripperopt_solution* solution,
                                                   const char* mode, int* out_count) {
  if (!solution || !mode || !out_count) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  }
  auto parsed = gripopt::render::parse_mode(mode);
  if (!parsed) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT,
                     std::string("unknown render mode '") + mode + "'");
  }
  *out_count = *parsed == gripopt::render::Mode::Grasp
                   ? solution->record.problem.object_count()
                   : 1;
  return GRIPPEROPT_OK;
}

gripperopt_status gripperopt_solution_render(const gripperopt_solution* solution,
                                             const char* mode, int index, char** out_name,
                                             char** out_svg) {
  if (!solution || !mode || !out_svg) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "null argument");
  }
  auto parsed = gripopt::render::parse_mode(mode);
  if (!parsed) {
    return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT,
                     std::string("unknown render mode '") + mode + "'");
  }
  return guarded([&] {
    std::vector<gripopt::render::Document> docs =
        gripopt::render::render(solution->record, *parsed);
    if (index < 0 || index >= static_cast<int>(docs.size())) {
      return set_error(GRIPPEROPT_ERROR_INVALID_ARGUMENT, "render index out of range");
    }
    if (out_name) *out_name = dup_string(docs[index].name);
    *out_svg = dup_string(docs[index].content);
    return *out_svg ? GRIPPEROPT_OK
                    : set_error(GRIPPEROPT_ERROR_INTERNAL, "allocation failed");
  });
}

}  // extern "C"
