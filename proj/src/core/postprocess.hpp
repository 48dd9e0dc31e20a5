#pragma once

#include "core/alm.hpp"

namespace gripopt::post {

// Smallest signed distance between any contact point and any object or
// obstacle imaged into that contact's jaw frame.  Nonnegative when every
// contact is reachable by the jaw surface.
double min_contact_signed_distance(const ProblemSpec& problem, const ConfigVars& config);

// Vertical band around the contact heights that the post-processing grids
// are restricted to.
std::pair<double, double> contact_band(const ProblemSpec& problem, const ConfigVars& config);

struct StageAResult {
  bool ok = false;
  bool repaired = false;  // false when the input already satisfied the conditions
  ConfigVars config;
  double min_signed_distance = 0.0;
  double value = std::numeric_limits<double>::infinity();
  std::string message;
};

// Pulls the configuration to a nearby one whose contacts all clear the
// objects, descending the quadratic-penalty merit (zero duals, frozen
// penalty) inside a small box around the input.
StageAResult stage_a(const ProblemSpec& problem, const ConfigVars& config,
                     const std::vector<stab::ThetaScan>& theta, double penalty_final);

// Band-restricted grid with breakpoints inserted at contact heights and at
// object/obstacle vertex heights.
std::vector<double> refined_grid(const ProblemSpec& problem, const ConfigVars& config);

struct StageBResult {
  bool ok = false;
  shape::SurfaceParams surface;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double contact_residual = std::numeric_limits<double>::infinity();
  double bound_violation = std::numeric_limits<double>::infinity();
  std::string message;
};

// Re-solves the shape program on the refined grid; contact and breakpoint
// bound constraints are exact at the inserted heights.
StageBResult stage_b(const ProblemSpec& problem, const ConfigVars& config);

}  // namespace gripopt::post
