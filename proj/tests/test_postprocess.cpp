#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/postprocess.hpp"
#include "support/fixtures.hpp"

#include <numbers>

using namespace gripopt;
using geom::Jaw;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

ConfigVars level_square_config() {
  ConfigVars config;
  config.object_config.push_back({{0.0, 0.0}, 0.0, 0.5});
  config.contact_coords.push_back({0.5, 0.5});
  return config;
}

// Narrow rectangle's left contact placed depth inside the wide rectangle's
// jaw-frame image.
ConfigVars overlapping_config(double depth) {
  ConfigVars config;
  config.object_config.push_back({{0.0, 0.35}, 0.0, 0.5});           // wide
  config.object_config.push_back({{0.0, 0.1 + depth}, 0.0, 0.5});    // narrow
  config.contact_coords = {{0.5, 0.5}, {0.5, 0.5}};
  return config;
}

std::vector<stab::ThetaScan> theta_scans(const ProblemSpec& problem) {
  std::vector<stab::ThetaScan> out;
  for (int k = 0; k < problem.object_count(); ++k) {
    out.push_back(stab::theta_bounds(problem, k));
  }
  return out;
}

int count_bound_violations(const ProblemSpec& problem, const ConfigVars& config,
                           const shape::SurfaceParams& surface,
                           const std::vector<double>& grid, double tol) {
  shape::ShapeAssembly assembly = shape::assemble_shape(problem, config, grid);
  REQUIRE(assembly.ok());
  const shape::ShapeProgram& prog = *assembly.program;
  double min_opening = std::numeric_limits<double>::infinity();
  for (const auto& oc : config.object_config) {
    min_opening = std::min(min_opening, oc.jaw_opening);
  }
  int violations = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    double y = grid[i];
    if (y < surface.grid.front() || y > surface.grid.back()) continue;
    double vl = shape::hermite_position(surface, Jaw::Left, y);
    double vr = shape::hermite_position(surface, Jaw::Right, y);
    if (vl - prog.upper_bounds[i] > tol) ++violations;
    if (prog.lower_bounds[i] - vr > tol) ++violations;
    if (vl - vr - min_opening > tol) ++violations;
  }
  return violations;
}

}  // namespace

TEST_CASE("contact accessibility measurements") {
  ProblemSpec problem = fixtures::square_problem();
  ConfigVars config = level_square_config();

  SUBCASE("contacts on their own object sit on the boundary") {
    double sd = post::min_contact_signed_distance(problem, config);
    CHECK(std::abs(sd) < 1e-12);
  }

  SUBCASE("a contact swallowed by another image goes negative") {
    ProblemSpec two = fixtures::two_rectangles();
    ConfigVars bad = overlapping_config(0.05);
    CHECK(post::min_contact_signed_distance(two, bad) < -0.04);
  }

  SUBCASE("the band hugs the contact heights") {
    auto [lo, hi] = post::contact_band(problem, config);
    CHECK(lo == doctest::Approx(-0.6));
    CHECK(hi == doctest::Approx(0.6));
  }
}

TEST_CASE("stage A") {
  ProblemSpec two = fixtures::two_rectangles();
  std::vector<stab::ThetaScan> theta = theta_scans(two);
  const double penalty_final = 1024.0;

  SUBCASE("accessible inputs come back unchanged") {
    ConfigVars config;
    config.object_config.push_back({{0.0, 0.35}, 0.0, 0.5});
    config.object_config.push_back({{0.0, -0.35}, 0.0, 0.5});
    config.contact_coords = {{0.5, 0.5}, {0.5, 0.5}};
    REQUIRE(post::min_contact_signed_distance(two, config) > 1e-6);
    post::StageAResult result = post::stage_a(two, config, theta, penalty_final);
    CHECK(result.ok);
    CHECK(!result.repaired);
    for (int k = 0; k < 2; ++k) {
      CHECK(result.config.object_config[k].gripper_position ==
            config.object_config[k].gripper_position);
      CHECK(result.config.object_config[k].gripper_angle ==
            config.object_config[k].gripper_angle);
    }
  }

  SUBCASE("small penetrations are repaired inside the box") {
    ConfigVars config = overlapping_config(0.001);
    REQUIRE(post::min_contact_signed_distance(two, config) < -1e-4);
    post::StageAResult result = post::stage_a(two, config, theta, penalty_final);
    REQUIRE(result.ok);
    CHECK(result.repaired);
    CHECK(result.min_signed_distance >= -1e-9);
    CHECK(post::min_contact_signed_distance(two, result.config) >= -1e-9);

    ZLayout layout(two);
    Eigen::VectorXd before = layout.pack(config);
    Eigen::VectorXd after = layout.pack(result.config);
    double pose_halfwidth = 0.1 * two.max_characteristic_length();
    for (int k = 0; k < 2; ++k) {
      int o = layout.pose_offset(k);
      CHECK(std::abs(after[o] - before[o]) <= pose_halfwidth + 1e-9);
      CHECK(std::abs(after[o + 1] - before[o + 1]) <= pose_halfwidth + 1e-9);
      CHECK(std::abs(after[o + 2] - before[o + 2]) <= 5.0 * kDeg + 1e-9);
      CHECK(std::abs(after[o + 3] - before[o + 3]) <= pose_halfwidth + 1e-9);
      for (int c = 0; c < layout.coord_count(k); ++c) {
        int idx = layout.coord_index(k, c);
        CHECK(std::abs(after[idx] - before[idx]) <= 0.05 + 1e-9);
      }
    }
  }

  SUBCASE("deep penetrations beyond the box fail") {
    ConfigVars config = overlapping_config(0.25);
    REQUIRE(post::min_contact_signed_distance(two, config) < -0.2);
    post::StageAResult result = post::stage_a(two, config, theta, penalty_final);
    CHECK(!result.ok);
  }
}

TEST_CASE("refined grids") {
  ProblemSpec problem = fixtures::square_problem();

  SUBCASE("contact and vertex heights appear as breakpoints") {
    ConfigVars config = level_square_config();
    config.object_config[0].gripper_position.y() = 0.21;  // shift the image
    std::vector<double> grid = post::refined_grid(problem, config);
    auto has = [&](double y) {
      for (double g : grid) {
        if (std::abs(g - y) < 1e-9) return true;
      }
      return false;
    };
    // Contact heights at -0.21; vertex rows at -1.21 (outside band) and 0.79.
    CHECK(has(-0.21));
    auto [lo, hi] = post::contact_band(problem, config);
    if (0.79 > lo && 0.79 < hi) CHECK(has(0.79));
    for (size_t i = 1; i < grid.size(); ++i) {
      CHECK(grid[i] - grid[i - 1] > 1e-10);
    }
  }

  SUBCASE("coincident heights are deduplicated") {
    ConfigVars config = level_square_config();
    config.contact_coords[0] = {0.0, 0.5};  // left contact lands on a vertex
    std::vector<double> grid = post::refined_grid(problem, config);
    int near_one = 0;
    for (double g : grid) {
      if (std::abs(g - 1.0) < 1e-9) ++near_one;
    }
    CHECK(near_one <= 1);
    for (size_t i = 1; i < grid.size(); ++i) {
      CHECK(grid[i] - grid[i - 1] > 1e-10);
    }
  }
}

TEST_CASE("stage B") {
  ProblemSpec problem = fixtures::square_problem();

  SUBCASE("contact rows become exact on the refined grid") {
    ConfigVars config = level_square_config();
    post::StageBResult result = post::stage_b(problem, config);
    REQUIRE(result.ok);
    CHECK(result.contact_residual < 1e-10);
    CHECK(result.bound_violation < 1e-8);
    CHECK(shape::hermite_position(result.surface, Jaw::Left, 0.0) ==
          doctest::Approx(-1.0).epsilon(1e-10));
  }

  SUBCASE("an off-grid vertex becomes exact after refinement") {
    // A small diamond pokes left of the square between uniform breakpoints;
    // its widest point sits at a height no uniform grid hits.
    ProblemSpec spiked = problem;
    geom::Polygon diamond;
    diamond.vertices = {{-1.05, 0.13}, {-1.15, 0.21}, {-1.25, 0.13}, {-1.15, 0.05}};
    spiked.objects[0].obstacles.push_back(diamond);
    ConfigVars config = level_square_config();

    std::vector<double> main_grid = shape::uniform_grid(
        spiked.params.grid_low, spiked.params.grid_high, spiked.params.grid_intervals);
    shape::ShapeSolution main_sol = shape::solve_shape(spiked, config, main_grid);
    REQUIRE(main_sol.status == qp::Status::Optimal);

    post::StageBResult refined = post::stage_b(spiked, config);
    REQUIRE(refined.ok);

    // The refined surface honors the bound at the vertex height exactly.
    double at_vertex = shape::hermite_position(refined.surface, Jaw::Left, 0.13);
    CHECK(at_vertex <= -1.25 + 1e-8);

    // And never violates more refined-breakpoint constraints than the
    // main-phase surface does.
    std::vector<double> refined_grid = post::refined_grid(spiked, config);
    int before = count_bound_violations(spiked, config, main_sol.surface, refined_grid, 1e-8);
    int after = count_bound_violations(spiked, config, refined.surface, refined_grid, 1e-8);
    CHECK(before >= 1);  // the diamond tip was clipped by the coarse grid
    CHECK(after == 0);
    CHECK(after <= before);
  }

  SUBCASE("infeasible contacts propagate a failure status") {
    ProblemSpec blocked = problem;
    geom::Polygon wall = fixtures::box(-1.5, 0.0, 0.5, 1.2);
    blocked.objects[0].obstacles.push_back(wall);
    ConfigVars config = level_square_config();
    post::StageBResult result = post::stage_b(blocked, config);
    CHECK(!result.ok);
    CHECK(result.message.find("infeasible") != std::string::npos);
  }
}
