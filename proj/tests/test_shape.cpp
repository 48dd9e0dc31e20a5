#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/shape.hpp"
#include "support/fixtures.hpp"

#include <random>

using namespace gripopt;
using geom::Jaw;
using geom::Vec2;

namespace {

shape::SurfaceParams two_point_surface(double v0, double v1, double m0, double m1) {
  shape::SurfaceParams s;
  s.grid = {0.0, 1.0};
  s.positions.resize(4);
  s.positions << v0, v1, 0.0, 0.0;
  s.slopes.resize(4);
  s.slopes << m0, m1, 0.0, 0.0;
  return s;
}

struct Cubic {
  double a, b, c, d;  // a y^3 + b y^2 + c y + d
  double value(double y) const { return ((a * y + b) * y + c) * y + d; }
  double slope(double y) const { return (3.0 * a * y + 2.0 * b) * y + c; }
  double curvature(double y) const { return 6.0 * a * y + 2.0 * b; }
};

shape::SurfaceParams sampled_surface(const Cubic& f, const std::vector<double>& grid) {
  shape::SurfaceParams s;
  s.grid = grid;
  int np = static_cast<int>(grid.size());
  s.positions.resize(2 * np);
  s.slopes.resize(2 * np);
  for (int i = 0; i < np; ++i) {
    s.positions[i] = s.positions[np + i] = f.value(grid[i]);
    s.slopes[i] = s.slopes[np + i] = f.slope(grid[i]);
  }
  return s;
}

ConfigVars level_config(const ProblemSpec& problem, double opening = 0.0) {
  ConfigVars config = fixtures::default_config(problem);
  for (auto& oc : config.object_config) oc.jaw_opening = opening;
  return config;
}

}  // namespace

TEST_CASE("hermite interpolation") {
  SUBCASE("smoothstep midpoint") {
    shape::SurfaceParams s = two_point_surface(0.0, 1.0, 0.0, 0.0);
    CHECK(shape::hermite_position(s, Jaw::Left, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(shape::hermite_slope(s, Jaw::Left, 0.5) == doctest::Approx(1.5).epsilon(1e-14));
  }

  SUBCASE("breakpoints reproduce stored values and slopes") {
    shape::SurfaceParams s = two_point_surface(0.3, -0.7, 1.2, -0.4);
    CHECK(shape::hermite_position(s, Jaw::Left, 0.0) == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(shape::hermite_position(s, Jaw::Left, 1.0) == doctest::Approx(-0.7).epsilon(1e-13));
    CHECK(shape::hermite_slope(s, Jaw::Left, 1e-12) == doctest::Approx(1.2).epsilon(1e-9));
    CHECK(shape::hermite_slope(s, Jaw::Left, 1.0) == doctest::Approx(-0.4).epsilon(1e-13));
  }

  SUBCASE("reproduces the reference cubic") {
    Cubic f{1.0, 0.0, -2.0, 0.0};  // y^3 - 2y
    shape::SurfaceParams s = sampled_surface(f, {0.0, 0.5, 1.0});
    CHECK(shape::hermite_position(s, Jaw::Left, 0.25) ==
          doctest::Approx(-0.484375).epsilon(1e-14));
  }

  SUBCASE("exact for random cubics") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
      Cubic f{u(rng), u(rng), u(rng), u(rng)};
      std::vector<double> grid = {-1.0, -0.3, 0.4, 1.1};
      shape::SurfaceParams s = sampled_surface(f, grid);
      for (double y : {-0.9, -0.5, -0.31, 0.1, 0.39, 0.8, 1.05}) {
        CHECK(std::abs(shape::hermite_position(s, Jaw::Right, y) - f.value(y)) < 1e-10);
        CHECK(std::abs(shape::hermite_slope(s, Jaw::Right, y) - f.slope(y)) < 1e-10);
      }
    }
  }

  SUBCASE("first derivative is continuous across breakpoints") {
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    shape::SurfaceParams s;
    s.grid = {0.0, 0.4, 1.0, 1.5};
    s.positions.resize(8);
    s.slopes.resize(8);
    for (int i = 0; i < 8; ++i) {
      s.positions[i] = u(rng);
      s.slopes[i] = u(rng);
    }
    for (double y : {0.4, 1.0}) {
      double below = shape::hermite_slope(s, Jaw::Left, y);
      double above = shape::hermite_slope(s, Jaw::Left, y + 1e-13);
      CHECK(std::abs(below - above) < 1e-11);
    }
  }

  SUBCASE("queries outside the span are rejected") {
    shape::SurfaceParams s = two_point_surface(0, 1, 0, 0);
    CHECK_THROWS_AS(shape::hermite_position(s, Jaw::Left, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(shape::hermite_position(s, Jaw::Left, -0.5), std::invalid_argument);
  }

  SUBCASE("interval lookup uses half-open intervals") {
    std::vector<double> grid = {0.0, 1.0, 2.0};
    CHECK(shape::locate_interval(grid, 0.0) == 0);
    CHECK(shape::locate_interval(grid, 1.0) == 0);
    CHECK(shape::locate_interval(grid, 1.0 + 1e-12) == 1);
    CHECK(shape::locate_interval(grid, 2.0) == 1);
  }
}

TEST_CASE("interval second derivatives") {
  SUBCASE("smoothstep endpoints") {
    shape::SurfaceParams s = two_point_surface(0.0, 1.0, 0.0, 0.0);
    auto [start, end] = shape::second_derivatives(s, Jaw::Left, 0);
    CHECK(start == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(end == doctest::Approx(-6.0).epsilon(1e-14));
  }

  SUBCASE("linear segments have zero curvature") {
    shape::SurfaceParams s = two_point_surface(0.0, 1.0, 1.0, 1.0);
    auto [start, end] = shape::second_derivatives(s, Jaw::Left, 0);
    CHECK(std::abs(start) < 1e-14);
    CHECK(std::abs(end) < 1e-14);
  }

  SUBCASE("exact for quadratics") {
    Cubic f{0.0, 1.7, -0.3, 0.2};
    shape::SurfaceParams s = sampled_surface(f, {-0.5, 0.25, 1.0});
    for (int i = 0; i < 2; ++i) {
      auto [start, end] = shape::second_derivatives(s, Jaw::Left, i);
      CHECK(start == doctest::Approx(f.curvature(s.grid[i])).epsilon(1e-12));
      CHECK(end == doctest::Approx(f.curvature(s.grid[i + 1])).epsilon(1e-12));
    }
  }

  SUBCASE("agrees with finite differences of the slope") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    shape::SurfaceParams s;
    s.grid = {0.0, 0.7, 1.3};
    s.positions.resize(6);
    s.slopes.resize(6);
    for (int i = 0; i < 6; ++i) {
      s.positions[i] = u(rng);
      s.slopes[i] = u(rng);
    }
    // The second derivative is linear on each interval, so a central
    // difference of the slope taken just inside an endpoint must match.
    const double h = 1e-5;
    for (int i = 0; i < 2; ++i) {
      auto [start, end] = shape::second_derivatives(s, Jaw::Left, i);
      double width = s.grid[i + 1] - s.grid[i];
      for (double y0 : {s.grid[i] + 2 * h, s.grid[i + 1] - 2 * h}) {
        double fd = (shape::hermite_slope(s, Jaw::Left, y0 + h) -
                     shape::hermite_slope(s, Jaw::Left, y0 - h)) /
                    (2 * h);
        double expected = start + (end - start) * (y0 - s.grid[i]) / width;
        CHECK(std::abs(fd - expected) < 1e-4 * (1.0 + std::abs(expected)));
      }
    }
  }
}

TEST_CASE("shape cost") {
  ProblemSpec problem = fixtures::square_problem();
  ConfigVars config = level_config(problem);
  std::vector<double> grid = shape::uniform_grid(-1.2, 1.2, 12);
  std::vector<shape::ShapeContact> contacts = shape::gripper_frame_contacts(problem, config);

  SUBCASE("flat surfaces cost nothing") {
    Eigen::MatrixXd Q = shape::shape_cost(problem, grid, contacts);
    int np = static_cast<int>(grid.size());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(4 * np);
    u.head(np).setConstant(-1.0);
    u.segment(np, np).setConstant(1.0);
    CHECK(0.5 * u.dot(Q * u) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("cost matrix is positive semidefinite") {
    Eigen::MatrixXd Q = shape::shape_cost(problem, grid, contacts);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
    CHECK(eig.eigenvalues().minCoeff() > -1e-9);
  }

  SUBCASE("value is stable under grid refinement") {
    auto cost_on = [&](int intervals) {
      std::vector<double> g = shape::uniform_grid(-1.2, 1.2, intervals);
      Eigen::MatrixXd Q = shape::shape_cost(problem, g, contacts);
      int np = static_cast<int>(g.size());
      Eigen::VectorXd u(4 * np);
      for (int i = 0; i < np; ++i) {
        double y = g[i];
        double bump = 0.3 * std::exp(-y * y / (2 * 0.09));
        double slope = bump * (-y / 0.09);
        u[i] = -1.0 + bump;
        u[np + i] = 1.0 - bump;
        u[2 * np + i] = slope;
        u[3 * np + i] = -slope;
      }
      return 0.5 * u.dot(Q * u);
    };
    double coarse = cost_on(20);
    double fine = cost_on(40);
    CHECK(std::abs(fine - coarse) < 0.2 * std::abs(coarse));
  }

  SUBCASE("curvature far from every contact stops counting") {
    ProblemSpec narrow = problem;
    narrow.params.weight_path = 0.0;
    // A spike at one breakpoint keeps the curvature confined to the two
    // adjacent intervals.
    auto spike_cost = [&](double contact_y) {
      std::vector<shape::ShapeContact> moved = contacts;
      for (auto& c : moved) c.frame.position.y() = contact_y;
      Eigen::MatrixXd Q = shape::shape_cost(narrow, grid, moved);
      int np = static_cast<int>(grid.size());
      Eigen::VectorXd u = Eigen::VectorXd::Zero(4 * np);
      u[7] = 0.3;  // grid[7] = 0.2
      return 0.5 * u.dot(Q * u);
    };
    double near = spike_cost(0.2);
    double far = spike_cost(-1.15);  // more than five sigma away
    CHECK(far < 1e-6 * near);
  }
}

TEST_CASE("shape program assembly and solve") {
  ProblemSpec problem = fixtures::square_problem();
  std::vector<double> grid = shape::uniform_grid(-1.2, 1.2, 12);

  SUBCASE("level square: flat surfaces at the contacts, zero cost") {
    ConfigVars config = level_config(problem);
    shape::ShapeSolution sol = shape::solve_shape(problem, config, grid);
    REQUIRE(sol.status == qp::Status::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(shape::hermite_position(sol.surface, Jaw::Left, 0.0) ==
          doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(shape::hermite_position(sol.surface, Jaw::Right, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(shape::hermite_slope(sol.surface, Jaw::Left, 0.0)) < 1e-7);
  }

  SUBCASE("solution respects every breakpoint bound and contact row") {
    ConfigVars config = level_config(problem, 0.5);
    shape::ShapeAssembly assembly = shape::assemble_shape(problem, config, grid);
    REQUIRE(assembly.ok());
    shape::ShapeSolution sol = shape::solve_shape(problem, config, grid);
    REQUIRE(sol.status == qp::Status::Optimal);
    const shape::ShapeProgram& prog = *assembly.program;
    int np = static_cast<int>(grid.size());
    Eigen::VectorXd u(4 * np);
    u.head(2 * np) = sol.surface.positions;
    u.tail(2 * np) = sol.surface.slopes;
    CHECK(((prog.A * u - prog.b).maxCoeff()) < 1e-8);
    CHECK((prog.H * u - prog.g).cwiseAbs().maxCoeff() < 1e-8);
  }

  SUBCASE("shared requirements from two objects stay feasible") {
    ProblemSpec twin = problem;
    ObjectSpec copy = twin.objects[0];
    copy.name = "square2";
    twin.objects.push_back(copy);
    twin.contacts.push_back({1, 3, Jaw::Left});
    twin.contacts.push_back({1, 1, Jaw::Right});
    ConfigVars config = level_config(twin);
    // Identical placements induce duplicate, consistent equality rows.
    shape::ShapeSolution sol = shape::solve_shape(twin, config, grid);
    REQUIRE(sol.status == qp::Status::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-8));
  }

  SUBCASE("a contact beyond the envelope is infeasible") {
    ProblemSpec blocked = problem;
    geom::Polygon wall = fixtures::box(-1.5, 0.0, 0.5, 1.2);  // x in [-2, -1]
    blocked.objects[0].obstacles.push_back(wall);
    ConfigVars config = level_config(blocked);
    shape::ShapeSolution sol = shape::solve_shape(blocked, config, grid);
    CHECK(sol.status == qp::Status::Infeasible);
  }

  SUBCASE("wide openings leave the clearance rows slack") {
    ConfigVars config = level_config(problem, 4.0);
    shape::ShapeSolution sol = shape::solve_shape(problem, config, grid);
    REQUIRE(sol.status == qp::Status::Optimal);
    int np = sol.surface.point_count();
    for (int i = 0; i < np; ++i) {
      double gap = sol.surface.positions[i] - sol.surface.positions[np + i];
      CHECK(gap < 4.0 - 1e-3);
    }
  }

  SUBCASE("horizontal contact tangents are a structural error") {
    ProblemSpec flat = problem;
    flat.contacts = {{0, 2, Jaw::Left}, {0, 0, Jaw::Right}};
    ConfigVars config = level_config(flat);
    shape::ShapeAssembly assembly = shape::assemble_shape(flat, config, grid);
    CHECK(!assembly.ok());
    CHECK(assembly.violation > 0.0);
    CHECK_THROWS_AS(shape::solve_shape(flat, config, grid), std::invalid_argument);
  }

  SUBCASE("contacts outside the grid span are a structural error") {
    ProblemSpec far = problem;
    far.objects[0].world_pose.translation = {0.0, 2.4};
    ConfigVars config = level_config(far);
    shape::ShapeAssembly assembly = shape::assemble_shape(far, config, grid);
    CHECK(!assembly.ok());
    CHECK(assembly.violation == doctest::Approx(2 * 1.2).epsilon(0.05));
  }

  SUBCASE("horizontal translation shifts the optimum rigidly") {
    ConfigVars config = level_config(problem, 0.25);
    shape::ShapeSolution base = shape::solve_shape(problem, config, grid);
    REQUIRE(base.status == qp::Status::Optimal);

    const double delta = 0.35;
    ConfigVars shifted = config;
    shifted.object_config[0].gripper_position.x() -= delta;
    shape::ShapeSolution moved = shape::solve_shape(problem, shifted, grid);
    REQUIRE(moved.status == qp::Status::Optimal);

    CHECK(std::abs(moved.objective - base.objective) < 1e-8 * (1.0 + base.objective));
    Eigen::VectorXd expected =
        base.surface.positions.array() + delta;
    CHECK((moved.surface.positions - expected).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((moved.surface.slopes - base.surface.slopes).cwiseAbs().maxCoeff() < 1e-8);
  }
}
