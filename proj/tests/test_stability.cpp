#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/stability.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <numbers>

using namespace gripopt;
using geom::Jaw;
using geom::Vec2;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

stab::ContactSet hand_built_pair() {
  // Centered opposing contacts with both tangents pointing up.
  stab::ContactSet set;
  set.frames.push_back({Vec2{-1.0, 0.0}, Vec2{0.0, 1.0}, Vec2{1.0, 0.0}});
  set.frames.push_back({Vec2{1.0, 0.0}, Vec2{0.0, 1.0}, Vec2{-1.0, 0.0}});
  set.jaws = {Jaw::Left, Jaw::Right};
  return set;
}

ConfigVars square_config(double angle) {
  ConfigVars config;
  config.object_config.push_back({Vec2{0.0, 0.0}, angle, 0.0});
  config.contact_coords.push_back({0.5, 0.5});
  return config;
}

// Closed-form summed quality for the centered square grasp: the friction
// bound or the preload bound pins the normal force, and the virtual
// displacements scale with 1/cos(theta).
double square_quality_reference(double theta, double mu) {
  double c = std::cos(theta);
  double t = std::tan(theta);
  double friction_floor = 0.5 / mu;
  double plus = std::max(friction_floor, -0.5 * t);
  double minus = std::max(friction_floor, 0.5 * t);
  return (plus * plus + minus * minus) / (2.0 * c * c);
}

}  // namespace

TEST_CASE("grasp matrix columns") {
  SUBCASE("hand-built centered pair") {
    Eigen::MatrixXd G = stab::grasp_matrix(hand_built_pair());
    Eigen::MatrixXd expected(3, 4);
    expected << 1, 0, -1, 0,
                0, 1, 0, 1,
                0, -1, 0, 1;
    CHECK((G - expected).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("contact at the origin produces no torque") {
    stab::ContactSet set;
    set.frames.push_back({Vec2{0.0, 0.0}, Vec2{0.0, 1.0}, Vec2{1.0, 0.0}});
    set.jaws = {Jaw::Left};
    Eigen::MatrixXd G = stab::grasp_matrix(set);
    CHECK(G(2, 0) == doctest::Approx(0.0));
    CHECK(G(2, 1) == doctest::Approx(0.0));
  }
}

TEST_CASE("hand jacobian") {
  SUBCASE("single left contact") {
    stab::ContactSet set;
    set.frames.push_back({Vec2{-1.0, 0.0}, Vec2{0.0, 1.0}, Vec2{1.0, 0.0}});
    set.jaws = {Jaw::Left};
    Eigen::MatrixXd J = stab::hand_jacobian(set);
    CHECK(J(0, 0) == doctest::Approx(1.0));
    CHECK(J(0, 1) == doctest::Approx(0.0));
    CHECK(J(1, 0) == doctest::Approx(0.0));  // tangent has no horizontal part
    CHECK(J(1, 1) == doctest::Approx(0.0));
  }

  SUBCASE("vertical normals transmit no normal force to the jaws") {
    stab::ContactSet set;
    set.frames.push_back({Vec2{0.0, 1.0}, Vec2{1.0, 0.0}, Vec2{0.0, -1.0}});
    set.frames.push_back({Vec2{0.0, -1.0}, Vec2{-1.0, 0.0}, Vec2{0.0, 1.0}});
    set.jaws = {Jaw::Left, Jaw::Right};
    Eigen::MatrixXd J = stab::hand_jacobian(set);
    // Normal rows project to zero; only the friction rows can carry
    // horizontal force when the normals are vertical.
    Eigen::Vector4d c{2.0, 0.0, 3.0, 0.0};
    Eigen::Vector2d jaw_force = J.transpose() * c;
    CHECK(std::abs(jaw_force[0]) < 1e-14);
    CHECK(std::abs(jaw_force[1]) < 1e-14);
  }

  SUBCASE("square grasp resultants") {
    Eigen::MatrixXd J = stab::hand_jacobian(hand_built_pair());
    Eigen::Vector4d c{1.5, 0.0, 2.5, 0.0};
    Eigen::Vector2d jaw_force = J.transpose() * c;
    CHECK(jaw_force[0] == doctest::Approx(1.5));
    CHECK(jaw_force[1] == doctest::Approx(-2.5));
  }
}

TEST_CASE("single grasp program on the centered square") {
  ProblemSpec problem = fixtures::square_problem();
  ConfigVars config = square_config(0.0);
  stab::ContactSet set = stab::contact_set(problem, 0, config);
  double length = problem.characteristic_length(0);
  CHECK(length == doctest::Approx(std::sqrt(2.0)));

  SUBCASE("unit torque: analytic optimum") {
    stab::GraspProgram prog =
        stab::assemble_single(set, length, Eigen::Vector3d{0, 0, 1}, 0.3);
    qp::Instance inst{prog.Q, Eigen::VectorXd::Zero(9), prog.A, prog.b, prog.H, prog.g, {}};
    qp::Result res = qp::solve(inst);
    REQUIRE(res.status == qp::Status::Optimal);

    // Tangential forces split the unit torque over unit lever arms; the
    // normals sit on the friction bound 0.5/mu.
    double n_expected = 0.5 / 0.3;
    CHECK(std::abs(res.x[5] - n_expected) < 1e-6);  // left normal
    CHECK(std::abs(res.x[7] - n_expected) < 1e-6);  // right normal
    CHECK(std::abs(res.x[6] + 0.5) < 1e-6);         // left tangential
    CHECK(std::abs(res.x[8] + 0.5) < 1e-6);         // right tangential
    CHECK(res.objective == doctest::Approx(25.0 / 18.0).epsilon(1e-8));
    CHECK(res.kkt.passes(1e-6));

    oracles::EnumerationResult truth = oracles::enumerate_qp(inst);
    REQUIRE(truth.feasible);
    CHECK(std::abs(res.objective - truth.objective) < 1e-8 * (1.0 + truth.objective));
  }

  SUBCASE("zero wrench: zero solution") {
    stab::GraspProgram prog =
        stab::assemble_single(set, length, Eigen::Vector3d{0, 0, 0}, 0.3);
    qp::Instance inst{prog.Q, Eigen::VectorXd::Zero(9), prog.A, prog.b, prog.H, prog.g, {}};
    qp::Result res = qp::solve(inst);
    REQUIRE(res.status == qp::Status::Optimal);
    CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(res.x.cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("wrench scaling: solutions scale linearly, cost quadratically") {
    stab::GraspProgram base =
        stab::assemble_single(set, length, Eigen::Vector3d{0, 0, 1}, 0.3);
    qp::Instance base_inst{base.Q, Eigen::VectorXd::Zero(9),
                           base.A, base.b, base.H, base.g, {}};
    qp::Result base_res = qp::solve(base_inst);
    REQUIRE(base_res.status == qp::Status::Optimal);
    for (double alpha : {2.0, 10.0}) {
      stab::GraspProgram scaled =
          stab::assemble_single(set, length, Eigen::Vector3d{0, 0, alpha}, 0.3);
      qp::Instance inst{scaled.Q, Eigen::VectorXd::Zero(9), scaled.A, scaled.b,
                        scaled.H, scaled.g, {}};
      qp::Result res = qp::solve(inst);
      REQUIRE(res.status == qp::Status::Optimal);
      CHECK((res.x - alpha * base_res.x).cwiseAbs().maxCoeff() <
            1e-8 * alpha * (1.0 + base_res.x.cwiseAbs().maxCoeff()));
      CHECK(std::abs(res.objective - alpha * alpha * base_res.objective) <
            1e-8 * alpha * alpha * (1.0 + base_res.objective));
    }
  }

  SUBCASE("feasible points satisfy the contact model") {
    stab::GraspProgram prog =
        stab::assemble_single(set, length, Eigen::Vector3d{0, 0, 1}, 0.3);
    qp::Instance inst{prog.Q, Eigen::VectorXd::Zero(9), prog.A, prog.b, prog.H, prog.g, {}};
    qp::Result res = qp::solve(inst);
    REQUIRE(res.status == qp::Status::Optimal);
    Eigen::MatrixXd G = stab::grasp_matrix(set);
    Eigen::VectorXd c = res.x.tail(4);
    Eigen::Vector3d balance = G * c + Eigen::Vector3d{0, 0, 1};
    CHECK(balance.cwiseAbs().maxCoeff() < 1e-8);
    for (int i = 0; i < 2; ++i) {
      CHECK(c[2 * i] > -1e-10);
      CHECK(std::abs(c[2 * i + 1]) <= 0.3 * c[2 * i] + 1e-10);
    }
  }

  SUBCASE("opposite torque infeasible past the quarter turn") {
    ConfigVars tilted = square_config(95.0 * kDeg);
    stab::ContactSet tilted_set = stab::contact_set(problem, 0, tilted);
    stab::GraspProgram prog =
        stab::assemble_single(tilted_set, length, Eigen::Vector3d{0, 0, -1}, 0.3);
    qp::Instance inst{prog.Q, Eigen::VectorXd::Zero(9), prog.A, prog.b, prog.H, prog.g, {}};
    qp::Result res = qp::solve(inst);
    CHECK(res.status == qp::Status::Infeasible);
  }
}

TEST_CASE("consolidated stability program") {
  ProblemSpec problem = fixtures::square_problem();
  ConfigVars config = square_config(0.0);

  SUBCASE("dimension bookkeeping") {
    stab::ConsolidatedStability cs = stab::consolidate_stability(problem, config);
    CHECK(cs.variable_count() == 18);
    CHECK(cs.blocks.size() == 2);
    CHECK(cs.A.rows() == 14);
    CHECK(cs.H.rows() == 10);
  }

  SUBCASE("right-hand side differs only in the wrench rows") {
    stab::ConsolidatedStability cs = stab::consolidate_stability(problem, config);
    const auto& plus = cs.blocks[0];
    const auto& minus = cs.blocks[1];
    Eigen::VectorXd g_plus = cs.g.segment(plus.eq_begin, plus.eq_count);
    Eigen::VectorXd g_minus = cs.g.segment(minus.eq_begin, minus.eq_count);
    CHECK((g_plus.head(3) + g_minus.head(3)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((g_plus.tail(plus.eq_count - 3) - g_minus.tail(minus.eq_count - 3))
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    Eigen::MatrixXd a_plus =
        cs.A.block(plus.ineq_begin, plus.var_begin, plus.ineq_count, plus.var_count);
    Eigen::MatrixXd a_minus =
        cs.A.block(minus.ineq_begin, minus.var_begin, minus.ineq_count, minus.var_count);
    CHECK((a_plus - a_minus).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("two objects stack block-diagonally") {
    ProblemSpec two = fixtures::two_rectangles();
    ConfigVars config2 = fixtures::default_config(two);
    stab::ConsolidatedStability cs = stab::consolidate_stability(two, config2);
    REQUIRE(cs.blocks.size() == 4);
    for (const auto& a : cs.blocks) {
      for (const auto& b : cs.blocks) {
        if (a.var_begin == b.var_begin) continue;
        CHECK(cs.A.block(a.ineq_begin, b.var_begin, a.ineq_count, b.var_count)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        CHECK(cs.H.block(a.eq_begin, b.var_begin, a.eq_count, b.var_count)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
      }
    }
  }
}

TEST_CASE("grasp quality over orientation") {
  ProblemSpec problem = fixtures::square_problem();

  SUBCASE("matches the analytic curve and is minimized level") {
    double at_zero = 0.0;
    for (int deg : {0, 10, 25, 40, 60, 75, 85}) {
      stab::QualityBreakdown q = stab::grasp_quality(problem, square_config(deg * kDeg));
      REQUIRE(q.feasible);
      double expected = square_quality_reference(deg * kDeg, 0.3);
      CHECK(std::abs(q.total - expected) < 1e-6 * (1.0 + expected));
      if (deg == 0) at_zero = q.total;
      CHECK(q.total >= at_zero - 1e-9);
    }
    CHECK(at_zero == doctest::Approx(25.0 / 9.0).epsilon(1e-8));
  }

  SUBCASE("symmetric in the grasp angle") {
    for (int deg : {5, 20, 45, 70}) {
      stab::QualityBreakdown plus = stab::grasp_quality(problem, square_config(deg * kDeg));
      stab::QualityBreakdown minus = stab::grasp_quality(problem, square_config(-deg * kDeg));
      REQUIRE(plus.feasible);
      REQUIRE(minus.feasible);
      CHECK(std::abs(plus.total - minus.total) < 1e-6 * plus.total);
    }
  }

  SUBCASE("per-object breakdown sums to the total") {
    stab::QualityBreakdown q = stab::grasp_quality(problem, square_config(30 * kDeg));
    REQUIRE(q.feasible);
    REQUIRE(q.per_object.size() == 1);
    CHECK(q.total ==
          doctest::Approx(q.per_object[0][0] + q.per_object[0][1]).epsilon(1e-10));
  }

  SUBCASE("infeasible beyond the admissible interval") {
    stab::QualityBreakdown q = stab::grasp_quality(problem, square_config(95 * kDeg));
    CHECK(!q.feasible);
  }

  SUBCASE("uniform object scaling with a fixed unit torque") {
    // Doubling the object halves the tangential forces and doubles the
    // length scale, so the nondimensional cost drops by a factor of 16.
    ProblemSpec big = problem;
    big.objects[0].shape = fixtures::box(0, 0, 2.0, 2.0);
    stab::QualityBreakdown small_q = stab::grasp_quality(problem, square_config(0.0));
    stab::QualityBreakdown big_q = stab::grasp_quality(big, square_config(0.0));
    REQUIRE(small_q.feasible);
    REQUIRE(big_q.feasible);
    CHECK(small_q.total / big_q.total == doctest::Approx(16.0).epsilon(1e-6));
  }
}

TEST_CASE("orientation bounds") {
  ProblemSpec problem = fixtures::square_problem();

  SUBCASE("square bounds are symmetric and reach the tangent limit") {
    stab::ThetaScan scan = stab::theta_bounds(problem, 0);
    CHECK(std::abs(scan.high + scan.low) < 0.3 * kDeg);
    CHECK(std::abs(scan.high - kPi / 2.0) < 0.3 * kDeg);
    CHECK(std::abs(scan.low + kPi / 2.0) < 0.3 * kDeg);
    CHECK(!scan.full_circle);
  }

  SUBCASE("world rotation shifts the bounds rigidly") {
    stab::ThetaScan base = stab::theta_bounds(problem, 0);
    ProblemSpec rotated = problem;
    rotated.objects[0].world_pose.angle = 30 * kDeg;
    stab::ThetaScan shifted = stab::theta_bounds(rotated, 0);
    CHECK(std::abs((shifted.low - 30 * kDeg) - base.low) < 0.1 * kDeg);
    CHECK(std::abs((shifted.high - 30 * kDeg) - base.high) < 0.1 * kDeg);
  }

  SUBCASE("edges parallel to the jaw axis exclude the level orientation") {
    ProblemSpec flat = problem;
    flat.contacts = {{0, 2, geom::Jaw::Left}, {0, 0, geom::Jaw::Right}};
    stab::ThetaScan scan = stab::theta_bounds(flat, 0);
    CHECK(!(scan.low <= 0.0 && 0.0 <= scan.high));
  }

  SUBCASE("beyond the bounds the quality program is infeasible") {
    stab::ThetaScan scan = stab::theta_bounds(problem, 0);
    for (double extra : {0.5 * kDeg, 1.0 * kDeg, 5.0 * kDeg}) {
      stab::QualityBreakdown q =
          stab::grasp_quality(problem, square_config(scan.high + extra));
      CHECK(!q.feasible);
    }
  }
}
