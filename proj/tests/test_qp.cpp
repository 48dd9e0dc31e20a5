#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/qp.hpp"
#include "support/oracles.hpp"

#include <cstring>
#include <random>

using namespace gripopt;

namespace {

qp::Instance empty_constraints(int n) {
  qp::Instance inst;
  inst.Q = Eigen::MatrixXd::Zero(n, n);
  inst.q = Eigen::VectorXd::Zero(n);
  inst.A.resize(0, n);
  inst.b.resize(0);
  inst.H.resize(0, n);
  inst.g.resize(0);
  return inst;
}

}  // namespace

TEST_CASE("textbook instances") {
  SUBCASE("half parabola against a lower bound") {
    qp::Instance inst = empty_constraints(1);
    inst.Q(0, 0) = 1.0;
    inst.A.resize(1, 1);
    inst.A(0, 0) = -1.0;
    inst.b.resize(1);
    inst.b[0] = -1.0;
    qp::Result res = qp::solve(inst);
    REQUIRE(res.status == qp::Status::Optimal);
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.objective == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.ineq_duals[0] == doctest::Approx(1.0).epsilon(1e-7));
  }

  SUBCASE("projection onto a hyperplane") {
    qp::Instance inst = empty_constraints(2);
    inst.Q.setIdentity();
    inst.H.resize(1, 2);
    inst.H << 1.0, 1.0;
    inst.g.resize(1);
    inst.g[0] = 2.0;
    qp::Result res = qp::solve(inst);
    REQUIRE(res.status == qp::Status::Optimal);
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("contradictory inequalities are infeasible") {
    qp::Instance inst = empty_constraints(1);
    inst.Q(0, 0) = 1.0;
    inst.A.resize(2, 1);
    inst.A << 1.0, -1.0;
    inst.b.resize(2);
    inst.b << -1.0, -1.0;  // x <= -1 and x >= 1
    qp::Result res = qp::solve(inst);
    CHECK(res.status == qp::Status::Infeasible);
  }

  SUBCASE("zero-cost directions pinned by constraints") {
    qp::Instance inst = empty_constraints(2);
    inst.Q(0, 0) = 1.0;  // second variable carries no cost
    inst.q << 0.0, 1.0;
    inst.nonneg = {1};
    qp::Result res = qp::solve(inst);
    REQUIRE(res.status == qp::Status::Optimal);
    CHECK(std::abs(res.x[0]) < 1e-9);
    CHECK(std::abs(res.x[1]) < 1e-9);
  }
}

TEST_CASE("active-set enumeration oracle agreement") {
  std::mt19937_64 rng(2024);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 + static_cast<int>(rng() % 4);
    int mi = 1 + static_cast<int>(rng() % 5);
    int me = static_cast<int>(rng() % 2);
    int nb = static_cast<int>(rng() % std::min(n, 3));
    if (mi + nb > 12) continue;
    qp::Instance inst = oracles::random_qp(rng, n, mi, me, nb);
    oracles::EnumerationResult truth = oracles::enumerate_qp(inst);
    REQUIRE(truth.feasible);
    qp::Result res = qp::solve(inst);
    REQUIRE(res.status == qp::Status::Optimal);
    CHECK(std::abs(res.objective - truth.objective) <
          1e-8 * (1.0 + std::abs(truth.objective)));
    ++solved;
  }
  CHECK(solved >= 50);
}

TEST_CASE("kkt reporting") {
  qp::Instance inst = empty_constraints(2);
  inst.Q << 2.0, 0.0, 0.0, 1.0;
  inst.q << -1.0, 0.0;
  inst.A.resize(1, 2);
  inst.A << 1.0, 1.0;
  inst.b.resize(1);
  inst.b[0] = 2.0;

  qp::Result res = qp::solve(inst);
  REQUIRE(res.status == qp::Status::Optimal);

  SUBCASE("solutions pass") {
    qp::KktReport rep = qp::kkt_check(inst, res);
    CHECK(rep.passes(1e-8));
  }

  SUBCASE("perturbed solutions fail stationarity") {
    qp::Result bad = res;
    bad.x[0] += 1e-3;
    qp::KktReport rep = qp::kkt_check(inst, bad);
    CHECK(rep.stationarity > 1e-6);
    CHECK(!rep.passes(1e-8));
  }

  SUBCASE("unconstrained check reduces to the gradient") {
    qp::Instance plain = empty_constraints(2);
    plain.Q << 2.0, 0.0, 0.0, 1.0;
    qp::Result zero;
    zero.status = qp::Status::Optimal;
    zero.x = Eigen::VectorXd::Zero(2);
    qp::KktReport rep = qp::kkt_check(plain, zero);
    CHECK(rep.stationarity == doctest::Approx(0.0));
    CHECK(rep.passes(1e-12));
  }
}

TEST_CASE("determinism") {
  std::mt19937_64 rng(99);
  qp::Instance inst = oracles::random_qp(rng, 5, 4, 1, 2);
  qp::Result a = qp::solve(inst);
  qp::Result b = qp::solve(inst);
  REQUIRE(a.status == qp::Status::Optimal);
  REQUIRE(a.x.size() == b.x.size());
  CHECK(std::memcmp(a.x.data(), b.x.data(), sizeof(double) * a.x.size()) == 0);
  CHECK(a.objective == b.objective);
}

TEST_CASE("objective is monotone under added inequalities") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    qp::Instance inst = oracles::random_qp(rng, 4, 3, 0, 0);
    qp::Result base = qp::solve(inst);
    REQUIRE(base.status == qp::Status::Optimal);

    // Append a random inequality that keeps the current optimum infeasible
    // or not; either way the optimum cannot improve.
    qp::Instance tighter = inst;
    Eigen::RowVectorXd row(4);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < 4; ++i) row[i] = gauss(rng);
    tighter.A.conservativeResize(inst.A.rows() + 1, 4);
    tighter.A.row(inst.A.rows()) = row;
    tighter.b.conservativeResize(inst.b.size() + 1);
    tighter.b[inst.b.size()] = row * base.x - 0.1;
    qp::Result constrained = qp::solve(tighter);
    if (constrained.status == qp::Status::Optimal) {
      CHECK(constrained.objective >= base.objective - 1e-9 * (1.0 + std::abs(base.objective)));
    }
  }
}

TEST_CASE("bound-constrained fast path") {
  SUBCASE("matches enumeration on random instances") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
      int n = 3 + static_cast<int>(rng() % 4);
      qp::Instance inst = oracles::random_qp(rng, n, 0, 0, n);
      inst.A.resize(0, n);
      inst.b.resize(0);
      qp::Result res = qp::solve(inst);
      REQUIRE(res.status == qp::Status::Optimal);
      oracles::EnumerationResult truth = oracles::enumerate_qp(inst);
      REQUIRE(truth.feasible);
      CHECK(std::abs(res.objective - truth.objective) <
            1e-8 * (1.0 + std::abs(truth.objective)));
      CHECK(res.kkt.passes(1e-8));
    }
  }

  SUBCASE("warm starts do not change the answer") {
    std::mt19937_64 rng(32);
    qp::Instance inst = oracles::random_qp(rng, 6, 0, 0, 6);
    inst.A.resize(0, 6);
    inst.b.resize(0);
    qp::Result cold = qp::solve(inst);
    Eigen::VectorXd guess = cold.x + Eigen::VectorXd::Constant(6, 0.05);
    qp::Options opts;
    opts.warm_start = &guess;
    qp::Result warm = qp::solve(inst, opts);
    REQUIRE(cold.status == qp::Status::Optimal);
    REQUIRE(warm.status == qp::Status::Optimal);
    CHECK(std::abs(cold.objective - warm.objective) < 1e-10 * (1.0 + std::abs(cold.objective)));
  }
}
