#include "core/alm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gripopt::alm {

namespace {

constexpr double kStructuralPenalty = 1e6;

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<int>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out[static_cast<int>(i)] = v[idx[i]];
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

Eigen::MatrixXd ConsolidatedSystem::full_matrix() const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(row_count, var_count);
  for (const Block& blk : blocks) {
    for (size_t r = 0; r < blk.row_index.size(); ++r) {
      for (size_t c = 0; c < blk.var_index.size(); ++c) {
        M(blk.row_index[r], blk.var_index[c]) = blk.A(static_cast<int>(r), static_cast<int>(c));
      }
    }
  }
  return M;
}

Eigen::VectorXd ConsolidatedSystem::full_rhs() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(row_count);
  for (const Block& blk : blocks) {
    for (size_t r = 0; r < blk.row_index.size(); ++r) v[blk.row_index[r]] = blk.b[static_cast<int>(r)];
  }
  return v;
}

Eigen::MatrixXd ConsolidatedSystem::full_objective() const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(var_count, var_count);
  for (const Block& blk : blocks) {
    for (size_t r = 0; r < blk.var_index.size(); ++r) {
      for (size_t c = 0; c < blk.var_index.size(); ++c) {
        M(blk.var_index[r], blk.var_index[c]) = blk.Q(static_cast<int>(r), static_cast<int>(c));
      }
    }
  }
  return M;
}

std::vector<int> ConsolidatedSystem::slack_indices() const {
  std::vector<int> out;
  for (const Block& blk : blocks) {
    for (int local : blk.nonneg) out.push_back(blk.var_index[local]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::VectorXd ConsolidatedSystem::residual(const Eigen::VectorXd& u) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(row_count);
  for (const Block& blk : blocks) {
    Eigen::VectorXd local = blk.A * gather(u, blk.var_index) - blk.b;
    for (size_t i = 0; i < blk.row_index.size(); ++i) r[blk.row_index[i]] = local[static_cast<int>(i)];
  }
  return r;
}

int consolidated_row_count(const ProblemSpec& problem) {
  int rows = 0;
  auto by_object = problem.contacts_by_object();
  for (int k = 0; k < problem.object_count(); ++k) {
    int nc = static_cast<int>(by_object[k].size());
    rows += 2 * ((3 * nc + 1) + (3 + nc));  // both wrench signs
  }
  int np = problem.params.grid_intervals + 1;
  rows += 3 * np + 2 * problem.contact_count();
  return rows;
}

Consolidation consolidate(const ProblemSpec& problem, const ConfigVars& config,
                          const std::vector<double>& grid) {
  Consolidation out;

  shape::ShapeAssembly shape_assembly = shape::assemble_shape(problem, config, grid);
  if (!shape_assembly.ok()) {
    out.violation = shape_assembly.violation;
    out.issue = shape_assembly.issue;
    return out;
  }
  const shape::ShapeProgram& sp = *shape_assembly.program;

  stab::ConsolidatedStability cs = stab::consolidate_stability(problem, config);

  auto system = std::make_shared<ConsolidatedSystem>();
  ConsolidatedSystem& sys = *system;

  const int n_ub = cs.variable_count();
  const int m_bi = static_cast<int>(cs.A.rows());
  const int m_be = static_cast<int>(cs.H.rows());
  const int n_us = static_cast<int>(sp.Q.rows());
  const int m_si = static_cast<int>(sp.A.rows());
  const int m_se = static_cast<int>(sp.H.rows());

  sys.stability_var_count = n_ub;
  sys.stability_slack_count = m_bi;
  sys.shape_var_count = n_us;
  sys.shape_slack_count = m_si;
  sys.stability_ineq_rows = m_bi;
  sys.stability_eq_rows = m_be;
  sys.shape_ineq_rows = m_si;
  sys.shape_eq_rows = m_se;
  sys.var_count = n_ub + m_bi + n_us + m_si;
  sys.row_count = m_bi + m_be + m_si + m_se;

  const int slack_b_offset = n_ub;
  const int us_offset = n_ub + m_bi;
  const int slack_s_offset = n_ub + m_bi + n_us;
  const int shape_ineq_row_offset = m_bi + m_be;
  const int shape_eq_row_offset = m_bi + m_be + m_si;

  for (const auto& blk_info : cs.blocks) {
    ConsolidatedSystem::Block blk;
    int nv = blk_info.var_count;
    int na = blk_info.ineq_count;
    int nh = blk_info.eq_count;
    blk.var_index.reserve(nv + na);
    for (int i = 0; i < nv; ++i) blk.var_index.push_back(blk_info.var_begin + i);
    for (int i = 0; i < na; ++i) blk.var_index.push_back(slack_b_offset + blk_info.ineq_begin + i);
    for (int i = 0; i < na; ++i) blk.row_index.push_back(blk_info.ineq_begin + i);
    for (int i = 0; i < nh; ++i) blk.row_index.push_back(m_bi + blk_info.eq_begin + i);

    blk.A.setZero(na + nh, nv + na);
    blk.A.topLeftCorner(na, nv) = cs.A.block(blk_info.ineq_begin, blk_info.var_begin, na, nv);
    blk.A.topRightCorner(na, na).setIdentity();
    blk.A.bottomLeftCorner(nh, nv) = cs.H.block(blk_info.eq_begin, blk_info.var_begin, nh, nv);
    blk.b.resize(na + nh);
    blk.b.head(na) = cs.b.segment(blk_info.ineq_begin, na);
    blk.b.tail(nh) = cs.g.segment(blk_info.eq_begin, nh);

    blk.Q.setZero(nv + na, nv + na);
    blk.Q.topLeftCorner(nv, nv) = cs.Q.block(blk_info.var_begin, blk_info.var_begin, nv, nv);

    blk.nonneg.reserve(na);
    for (int i = 0; i < na; ++i) blk.nonneg.push_back(nv + i);
    sys.blocks.push_back(std::move(blk));
  }

  {
    ConsolidatedSystem::Block blk;
    blk.is_shape = true;
    double w = problem.params.shape_row_weight;
    blk.var_index.reserve(n_us + m_si);
    for (int i = 0; i < n_us; ++i) blk.var_index.push_back(us_offset + i);
    for (int i = 0; i < m_si; ++i) blk.var_index.push_back(slack_s_offset + i);
    for (int i = 0; i < m_si; ++i) blk.row_index.push_back(shape_ineq_row_offset + i);
    for (int i = 0; i < m_se; ++i) blk.row_index.push_back(shape_eq_row_offset + i);

    blk.A.setZero(m_si + m_se, n_us + m_si);
    blk.A.topLeftCorner(m_si, n_us) = w * sp.A;
    blk.A.topRightCorner(m_si, m_si).setIdentity();
    blk.A.bottomLeftCorner(m_se, n_us) = w * sp.H;
    blk.b.resize(m_si + m_se);
    blk.b.head(m_si) = w * sp.b;
    blk.b.tail(m_se) = w * sp.g;

    blk.Q.setZero(n_us + m_si, n_us + m_si);
    blk.Q.topLeftCorner(n_us, n_us) = sp.Q;

    blk.nonneg.reserve(m_si);
    for (int i = 0; i < m_si; ++i) blk.nonneg.push_back(n_us + i);
    sys.blocks.push_back(std::move(blk));
  }

  out.ok = true;
  out.system = system;
  return out;
}

InnerSolution inner_min(const ConsolidatedSystem& system, const Eigen::VectorXd& duals,
                        double penalty, const Eigen::VectorXd* warm_start,
                        double qp_regularization) {
  InnerSolution out;
  out.u = Eigen::VectorXd::Zero(system.var_count);

  Eigen::VectorXd nu = duals.size() == system.row_count
                           ? duals
                           : Eigen::VectorXd::Zero(system.row_count);

  for (const ConsolidatedSystem::Block& blk : system.blocks) {
    const int n = static_cast<int>(blk.var_index.size());
    Eigen::VectorXd nu_local = gather(nu, blk.row_index);

    qp::Instance inst;
    inst.Q = blk.Q;
    inst.q = blk.A.transpose() * nu_local;
    inst.A.resize(0, n);
    inst.b.resize(0);
    inst.H.resize(0, n);
    inst.g.resize(0);
    inst.nonneg = blk.nonneg;
    inst.penalty = qp::PenaltyTerm{blk.A, blk.b, penalty};

    qp::Options opts;
    opts.regularization = qp_regularization;
    Eigen::VectorXd warm_local;
    if (warm_start && warm_start->size() == system.var_count) {
      warm_local = gather(*warm_start, blk.var_index);
      opts.warm_start = &warm_local;
    }

    qp::Result sol = qp::solve(inst, opts);
    if (sol.status != qp::Status::Optimal) {
      qp::Options retry = opts;
      retry.regularization = std::max(qp_regularization, 1e-9 * (1.0 + penalty));
      sol = qp::solve(inst, retry);
    }
    if (sol.status != qp::Status::Optimal) {
      return out;  // not ok
    }
    for (size_t i = 0; i < blk.var_index.size(); ++i) {
      out.u[blk.var_index[i]] = sol.x[static_cast<int>(i)];
    }
    double cost = 0.5 * sol.x.dot(blk.Q.selfadjointView<Eigen::Lower>() * sol.x);
    if (blk.is_shape) {
      out.shape_cost += cost;
    } else {
      out.stability_cost += cost;
    }
  }

  out.residual = system.residual(out.u);
  out.residual_inf = out.residual.size() ? out.residual.cwiseAbs().maxCoeff() : 0.0;
  out.value = out.stability_cost + out.shape_cost + nu.dot(out.residual) +
              0.5 * penalty * out.residual.squaredNorm();
  out.ok = true;
  return out;
}

Evaluation evaluate_candidate(const ProblemSpec& problem, const ZLayout& layout,
                              const std::vector<double>& grid, const Eigen::VectorXd& z,
                              const Eigen::VectorXd& duals, double penalty,
                              const Eigen::VectorXd* warm_u) {
  Evaluation ev;
  Consolidation cons = consolidate(problem, layout.unpack(z), grid);
  if (!cons.ok) {
    ev.violation = cons.violation;
    ev.issue = cons.issue;
    ev.value = kStructuralPenalty * (1.0 + cons.violation);
    return ev;
  }
  ev.structural_ok = true;
  ev.system = cons.system;
  ev.inner = inner_min(*cons.system, duals, penalty, warm_u,
                       problem.params.qp_regularization);
  if (!ev.inner.ok) {
    ev.value = kStructuralPenalty * 2.0;
    return ev;
  }
  ev.solver_ok = true;
  ev.value = ev.inner.value;
  return ev;
}

Eigen::VectorXd BoxBounds::clamp(const Eigen::VectorXd& z) const {
  return z.cwiseMax(low).cwiseMin(high);
}

BoxBounds config_box(const ProblemSpec& problem, const std::vector<stab::ThetaScan>& theta) {
  ZLayout layout(problem);
  BoxBounds box;
  box.low.resize(layout.dimension());
  box.high.resize(layout.dimension());
  const Params& p = problem.params;
  for (int k = 0; k < problem.object_count(); ++k) {
    int o = layout.pose_offset(k);
    box.low[o + 0] = -p.position_bound_x;
    box.high[o + 0] = p.position_bound_x;
    box.low[o + 1] = -p.position_bound_y;
    box.high[o + 1] = p.position_bound_y;
    auto it = problem.theta_overrides.find(k);
    if (it != problem.theta_overrides.end()) {
      box.low[o + 2] = it->second.low;
      box.high[o + 2] = it->second.high;
    } else {
      box.low[o + 2] = theta[k].low;
      box.high[o + 2] = theta[k].high;
    }
    box.low[o + 3] = p.opening_low;
    box.high[o + 3] = p.opening_high;
    for (int c = 0; c < layout.coord_count(k); ++c) {
      box.low[layout.coord_index(k, c)] = p.contact_low;
      box.high[layout.coord_index(k, c)] = p.contact_high;
    }
  }
  return box;
}

DescentResult project_descent(const ProblemSpec& problem, const ZLayout& layout,
                              const std::vector<double>& grid, const BoxBounds& box,
                              const Eigen::VectorXd& z0, const Eigen::VectorXd& duals,
                              double penalty, int max_iterations, Eigen::VectorXd* warm_u,
                              const CandidateFilter* filter) {
  auto acceptable = [&](const Eigen::VectorXd& z) { return !filter || (*filter)(z); };

  auto value_of = [&](const Eigen::VectorXd& z) {
    Evaluation ev = evaluate_candidate(problem, layout, grid, z, duals, penalty, warm_u);
    if (ev.solver_ok && warm_u) *warm_u = ev.inner.u;
    return ev;
  };

  DescentResult best;
  best.z = box.clamp(z0);
  best.eval = value_of(best.z);
  best.value = best.eval.value;

  Eigen::VectorXd zc = best.z;
  double fc = best.value;
  Eigen::VectorXd widths = (box.high - box.low).cwiseMax(1e-9);

  int it = 0;
  int stalled = 0;
  for (; it < max_iterations; ++it) {
    const int n = static_cast<int>(zc.size());
    Eigen::VectorXd gradient(n);
    for (int i = 0; i < n; ++i) {
      double h = 1e-5 * std::max(1.0, std::abs(zc[i]));
      if (zc[i] + h > box.high[i]) h = -h;
      Eigen::VectorXd zp = zc;
      zp[i] += h;
      Evaluation ev = evaluate_candidate(problem, layout, grid, zp, duals, penalty, warm_u);
      double df = ev.value - fc;
      gradient[i] = std::clamp(df / h, -1e9, 1e9);
    }

    // Scale by the box widths so angles, positions and edge coordinates take
    // commensurate steps.
    Eigen::VectorXd direction = -gradient.cwiseProduct(widths.cwiseProduct(widths));
    double dir_norm = direction.cwiseQuotient(widths).cwiseAbs().maxCoeff();
    if (dir_norm < 1e-14) break;
    // First trial displacement: a quarter of the narrowest box side.
    double t = 0.25 / dir_norm;

    bool accepted = false;
    double previous = fc;
    for (int bt = 0; bt < 30; ++bt) {
      Eigen::VectorXd zt = box.clamp(zc + t * direction);
      Eigen::VectorXd s = zc - zt;
      if (s.cwiseAbs().maxCoeff() < 1e-14) break;
      if (acceptable(zt)) {
        Evaluation ev = value_of(zt);
        if (ev.value < best.value) {
          best.z = zt;
          best.value = ev.value;
          best.eval = ev;
        }
        double decrease = gradient.dot(s);
        if (ev.value < fc && ev.value <= fc - 1e-4 * std::max(decrease, 0.0)) {
          zc = zt;
          fc = ev.value;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) break;
    stalled = previous - fc < 1e-10 * (1.0 + std::abs(previous)) ? stalled + 1 : 0;
    if (stalled >= 2) break;
  }
  best.iterations = it;
  return best;
}

void dual_penalty_update(Eigen::VectorXd& duals, double& penalty,
                         const Eigen::VectorXd& residual, double growth) {
  duals += penalty * residual;
  penalty *= growth;
}

RestoreChoice restore_best(const std::vector<HistoryEntry>& history,
                           const Eigen::VectorXd& duals, double penalty,
                           Eigen::VectorXd* warm_u, double qp_regularization) {
  RestoreChoice choice;
  for (size_t h = 0; h < history.size(); ++h) {
    double v;
    if (!history[h].system) {
      v = history[h].structural_value;
    } else {
      InnerSolution inner =
          inner_min(*history[h].system, duals, penalty, warm_u, qp_regularization);
      v = inner.ok ? inner.value : 2.0 * kStructuralPenalty;
    }
    if (v < choice.value) {
      choice.value = v;
      choice.index = static_cast<int>(h);
    }
  }
  return choice;
}

std::vector<StartResult> multistart_optimize(const ProblemSpec& problem,
                                             const std::vector<stab::ThetaScan>& theta) {
  const Params& p = problem.params;
  ZLayout layout(problem);
  BoxBounds box = config_box(problem, theta);
  std::vector<double> grid =
      shape::uniform_grid(p.grid_low, p.grid_high, p.grid_intervals);
  const int rows = consolidated_row_count(problem);

  std::vector<StartResult> results(p.starts);

  for (int start = 0; start < p.starts; ++start) {
    std::mt19937_64 rng(mix_seed(p.seed, static_cast<std::uint64_t>(start)));

    // Midpoint initialization; vertical gripper positions randomized.
    Eigen::VectorXd z = 0.5 * (box.low + box.high);
    for (int k = 0; k < problem.object_count(); ++k) {
      std::uniform_real_distribution<double> dist(box.low[layout.pose_offset(k) + 1],
                                                  box.high[layout.pose_offset(k) + 1]);
      z[layout.pose_offset(k) + 1] = dist(rng);
    }
    for (int k = 0; k < problem.object_count(); ++k) {
      for (int c = 0; c < layout.coord_count(k); ++c) z[layout.coord_index(k, c)] = 0.5;
    }
    z = box.clamp(z);

    Eigen::VectorXd duals = Eigen::VectorXd::Zero(rows);
    double penalty = p.penalty_initial;
    Eigen::VectorXd warm_u;

    std::vector<HistoryEntry> history;
    auto push_history = [&](const Eigen::VectorXd& zh, const Evaluation& ev) {
      HistoryEntry h;
      h.z = zh;
      h.system = ev.structural_ok ? ev.system : nullptr;
      h.structural_value = ev.value;
      history.push_back(std::move(h));
    };

    Evaluation ev0 = evaluate_candidate(problem, layout, grid, z, duals, penalty, &warm_u);
    push_history(z, ev0);

    StartResult res;
    res.start_index = start;
    res.value_trace.reserve(p.iterations);

    for (int iter = 0; iter < p.iterations; ++iter) {
      RestoreChoice restored =
          restore_best(history, duals, penalty, &warm_u, p.qp_regularization);
      z = history[restored.index].z;

      DescentResult stepped = project_descent(problem, layout, grid, box, z, duals, penalty,
                                              p.descent_iterations, &warm_u, nullptr);
      z = stepped.z;
      Evaluation ev = stepped.eval;
      res.value_trace.push_back(ev.value);

      if (ev.solver_ok) {
        dual_penalty_update(duals, penalty, ev.inner.residual, p.penalty_growth);
      } else {
        penalty *= p.penalty_growth;
      }
      push_history(z, ev);
    }

    res.z = z;
    res.penalty_final = penalty;
    Evaluation final_eval = evaluate_candidate(problem, layout, grid, z,
                                               Eigen::VectorXd::Zero(rows), penalty, &warm_u);
    res.usable = final_eval.solver_ok;
    res.merit = final_eval.value;
    res.residual_inf = final_eval.solver_ok
                           ? final_eval.inner.residual_inf
                           : std::numeric_limits<double>::infinity();
    results[start] = std::move(res);
  }

  std::sort(results.begin(), results.end(), [](const StartResult& a, const StartResult& b) {
    if (a.merit != b.merit) return a.merit < b.merit;
    return a.start_index < b.start_index;
  });
  return results;
}

}  // namespace gripopt::alm
