#include "core/qp.hpp"

#include <algorithm>
#include <cmath>

namespace gripopt::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::VectorXd scatter(const std::vector<int>& idx, const Eigen::VectorXd& vals, int n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (size_t k = 0; k < idx.size(); ++k) out[idx[k]] += vals[static_cast<int>(k)];
  return out;
}

double instance_objective(const Instance& inst, const Eigen::VectorXd& x) {
  double v = 0.5 * x.dot(inst.Q.selfadjointView<Eigen::Lower>() * x);
  if (inst.q.size()) v += inst.q.dot(x);
  if (inst.penalty) {
    v += 0.5 * inst.penalty->weight *
         (inst.penalty->rows * x - inst.penalty->target).squaredNorm();
  }
  return v;
}

// ---------------------------------------------------------------------------
// Bound-constrained path with a least-squares penalty term: primal active set
// over the nonneg entries; each free subproblem is solved in augmented form
//   [Q + dI  W'  ] [x]   [-q]
//   [W      -I/w ] [y] = [ t ]
// so that large penalty weights never get squared into the factorization.
// ---------------------------------------------------------------------------

Result solve_bounds_penalty(const Instance& inst, const Options& opts,
                            const Eigen::MatrixXd& Q, const Eigen::VectorXd& q) {
  const PenaltyTerm& pt = *inst.penalty;
  const int n = inst.size();
  const int m = static_cast<int>(pt.rows.rows());
  const double w = pt.weight;

  Result res;
  res.x = Eigen::VectorXd::Zero(n);
  if (opts.warm_start && opts.warm_start->size() == n) res.x = *opts.warm_start;

  std::vector<char> is_bound(n, 0);
  for (int i : inst.nonneg) is_bound[i] = 1;
  for (int i = 0; i < n; ++i) {
    if (is_bound[i] && res.x[i] < 0.0) res.x[i] = 0.0;
  }
  std::vector<char> active(n, 0);
  for (int i = 0; i < n; ++i) {
    if (is_bound[i] && res.x[i] <= 0.0) active[i] = 1;
  }

  const double q_scale = 1.0 + Q.cwiseAbs().maxCoeff() + inf_norm(q);
  const double feas_tol = 1e-13 * q_scale;
  const double opt_tol = 1e-10 * (1.0 + q_scale);
  const int max_iter = 5 * n + 20;

  Eigen::VectorXd x = res.x;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);  // w * (W x - t) at the last solve
  std::vector<int> free_idx;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd K;

  auto solve_free = [&](Eigen::VectorXd& xf, Eigen::VectorXd& yf) -> bool {
    int nf = static_cast<int>(free_idx.size());
    double delta = std::max(opts.regularization, 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()));
    for (int attempt = 0; attempt < 4; ++attempt, delta *= 100.0) {
      K.setZero(nf + m, nf + m);
      for (int a = 0; a < nf; ++a) {
        for (int c = 0; c < nf; ++c) K(a, c) = Q(free_idx[a], free_idx[c]);
        K(a, a) += delta;
        for (int r = 0; r < m; ++r) {
          K(a, nf + r) = pt.rows(r, free_idx[a]);
          K(nf + r, a) = pt.rows(r, free_idx[a]);
        }
      }
      for (int r = 0; r < m; ++r) K(nf + r, nf + r) = -1.0 / w;
      Eigen::VectorXd rhs(nf + m);
      for (int a = 0; a < nf; ++a) rhs[a] = -q[free_idx[a]];
      rhs.tail(m) = pt.target;
      lu.compute(K);
      Eigen::VectorXd sol = lu.solve(rhs);
      for (int refine = 0; refine < 3; ++refine) {
        Eigen::VectorXd resid = rhs - K * sol;
        sol += lu.solve(resid);
      }
      if (sol.allFinite()) {
        xf = sol.head(nf);
        yf = sol.tail(m);
        return true;
      }
    }
    return false;
  };

  int it = 0;
  for (; it < max_iter; ++it) {
    free_idx.clear();
    for (int i = 0; i < n; ++i) {
      if (!active[i]) free_idx.push_back(i);
    }

    Eigen::VectorXd xf, yf;
    if (!solve_free(xf, yf)) {
      res.status = Status::Failed;
      break;
    }
    Eigen::VectorXd candidate = Eigen::VectorXd::Zero(n);
    for (size_t a = 0; a < free_idx.size(); ++a) candidate[free_idx[a]] = xf[static_cast<int>(a)];

    int blocker = -1;
    double alpha = 1.0;
    for (int i : free_idx) {
      if (!is_bound[i] || candidate[i] >= -feas_tol) continue;
      double denom = x[i] - candidate[i];
      double a = denom > 0.0 ? x[i] / denom : 0.0;
      if (a < alpha - 1e-15) {
        alpha = a;
        blocker = i;
      }
    }

    if (blocker >= 0) {
      x += alpha * (candidate - x);
      x[blocker] = 0.0;
      for (int i = 0; i < n; ++i) {
        if (is_bound[i] && x[i] < 0.0) x[i] = 0.0;
      }
      active[blocker] = 1;
      continue;
    }

    x = candidate;
    y = yf;
    // Bound multipliers on the active set; release the most negative.
    Eigen::VectorXd grad = Q.selfadjointView<Eigen::Lower>() * x + q + pt.rows.transpose() * y;
    int release = -1;
    double most_negative = -opt_tol;
    for (int i = 0; i < n; ++i) {
      if (active[i] && grad[i] < most_negative) {
        most_negative = grad[i];
        release = i;
      }
    }
    if (release < 0) {
      res.status = Status::Optimal;
      break;
    }
    active[release] = 0;
  }

  res.iterations = it;
  res.x = x;
  res.penalty_duals = y;
  res.ineq_duals = Eigen::VectorXd::Zero(inst.inequality_count());
  res.eq_duals = Eigen::VectorXd::Zero(inst.equality_count());
  Eigen::VectorXd grad = Q.selfadjointView<Eigen::Lower>() * x + q + pt.rows.transpose() * y;
  res.bound_duals.resize(static_cast<int>(inst.nonneg.size()));
  for (size_t k = 0; k < inst.nonneg.size(); ++k) {
    int i = inst.nonneg[k];
    res.bound_duals[static_cast<int>(k)] = active[i] ? std::max(grad[i], 0.0) : 0.0;
  }
  res.objective = instance_objective(inst, x);
  if (res.status != Status::Optimal) res.status = Status::Failed;
  res.kkt = kkt_check(inst, res);
  return res;
}

// ---------------------------------------------------------------------------
// Bound-constrained path: primal active set over the nonneg entries.
// ---------------------------------------------------------------------------

Result solve_bounds_only(const Instance& inst, const Options& opts,
                         const Eigen::MatrixXd& P, const Eigen::VectorXd& q) {
  const int n = inst.size();
  Result res;
  res.x = Eigen::VectorXd::Zero(n);
  if (opts.warm_start && opts.warm_start->size() == n) res.x = *opts.warm_start;

  std::vector<char> is_bound(n, 0);
  for (int i : inst.nonneg) is_bound[i] = 1;
  for (int i = 0; i < n; ++i) {
    if (is_bound[i] && res.x[i] < 0.0) res.x[i] = 0.0;
  }

  std::vector<char> active(n, 0);
  for (int i = 0; i < n; ++i) {
    if (is_bound[i] && res.x[i] <= 0.0) active[i] = 1;
  }

  const double p_scale = 1.0 + P.cwiseAbs().maxCoeff() + inf_norm(q);
  const double feas_tol = 1e-13 * p_scale;
  const double opt_tol = 1e-11 * p_scale;
  const int max_iter = 5 * n + 20;

  Eigen::VectorXd x = res.x;
  std::vector<int> free_idx;
  Eigen::MatrixXd pff;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;

  auto factor_free = [&](double extra_reg) -> bool {
    int nf = static_cast<int>(free_idx.size());
    pff.resize(nf, nf);
    for (int a = 0; a < nf; ++a)
      for (int c = 0; c < nf; ++c) pff(a, c) = P(free_idx[a], free_idx[c]);
    if (extra_reg > 0.0) pff.diagonal().array() += extra_reg;
    ldlt.compute(pff);
    return ldlt.info() == Eigen::Success;
  };

  int it = 0;
  for (; it < max_iter; ++it) {
    free_idx.clear();
    for (int i = 0; i < n; ++i) {
      if (!active[i]) free_idx.push_back(i);
    }
    int nf = static_cast<int>(free_idx.size());

    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    if (nf > 0) {
      double extra = 0.0;
      bool ok = factor_free(0.0);
      while (!ok && extra < 1e-4 * p_scale) {
        extra = (extra == 0.0) ? 1e-12 * p_scale : extra * 100.0;
        ok = factor_free(extra);
      }
      if (!ok) {
        res.status = Status::Failed;
        res.iterations = it;
        res.objective = instance_objective(inst, x);
        return res;
      }
      Eigen::VectorXd qf(nf);
      for (int a = 0; a < nf; ++a) qf[a] = q[free_idx[a]];
      Eigen::VectorXd yf = ldlt.solve(-qf);
      // Refine against the unregularized block.
      for (int r = 0; r < 2; ++r) {
        Eigen::VectorXd resid = -qf;
        for (int a = 0; a < nf; ++a)
          for (int c = 0; c < nf; ++c) resid[a] -= P(free_idx[a], free_idx[c]) * yf[c];
        yf += ldlt.solve(resid);
      }
      if (!yf.allFinite()) {
        res.status = Status::Failed;
        res.iterations = it;
        res.objective = instance_objective(inst, x);
        return res;
      }
      for (int a = 0; a < nf; ++a) y[free_idx[a]] = yf[a];
    }

    // Blocking bound on the way from x to y.
    int blocker = -1;
    double alpha = 1.0;
    for (int i : free_idx) {
      if (!is_bound[i] || y[i] >= -feas_tol) continue;
      double denom = x[i] - y[i];
      double a = denom > 0.0 ? x[i] / denom : 0.0;
      if (a < alpha - 1e-15) {
        alpha = a;
        blocker = i;
      }
    }

    if (blocker >= 0) {
      x += alpha * (y - x);
      x[blocker] = 0.0;
      for (int i = 0; i < n; ++i) {
        if (is_bound[i] && x[i] < 0.0) x[i] = 0.0;
      }
      active[blocker] = 1;
      continue;
    }

    x = y;
    // Bound multipliers on the active set; release the most negative.
    Eigen::VectorXd grad = P.selfadjointView<Eigen::Lower>() * x + q;
    int release = -1;
    double most_negative = -opt_tol;
    for (int i = 0; i < n; ++i) {
      if (active[i] && grad[i] < most_negative) {
        most_negative = grad[i];
        release = i;
      }
    }
    if (release < 0) {
      res.status = Status::Optimal;
      break;
    }
    active[release] = 0;
  }

  res.iterations = it;
  res.x = x;
  res.ineq_duals = Eigen::VectorXd::Zero(inst.inequality_count());
  res.eq_duals = Eigen::VectorXd::Zero(inst.equality_count());
  Eigen::VectorXd grad = P.selfadjointView<Eigen::Lower>() * x + q;
  res.bound_duals.resize(static_cast<int>(inst.nonneg.size()));
  for (size_t k = 0; k < inst.nonneg.size(); ++k) {
    int i = inst.nonneg[k];
    res.bound_duals[static_cast<int>(k)] = active[i] ? std::max(grad[i], 0.0) : 0.0;
  }
  res.objective = instance_objective(inst, x);
  if (res.status != Status::Optimal) res.status = Status::Failed;
  res.kkt = kkt_check(inst, res);
  return res;
}

// ---------------------------------------------------------------------------
// Interior-point path (Mehrotra predictor-corrector) for general instances.
// ---------------------------------------------------------------------------

struct Kkt {
  Eigen::MatrixXd M;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  int n = 0, me = 0;

  void factor(const Eigen::MatrixXd& Qbar, const Eigen::MatrixXd& H, double dp, double dd) {
    n = static_cast<int>(Qbar.rows());
    me = static_cast<int>(H.rows());
    M.setZero(n + me, n + me);
    M.topLeftCorner(n, n) = Qbar;
    M.topLeftCorner(n, n).diagonal().array() += dp;
    if (me) {
      M.block(n, 0, me, n) = H;
      M.block(0, n, n, me) = H.transpose();
      M.bottomRightCorner(me, me).diagonal().array() -= dd;
    }
    lu.compute(M);
  }

  void solve(const Eigen::VectorXd& rx, const Eigen::VectorXd& re,
             Eigen::VectorXd& dx, Eigen::VectorXd& dnu) const {
    Eigen::VectorXd rhs(n + me);
    rhs.head(n) = rx;
    if (me) rhs.tail(me) = re;
    Eigen::VectorXd sol = lu.solve(rhs);
    dx = sol.head(n);
    dnu = me ? Eigen::VectorXd(sol.tail(me)) : Eigen::VectorXd();
  }
};

double step_to_boundary(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double frac) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -frac * v[i] / dv[i]);
  }
  return alpha;
}

Result solve_interior_point(const Instance& inst, const Options& opts,
                            const Eigen::MatrixXd& Q, const Eigen::VectorXd& q) {
  const int n = inst.size();
  const int mi = inst.inequality_count();
  const int mn = static_cast<int>(inst.nonneg.size());
  const int mt = mi + mn;
  const int me = inst.equality_count();

  // Fold nonnegativity into the inequality block: [A; -E] x <= [b; 0].
  Eigen::MatrixXd At(mt, n);
  Eigen::VectorXd bt(mt);
  if (mi) {
    At.topRows(mi) = inst.A;
    bt.head(mi) = inst.b;
  }
  for (int k = 0; k < mn; ++k) {
    At.row(mi + k).setZero();
    At(mi + k, inst.nonneg[k]) = -1.0;
    bt[mi + k] = 0.0;
  }

  Result res;
  res.x = Eigen::VectorXd::Zero(n);

  const double sc_p = 1.0 + std::max(inf_norm(bt), inf_norm(inst.g));
  const double sc_d = 1.0 + inf_norm(q);
  const double mat_scale = 1.0 + Q.cwiseAbs().maxCoeff() +
                           (mt ? At.cwiseAbs().maxCoeff() : 0.0) +
                           (me ? inst.H.cwiseAbs().maxCoeff() : 0.0);
  const double reg = 1e-12 * mat_scale;

  Kkt kkt_sys;

  // Equality-only instance: one KKT solve.
  if (mt == 0) {
    kkt_sys.factor(Q, inst.H, reg, reg);
    Eigen::VectorXd dx, dnu;
    kkt_sys.solve(-q, inst.g, dx, dnu);
    for (int r = 0; r < 2; ++r) {
      Eigen::VectorXd rx = -q - Q.selfadjointView<Eigen::Lower>() * dx;
      if (me) rx -= inst.H.transpose() * dnu;
      Eigen::VectorXd re = inst.g - (me ? Eigen::VectorXd(inst.H * dx) : Eigen::VectorXd());
      Eigen::VectorXd cx, cnu;
      kkt_sys.solve(rx, re, cx, cnu);
      dx += cx;
      if (me) dnu += cnu;
    }
    res.x = dx;
    res.eq_duals = dnu;
    res.ineq_duals = Eigen::VectorXd();
    res.bound_duals = Eigen::VectorXd();
    res.objective = instance_objective(inst, res.x);
    res.iterations = 1;
    res.kkt = kkt_check(inst, res);
    res.status = res.kkt.passes(std::max(opts.tolerance, 1e-9)) ? Status::Optimal : Status::Failed;
    return res;
  }

  // Start point.
  Eigen::VectorXd x;
  if (opts.warm_start && opts.warm_start->size() == n) {
    x = *opts.warm_start;
  } else {
    Eigen::MatrixXd Q0 = Q;
    Q0.diagonal().array() += 1.0;
    x = Eigen::LDLT<Eigen::MatrixXd>(Q0).solve(-q);
    if (!x.allFinite()) x.setZero();
  }
  Eigen::VectorXd s = (bt - At * x).cwiseMax(1.0);
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(mt);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(me);

  auto residuals = [&](Eigen::VectorXd& rd, Eigen::VectorXd& re, Eigen::VectorXd& ri) {
    rd = Q.selfadjointView<Eigen::Lower>() * x + q + At.transpose() * lambda;
    if (me) rd += inst.H.transpose() * nu;
    re = me ? Eigen::VectorXd(inst.H * x - inst.g) : Eigen::VectorXd();
    ri = At * x + s - bt;
  };

  int it = 0;
  bool converged = false;
  for (; it < opts.max_iterations; ++it) {
    Eigen::VectorXd rd, re, ri;
    residuals(rd, re, ri);
    double mu = s.dot(lambda) / mt;
    double primal_viol = std::max((At * x - bt).maxCoeff(), me ? inf_norm(re) : 0.0);

    if (inf_norm(rd) <= opts.tolerance * sc_d * 10.0 && primal_viol <= opts.tolerance * sc_p &&
        (me == 0 || inf_norm(re) <= opts.tolerance * sc_p) && mu <= opts.tolerance * sc_p) {
      converged = true;
      break;
    }

    // Farkas-style certificate of primal infeasibility from diverging duals.
    double dual_mag = std::max(inf_norm(lambda), inf_norm(nu));
    if (dual_mag > 1e8) {
      Eigen::VectorXd ln = lambda / dual_mag;
      Eigen::VectorXd nn = me ? Eigen::VectorXd(nu / dual_mag) : Eigen::VectorXd();
      Eigen::VectorXd comb = At.transpose() * ln;
      if (me) comb += inst.H.transpose() * nn;
      double gap = bt.dot(ln) + (me ? inst.g.dot(nn) : 0.0);
      if (inf_norm(comb) <= 1e-7 * mat_scale && gap < -1e-9) {
        res.status = Status::Infeasible;
        res.x = x;
        res.iterations = it;
        res.objective = instance_objective(inst, x);
        return res;
      }
    }

    Eigen::VectorXd d = lambda.cwiseQuotient(s);
    Eigen::MatrixXd Qbar = Q + At.transpose() * d.asDiagonal() * At;
    kkt_sys.factor(Qbar, inst.H, reg, reg);

    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dnu,
                         Eigen::VectorXd& dl, Eigen::VectorXd& ds) {
      Eigen::VectorXd rx = -rd - At.transpose() * (d.cwiseProduct(ri) - rc.cwiseQuotient(s));
      Eigen::VectorXd reh = me ? Eigen::VectorXd(-re) : Eigen::VectorXd();
      kkt_sys.solve(rx, reh, dx, dnu);
      dl = d.cwiseProduct(At * dx + ri) - rc.cwiseQuotient(s);
      ds = -(rc + s.cwiseProduct(dl)).cwiseQuotient(lambda);
    };

    // Predictor.
    Eigen::VectorXd rc_aff = s.cwiseProduct(lambda);
    Eigen::VectorXd dx, dnu, dl, ds;
    direction(rc_aff, dx, dnu, dl, ds);
    double ap = step_to_boundary(s, ds, 1.0);
    double ad = step_to_boundary(lambda, dl, 1.0);
    double mu_aff = (s + ap * ds).dot(lambda + ad * dl) / mt;
    double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    Eigen::VectorXd rc = s.cwiseProduct(lambda) + ds.cwiseProduct(dl) -
                         Eigen::VectorXd::Constant(mt, sigma * mu);
    direction(rc, dx, dnu, dl, ds);
    ap = step_to_boundary(s, ds, 0.995);
    ad = step_to_boundary(lambda, dl, 0.995);

    if (!dx.allFinite() || !dl.allFinite() || !ds.allFinite()) {
      res.status = Status::Failed;
      res.x = x;
      res.iterations = it;
      res.objective = instance_objective(inst, x);
      return res;
    }

    x += ap * dx;
    s += ap * ds;
    lambda += ad * dl;
    if (me) nu += ad * dnu;
  }

  res.x = x;
  res.ineq_duals = mi ? Eigen::VectorXd(lambda.head(mi)) : Eigen::VectorXd();
  res.eq_duals = nu;
  res.bound_duals = mn ? Eigen::VectorXd(lambda.tail(mn)) : Eigen::VectorXd();
  res.iterations = it;

  // Polish: equality-constrained solve on the apparent active set.
  {
    std::vector<int> act;
    for (int i = 0; i < mt; ++i) {
      if (lambda[i] > s[i]) act.push_back(i);
    }
    int na = static_cast<int>(act.size());
    int dim = n + me + na;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
    K.topLeftCorner(n, n) = Q;
    Eigen::VectorXd rhs(dim);
    rhs.head(n) = -q;
    if (me) {
      K.block(n, 0, me, n) = inst.H;
      K.block(0, n, n, me) = inst.H.transpose();
      rhs.segment(n, me) = inst.g;
    }
    for (int k = 0; k < na; ++k) {
      K.row(n + me + k).head(n) = At.row(act[k]);
      K.col(n + me + k).head(n) = At.row(act[k]).transpose();
      rhs[n + me + k] = bt[act[k]];
    }
    Eigen::VectorXd sol = K.colPivHouseholderQr().solve(rhs);
    if (sol.allFinite()) {
      Result polished = res;
      polished.x = sol.head(n);
      if (me) polished.eq_duals = sol.segment(n, me);
      Eigen::VectorXd lam = Eigen::VectorXd::Zero(mt);
      for (int k = 0; k < na; ++k) lam[act[k]] = std::max(sol[n + me + k], 0.0);
      polished.ineq_duals = mi ? Eigen::VectorXd(lam.head(mi)) : Eigen::VectorXd();
      polished.bound_duals = mn ? Eigen::VectorXd(lam.tail(mn)) : Eigen::VectorXd();
      polished.objective = instance_objective(inst, polished.x);
      polished.kkt = kkt_check(inst, polished);
      res.objective = instance_objective(inst, res.x);
      res.kkt = kkt_check(inst, res);
      if (polished.kkt.worst() / polished.kkt.scale < res.kkt.worst() / res.kkt.scale) {
        res = polished;
      }
    } else {
      res.objective = instance_objective(inst, res.x);
      res.kkt = kkt_check(inst, res);
    }
  }

  double tol = std::max(opts.tolerance, 1e-9);
  if (res.kkt.passes(tol)) {
    res.status = Status::Optimal;
  } else if (!converged) {
    Eigen::VectorXd rd, re, ri;
    residuals(rd, re, ri);
    double primal_viol = std::max((At * x - bt).maxCoeff(), me ? inf_norm(re) : 0.0);
    double dual_mag = std::max(inf_norm(lambda), inf_norm(nu));
    res.status = (primal_viol > 1e-6 * sc_p && dual_mag > 1e6) ? Status::Infeasible
                                                               : Status::Failed;
  } else {
    res.status = res.kkt.passes(1e-6) ? Status::Optimal : Status::Failed;
  }
  return res;
}

}  // namespace

const char* status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Failed: return "failed";
  }
  return "unknown";
}

Instance Instance::quadratic(Eigen::MatrixXd Q, Eigen::VectorXd q) {
  Instance inst;
  inst.Q = std::move(Q);
  inst.q = std::move(q);
  inst.A.resize(0, inst.Q.rows());
  inst.b.resize(0);
  inst.H.resize(0, inst.Q.rows());
  inst.g.resize(0);
  return inst;
}

double KktReport::worst() const {
  return std::max({stationarity, primal_equality, primal_inequality, dual_feasibility,
                   complementarity});
}

bool KktReport::passes(double tol) const { return worst() <= tol * scale; }

Result solve(const Instance& inst, const Options& opts) {
  const int n = inst.size();
  Eigen::MatrixXd Q = 0.5 * (inst.Q + inst.Q.transpose());
  if (opts.regularization > 0.0) Q.diagonal().array() += opts.regularization;
  Eigen::VectorXd q = inst.q.size() ? inst.q : Eigen::VectorXd::Zero(n);

  if (inst.penalty && inst.penalty->weight > 0.0) {
    if (inst.inequality_count() == 0 && inst.equality_count() == 0 && !inst.nonneg.empty()) {
      return solve_bounds_penalty(inst, opts, Q, q);
    }
    // Other shapes fold the term into the dense objective.
    Instance folded = inst;
    folded.penalty.reset();
    folded.Q = inst.Q + inst.penalty->weight *
                            (inst.penalty->rows.transpose() * inst.penalty->rows);
    folded.q = q - inst.penalty->weight *
                       (inst.penalty->rows.transpose() * inst.penalty->target);
    Result res = solve(folded, opts);
    res.objective = instance_objective(inst, res.x);
    res.kkt = kkt_check(inst, res);
    return res;
  }

  Result res;
  if (inst.inequality_count() == 0 && inst.equality_count() == 0) {
    if (inst.nonneg.empty()) {
      // Unconstrained minimum.
      Eigen::MatrixXd Qr = Q;
      Qr.diagonal().array() += 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff());
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Qr);
      res.x = ldlt.solve(-q);
      for (int r = 0; r < 2; ++r) {
        res.x += ldlt.solve(-q - Q.selfadjointView<Eigen::Lower>() * res.x);
      }
      res.ineq_duals = Eigen::VectorXd();
      res.eq_duals = Eigen::VectorXd();
      res.bound_duals = Eigen::VectorXd();
      res.objective = instance_objective(inst, res.x);
      res.iterations = 1;
      res.kkt = kkt_check(inst, res);
      res.status = res.kkt.passes(std::max(opts.tolerance, 1e-9)) ? Status::Optimal
                                                                  : Status::Failed;
      return res;
    }
    res = solve_bounds_only(inst, opts, Q, q);
    if (res.status == Status::Failed && opts.regularization == 0.0) {
      Options retry = opts;
      retry.regularization = 1e-9 * (1.0 + Q.cwiseAbs().maxCoeff());
      Eigen::MatrixXd Qr = Q;
      Qr.diagonal().array() += retry.regularization;
      res = solve_bounds_only(inst, retry, Qr, q);
      res.kkt = kkt_check(inst, res);
    }
    return res;
  }
  return solve_interior_point(inst, opts, Q, q);
}

KktReport kkt_check(const Instance& inst, const Result& res) {
  KktReport rep;
  const int n = inst.size();
  if (res.x.size() != n) return rep;
  const Eigen::VectorXd& x = res.x;
  Eigen::VectorXd lambda = res.ineq_duals.size() == inst.inequality_count()
                               ? res.ineq_duals
                               : Eigen::VectorXd::Zero(inst.inequality_count());
  Eigen::VectorXd nu = res.eq_duals.size() == inst.equality_count()
                           ? res.eq_duals
                           : Eigen::VectorXd::Zero(inst.equality_count());
  Eigen::VectorXd mu = res.bound_duals.size() == static_cast<int>(inst.nonneg.size())
                           ? res.bound_duals
                           : Eigen::VectorXd::Zero(static_cast<int>(inst.nonneg.size()));

  Eigen::MatrixXd Qs = 0.5 * (inst.Q + inst.Q.transpose());
  Eigen::VectorXd grad = Qs * x;
  if (inst.q.size()) grad += inst.q;
  if (inst.penalty) {
    // Prefer the solver-tracked product: recomputing weight * (rows x - target)
    // at large weights cancels catastrophically.
    Eigen::VectorXd y =
        res.penalty_duals.size() == inst.penalty->rows.rows()
            ? res.penalty_duals
            : Eigen::VectorXd(inst.penalty->weight *
                              (inst.penalty->rows * x - inst.penalty->target));
    grad += inst.penalty->rows.transpose() * y;
  }
  if (inst.inequality_count()) grad += inst.A.transpose() * lambda;
  if (inst.equality_count()) grad += inst.H.transpose() * nu;
  grad -= scatter(inst.nonneg, mu, n);
  rep.stationarity = inf_norm(grad);

  rep.primal_equality = inst.equality_count() ? inf_norm(inst.H * x - inst.g) : 0.0;
  double ineq_viol = 0.0;
  Eigen::VectorXd slack;
  if (inst.inequality_count()) {
    slack = inst.b - inst.A * x;
    ineq_viol = std::max(0.0, -slack.minCoeff());
  }
  double bound_viol = 0.0;
  for (int i : inst.nonneg) bound_viol = std::max(bound_viol, -x[i]);
  rep.primal_inequality = std::max(ineq_viol, bound_viol);

  double dual_viol = 0.0;
  if (lambda.size()) dual_viol = std::max(dual_viol, -lambda.minCoeff());
  if (mu.size()) dual_viol = std::max(dual_viol, -mu.minCoeff());
  rep.dual_feasibility = std::max(dual_viol, 0.0);

  double comp = 0.0;
  for (int i = 0; i < lambda.size(); ++i) comp = std::max(comp, std::abs(lambda[i] * slack[i]));
  for (size_t k = 0; k < inst.nonneg.size(); ++k) {
    comp = std::max(comp, std::abs(mu[static_cast<int>(k)] * x[inst.nonneg[k]]));
  }
  rep.complementarity = comp;

  rep.scale = 1.0 + inf_norm(x) + inf_norm(lambda) + inf_norm(nu) + inf_norm(mu) +
              inf_norm(inst.q) + inf_norm(inst.b) + inf_norm(inst.g);
  return rep;
}

}  // namespace gripopt::qp
