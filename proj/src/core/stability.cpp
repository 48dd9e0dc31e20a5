#include "core/stability.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gripopt::stab {

namespace {

constexpr double kHorizontalTangentTol = 1e-9;

double cross(const geom::Vec2& a, const geom::Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Inequality block [delta_n <= 0; -preload <= -preload_floor; friction cones]
// and equality block [equilibrium; compliance] shared by every program.
void fill_constraints(const ContactSet& contacts, const Eigen::MatrixXd& G,
                      const Eigen::MatrixXd& J, double friction, double preload_floor,
                      Eigen::MatrixXd& A, Eigen::VectorXd& b,
                      Eigen::MatrixXd& H, Eigen::VectorXd& g,
                      const Eigen::Vector3d& wrench) {
  const int nc = contacts.count();
  const int n = 5 + 2 * nc;

  A.setZero(3 * nc + 1, n);
  b.setZero(3 * nc + 1);
  for (int i = 0; i < nc; ++i) {
    // Spring compression: normal component of G'r - Jq stays nonpositive.
    A.block(i, 0, 1, 3) = G.col(2 * i).transpose();
    A.block(i, 3, 1, 2) = -J.row(2 * i);
  }
  // Squeeze preload on the selected jaw resultant.
  for (int i = 0; i < 2 * nc; ++i) A(nc, 5 + i) = -J(i, 0);
  b[nc] = -preload_floor;
  for (int i = 0; i < nc; ++i) {
    A(nc + 1 + 2 * i, 5 + 2 * i) = -friction;
    A(nc + 1 + 2 * i, 5 + 2 * i + 1) = 1.0;
    A(nc + 2 + 2 * i, 5 + 2 * i) = -friction;
    A(nc + 2 + 2 * i, 5 + 2 * i + 1) = -1.0;
  }

  H.setZero(3 + nc, n);
  g.setZero(3 + nc);
  H.block(0, 5, 3, 2 * nc) = G;
  g.head(3) = -wrench;
  for (int i = 0; i < nc; ++i) {
    H.block(3 + i, 0, 1, 3) = G.col(2 * i).transpose();
    H.block(3 + i, 3, 1, 2) = -J.row(2 * i);
    H(3 + i, 5 + 2 * i) = 1.0;
  }
}

ContactSet contact_set_at(const ProblemSpec& problem, int object,
                          const geom::ObjectConfig& oc, const std::vector<double>& coords) {
  const ObjectSpec& obj = problem.objects[object];
  ContactSet set;
  int local = 0;
  for (const ContactSpec& c : problem.contacts) {
    if (c.object != object) continue;
    geom::ContactFrame f = geom::contact_geometry(obj.shape, obj.world_pose, c.edge,
                                                  coords[local], oc, geom::Jaw::Left);
    // Positions relative to the object origin; identical in both jaw frames.
    geom::Transform2 t = compose(geom::world_to_jaw(oc, geom::Jaw::Left), obj.world_pose);
    f.position -= t.apply(obj.shape.origin);
    set.frames.push_back(f);
    set.jaws.push_back(c.jaw);
    ++local;
  }
  return set;
}

}  // namespace

ContactSet contact_set(const ProblemSpec& problem, int object, const ConfigVars& config) {
  return contact_set_at(problem, object, config.object_config[object],
                        config.contact_coords[object]);
}

Eigen::MatrixXd grasp_matrix(const ContactSet& contacts) {
  const int nc = contacts.count();
  Eigen::MatrixXd G(3, 2 * nc);
  for (int i = 0; i < nc; ++i) {
    const geom::ContactFrame& f = contacts.frames[i];
    G.col(2 * i) << f.normal.x(), f.normal.y(), cross(f.position, f.normal);
    G.col(2 * i + 1) << f.tangent.x(), f.tangent.y(), cross(f.position, f.tangent);
  }
  return G;
}

Eigen::MatrixXd hand_jacobian(const ContactSet& contacts) {
  const int nc = contacts.count();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * nc, 2);
  for (int i = 0; i < nc; ++i) {
    int col = contacts.jaws[i] == geom::Jaw::Left ? 0 : 1;
    J(2 * i, col) = contacts.frames[i].normal.x();
    J(2 * i + 1, col) = contacts.frames[i].tangent.x();
  }
  return J;
}

GraspProgram assemble_single(const ContactSet& contacts, double length_scale,
                             const Eigen::Vector3d& wrench, double friction) {
  GraspProgram prog;
  prog.contact_count = contacts.count();
  prog.length_scale = length_scale;
  const int n = prog.variable_count();

  Eigen::MatrixXd G = grasp_matrix(contacts);
  Eigen::MatrixXd J = hand_jacobian(contacts);

  prog.Q = Eigen::MatrixXd::Zero(n, n);
  double inv = 1.0 / (length_scale * length_scale);
  for (int i = 0; i < 5; ++i) prog.Q(i, i) = inv;

  fill_constraints(contacts, G, J, friction, 0.0, prog.A, prog.b, prog.H, prog.g, wrench);
  return prog;
}

ConsolidatedStability consolidate_stability(const ProblemSpec& problem,
                                            const ConfigVars& config) {
  const int no = problem.object_count();
  std::vector<GraspProgram> progs(no);
  int vars = 0, ineq = 0, eq = 0;
  for (int k = 0; k < no; ++k) {
    ContactSet set = contact_set(problem, k, config);
    progs[k] = assemble_single(set, problem.characteristic_length(k),
                               Eigen::Vector3d{0.0, 0.0, 1.0}, problem.params.friction);
    vars += progs[k].variable_count();
    ineq += static_cast<int>(progs[k].A.rows());
    eq += static_cast<int>(progs[k].H.rows());
  }

  ConsolidatedStability out;
  out.Q = Eigen::MatrixXd::Zero(2 * vars, 2 * vars);
  out.A = Eigen::MatrixXd::Zero(2 * ineq, 2 * vars);
  out.b = Eigen::VectorXd::Zero(2 * ineq);
  out.H = Eigen::MatrixXd::Zero(2 * eq, 2 * vars);
  out.g = Eigen::VectorXd::Zero(2 * eq);

  int v = 0, a = 0, h = 0;
  for (int sign = 0; sign < 2; ++sign) {
    for (int k = 0; k < no; ++k) {
      const GraspProgram& p = progs[k];
      int nv = p.variable_count();
      int na = static_cast<int>(p.A.rows());
      int nh = static_cast<int>(p.H.rows());
      out.Q.block(v, v, nv, nv) = p.Q;
      out.A.block(a, v, na, nv) = p.A;
      out.b.segment(a, na) = p.b;
      out.H.block(h, v, nh, nv) = p.H;
      out.g.segment(h, nh) = p.g;
      if (sign == 1) out.g.segment(h, 3) = -out.g.segment(h, 3);  // flip the wrench rows

      ConsolidatedStability::Block blk;
      blk.object = k;
      blk.wrench_sign = sign == 0 ? +1 : -1;
      blk.var_begin = v;
      blk.var_count = nv;
      blk.ineq_begin = a;
      blk.ineq_count = na;
      blk.eq_begin = h;
      blk.eq_count = nh;
      out.blocks.push_back(blk);

      v += nv;
      a += na;
      h += nh;
    }
  }
  return out;
}

QualityBreakdown grasp_quality(const ProblemSpec& problem, const ConfigVars& config) {
  ConsolidatedStability cs = consolidate_stability(problem, config);
  qp::Instance inst;
  inst.Q = cs.Q;
  inst.q = Eigen::VectorXd::Zero(cs.variable_count());
  inst.A = cs.A;
  inst.b = cs.b;
  inst.H = cs.H;
  inst.g = cs.g;

  qp::Options opts;
  opts.regularization = problem.params.qp_regularization;
  qp::Result sol = qp::solve(inst, opts);

  QualityBreakdown out;
  out.status = sol.status;
  out.feasible = sol.status == qp::Status::Optimal;
  out.kkt = sol.kkt;
  if (!out.feasible) return out;

  out.total = sol.objective;
  out.solution = sol.x;
  out.per_object.assign(problem.object_count(), {0.0, 0.0});
  for (const auto& blk : cs.blocks) {
    Eigen::VectorXd u = sol.x.segment(blk.var_begin, blk.var_count);
    double L = problem.characteristic_length(blk.object);
    double cost = (u.head(5).squaredNorm()) / (2.0 * L * L);
    out.per_object[blk.object][blk.wrench_sign > 0 ? 0 : 1] = cost;
  }
  return out;
}

bool squeeze_feasible(const ProblemSpec& problem, int object, double gripper_angle) {
  geom::ObjectConfig oc;
  oc.gripper_angle = gripper_angle;
  std::vector<double> coords(problem.contacts_by_object()[object].size(), 0.5);
  ContactSet set = contact_set_at(problem, object, oc, coords);
  for (const geom::ContactFrame& f : set.frames) {
    if (std::abs(f.tangent.y()) < kHorizontalTangentTol) return false;
  }

  const int n = 5 + 2 * set.count();
  Eigen::MatrixXd G = grasp_matrix(set);
  Eigen::MatrixXd J = hand_jacobian(set);
  qp::Instance inst;
  inst.Q = 1e-4 * Eigen::MatrixXd::Identity(n, n);  // feasibility query only
  inst.q = Eigen::VectorXd::Zero(n);
  fill_constraints(set, G, J, problem.params.friction, 1.0, inst.A, inst.b, inst.H, inst.g,
                   Eigen::Vector3d::Zero());
  qp::Result sol = qp::solve(inst);
  return sol.status == qp::Status::Optimal;
}

ThetaScan theta_bounds(const ProblemSpec& problem, int object) {
  using std::numbers::pi;
  const double step = pi / 180.0;
  const double refine = 0.05 * pi / 180.0;

  // Tangent vertical-component signs at the reference angle; a sign change
  // along the scan brackets a horizontal tangent.
  auto tangent_signs = [&](double theta) {
    geom::ObjectConfig oc;
    oc.gripper_angle = theta;
    std::vector<double> coords(problem.contacts_by_object()[object].size(), 0.5);
    ContactSet set = contact_set_at(problem, object, oc, coords);
    std::vector<int> signs;
    signs.reserve(set.frames.size());
    for (const geom::ContactFrame& f : set.frames) {
      signs.push_back(f.tangent.y() > 0.0 ? 1 : -1);
    }
    return signs;
  };

  double seed = 0.0;
  bool found = false;
  for (int k = 0; k <= 180 && !found; ++k) {
    for (int s : {+1, -1}) {
      if (k == 0 && s < 0) continue;
      double theta = s * k * step;
      if (squeeze_feasible(problem, object, theta)) {
        seed = theta;
        found = true;
        break;
      }
    }
  }
  if (!found) {
    throw std::runtime_error(
        "theta_bounds: no orientation admits a squeeze; the contact assignment "
        "cannot yield a preloaded grasp");
  }

  std::vector<int> seed_signs = tangent_signs(seed);
  auto good = [&](double theta) {
    return squeeze_feasible(problem, object, theta) && tangent_signs(theta) == seed_signs;
  };

  ThetaScan out;
  out.seed = seed;

  auto scan = [&](double direction) {
    double last_good = seed;
    for (int k = 1; k <= 360; ++k) {
      double theta = seed + direction * k * step;
      if (good(theta)) {
        last_good = theta;
        continue;
      }
      double lo = last_good;
      double hi = theta;
      while (std::abs(hi - lo) > refine) {
        double mid = 0.5 * (lo + hi);
        if (good(mid)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return lo;
    }
    out.full_circle = true;
    return seed + direction * pi;
  };

  out.high = scan(+1.0);
  out.low = scan(-1.0);
  return out;
}

}  // namespace gripopt::stab
