#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gripopt::geom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Proper or improper intersection of segments [a,b] and [c,d].
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    double v = cross(q - p, r - p);
    if (v > 1e-14) return 1;
    if (v < -1e-14) return -1;
    return 0;
  };
  int o1 = orient(a, b, c);
  int o2 = orient(a, b, d);
  int o3 = orient(c, d, a);
  int o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  auto on_segment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x(), q.x()) - 1e-14 <= r.x() && r.x() <= std::max(p.x(), q.x()) + 1e-14 &&
           std::min(p.y(), q.y()) - 1e-14 <= r.y() && r.y() <= std::max(p.y(), q.y()) + 1e-14;
  };
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

Vec2 Transform2::rotate(const Vec2& p) const {
  double c = std::cos(angle);
  double s = std::sin(angle);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

Vec2 Transform2::apply(const Vec2& p) const { return rotate(p) + translation; }

Transform2 compose(const Transform2& outer, const Transform2& inner) {
  Transform2 t;
  t.angle = outer.angle + inner.angle;
  t.translation = outer.rotate(inner.translation) + outer.translation;
  return t;
}

const Vec2& Polygon::vertex(int i) const {
  int n = vertex_count();
  int m = ((i % n) + n) % n;
  return vertices[static_cast<size_t>(m)];
}

std::pair<Vec2, Vec2> Polygon::edge(int e) const { return {vertex(e), vertex(e + 1)}; }

double Polygon::signed_area() const {
  double acc = 0.0;
  int n = vertex_count();
  for (int i = 0; i < n; ++i) {
    acc += cross(vertex(i), vertex(i + 1));
  }
  return 0.5 * acc;
}

bool Polygon::is_simple() const {
  int n = vertex_count();
  if (n < 3) return false;
  for (int i = 0; i < n; ++i) {
    auto [a, b] = edge(i);
    if ((b - a).norm() <= 1e-14) return false;
    for (int j = i + 1; j < n; ++j) {
      // Skip edges sharing a vertex.
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      auto [c, d] = edge(j);
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

bool Polygon::contains(const Vec2& p) const {
  bool inside = false;
  int n = vertex_count();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = vertex(i);
    const Vec2& b = vertex(i + 1);
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      double x_int = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x_int) inside = !inside;
    }
  }
  return inside;
}

double Polygon::max_radius() const {
  double r = 0.0;
  for (const Vec2& v : vertices) r = std::max(r, (v - origin).norm());
  return r;
}

Transform2 world_to_jaw(const ObjectConfig& config, Jaw jaw) {
  Transform2 t;
  t.angle = -config.gripper_angle;
  t.translation = -t.rotate(config.gripper_position);
  if (jaw == Jaw::Right) t.translation.x() -= config.jaw_opening;
  return t;
}

Polygon transformed(const Polygon& poly, const Transform2& t) {
  Polygon out;
  out.vertices.reserve(poly.vertices.size());
  for (const Vec2& v : poly.vertices) out.vertices.push_back(t.apply(v));
  out.origin = t.apply(poly.origin);
  return out;
}

Polygon to_gripper_frame(const Polygon& model, const Transform2& world_pose,
                         const ObjectConfig& config, Jaw jaw) {
  return transformed(model, compose(world_to_jaw(config, jaw), world_pose));
}

ContactFrame contact_geometry(const Polygon& model, const Transform2& world_pose,
                              int edge, double edge_coord,
                              const ObjectConfig& config, Jaw jaw) {
  auto [a, b] = model.edge(edge);
  Vec2 dir = b - a;
  double len = dir.norm();
  if (len <= 1e-14) throw std::invalid_argument("contact_geometry: degenerate edge");
  Vec2 tangent_model = dir / len;
  // Perpendicular pointing into the material, resolved by testing a point
  // just inside from the edge midpoint.
  Vec2 normal_model{-tangent_model.y(), tangent_model.x()};
  Vec2 mid = 0.5 * (a + b);
  double probe = 1e-7 * std::max(1.0, model.max_radius());
  if (!model.contains(mid + probe * normal_model)) normal_model = -normal_model;

  Vec2 p_model = (1.0 - edge_coord) * a + edge_coord * b;
  Transform2 t = compose(world_to_jaw(config, jaw), world_pose);
  ContactFrame f;
  f.position = t.apply(p_model);
  f.tangent = t.rotate(tangent_model);
  f.normal = t.rotate(normal_model);
  return f;
}

double characteristic_length(const Polygon& model, const std::vector<int>& contacted_edges) {
  if (contacted_edges.empty()) {
    throw std::invalid_argument("characteristic_length: no contacted edges");
  }
  std::vector<int> edges = contacted_edges;
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  double acc = 0.0;
  for (int e : edges) {
    auto [a, b] = model.edge(e);
    acc += (a - model.origin).norm() + (b - model.origin).norm();
  }
  return acc / (2.0 * static_cast<double>(edges.size()));
}

double signed_distance(const Vec2& p, const Polygon& poly) {
  double d = kInf;
  int n = poly.vertex_count();
  for (int i = 0; i < n; ++i) {
    auto [a, b] = poly.edge(i);
    d = std::min(d, point_segment_distance(p, a, b));
  }
  return poly.contains(p) ? -d : d;
}

namespace {

// All x coordinates where the closed polygon meets the horizontal line at y.
template <typename Reduce>
std::optional<double> cross_section_extreme(const Polygon& poly, double y, Reduce reduce) {
  std::optional<double> best;
  auto consider = [&](double x) {
    if (!best || reduce(x, *best)) best = x;
  };
  int n = poly.vertex_count();
  for (int i = 0; i < n; ++i) {
    auto [a, b] = poly.edge(i);
    if (a.y() == b.y()) {
      if (a.y() == y) {
        consider(a.x());
        consider(b.x());
      }
      continue;
    }
    double t = (y - a.y()) / (b.y() - a.y());
    if (t >= 0.0 && t <= 1.0) consider(a.x() + t * (b.x() - a.x()));
  }
  return best;
}

}  // namespace

std::optional<double> cross_section_min_x(const Polygon& poly, double y) {
  return cross_section_extreme(poly, y, [](double a, double b) { return a < b; });
}

std::optional<double> cross_section_max_x(const Polygon& poly, double y) {
  return cross_section_extreme(poly, y, [](double a, double b) { return a > b; });
}

std::vector<double> sweep_upper_bounds(const std::vector<Polygon>& shapes_left_frame,
                                       const std::vector<double>& grid) {
  std::vector<double> bounds(grid.size(), kInf);
  for (size_t i = 0; i < grid.size(); ++i) {
    for (const Polygon& poly : shapes_left_frame) {
      if (auto x = cross_section_min_x(poly, grid[i])) bounds[i] = std::min(bounds[i], *x);
    }
  }
  return bounds;
}

std::vector<double> sweep_lower_bounds(const std::vector<Polygon>& shapes_right_frame,
                                       const std::vector<double>& grid) {
  std::vector<double> bounds(grid.size(), -kInf);
  for (size_t i = 0; i < grid.size(); ++i) {
    for (const Polygon& poly : shapes_right_frame) {
      if (auto x = cross_section_max_x(poly, grid[i])) bounds[i] = std::max(bounds[i], *x);
    }
  }
  return bounds;
}

}  // namespace gripopt::geom
