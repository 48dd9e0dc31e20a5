#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace gripopt::geom {

using Vec2 = Eigen::Vector2d;

enum class Jaw { Left, Right };

inline const char* jaw_name(Jaw j) { return j == Jaw::Left ? "L" : "R"; }

// Rigid planar transform, p -> R(angle) p + translation.
struct Transform2 {
  Vec2 translation{0.0, 0.0};
  double angle = 0.0;

  Vec2 rotate(const Vec2& p) const;
  Vec2 apply(const Vec2& p) const;
};

// outer(inner(p))
Transform2 compose(const Transform2& outer, const Transform2& inner);

struct Polygon {
  std::vector<Vec2> vertices;  // counter-clockwise
  Vec2 origin{0.0, 0.0};       // wrench reference point

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  const Vec2& vertex(int i) const;  // index taken modulo the vertex count
  std::pair<Vec2, Vec2> edge(int e) const;

  double signed_area() const;
  bool is_counter_clockwise() const { return signed_area() > 0.0; }
  bool is_simple() const;
  bool contains(const Vec2& p) const;  // crossing-number test
  double max_radius() const;           // max vertex distance from the origin
};

// Per-object gripper placement: jaw frames share the orientation, the right
// frame sits jaw_opening further along the closing (+x) axis.
struct ObjectConfig {
  Vec2 gripper_position{0.0, 0.0};
  double gripper_angle = 0.0;
  double jaw_opening = 0.0;
};

// Transform taking world coordinates into the requested jaw frame.
Transform2 world_to_jaw(const ObjectConfig& config, Jaw jaw);

Polygon transformed(const Polygon& poly, const Transform2& t);

// Object model coordinates -> jaw frame for this object's grasp.
Polygon to_gripper_frame(const Polygon& model, const Transform2& world_pose,
                         const ObjectConfig& config, Jaw jaw);

struct ContactFrame {
  Vec2 position;  // jaw frame
  Vec2 tangent;   // unit, along the contacted edge
  Vec2 normal;    // unit, pointing into the object material
};

// Contact point at normalized coordinate edge_coord in [0, 1] along the edge.
ContactFrame contact_geometry(const Polygon& model, const Transform2& world_pose,
                              int edge, double edge_coord,
                              const ObjectConfig& config, Jaw jaw);

// Mean distance from the object origin to the endpoint vertices of the
// contacted edges (each distinct edge counted once).
double characteristic_length(const Polygon& model, const std::vector<int>& contacted_edges);

// Negative inside, positive outside, zero on the boundary.
double signed_distance(const Vec2& p, const Polygon& poly);

// Extreme x coordinates of the polygon's cross-section at height y.
// The polygon is treated as a closed set: a vertex on the line counts.
std::optional<double> cross_section_min_x(const Polygon& poly, double y);
std::optional<double> cross_section_max_x(const Polygon& poly, double y);

// Non-penetration envelopes for horizontally closing jaws: at each grid
// height, the tightest cross-section bound over all shapes.  Heights that
// intersect nothing yield +inf (upper) / -inf (lower).
std::vector<double> sweep_upper_bounds(const std::vector<Polygon>& shapes_left_frame,
                                       const std::vector<double>& grid);
std::vector<double> sweep_lower_bounds(const std::vector<Polygon>& shapes_right_frame,
                                       const std::vector<double>& grid);

}  // namespace gripopt::geom
