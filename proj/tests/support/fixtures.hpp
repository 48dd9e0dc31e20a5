#pragma once

#include "core/problem.hpp"

namespace fixtures {

inline gripopt::geom::Polygon box(double cx, double cy, double hx, double hy) {
  gripopt::geom::Polygon poly;
  poly.vertices = {{cx - hx, cy - hy}, {cx + hx, cy - hy}, {cx + hx, cy + hy},
                   {cx - hx, cy + hy}};
  return poly;
}

// Unit square centered at the origin; edge 1 is the right side, edge 3 the left.
inline gripopt::geom::Polygon unit_square() { return box(0.0, 0.0, 1.0, 1.0); }

inline gripopt::ProblemSpec square_problem() {
  gripopt::ProblemSpec spec;
  gripopt::ObjectSpec obj;
  obj.name = "square";
  obj.shape = unit_square();
  spec.objects.push_back(obj);
  spec.contacts.push_back({0, 3, gripopt::geom::Jaw::Left});
  spec.contacts.push_back({0, 1, gripopt::geom::Jaw::Right});
  spec.params.grid_intervals = 12;
  spec.params.grid_low = -1.2;
  spec.params.grid_high = 1.2;
  spec.params.starts = 4;
  spec.params.iterations = 14;
  spec.params.descent_iterations = 12;
  spec.params.top_candidates = 2;
  return spec;
}

inline gripopt::ProblemSpec two_rectangles() {
  gripopt::ProblemSpec spec;
  {
    gripopt::ObjectSpec obj;
    obj.name = "wide";
    obj.shape = box(0.0, 0.0, 1.0, 0.25);
    spec.objects.push_back(obj);
  }
  {
    gripopt::ObjectSpec obj;
    obj.name = "narrow";
    obj.shape = box(0.0, 0.0, 0.55, 0.2);
    spec.objects.push_back(obj);
  }
  spec.contacts.push_back({0, 3, gripopt::geom::Jaw::Left});
  spec.contacts.push_back({0, 1, gripopt::geom::Jaw::Right});
  spec.contacts.push_back({1, 3, gripopt::geom::Jaw::Left});
  spec.contacts.push_back({1, 1, gripopt::geom::Jaw::Right});
  spec.params.grid_intervals = 16;
  spec.params.grid_low = -1.2;
  spec.params.grid_high = 1.2;
  spec.params.position_bound_y = 0.5;
  spec.params.starts = 8;
  spec.params.iterations = 30;
  spec.params.top_candidates = 3;
  return spec;
}

inline gripopt::ConfigVars default_config(const gripopt::ProblemSpec& spec) {
  gripopt::ConfigVars config;
  config.object_config.resize(spec.object_count());
  auto by_object = spec.contacts_by_object();
  config.contact_coords.resize(spec.object_count());
  for (int k = 0; k < spec.object_count(); ++k) {
    config.contact_coords[k].assign(by_object[k].size(), 0.5);
    config.object_config[k].jaw_opening = 0.0;
  }
  return config;
}

}  // namespace fixtures
