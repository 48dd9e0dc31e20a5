#include "core/svg_render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gripopt::render {

namespace {

constexpr const char* kLeftColor = "#d62728";
constexpr const char* kRightColor = "#ff8c00";
constexpr const char* kEnvelopeColor = "#ff00ff";
constexpr const char* kObjectFill = "#d8d8d8";
constexpr const char* kObjectStroke = "#404040";
constexpr const char* kObstacleFill = "#a8a8a8";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8g", v);
  return buf;
}

struct Box {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  }
  bool empty() const { return !(max_x >= min_x); }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

// Collects elements in model coordinates; the vertical axis is flipped when
// the document is assembled.
class SvgBuilder {
 public:
  void polygon(const std::vector<geom::Vec2>& pts, const std::string& cls,
               const std::string& fill, const std::string& stroke) {
    body_ << "<polygon class=\"" << cls << "\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
      if (i) body_ << " ";
      body_ << fmt(pts[i].x()) << "," << fmt(-pts[i].y());
      box_.add(pts[i].x(), -pts[i].y());
    }
    body_ << "\" fill=\"" << fill << "\" stroke=\"" << stroke
          << "\" stroke-width=\"" << fmt(stroke_width_) << "\"/>\n";
  }

  void path(const std::vector<geom::Vec2>& pts, const std::string& cls,
            const std::string& stroke, double width_scale = 1.0) {
    if (pts.size() < 2) return;
    body_ << "<path class=\"" << cls << "\" d=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
      body_ << (i == 0 ? "M" : " L") << fmt(pts[i].x()) << " " << fmt(-pts[i].y());
      box_.add(pts[i].x(), -pts[i].y());
    }
    body_ << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(stroke_width_ * width_scale) << "\"/>\n";
  }

  void polyline(const std::vector<geom::Vec2>& pts, const std::string& cls,
                const std::string& stroke) {
    if (pts.size() < 2) return;
    body_ << "<polyline class=\"" << cls << "\" points=\"";
    for (size_t i = 0; i < pts.size(); ++i) {
      if (i) body_ << " ";
      body_ << fmt(pts[i].x()) << "," << fmt(-pts[i].y());
      box_.add(pts[i].x(), -pts[i].y());
    }
    body_ << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(stroke_width_) << "\" stroke-dasharray=\"" << fmt(4 * stroke_width_) << " "
          << fmt(2 * stroke_width_) << "\"/>\n";
  }

  void circle(const geom::Vec2& c, double r, const std::string& cls, const std::string& fill) {
    body_ << "<circle class=\"" << cls << "\" cx=\"" << fmt(c.x()) << "\" cy=\""
          << fmt(-c.y()) << "\" r=\"" << fmt(r) << "\" fill=\"" << fill << "\"/>\n";
    box_.add(c.x() - r, -c.y() - r);
    box_.add(c.x() + r, -c.y() + r);
  }

  void set_stroke_width(double w) { stroke_width_ = w; }

  std::string finish() const {
    Box b = box_;
    if (b.empty()) b = Box{0, 0, 1, 1};
    double pad = 0.05 * std::max({b.width(), b.height(), 1e-6});
    double x = b.min_x - pad;
    double y = b.min_y - pad;
    double w = b.width() + 2 * pad;
    double h = b.height() + 2 * pad;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" "
        << "height=\"" << fmt(std::round(640.0 * h / w)) << "\" viewBox=\"" << fmt(x) << " "
        << fmt(y) << " " << fmt(w) << " " << fmt(h) << "\">\n";
    out << body_.str();
    out << "</svg>\n";
    return out.str();
  }

 private:
  std::ostringstream body_;
  Box box_;
  double stroke_width_ = 0.01;
};

std::vector<geom::Vec2> sample_surface(const shape::SurfaceParams& surface, geom::Jaw jaw,
                                       double x_offset = 0.0) {
  std::vector<geom::Vec2> pts;
  const int per_interval = 8;
  for (int i = 0; i < surface.interval_count(); ++i) {
    for (int s = 0; s < per_interval; ++s) {
      double y = surface.grid[i] +
                 (surface.grid[i + 1] - surface.grid[i]) * static_cast<double>(s) / per_interval;
      if (i == 0 && s == 0) y = surface.grid.front() + 1e-12;
      pts.push_back({shape::hermite_position(surface, jaw, y) + x_offset, y});
    }
  }
  double y_end = surface.grid.back();
  pts.push_back({shape::hermite_position(surface, jaw, y_end) + x_offset, y_end});
  return pts;
}

geom::Transform2 inverse(const geom::Transform2& t) {
  geom::Transform2 inv;
  inv.angle = -t.angle;
  inv.translation = -inv.rotate(t.translation);
  return inv;
}

double contact_marker_radius(const ProblemSpec& problem) {
  return 0.02 * std::max(1.0, problem.scene_radius());
}

double scene_stroke_width(const ProblemSpec& problem) {
  return 0.005 * std::max(1.0, problem.scene_radius());
}

void draw_jaw_panel(SvgBuilder& svg, const io::SolutionRecord& record, geom::Jaw jaw,
                    double dx, bool with_envelope) {
  const ProblemSpec& problem = record.problem;
  const char* color = jaw == geom::Jaw::Left ? kLeftColor : kRightColor;

  for (int k = 0; k < problem.object_count(); ++k) {
    const ObjectSpec& obj = problem.objects[k];
    geom::Transform2 t = compose(geom::world_to_jaw(record.config.object_config[k], jaw),
                                 obj.world_pose);
    geom::Polygon shape = geom::transformed(obj.shape, t);
    for (geom::Vec2& v : shape.vertices) v.x() += dx;
    svg.polygon(shape.vertices, "object", kObjectFill, kObjectStroke);
    for (const geom::Polygon& ob : obj.obstacles) {
      geom::Polygon o = geom::transformed(ob, t);
      for (geom::Vec2& v : o.vertices) v.x() += dx;
      svg.polygon(o.vertices, "obstacle", kObstacleFill, kObjectStroke);
    }
  }

  for (const shape::ShapeContact& c :
       shape::gripper_frame_contacts(problem, record.config)) {
    if (c.jaw != jaw) continue;
    geom::Vec2 p = c.frame.position;
    p.x() += dx;
    svg.circle(p, contact_marker_radius(problem),
               jaw == geom::Jaw::Left ? "contact contact-left" : "contact contact-right",
               color);
  }

  if (record.surface.point_count() >= 2) {
    svg.path(sample_surface(record.surface, jaw, dx),
             jaw == geom::Jaw::Left ? "surface surface-left" : "surface surface-right", color,
             1.6);
  }

  if (with_envelope && record.surface.point_count() >= 2) {
    const std::vector<double>& grid = record.surface.grid;
    std::vector<double> bounds =
        jaw == geom::Jaw::Left
            ? geom::sweep_upper_bounds(
                  shape::gripper_frame_shapes(problem, record.config, geom::Jaw::Left), grid)
            : geom::sweep_lower_bounds(
                  shape::gripper_frame_shapes(problem, record.config, geom::Jaw::Right), grid);
    std::vector<geom::Vec2> run;
    const char* cls =
        jaw == geom::Jaw::Left ? "envelope envelope-upper" : "envelope envelope-lower";
    for (size_t i = 0; i < grid.size(); ++i) {
      if (std::isfinite(bounds[i])) {
        run.push_back({bounds[i] + dx, grid[i]});
      } else {
        svg.polyline(run, cls, kEnvelopeColor);
        run.clear();
      }
    }
    svg.polyline(run, cls, kEnvelopeColor);
  }
}

double panel_extent(const io::SolutionRecord& record, geom::Jaw jaw) {
  double max_x = 1.0;
  for (int k = 0; k < record.problem.object_count(); ++k) {
    const ObjectSpec& obj = record.problem.objects[k];
    geom::Transform2 t = compose(geom::world_to_jaw(record.config.object_config[k], jaw),
                                 obj.world_pose);
    geom::Polygon shape = geom::transformed(obj.shape, t);
    for (const geom::Vec2& v : shape.vertices) max_x = std::max(max_x, std::abs(v.x()));
    for (const geom::Polygon& ob : obj.obstacles) {
      geom::Polygon o = geom::transformed(ob, t);
      for (const geom::Vec2& v : o.vertices) max_x = std::max(max_x, std::abs(v.x()));
    }
  }
  return max_x;
}

Document render_panels(const io::SolutionRecord& record, bool with_envelope) {
  SvgBuilder svg;
  svg.set_stroke_width(scene_stroke_width(record.problem));
  double extent = std::max(panel_extent(record, geom::Jaw::Left),
                           panel_extent(record, geom::Jaw::Right));
  double dx = 2.6 * extent;
  draw_jaw_panel(svg, record, geom::Jaw::Left, 0.0, with_envelope);
  draw_jaw_panel(svg, record, geom::Jaw::Right, dx, with_envelope);
  Document doc;
  doc.name = with_envelope ? "sweep.svg" : "gripper_frames.svg";
  doc.content = svg.finish();
  return doc;
}

Document render_grasp(const io::SolutionRecord& record, int k) {
  const ProblemSpec& problem = record.problem;
  const ObjectSpec& obj = problem.objects[k];
  const geom::ObjectConfig& oc = record.config.object_config[k];

  SvgBuilder svg;
  svg.set_stroke_width(scene_stroke_width(problem));

  geom::Polygon world_shape = geom::transformed(obj.shape, obj.world_pose);
  svg.polygon(world_shape.vertices, "object", kObjectFill, kObjectStroke);
  for (const geom::Polygon& ob : obj.obstacles) {
    svg.polygon(geom::transformed(ob, obj.world_pose).vertices, "obstacle", kObstacleFill,
                kObjectStroke);
  }

  geom::Transform2 left_to_world = inverse(geom::world_to_jaw(oc, geom::Jaw::Left));
  for (geom::Jaw jaw : {geom::Jaw::Left, geom::Jaw::Right}) {
    if (record.surface.point_count() < 2) continue;
    double offset = jaw == geom::Jaw::Right ? oc.jaw_opening : 0.0;
    std::vector<geom::Vec2> pts = sample_surface(record.surface, jaw, offset);
    for (geom::Vec2& p : pts) p = left_to_world.apply(p);
    svg.path(pts, jaw == geom::Jaw::Left ? "surface surface-left" : "surface surface-right",
             jaw == geom::Jaw::Left ? kLeftColor : kRightColor, 1.6);
  }

  for (const shape::ShapeContact& c : shape::gripper_frame_contacts(problem, record.config)) {
    if (c.object != k) continue;
    geom::Vec2 p = c.frame.position;
    if (c.jaw == geom::Jaw::Right) p.x() += oc.jaw_opening;  // into the left frame
    p = left_to_world.apply(p);
    svg.circle(p, contact_marker_radius(problem),
               c.jaw == geom::Jaw::Left ? "contact contact-left" : "contact contact-right",
               c.jaw == geom::Jaw::Left ? kLeftColor : kRightColor);
  }

  Document doc;
  doc.name = "grasp_" + obj.name + ".svg";
  doc.content = svg.finish();
  return doc;
}

}  // namespace

std::optional<Mode> parse_mode(const std::string& name) {
  if (name == "gripper_frames") return Mode::GripperFrames;
  if (name == "grasp") return Mode::Grasp;
  if (name == "sweep") return Mode::Sweep;
  return std::nullopt;
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::GripperFrames: return "gripper_frames";
    case Mode::Grasp: return "grasp";
    case Mode::Sweep: return "sweep";
  }
  return "unknown";
}

std::vector<Document> render(const io::SolutionRecord& record, Mode mode) {
  std::vector<Document> docs;
  switch (mode) {
    case Mode::GripperFrames:
      docs.push_back(render_panels(record, false));
      break;
    case Mode::Sweep:
      docs.push_back(render_panels(record, true));
      break;
    case Mode::Grasp:
      for (int k = 0; k < record.problem.object_count(); ++k) {
        docs.push_back(render_grasp(record, k));
      }
      break;
  }
  return docs;
}

}  // namespace gripopt::render
