#include "core/problem_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gripopt::io {

using nlohmann::json;

namespace {

constexpr const char* kProblemSchema = "gripperopt-problem";
constexpr int kProblemVersion = 1;

[[noreturn]] void fail(LoadErrorKind kind, const std::string& message) {
  throw LoadError(kind, message);
}

geom::Vec2 parse_vec2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(LoadErrorKind::Parse, where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<geom::Vec2> parse_vertices(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() < 3) {
    fail(LoadErrorKind::Validation, where + ": a polygon needs at least 3 vertices");
  }
  std::vector<geom::Vec2> out;
  for (size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_vec2(j[i], where + " vertex " + std::to_string(i)));
  }
  return out;
}

geom::Polygon parse_polygon(const json& vertices, const json* origin, const std::string& where,
                            std::vector<std::string>& warnings) {
  geom::Polygon poly;
  poly.vertices = parse_vertices(vertices, where);
  if (origin) poly.origin = parse_vec2(*origin, where + " origin");
  if (!poly.is_counter_clockwise()) {
    std::reverse(poly.vertices.begin(), poly.vertices.end());
    warnings.push_back(where + ": clockwise winding reversed");
  }
  if (!poly.is_simple()) {
    fail(LoadErrorKind::Validation, where + ": polygon is degenerate or self-intersecting");
  }
  return poly;
}

struct ParamAccessor {
  const char* name;
  double (*get)(const Params&);
  void (*set)(Params&, double);
};

constexpr ParamAccessor kParamTable[] = {
    {"friction", [](const Params& p) { return p.friction; },
     [](Params& p, double v) { p.friction = v; }},
    {"penalty_growth", [](const Params& p) { return p.penalty_growth; },
     [](Params& p, double v) { p.penalty_growth = v; }},
    {"shape_constraint_weight", [](const Params& p) { return p.shape_row_weight; },
     [](Params& p, double v) { p.shape_row_weight = v; }},
    {"curvature_sigma", [](const Params& p) { return p.curvature_sigma; },
     [](Params& p, double v) { p.curvature_sigma = v; }},
    {"path_weight", [](const Params& p) { return p.weight_path; },
     [](Params& p, double v) { p.weight_path = v; }},
    {"curvature_weight", [](const Params& p) { return p.weight_curvature; },
     [](Params& p, double v) { p.weight_curvature = v; }},
    {"penalty_initial", [](const Params& p) { return p.penalty_initial; },
     [](Params& p, double v) { p.penalty_initial = v; }},
    {"iterations", [](const Params& p) { return static_cast<double>(p.iterations); },
     [](Params& p, double v) { p.iterations = static_cast<int>(std::llround(v)); }},
    {"grid_intervals", [](const Params& p) { return static_cast<double>(p.grid_intervals); },
     [](Params& p, double v) { p.grid_intervals = static_cast<int>(std::llround(v)); }},
    {"grid_low", [](const Params& p) { return p.grid_low; },
     [](Params& p, double v) { p.grid_low = v; }},
    {"grid_high", [](const Params& p) { return p.grid_high; },
     [](Params& p, double v) { p.grid_high = v; }},
    {"position_bound_x", [](const Params& p) { return p.position_bound_x; },
     [](Params& p, double v) { p.position_bound_x = v; }},
    {"position_bound_y", [](const Params& p) { return p.position_bound_y; },
     [](Params& p, double v) { p.position_bound_y = v; }},
    {"opening_low", [](const Params& p) { return p.opening_low; },
     [](Params& p, double v) { p.opening_low = v; }},
    {"opening_high", [](const Params& p) { return p.opening_high; },
     [](Params& p, double v) { p.opening_high = v; }},
    {"contact_low", [](const Params& p) { return p.contact_low; },
     [](Params& p, double v) { p.contact_low = v; }},
    {"contact_high", [](const Params& p) { return p.contact_high; },
     [](Params& p, double v) { p.contact_high = v; }},
    {"starts", [](const Params& p) { return static_cast<double>(p.starts); },
     [](Params& p, double v) { p.starts = static_cast<int>(std::llround(v)); }},
    {"seed", [](const Params& p) { return static_cast<double>(p.seed); },
     [](Params& p, double v) { p.seed = static_cast<std::uint64_t>(std::llround(v)); }},
    {"top_candidates", [](const Params& p) { return static_cast<double>(p.top_candidates); },
     [](Params& p, double v) { p.top_candidates = static_cast<int>(std::llround(v)); }},
    {"stage_a", [](const Params& p) { return p.stage_a_enabled ? 1.0 : 0.0; },
     [](Params& p, double v) { p.stage_a_enabled = v != 0.0; }},
    {"postprocess_iterations",
     [](const Params& p) { return static_cast<double>(p.postprocess_iterations); },
     [](Params& p, double v) { p.postprocess_iterations = static_cast<int>(std::llround(v)); }},
    {"qp_regularization", [](const Params& p) { return p.qp_regularization; },
     [](Params& p, double v) { p.qp_regularization = v; }},
    {"descent_iterations",
     [](const Params& p) { return static_cast<double>(p.descent_iterations); },
     [](Params& p, double v) { p.descent_iterations = static_cast<int>(std::llround(v)); }},
};

void apply_params_line(Params& params, const json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "type") continue;
    if (!set_param(params, it.key(), it.value().is_boolean()
                                         ? (it.value().get<bool>() ? 1.0 : 0.0)
                                         : it.value().get<double>())) {
      fail(LoadErrorKind::Validation, "params: unknown parameter '" + it.key() + "'");
    }
  }
}

void validate_params(const Params& p) {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) fail(LoadErrorKind::Validation, "params: " + message);
  };
  require(p.friction >= 0.0, "friction must be nonnegative");
  require(p.penalty_growth > 0.0, "penalty_growth must be positive");
  require(p.shape_row_weight > 0.0, "shape_constraint_weight must be positive");
  require(p.curvature_sigma > 0.0, "curvature_sigma must be positive");
  require(p.weight_path >= 0.0 && p.weight_curvature >= 0.0, "cost weights must be nonnegative");
  require(p.penalty_initial > 0.0, "penalty_initial must be positive");
  require(p.iterations >= 1, "iterations must be at least 1");
  require(p.grid_intervals >= 2, "grid_intervals must be at least 2");
  require(p.grid_high > p.grid_low, "grid span must be increasing");
  require(p.opening_high > p.opening_low, "opening bounds must be increasing");
  require(p.contact_low >= 0.0 && p.contact_high <= 1.0 && p.contact_low < p.contact_high,
          "contact bounds must satisfy 0 <= low < high <= 1");
  require(p.starts >= 1, "starts must be at least 1");
  require(p.top_candidates >= 1, "top_candidates must be at least 1");
  require(p.position_bound_x >= 0.0 && p.position_bound_y >= 0.0,
          "position bounds must be nonnegative");
}

}  // namespace

bool set_param(Params& params, const std::string& name, double value) {
  for (const ParamAccessor& acc : kParamTable) {
    if (name == acc.name) {
      acc.set(params, value);
      return true;
    }
  }
  return false;
}

bool get_param(const Params& params, const std::string& name, double& value) {
  for (const ParamAccessor& acc : kParamTable) {
    if (name == acc.name) {
      value = acc.get(params);
      return true;
    }
  }
  return false;
}

LoadedProblem parse_problem(const std::string& text) {
  LoadedProblem out;
  ProblemSpec& spec = out.spec;

  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<std::pair<std::string, json>> records;

  while (std::getline(stream, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(LoadErrorKind::Parse,
           "line " + std::to_string(line_no) + ": " + std::string(e.what()));
    }
    if (!header_seen) {
      if (!j.contains("schema") || j["schema"] != kProblemSchema) {
        fail(LoadErrorKind::Schema, "first record must declare schema '" +
                                        std::string(kProblemSchema) + "'");
      }
      if (!j.contains("version") || !j["version"].is_number_integer() ||
          j["version"].get<int>() != kProblemVersion) {
        fail(LoadErrorKind::Schema, "unsupported problem schema version");
      }
      header_seen = true;
      continue;
    }
    if (!j.contains("type") || !j["type"].is_string()) {
      fail(LoadErrorKind::Parse, "line " + std::to_string(line_no) + ": missing record type");
    }
    records.emplace_back(j["type"].get<std::string>(), std::move(j));
  }
  if (!header_seen) fail(LoadErrorKind::Schema, "empty problem file");

  auto object_index = [&](const std::string& name, const std::string& where) {
    for (int k = 0; k < spec.object_count(); ++k) {
      if (spec.objects[k].name == name) return k;
    }
    fail(LoadErrorKind::Validation, where + ": unknown object '" + name + "'");
  };

  for (const auto& [type, j] : records) {
    if (type == "params") {
      apply_params_line(spec.params, j);
    } else if (type == "object") {
      ObjectSpec obj;
      if (!j.contains("name") || !j["name"].is_string()) {
        fail(LoadErrorKind::Validation, "object: missing name");
      }
      obj.name = j["name"].get<std::string>();
      for (const ObjectSpec& other : spec.objects) {
        if (other.name == obj.name) {
          fail(LoadErrorKind::Validation, "object '" + obj.name + "': duplicate name");
        }
      }
      const json* origin = j.contains("origin") ? &j["origin"] : nullptr;
      obj.shape = parse_polygon(j.at("vertices"), origin, "object '" + obj.name + "'",
                                out.warnings);
      if (j.contains("pose")) {
        const json& pose = j["pose"];
        if (pose.contains("position")) {
          obj.world_pose.translation = parse_vec2(pose["position"], obj.name + " pose");
        }
        if (pose.contains("angle")) obj.world_pose.angle = pose["angle"].get<double>();
      }
      spec.objects.push_back(std::move(obj));
    } else if (type == "obstacle") {
      int k = object_index(j.at("object").get<std::string>(), "obstacle");
      geom::Polygon poly = parse_polygon(j.at("vertices"), nullptr,
                                         "obstacle of '" + spec.objects[k].name + "'",
                                         out.warnings);
      spec.objects[k].obstacles.push_back(std::move(poly));
    } else if (type == "contact") {
      ContactSpec c;
      c.object = object_index(j.at("object").get<std::string>(), "contact");
      c.edge = j.at("edge").get<int>();
      std::string jaw = j.at("jaw").get<std::string>();
      if (jaw == "L") {
        c.jaw = geom::Jaw::Left;
      } else if (jaw == "R") {
        c.jaw = geom::Jaw::Right;
      } else {
        fail(LoadErrorKind::Validation, "contact: jaw must be 'L' or 'R'");
      }
      int edges = spec.objects[c.object].shape.vertex_count();
      if (c.edge < 0 || c.edge >= edges) {
        fail(LoadErrorKind::Validation,
             "contact " + std::to_string(spec.contacts.size()) + ": edge " +
                 std::to_string(c.edge) + " out of range for object '" +
                 spec.objects[c.object].name + "' (" + std::to_string(edges) + " edges)");
      }
      spec.contacts.push_back(c);
    } else if (type == "theta_bounds") {
      int k = object_index(j.at("object").get<std::string>(), "theta_bounds");
      const json& range = j.at("range");
      ThetaRange tr{range.at(0).get<double>(), range.at(1).get<double>()};
      if (tr.high <= tr.low) {
        fail(LoadErrorKind::Validation, "theta_bounds: range must be increasing");
      }
      spec.theta_overrides[k] = tr;
    } else {
      fail(LoadErrorKind::Parse, "unknown record type '" + type + "'");
    }
  }

  if (spec.objects.empty()) fail(LoadErrorKind::Validation, "no objects defined");
  if (spec.contacts.empty()) fail(LoadErrorKind::Validation, "no contacts defined");
  auto by_object = spec.contacts_by_object();
  for (int k = 0; k < spec.object_count(); ++k) {
    bool left = false, right = false;
    for (int c : by_object[k]) {
      if (spec.contacts[c].jaw == geom::Jaw::Left) left = true;
      if (spec.contacts[c].jaw == geom::Jaw::Right) right = true;
    }
    if (!left || !right) {
      fail(LoadErrorKind::Validation, "object '" + spec.objects[k].name +
                                          "': needs at least one contact on each jaw");
    }
  }
  validate_params(spec.params);
  return out;
}

LoadedProblem load_problem(const std::string& path) {
  return parse_problem(read_file(path));
}

namespace {

json vec2_json(const geom::Vec2& v) { return json::array({v.x(), v.y()}); }

json vertices_json(const geom::Polygon& poly) {
  json arr = json::array();
  for (const geom::Vec2& v : poly.vertices) arr.push_back(vec2_json(v));
  return arr;
}

}  // namespace

std::string serialize_problem(const ProblemSpec& spec) {
  std::ostringstream out;
  out << json{{"schema", kProblemSchema}, {"version", kProblemVersion}}.dump() << "\n";

  json params;
  params["type"] = "params";
  for (const ParamAccessor& acc : kParamTable) {
    double v = acc.get(spec.params);
    if (std::string(acc.name) == "stage_a") {
      params[acc.name] = v != 0.0;
    } else if (v == std::floor(v) && std::abs(v) < 1e15 &&
               (std::string(acc.name) == "iterations" ||
                std::string(acc.name) == "grid_intervals" ||
                std::string(acc.name) == "starts" || std::string(acc.name) == "seed" ||
                std::string(acc.name) == "top_candidates" ||
                std::string(acc.name) == "postprocess_iterations" ||
                std::string(acc.name) == "descent_iterations")) {
      params[acc.name] = static_cast<long long>(v);
    } else {
      params[acc.name] = v;
    }
  }
  out << params.dump() << "\n";

  for (const ObjectSpec& obj : spec.objects) {
    json j;
    j["type"] = "object";
    j["name"] = obj.name;
    j["vertices"] = vertices_json(obj.shape);
    j["origin"] = vec2_json(obj.shape.origin);
    j["pose"] = {{"position", vec2_json(obj.world_pose.translation)},
                 {"angle", obj.world_pose.angle}};
    out << j.dump() << "\n";
  }
  for (const ObjectSpec& obj : spec.objects) {
    for (const geom::Polygon& ob : obj.obstacles) {
      json j;
      j["type"] = "obstacle";
      j["object"] = obj.name;
      j["vertices"] = vertices_json(ob);
      out << j.dump() << "\n";
    }
  }
  for (const ContactSpec& c : spec.contacts) {
    json j;
    j["type"] = "contact";
    j["object"] = spec.objects[c.object].name;
    j["edge"] = c.edge;
    j["jaw"] = geom::jaw_name(c.jaw);
    out << j.dump() << "\n";
  }
  for (const auto& [k, range] : spec.theta_overrides) {
    json j;
    j["type"] = "theta_bounds";
    j["object"] = spec.objects[k].name;
    j["range"] = json::array({range.low, range.high});
    out << j.dump() << "\n";
  }
  return out.str();
}

void save_problem(const std::string& path, const ProblemSpec& spec) {
  write_file_atomic(path, serialize_problem(spec));
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(LoadErrorKind::Io, "cannot write '" + tmp.string() + "'");
    f << content;
    if (!f.good()) fail(LoadErrorKind::Io, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(LoadErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace gripopt::io
