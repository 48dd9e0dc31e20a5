#include "core/solution.hpp"

#include <json.hpp>

#include <sstream>

namespace gripopt::io {

using nlohmann::json;

namespace {

constexpr const char* kSolutionSchema = "gripperopt-solution";
constexpr int kSolutionVersion = 1;

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json vector_json(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

Eigen::VectorXd parse_vector(const json& j) {
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j[static_cast<size_t>(i)].get<double>();
  return v;
}

}  // namespace

std::string serialize_solution(const SolutionRecord& record) {
  std::ostringstream out;
  out << json{{"schema", kSolutionSchema}, {"version", kSolutionVersion}}.dump() << "\n";

  {
    const SolutionReport& r = record.report;
    json meta;
    meta["type"] = "meta";
    meta["rank"] = record.rank;
    meta["start_index"] = record.start_index;
    meta["seed"] = record.seed;
    meta["merit"] = r.merit;
    meta["residual_inf"] = r.residual_inf;
    meta["penalty_final"] = r.penalty_final;
    meta["min_signed_distance"] = r.min_signed_distance;
    meta["stage_a"] = {{"ok", r.stage_a_ok},
                       {"repaired", r.stage_a_repaired},
                       {"message", r.stage_a_message}};
    meta["stage_b"] = {{"ok", r.stage_b_ok},
                       {"contact_residual", r.contact_residual},
                       {"bound_violation", r.bound_violation}};
    json stability = json::array();
    for (const auto& pair : r.stability_per_object) {
      stability.push_back(json::array({pair[0], pair[1]}));
    }
    meta["objective"] = {{"stability_total", r.stability_total},
                         {"stability_per_object", stability},
                         {"shape", r.shape_objective}};
    out << meta.dump() << "\n";
  }

  // Problem echo (header line dropped, records kept verbatim).
  std::istringstream problem_lines(serialize_problem(record.problem));
  std::string line;
  bool first = true;
  while (std::getline(problem_lines, line)) {
    if (first) {
      first = false;
      continue;
    }
    out << line << "\n";
  }

  for (int k = 0; k < record.problem.object_count(); ++k) {
    const geom::ObjectConfig& oc = record.config.object_config[k];
    json j;
    j["type"] = "config";
    j["object"] = record.problem.objects[k].name;
    j["position"] = json::array({oc.gripper_position.x(), oc.gripper_position.y()});
    j["angle"] = oc.gripper_angle;
    j["opening"] = oc.jaw_opening;
    j["coords"] = vector_json(record.config.contact_coords[k]);
    out << j.dump() << "\n";
  }

  {
    int np = record.surface.point_count();
    json j;
    j["type"] = "surface";
    j["grid"] = vector_json(record.surface.grid);
    j["left_positions"] = vector_json(Eigen::VectorXd(record.surface.positions.head(np)));
    j["right_positions"] = vector_json(Eigen::VectorXd(record.surface.positions.tail(np)));
    j["left_slopes"] = vector_json(Eigen::VectorXd(record.surface.slopes.head(np)));
    j["right_slopes"] = vector_json(Eigen::VectorXd(record.surface.slopes.tail(np)));
    out << j.dump() << "\n";
  }
  return out.str();
}

void save_solution(const std::string& path, const SolutionRecord& record) {
  write_file_atomic(path, serialize_solution(record));
}

SolutionRecord parse_solution(const std::string& text) {
  SolutionRecord record;

  std::istringstream stream(text);
  std::string line;
  bool header_seen = false;
  std::ostringstream problem_text;
  problem_text << json{{"schema", "gripperopt-problem"}, {"version", 1}}.dump() << "\n";
  std::vector<json> config_lines;
  json meta;
  json surface;

  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError(LoadErrorKind::Parse,
                      "line " + std::to_string(line_no) + ": " + std::string(e.what()));
    }
    if (!header_seen) {
      if (!j.contains("schema") || j["schema"] != kSolutionSchema ||
          !j.contains("version") || j["version"].get<int>() != kSolutionVersion) {
        throw LoadError(LoadErrorKind::Schema, "not a supported solution file");
      }
      header_seen = true;
      continue;
    }
    std::string type = j.value("type", "");
    if (type == "meta") {
      meta = j;
    } else if (type == "config") {
      config_lines.push_back(j);
    } else if (type == "surface") {
      surface = j;
    } else {
      problem_text << line << "\n";
    }
  }
  if (!header_seen) throw LoadError(LoadErrorKind::Schema, "empty solution file");
  if (meta.is_null() || surface.is_null()) {
    throw LoadError(LoadErrorKind::Parse, "solution file missing meta or surface record");
  }

  record.problem = parse_problem(problem_text.str()).spec;

  record.rank = meta.value("rank", 0);
  record.start_index = meta.value("start_index", 0);
  record.seed = meta.value("seed", 0ULL);
  SolutionReport& r = record.report;
  r.merit = meta.value("merit", 0.0);
  r.residual_inf = meta.value("residual_inf", 0.0);
  r.penalty_final = meta.value("penalty_final", 0.0);
  r.min_signed_distance = meta.value("min_signed_distance", 0.0);
  if (meta.contains("stage_a")) {
    r.stage_a_ok = meta["stage_a"].value("ok", false);
    r.stage_a_repaired = meta["stage_a"].value("repaired", false);
    r.stage_a_message = meta["stage_a"].value("message", "");
  }
  if (meta.contains("stage_b")) {
    r.stage_b_ok = meta["stage_b"].value("ok", false);
    r.contact_residual = meta["stage_b"].value("contact_residual", 0.0);
    r.bound_violation = meta["stage_b"].value("bound_violation", 0.0);
  }
  if (meta.contains("objective")) {
    r.stability_total = meta["objective"].value("stability_total", 0.0);
    r.shape_objective = meta["objective"].value("shape", 0.0);
    if (meta["objective"].contains("stability_per_object")) {
      for (const json& pair : meta["objective"]["stability_per_object"]) {
        r.stability_per_object.push_back({pair[0].get<double>(), pair[1].get<double>()});
      }
    }
  }

  record.config.object_config.resize(record.problem.object_count());
  record.config.contact_coords.resize(record.problem.object_count());
  for (const json& j : config_lines) {
    std::string name = j.at("object").get<std::string>();
    int k = -1;
    for (int i = 0; i < record.problem.object_count(); ++i) {
      if (record.problem.objects[i].name == name) k = i;
    }
    if (k < 0) throw LoadError(LoadErrorKind::Validation, "config for unknown object " + name);
    geom::ObjectConfig& oc = record.config.object_config[k];
    oc.gripper_position = {j.at("position")[0].get<double>(), j.at("position")[1].get<double>()};
    oc.gripper_angle = j.at("angle").get<double>();
    oc.jaw_opening = j.at("opening").get<double>();
    Eigen::VectorXd coords = parse_vector(j.at("coords"));
    record.config.contact_coords[k].assign(coords.data(), coords.data() + coords.size());
  }

  const json& s = surface;
  for (const json& y : s.at("grid")) record.surface.grid.push_back(y.get<double>());
  int np = static_cast<int>(record.surface.grid.size());
  record.surface.positions.resize(2 * np);
  record.surface.slopes.resize(2 * np);
  record.surface.positions.head(np) = parse_vector(s.at("left_positions"));
  record.surface.positions.tail(np) = parse_vector(s.at("right_positions"));
  record.surface.slopes.head(np) = parse_vector(s.at("left_slopes"));
  record.surface.slopes.tail(np) = parse_vector(s.at("right_slopes"));
  return record;
}

SolutionRecord load_solution(const std::string& path) {
  return parse_solution(read_file(path));
}

}  // namespace gripopt::io
