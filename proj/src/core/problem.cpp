#include "core/problem.hpp"

#include <algorithm>
#include <stdexcept>

namespace gripopt {

std::vector<std::vector<int>> ProblemSpec::contacts_by_object() const {
  std::vector<std::vector<int>> out(objects.size());
  for (int i = 0; i < contact_count(); ++i) {
    out[contacts[i].object].push_back(i);
  }
  return out;
}

std::vector<int> ProblemSpec::contacted_edges(int object) const {
  std::vector<int> edges;
  for (const ContactSpec& c : contacts) {
    if (c.object == object) edges.push_back(c.edge);
  }
  return edges;
}

double ProblemSpec::characteristic_length(int object) const {
  return geom::characteristic_length(objects[object].shape, contacted_edges(object));
}

double ProblemSpec::characteristic_length_sum() const {
  double acc = 0.0;
  for (int k = 0; k < object_count(); ++k) acc += characteristic_length(k);
  return acc;
}

double ProblemSpec::max_characteristic_length() const {
  double best = 0.0;
  for (int k = 0; k < object_count(); ++k) best = std::max(best, characteristic_length(k));
  return best;
}

double ProblemSpec::scene_radius() const {
  double r = 1.0;
  for (const ObjectSpec& obj : objects) {
    double local = obj.shape.max_radius();
    for (const geom::Polygon& ob : obj.obstacles) local = std::max(local, ob.max_radius());
    r = std::max(r, local + obj.world_pose.translation.norm());
  }
  return r;
}

ZLayout::ZLayout(const ProblemSpec& problem) {
  object_count_ = problem.object_count();
  coord_offsets_.resize(object_count_);
  coord_counts_.resize(object_count_);
  auto by_object = problem.contacts_by_object();
  int offset = 4 * object_count_;
  for (int k = 0; k < object_count_; ++k) {
    coord_offsets_[k] = offset;
    coord_counts_[k] = static_cast<int>(by_object[k].size());
    offset += coord_counts_[k];
  }
  dim_ = offset;
}

Eigen::VectorXd ZLayout::pack(const ConfigVars& config) const {
  Eigen::VectorXd z(dim_);
  for (int k = 0; k < object_count_; ++k) {
    const geom::ObjectConfig& oc = config.object_config[k];
    z[4 * k + 0] = oc.gripper_position.x();
    z[4 * k + 1] = oc.gripper_position.y();
    z[4 * k + 2] = oc.gripper_angle;
    z[4 * k + 3] = oc.jaw_opening;
    for (int c = 0; c < coord_counts_[k]; ++c) {
      z[coord_offsets_[k] + c] = config.contact_coords[k][c];
    }
  }
  return z;
}

ConfigVars ZLayout::unpack(const Eigen::VectorXd& z) const {
  if (z.size() != dim_) throw std::invalid_argument("ZLayout::unpack: wrong dimension");
  ConfigVars config;
  config.object_config.resize(object_count_);
  config.contact_coords.resize(object_count_);
  for (int k = 0; k < object_count_; ++k) {
    geom::ObjectConfig& oc = config.object_config[k];
    oc.gripper_position = {z[4 * k + 0], z[4 * k + 1]};
    oc.gripper_angle = z[4 * k + 2];
    oc.jaw_opening = z[4 * k + 3];
    config.contact_coords[k].resize(coord_counts_[k]);
    for (int c = 0; c < coord_counts_[k]; ++c) {
      config.contact_coords[k][c] = z[coord_offsets_[k] + c];
    }
  }
  return config;
}

}  // namespace gripopt
