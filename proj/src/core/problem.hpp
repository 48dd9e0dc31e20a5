#pragma once

#include "core/geometry.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gripopt {

struct ObjectSpec {
  std::string name;
  geom::Polygon shape;  // model frame
  geom::Transform2 world_pose;
  std::vector<geom::Polygon> obstacles;  // model frame, rigidly attached
};

struct ContactSpec {
  int object = 0;
  int edge = 0;
  geom::Jaw jaw = geom::Jaw::Left;
};

struct Params {
  double friction = 0.3;
  double penalty_growth = 2.0;        // multiplies the penalty every iteration
  double shape_row_weight = 3.0;      // scales the shape constraint rows
  double curvature_sigma = 0.2;       // Gaussian length scale of the curvature cost
  double weight_path = 3e-4;          // shortest-path cost weight
  double weight_curvature = 0.1;      // curvature cost weight
  double penalty_initial = 1.0;
  int iterations = 30;
  int grid_intervals = 50;
  double grid_low = -1.2;
  double grid_high = 1.2;
  double position_bound_x = 1.0;
  double position_bound_y = 0.5;
  double opening_low = -1.0;
  double opening_high = 4.0;
  double contact_low = 0.1;
  double contact_high = 0.9;
  int starts = 60;
  std::uint64_t seed = 0;
  int top_candidates = 5;  // entries into post-processing
  bool stage_a_enabled = true;
  int postprocess_iterations = 12;
  double qp_regularization = 0.0;
  int descent_iterations = 25;  // inner NLP budget per outer step
};

struct ThetaRange {
  double low = 0.0;
  double high = 0.0;
};

struct ProblemSpec {
  std::vector<ObjectSpec> objects;
  std::vector<ContactSpec> contacts;
  std::map<int, ThetaRange> theta_overrides;  // object index -> fixed orientation bounds
  Params params;

  int object_count() const { return static_cast<int>(objects.size()); }
  int contact_count() const { return static_cast<int>(contacts.size()); }

  // Contact ids per object, in input order.
  std::vector<std::vector<int>> contacts_by_object() const;
  std::vector<int> contacted_edges(int object) const;

  double characteristic_length(int object) const;
  double characteristic_length_sum() const;
  double max_characteristic_length() const;
  double scene_radius() const;
};

struct ConfigVars {
  std::vector<geom::ObjectConfig> object_config;    // one per object
  std::vector<std::vector<double>> contact_coords;  // [object][local contact]
};

// Flat layout: per object [px, py, angle, opening], then contact coordinates
// object by object in input order.
class ZLayout {
 public:
  explicit ZLayout(const ProblemSpec& problem);

  int dimension() const { return dim_; }
  int object_count() const { return object_count_; }
  int pose_offset(int object) const { return 4 * object; }
  int angle_index(int object) const { return 4 * object + 2; }
  int opening_index(int object) const { return 4 * object + 3; }
  int coord_index(int object, int local_contact) const {
    return coord_offsets_[object] + local_contact;
  }
  int coord_count(int object) const { return coord_counts_[object]; }

  Eigen::VectorXd pack(const ConfigVars& config) const;
  ConfigVars unpack(const Eigen::VectorXd& z) const;

 private:
  int object_count_ = 0;
  int dim_ = 0;
  std::vector<int> coord_offsets_;
  std::vector<int> coord_counts_;
};

}  // namespace gripopt
