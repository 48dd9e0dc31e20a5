#pragma once

#include "core/solution.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gripopt::render {

enum class Mode { GripperFrames, Grasp, Sweep };

std::optional<Mode> parse_mode(const std::string& name);
const char* mode_name(Mode mode);

struct Document {
  std::string name;     // suggested file name
  std::string content;  // SVG 1.1
};

// grasp: one document per object, world frame, jaws posed for that grasp.
// gripper_frames: one document, the two jaw-frame panels side by side.
// sweep: jaw-frame panels with the non-penetration envelopes overlaid.
std::vector<Document> render(const io::SolutionRecord& record, Mode mode);

}  // namespace gripopt::render
