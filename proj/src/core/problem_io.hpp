#pragma once

#include "core/problem.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace gripopt::io {

enum class LoadErrorKind { Io, Parse, Validation, Schema };

class LoadError : public std::runtime_error {
 public:
  LoadError(LoadErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  LoadErrorKind kind() const { return kind_; }

 private:
  LoadErrorKind kind_;
};

struct LoadedProblem {
  ProblemSpec spec;
  std::vector<std::string> warnings;
};

// Line-delimited records with a schema header; see the repository README.
LoadedProblem parse_problem(const std::string& text);
LoadedProblem load_problem(const std::string& path);

std::string serialize_problem(const ProblemSpec& spec);
void save_problem(const std::string& path, const ProblemSpec& spec);

// Named parameter access used by the C API and the CLI flags.
bool set_param(Params& params, const std::string& name, double value);
bool get_param(const Params& params, const std::string& name, double& value);

// Write-then-rename.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace gripopt::io
