#pragma once

#include <map>
#include <string>
#include <vector>

#include "blockflow/core/errors.hpp"

namespace blockflow::core {

using Metadata = std::map<std::string, std::string>;

// The task entity shared by every layer: an executable plus its resource
// requirements. Values are immutable by convention once handed to a block.
struct TaskDescription {
  std::string task_id;
  std::string executable;
  std::vector<std::string> arguments;
  int cores = 1;
  bool is_mpi = false;
  double runtime_estimate = 1.0;  // seconds
  std::vector<std::string> input_files;
  std::vector<std::string> output_files;
  Metadata metadata;

  double core_seconds() const { return static_cast<double>(cores) * runtime_estimate; }

  bool operator==(const TaskDescription&) const = default;
};

// Key in metadata that legitimizes cores > 1 on a non-MPI task (the task is
// then assumed to be multi-threaded).
inline constexpr const char* kThreadsPerTaskKey = "threads_per_task";

inline void validate(const TaskDescription& t) {
  if (t.task_id.empty()) throw MissingField("task_id");
  if (t.executable.empty()) throw MissingField("executable");
  if (t.cores < 1) throw BadValue("cores", "must be >= 1, got " + std::to_string(t.cores));
  if (t.runtime_estimate <= 0.0) throw BadValue("runtime_estimate", "must be > 0");
  if (!t.is_mpi && t.cores > 1 && t.metadata.find(kThreadsPerTaskKey) == t.metadata.end())
    throw BadValue("cores", "non-MPI task with cores > 1 requires " +
                                std::string(kThreadsPerTaskKey) + " metadata");
}

}  // namespace blockflow::core
