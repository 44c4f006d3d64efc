#pragma once

#include <algorithm>

#include "blockflow/core/dag.hpp"

namespace blockflow::core {

// Aggregate resource demand of a workload, the input to strategy derivation.
struct WorkloadRequirements {
  int max_concurrency_cores = 0;   // sum of cores over all tasks
  double total_core_seconds = 0.0; // sum of cores * runtime_estimate
  double longest_task_runtime = 0.0;
  int task_count = 0;
  int max_task_cores = 0;          // largest single task, for feasibility checks

  bool operator==(const WorkloadRequirements&) const = default;
};

// An empty workload aggregates to all zeros; that is a value, not an error.
inline WorkloadRequirements aggregate_requirements(const Workload& workload) {
  WorkloadRequirements r;
  for (const auto& t : workload.tasks) {
    validate(t);
    r.max_concurrency_cores += t.cores;
    r.total_core_seconds += t.core_seconds();
    r.longest_task_runtime = std::max(r.longest_task_runtime, t.runtime_estimate);
    r.max_task_cores = std::max(r.max_task_cores, t.cores);
    r.task_count++;
  }
  return r;
}

// Requirements for executing a whole dag: the duration-driving length is the
// critical path, since dependencies serialize execution beyond any single
// task's runtime.
inline WorkloadRequirements aggregate_dag_requirements(const WorkflowDag& dag) {
  Workload all;
  for (const auto& [id, t] : dag.tasks) all.tasks.push_back(t);
  WorkloadRequirements r = aggregate_requirements(all);
  r.longest_task_runtime = std::max(r.longest_task_runtime, critical_path_runtime(dag));
  return r;
}

struct PilotSizing {
  int cores = 0;
  double duration = 0.0;
};

inline constexpr double kPilotDurationSafetyFactor = 1.5;

// Tailors a pilot to a workload: as wide as the full concurrency (capped by
// the resource), long enough to drain the core-seconds through that width
// plus a safety margin, never shorter than the longest task.
inline PilotSizing size_pilot(const WorkloadRequirements& reqs, int resource_cores,
                              double max_walltime,
                              double safety = kPilotDurationSafetyFactor) {
  PilotSizing s;
  if (reqs.task_count == 0) return s;
  s.cores = std::min(resource_cores, reqs.max_concurrency_cores);
  double drain = reqs.total_core_seconds / static_cast<double>(s.cores);
  s.duration = std::min(safety * std::max(reqs.longest_task_runtime, drain), max_walltime);
  return s;
}

}  // namespace blockflow::core
