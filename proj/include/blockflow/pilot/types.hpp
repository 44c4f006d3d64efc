#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockflow/core/state.hpp"
#include "blockflow/core/task.hpp"

namespace blockflow::pilot {

// Resource placeholder request: where to ask, how wide, for how long.
struct PilotDescription {
  int cores = 0;
  double duration = 0.0;  // seconds
  std::string target_resource;
  std::string queue_name;
};

// The schedulable form of a task. Binding to a pilot happens late, only when
// an Active pilot can actually take the unit.
struct ComputeUnit {
  std::string unit_id;
  core::TaskDescription task;
  core::EntityState state;
  std::optional<std::string> bound_pilot;
  double start_time = -1.0;
  double end_time = -1.0;
  int attempt = 1;
  std::string fail_reason;
  // Scheduler hint: restrict binding to one pilot (used by strategy
  // enactment to honor partitions). Unset means any pilot qualifies.
  std::optional<std::string> pinned_pilot;
};

inline ComputeUnit make_unit(core::TaskDescription task, std::string unit_id = {},
                             int attempt = 1) {
  ComputeUnit u;
  u.unit_id = unit_id.empty() ? task.task_id : std::move(unit_id);
  u.task = std::move(task);
  u.state = core::make_state(core::EntityKind::TaskUnit, 0.0, "caller");
  u.attempt = attempt;
  return u;
}

// Snapshot of what the pilots can take right now; this is all a broker ever
// sees of the pilots.
struct AggregatedCapacity {
  struct PilotCapacity {
    std::string pilot_id;
    int free_cores = 0;
    double remaining_seconds = 0.0;
  };
  std::vector<PilotCapacity> pilots;
  int total_free_cores = 0;
  double total_remaining_seconds = 0.0;
};

}  // namespace blockflow::pilot
