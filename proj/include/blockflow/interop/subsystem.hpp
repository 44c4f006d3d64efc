#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blockflow/core/errors.hpp"
#include "blockflow/core/events.hpp"
#include "blockflow/core/requirements.hpp"
#include "blockflow/pilot/runtime.hpp"
#include "blockflow/pilot/saga_connector.hpp"

namespace blockflow::interop {

struct TaskOutcome {
  core::State state = core::State::New;
  double start_time = -1.0;
  double end_time = -1.0;
  std::string reason;
};

struct SubsystemFault {
  double time = 0.0;
  std::string task_id;
};

// Embedded-subsystem integration: the caller hands over independent ready
// tasks and shares no state beyond the initial descriptions and the final
// outcomes. Pilots, binding, and failures stay self-contained; intermediate
// states are not observable from outside.
class SubsystemExecutor {
public:
  SubsystemExecutor(core::SimClock& clock, core::EventLog& log, resource::Resource* res)
      : clock_(clock), log_(log), resource_(res) {
    connector_.add_resource(res);
  }

  // Runs the batch to completion and returns the exact terminal partition.
  std::map<std::string, TaskOutcome> submit(const std::vector<core::TaskDescription>& tasks,
                                            std::vector<SubsystemFault> faults = {}) {
    outcomes_.clear();
    done_ = false;
    if (tasks.empty()) {
      done_ = true;
      return outcomes_;
    }

    core::Workload batch;
    batch.tasks = tasks;
    auto reqs = core::aggregate_requirements(batch);
    const resource::ResourceModel& m = resource_->model();
    if (reqs.max_task_cores > m.total_cores) throw core::NoFeasibleResource(reqs.max_task_cores);
    core::PilotSizing sizing =
        core::size_pilot(reqs, m.total_cores, m.queues.front().max_walltime);

    pilot::PilotRuntime runtime(clock_, log_, connector_);
    pilot::PilotDescription pd;
    pd.cores = sizing.cores;
    pd.duration = sizing.duration;
    pd.target_resource = m.resource_id;
    pd.queue_name = m.queues.front().name;
    std::string pilot_id = runtime.submit_pilot(pd);

    std::vector<pilot::ComputeUnit> units;
    for (const auto& t : tasks) units.push_back(pilot::make_unit(t));
    runtime.submit_units(units);

    std::sort(faults.begin(), faults.end(),
              [](const SubsystemFault& a, const SubsystemFault& b) { return a.time < b.time; });
    std::size_t next_fault = 0;

    runtime.advance_to(clock_.now);
    while (true) {
      double t = std::numeric_limits<double>::infinity();
      if (auto tc = connector_.next_event_time()) t = std::min(t, *tc);
      if (auto tr = runtime.next_event_time()) t = std::min(t, *tr);
      if (next_fault < faults.size()) t = std::min(t, faults[next_fault].time);
      if (!std::isfinite(t)) break;
      clock_.now = std::max(clock_.now, t);
      while (next_fault < faults.size() && faults[next_fault].time <= t + 1e-12) {
        const auto& f = faults[next_fault++];
        if (!core::is_terminal(runtime.unit(f.task_id).state.current))
          runtime.fail_unit(f.task_id, "Injected");
      }
      connector_.advance_to(t);
      runtime.advance_to(t);
      bool all_terminal = true;
      for (const auto& task : tasks)
        if (!core::is_terminal(runtime.unit(task.task_id).state.current)) all_terminal = false;
      if (all_terminal) break;
    }

    for (const auto& task : tasks) {
      const pilot::ComputeUnit& u = runtime.unit(task.task_id);
      TaskOutcome out;
      out.state = core::is_terminal(u.state.current) ? u.state.current : core::State::Failed;
      out.start_time = u.start_time;
      out.end_time = u.end_time;
      out.reason = core::is_terminal(u.state.current) ? u.fail_reason : "Unschedulable";
      outcomes_[task.task_id] = out;
    }
    if (!core::is_terminal(runtime.pilot_info(pilot_id).state)) {
      runtime.cancel_pilot(pilot_id);
      runtime.advance_to(clock_.now);
    }
    done_ = true;
    return outcomes_;
  }

  // Terminal outcomes only; anything else is simply not available. Callers
  // polling mid-run (or for unknown tasks) get an empty optional.
  std::optional<TaskOutcome> try_get_outcome(const std::string& task_id) const {
    if (!done_) return std::nullopt;
    auto it = outcomes_.find(task_id);
    if (it == outcomes_.end()) return std::nullopt;
    return it->second;
  }

private:
  core::SimClock& clock_;
  core::EventLog& log_;
  resource::Resource* resource_;
  pilot::SagaConnector connector_;
  std::map<std::string, TaskOutcome> outcomes_;
  bool done_ = false;
};

}  // namespace blockflow::interop
