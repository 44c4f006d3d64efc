#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "blockflow/core/dag.hpp"
#include "blockflow/core/errors.hpp"
#include "blockflow/core/events.hpp"
#include "blockflow/pilot/runtime.hpp"
#include "blockflow/pilot/saga_connector.hpp"
#include "blockflow/wlms/strategy.hpp"

namespace blockflow::wlms {

struct TaskTiming {
  double start = -1.0;
  double end = -1.0;
  std::string pilot;
  std::string resource;
  int attempts = 1;
};

struct ExecutionReport {
  double ttc = 0.0;
  std::map<std::string, TaskTiming> task_timings;
  int resubmissions = 0;
  ExecutionStrategy strategy;
};

// Scenario fault: at `time`, kill the pilot ("p1", "p2", ...) or the unit
// currently carrying a task (target = task id).
struct Fault {
  double time = 0.0;
  std::string kind;  // kill_pilot | kill_unit
  std::string target;
};

inline constexpr int kMaxTaskAttempts = 3;
inline constexpr int kMaxReplacementPilots = 3;

// Execution manager: submits the planned pilots, streams workloads into the
// pilot runtime as dependencies resolve, resubmits units lost to pilot
// expiry (new unit, next attempt), and replaces dead pilots on the
// next-ranked feasible resource. A task that fails for any other reason, or
// exhausts its attempts, fails the run: enact throws ExecutionFailed after
// the loop has drained.
class Enactor {
public:
  Enactor(core::SimClock& clock, core::EventLog& log,
          std::vector<resource::Resource*> resources)
      : clock_(clock), log_(log), resources_(std::move(resources)) {}

  void set_runtime_jitter(std::function<double(const pilot::ComputeUnit&)> j) {
    jitter_ = std::move(j);
  }

  ExecutionReport enact(const ExecutionStrategy& strategy, const core::WorkflowDag& dag,
                        std::vector<Fault> faults = {}) {
    core::ensure_valid(dag);
    pilot::SagaConnector connector;
    for (resource::Resource* r : resources_) connector.add_resource(r);
    pilot::PilotRuntime runtime(clock_, log_, connector);
    if (jitter_) runtime.set_runtime_jitter(jitter_);

    std::sort(faults.begin(), faults.end(),
              [](const Fault& a, const Fault& b) { return a.time < b.time; });

    double t0 = clock_.now;
    log_.append(t0, "run", "run_started",
                {{"tasks", std::to_string(dag.tasks.size())},
                 {"bindings", std::to_string(strategy.bindings.size())}});

    // one live pilot per binding
    struct BindingState {
      PilotBinding binding;
      std::string live_pilot;
      int replacements = 0;
      std::set<std::string> outstanding;  // tasks not yet terminal
    };
    std::vector<BindingState> bindings;
    std::map<std::string, std::size_t> task_binding;
    for (const auto& b : strategy.bindings) {
      BindingState bs;
      bs.binding = b;
      bs.live_pilot = runtime.submit_pilot(b.pilot);
      for (const auto& id : b.partition) {
        bs.outstanding.insert(id);
        task_binding[id] = bindings.size();
      }
      bindings.push_back(std::move(bs));
    }
    for (const auto& [id, t] : dag.tasks)
      if (!task_binding.count(id))
        throw core::BadValue("strategy", "task not covered by any partition: " + id);

    ExecutionReport report;
    report.strategy = strategy;
    std::set<std::string> completed, failed, in_flight;
    std::map<std::string, int> attempts;
    std::map<std::string, std::string> unit_task;  // unit id -> task id

    auto submit_attempt = [&](const std::string& task_id) {
      int n = ++attempts[task_id];
      const core::TaskDescription& task = dag.tasks.at(task_id);
      std::string unit_id = n == 1 ? task_id : task_id + "#" + std::to_string(n);
      pilot::ComputeUnit u = pilot::make_unit(task, unit_id, n);
      runtime.submit_units({u});
      runtime.pin_unit(unit_id, bindings[task_binding.at(task_id)].live_pilot);
      unit_task[unit_id] = task_id;
      in_flight.insert(task_id);
      report.task_timings[task_id].attempts = n;
    };

    auto stream_ready = [&] {
      std::set<std::string> blocked = in_flight;
      blocked.insert(failed.begin(), failed.end());
      core::Workload ready = core::derive_workload(dag, completed, blocked, clock_.now);
      for (const auto& t : ready.tasks) submit_attempt(t.task_id);
    };

    // a dead pilot with outstanding work gets a replacement on the
    // next-ranked feasible resource, cycling through the ranking
    auto ensure_live_pilots = [&] {
      for (auto& bs : bindings) {
        if (bs.outstanding.empty()) continue;
        if (!core::is_terminal(runtime.pilot_info(bs.live_pilot).state)) continue;
        if (bs.replacements >= kMaxReplacementPilots) {
          for (const auto& id : std::set<std::string>(bs.outstanding)) {
            if (in_flight.count(id)) continue;  // a unit is still running elsewhere
            failed.insert(id);
            bs.outstanding.erase(id);
          }
          continue;
        }
        const auto& ranked = strategy.ranked_resource_ids;
        std::size_t start = 0;
        for (std::size_t i = 0; i < ranked.size(); ++i)
          if (ranked[i] == bs.binding.pilot.target_resource) start = i + 1;
        pilot::PilotDescription pd = bs.binding.pilot;
        bool placed = false;
        for (std::size_t off = 0; off < ranked.size() && !placed; ++off) {
          const std::string& rid = ranked[(start + off) % ranked.size()];
          resource::Resource* r = nullptr;
          for (resource::Resource* cand : resources_)
            if (cand->model().resource_id == rid) r = cand;
          if (!r || r->model().total_cores < pd.cores) continue;
          pd.target_resource = rid;
          pd.queue_name = r->model().queues.front().name;
          pd.duration = std::min(pd.duration, r->model().queues.front().max_walltime);
          bs.live_pilot = runtime.submit_pilot(pd);
          bs.replacements++;
          bs.binding.pilot = pd;
          placed = true;
        }
        if (!placed) {
          for (const auto& id : bs.outstanding) failed.insert(id);
          bs.outstanding.clear();
          continue;
        }
        // re-point waiting units at the replacement
        for (const auto& [uid, tid] : unit_task)
          if (bs.outstanding.count(tid) &&
              runtime.unit(uid).state.current == core::State::New)
            runtime.pin_unit(uid, bs.live_pilot);
      }
    };

    auto handle_finished = [&] {
      for (const auto& u : runtime.drain_finished()) {
        const std::string& task_id = unit_task.at(u.unit_id);
        BindingState& bs = bindings[task_binding.at(task_id)];
        in_flight.erase(task_id);
        if (u.state.current == core::State::Done) {
          completed.insert(task_id);
          bs.outstanding.erase(task_id);
          TaskTiming& tt = report.task_timings[task_id];
          tt.start = u.start_time;
          tt.end = u.end_time;
          tt.pilot = *u.bound_pilot;
          tt.resource = bs.binding.pilot.target_resource;
        } else if (u.fail_reason == "PilotExpired" && attempts[task_id] < kMaxTaskAttempts) {
          ensure_live_pilots();
          if (failed.count(task_id)) continue;  // replacement budget ran out
          report.resubmissions++;
          log_.append(clock_.now, "unit:" + u.unit_id, "unit_resubmitted",
                      {{"task", task_id}, {"attempt", std::to_string(attempts[task_id] + 1)}});
          submit_attempt(task_id);
        } else {
          failed.insert(task_id);
          bs.outstanding.erase(task_id);
        }
      }
    };

    std::size_t next_fault = 0;
    auto apply_faults = [&](double t) {
      while (next_fault < faults.size() && faults[next_fault].time <= t + 1e-12) {
        const Fault& f = faults[next_fault++];
        log_.append(clock_.now, "run", "fault_injected", {{"kind", f.kind}, {"target", f.target}});
        if (f.kind == "kill_pilot") {
          try {
            runtime.cancel_pilot(f.target);
          } catch (const core::Error&) {
          }
        } else if (f.kind == "kill_unit") {
          for (const auto& [uid, tid] : unit_task)
            if (tid == f.target && !core::is_terminal(runtime.unit(uid).state.current))
              runtime.fail_unit(uid, "Injected");
        }
      }
    };

    while (true) {
      stream_ready();
      runtime.advance_to(clock_.now);
      handle_finished();
      ensure_live_pilots();
      if (completed.size() + failed.size() == dag.tasks.size()) break;

      double t = std::numeric_limits<double>::infinity();
      if (auto tc = connector.next_event_time()) t = std::min(t, *tc);
      if (auto tr = runtime.next_event_time()) t = std::min(t, *tr);
      if (next_fault < faults.size()) t = std::min(t, faults[next_fault].time);
      if (!std::isfinite(t)) {
        // nothing can make progress: whatever is left cannot run
        for (const auto& [id, t_] : dag.tasks)
          if (!completed.count(id)) failed.insert(id);
        break;
      }
      clock_.now = std::max(clock_.now, t);
      apply_faults(t);
      connector.advance_to(t);
      runtime.advance_to(t);
      handle_finished();
      ensure_live_pilots();
      if (completed.size() + failed.size() == dag.tasks.size()) break;
    }

    double last_end = t0;
    for (const auto& [id, tt] : report.task_timings)
      if (tt.end > last_end) last_end = tt.end;
    report.ttc = last_end - t0;
    log_.append(std::max(clock_.now, last_end), "run", "run_finished",
                {{"ttc", core::fmt_double(report.ttc)},
                 {"done", std::to_string(completed.size())},
                 {"failed", std::to_string(failed.size())},
                 {"resubmissions", std::to_string(report.resubmissions)}});

    if (!failed.empty())
      throw core::ExecutionFailed(std::vector<std::string>(failed.begin(), failed.end()));
    return report;
  }

private:
  core::SimClock& clock_;
  core::EventLog& log_;
  std::vector<resource::Resource*> resources_;
  std::function<double(const pilot::ComputeUnit&)> jitter_;
};

}  // namespace blockflow::wlms
