#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "blockflow/core/rand.hpp"
#include "blockflow/core/requirements.hpp"
#include "blockflow/ensemble/execute.hpp"
#include "blockflow/harness/metrics.hpp"
#include "blockflow/harness/scenario.hpp"
#include "blockflow/interop/task_file.hpp"
#include "blockflow/pilot/runtime.hpp"
#include "blockflow/pilot/saga_connector.hpp"
#include "blockflow/resource/sim_batch.hpp"
#include "blockflow/wlms/enact.hpp"
#include "blockflow/wlms/strategy.hpp"

namespace blockflow::harness {

struct RunResult {
  core::EventLog log;
  Metrics metrics;
  bool execution_failed = false;
  std::vector<std::string> failed_tasks;
};

inline std::function<double(const pilot::ComputeUnit&)> make_jitter(double fraction,
                                                                    std::uint64_t seed) {
  if (fraction <= 0.0) return {};
  return [fraction, seed](const pilot::ComputeUnit& u) {
    double unit = static_cast<double>(core::stable_hash(u.unit_id, seed) >> 11) * 0x1.0p-53;
    return 1.0 + fraction * (2.0 * unit - 1.0);
  };
}

// Deterministic scenario runner: owns the clock, builds fresh simulated
// resources, wires one of the three compositions, and leaves a complete
// event log behind. Wall-clock never enters simulated runs.
class ScenarioRunner {
public:
  RunResult run(const Scenario& scenario) {
    RunResult result;
    core::SimClock clock;
    std::vector<std::unique_ptr<resource::SimBatchResource>> owned;
    std::vector<resource::Resource*> handles;
    for (const auto& model : scenario.resources) {
      owned.push_back(std::make_unique<resource::SimBatchResource>(model, clock, result.log));
      handles.push_back(owned.back().get());
    }
    for (auto* r : handles) r->step_queue(0.0);  // ingest t=0 trace arrivals

    core::WorkflowDag dag = materialize_dag(scenario);
    auto jitter = make_jitter(scenario.jitter_fraction, scenario.seed);

    try {
      if (scenario.composition == Composition::PilotOnly) {
        run_pilot_only(scenario, dag, clock, result.log, handles, jitter);
      } else {
        if (scenario.composition == Composition::WlmsOnly &&
            scenario.source_kind == SourceKind::Pattern)
          throw core::ConfigError("pattern sources need the FullStack composition");
        if (scenario.source_kind == SourceKind::Pattern) {
          ensemble::ExecutorConfig config;
          config.resources = handles;
          config.max_resources = scenario.max_resources;
          config.jitter = jitter;
          config.faults = scenario.faults;
          ensemble::execute_pattern(scenario.pattern, clock, result.log, config);
        } else {
          core::Workload all;
          for (const auto& [id, t] : dag.tasks) all.tasks.push_back(t);
          if (all.tasks.empty()) {
            result.log.append(clock.now, "run", "run_started", {{"tasks", "0"}});
            result.log.append(clock.now, "run", "run_finished",
                              {{"ttc", "0"}, {"done", "0"}, {"failed", "0"},
                               {"resubmissions", "0"}});
          } else {
            auto reqs = core::aggregate_dag_requirements(dag);
            auto strategy =
                wlms::derive_strategy(reqs, all, handles, scenario.max_resources, &dag);
            wlms::Enactor enactor(clock, result.log, handles);
            if (jitter) enactor.set_runtime_jitter(jitter);
            enactor.enact(strategy, dag, scenario.faults);
          }
        }
      }
    } catch (const core::ExecutionFailed& e) {
      result.execution_failed = true;
      result.failed_tasks = e.task_ids;
    }

    result.metrics = compute_metrics(result.log);
    return result;
  }

private:
  static core::WorkflowDag materialize_dag(const Scenario& scenario) {
    switch (scenario.source_kind) {
      case SourceKind::Pattern: return ensemble::expand(scenario.pattern);
      case SourceKind::File: return interop::read_task_file(scenario.task_file);
      case SourceKind::Inline: return scenario.inline_dag;
    }
    throw core::ConfigError("unknown workload source");
  }

  // Pilot-level composition: the scenario supplies the placeholders, the
  // runner streams ready tasks straight into the pilot runtime.
  static void run_pilot_only(const Scenario& scenario, const core::WorkflowDag& dag,
                             core::SimClock& clock, core::EventLog& log,
                             const std::vector<resource::Resource*>& handles,
                             const std::function<double(const pilot::ComputeUnit&)>& jitter) {
    core::ensure_valid(dag);
    pilot::SagaConnector connector;
    for (auto* r : handles) connector.add_resource(r);
    pilot::PilotRuntime runtime(clock, log, connector);
    if (jitter) runtime.set_runtime_jitter(jitter);

    log.append(clock.now, "run", "run_started",
               {{"tasks", std::to_string(dag.tasks.size())},
                {"pilots", std::to_string(scenario.pilots.size())}});

    std::vector<PilotAt> pilots = scenario.pilots;
    std::stable_sort(pilots.begin(), pilots.end(),
                     [](const PilotAt& a, const PilotAt& b) {
                       return a.submit_time < b.submit_time;
                     });
    std::vector<wlms::Fault> faults = scenario.faults;
    std::sort(faults.begin(), faults.end(),
              [](const wlms::Fault& a, const wlms::Fault& b) { return a.time < b.time; });

    std::set<std::string> completed, failed, in_flight;
    std::size_t next_pilot = 0, next_fault = 0;
    int resubmissions = 0;

    auto submit_due_pilots = [&] {
      while (next_pilot < pilots.size() && pilots[next_pilot].submit_time <= clock.now + 1e-12)
        runtime.submit_pilot(pilots[next_pilot++].description);
    };
    auto stream_ready = [&] {
      std::set<std::string> blocked = in_flight;
      blocked.insert(failed.begin(), failed.end());
      core::Workload ready = core::derive_workload(dag, completed, blocked, clock.now);
      std::vector<pilot::ComputeUnit> units;
      for (const auto& t : ready.tasks) {
        units.push_back(pilot::make_unit(t));
        in_flight.insert(t.task_id);
      }
      if (!units.empty()) runtime.submit_units(units);
    };
    auto drain = [&] {
      for (const auto& u : runtime.drain_finished()) {
        in_flight.erase(u.task.task_id);
        if (u.state.current == core::State::Done)
          completed.insert(u.task.task_id);
        else
          failed.insert(u.task.task_id);
      }
    };

    // Runs to quiescence: every pilot submitted and every event drained, so
    // queue waits of late pilots still land in the log.
    while (true) {
      submit_due_pilots();
      stream_ready();
      runtime.advance_to(clock.now);
      drain();

      double t = std::numeric_limits<double>::infinity();
      if (auto tc = connector.next_event_time()) t = std::min(t, *tc);
      if (auto tr = runtime.next_event_time()) t = std::min(t, *tr);
      if (next_pilot < pilots.size()) t = std::min(t, pilots[next_pilot].submit_time);
      if (next_fault < faults.size()) t = std::min(t, faults[next_fault].time);
      if (!std::isfinite(t)) {
        for (const auto& [id, task] : dag.tasks)
          if (!completed.count(id)) failed.insert(id);
        break;
      }
      clock.now = std::max(clock.now, t);
      while (next_fault < faults.size() && faults[next_fault].time <= t + 1e-12) {
        const wlms::Fault& f = faults[next_fault++];
        log.append(clock.now, "run", "fault_injected", {{"kind", f.kind}, {"target", f.target}});
        try {
          if (f.kind == "kill_pilot")
            runtime.cancel_pilot(f.target);
          else if (f.kind == "kill_unit")
            runtime.fail_unit(f.target, "Injected");
        } catch (const core::Error&) {
        }
      }
      connector.advance_to(t);
      runtime.advance_to(t);
      drain();
    }

    log.append(clock.now, "run", "run_finished",
               {{"done", std::to_string(completed.size())},
                {"failed", std::to_string(failed.size())},
                {"resubmissions", std::to_string(resubmissions)}});
    if (!failed.empty())
      throw core::ExecutionFailed(std::vector<std::string>(failed.begin(), failed.end()));
  }
};

inline RunResult run_scenario(const std::string& config_path) {
  Scenario scenario = load_scenario(config_path);
  ScenarioRunner runner;
  return runner.run(scenario);
}

enum class ReportFormat { csv, text };

inline void write_outputs(const RunResult& result, const std::string& out_dir,
                          ReportFormat format) {
  std::filesystem::create_directories(out_dir);
  std::filesystem::path dir(out_dir);
  {
    std::ofstream log_out(dir / "events.jsonl", std::ios::trunc);
    if (!log_out) throw core::IoError("cannot write " + (dir / "events.jsonl").string());
    result.log.write_jsonl(log_out);
  }
  if (format == ReportFormat::csv) {
    std::ofstream out(dir / "metrics.csv", std::ios::trunc);
    if (!out) throw core::IoError("cannot write " + (dir / "metrics.csv").string());
    emit_csv(result.metrics, out);
  } else {
    std::ofstream out(dir / "metrics.txt", std::ios::trunc);
    if (!out) throw core::IoError("cannot write " + (dir / "metrics.txt").string());
    emit_text(result.metrics, out);
  }
}

}  // namespace blockflow::harness
