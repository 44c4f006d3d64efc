#pragma once

#include <vector>

#include "blockflow/core/requirements.hpp"
#include "blockflow/ensemble/pattern.hpp"
#include "blockflow/wlms/enact.hpp"
#include "blockflow/wlms/strategy.hpp"

namespace blockflow::ensemble {

struct ExecutorConfig {
  std::vector<resource::Resource*> resources;
  int max_resources = wlms::kDefaultMaxResources;
  std::function<double(const pilot::ComputeUnit&)> jitter;
  std::vector<wlms::Fault> faults;
};

// Pattern expression stays decoupled from execution: expand, validate, then
// hand the dag to the workload manager.
inline wlms::ExecutionReport execute_pattern(const PatternSpec& spec, core::SimClock& clock,
                                             core::EventLog& log, const ExecutorConfig& config) {
  core::WorkflowDag dag = expand(spec);
  core::ensure_valid(dag);
  core::Workload all;
  for (const auto& [id, t] : dag.tasks) all.tasks.push_back(t);
  auto reqs = core::aggregate_dag_requirements(dag);
  auto strategy = wlms::derive_strategy(reqs, all, config.resources, config.max_resources, &dag);
  wlms::Enactor enactor(clock, log, config.resources);
  if (config.jitter) enactor.set_runtime_jitter(config.jitter);
  return enactor.enact(strategy, dag, config.faults);
}

}  // namespace blockflow::ensemble
