#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "blockflow/core/dag.hpp"
#include "blockflow/core/errors.hpp"
#include "blockflow/core/requirements.hpp"
#include "blockflow/pilot/types.hpp"
#include "blockflow/resource/backend.hpp"

namespace blockflow::wlms {

enum class Objective { MinTTC };

struct PilotBinding {
  std::string resource_id;
  pilot::PilotDescription pilot;
  std::vector<std::string> partition;  // task ids, sorted
  double estimated_wait = 0.0;
};

// The plan: how many pilots, how large, where, and which slice of the
// workload each one carries. Deriving it has no side effects on any
// resource; enactment is a separate concern.
struct ExecutionStrategy {
  std::vector<PilotBinding> bindings;
  Objective objective = Objective::MinTTC;
  std::map<std::string, double> rationale;        // resource -> estimated wait used
  std::vector<std::string> ranked_resource_ids;   // ascending wait, for replacements
};

struct ResourceRank {
  std::string resource_id;
  double estimated_wait = 0.0;
  resource::Resource* handle = nullptr;
};

// Ascending by wait, ties broken by resource_id. Pure; scaling every wait by
// a positive constant cannot change the order.
inline void rank_by_wait(std::vector<ResourceRank>& ranks) {
  std::stable_sort(ranks.begin(), ranks.end(), [](const ResourceRank& a, const ResourceRank& b) {
    if (a.estimated_wait != b.estimated_wait) return a.estimated_wait < b.estimated_wait;
    return a.resource_id < b.resource_id;
  });
}

// Ranks the feasible resources by the estimated queue wait of a probe pilot
// sized to the whole workload's requirements.
inline std::vector<ResourceRank> select_resources(const core::WorkloadRequirements& reqs,
                                                  const std::vector<resource::Resource*>& models) {
  if (models.empty()) throw core::BadValue("models", "at least one resource required");
  std::vector<ResourceRank> ranks;
  for (resource::Resource* r : models) {
    const resource::ResourceModel& m = r->model();
    if (m.total_cores < reqs.max_task_cores) continue;  // cannot fit the largest task
    const resource::QueueSpec& q = m.queues.front();
    core::PilotSizing probe = core::size_pilot(reqs, m.total_cores, q.max_walltime);
    resource::JobDescription jd;
    jd.cores = std::max(1, probe.cores);
    jd.walltime_limit = std::max(1.0, probe.duration);
    jd.executable = "pilot-agent";
    jd.queue_name = q.name;
    ranks.push_back(ResourceRank{m.resource_id, r->estimate_queue_wait(jd), r});
  }
  if (ranks.empty()) throw core::NoFeasibleResource(reqs.max_task_cores);
  rank_by_wait(ranks);
  return ranks;
}

inline constexpr int kDefaultMaxResources = 2;

// Greedy plan: top-k resources by wait; tasks largest-first onto the binding
// with the lowest wait_i + (load_i + task core-seconds) / cap_i where cap_i
// is the workload concurrency clamped to the resource width; each pilot is
// then sized to its partition. Bindings that receive no tasks are dropped.
// When the workload carries dependencies, pass the dag so each pilot's
// lifetime covers the critical path of its own slice.
inline ExecutionStrategy derive_strategy(const core::WorkloadRequirements& reqs,
                                         const core::Workload& workload,
                                         const std::vector<resource::Resource*>& models,
                                         int max_resources = kDefaultMaxResources,
                                         const core::WorkflowDag* dag = nullptr) {
  if (workload.tasks.empty()) throw core::BadValue("workload", "must not be empty");
  auto ranks = select_resources(reqs, models);
  std::size_t k = std::min<std::size_t>(std::max(1, max_resources), ranks.size());

  struct Slot {
    ResourceRank rank;
    double cap;
    double load = 0.0;
    std::vector<std::string> tasks;
  };
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < k; ++i)
    slots.push_back(Slot{ranks[i],
                         static_cast<double>(std::min(ranks[i].handle->model().total_cores,
                                                      reqs.max_concurrency_cores)),
                         0.0,
                         {}});

  std::vector<const core::TaskDescription*> order;
  for (const auto& t : workload.tasks) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const core::TaskDescription* a, const core::TaskDescription* b) {
                     if (a->core_seconds() != b->core_seconds())
                       return a->core_seconds() > b->core_seconds();
                     return a->task_id < b->task_id;
                   });

  for (const core::TaskDescription* t : order) {
    Slot* best = nullptr;
    double best_score = 0.0;
    for (auto& s : slots) {
      if (s.rank.handle->model().total_cores < t->cores) continue;
      double score = s.rank.estimated_wait + (s.load + t->core_seconds()) / s.cap;
      if (!best || score < best_score ||
          (score == best_score && s.rank.resource_id < best->rank.resource_id)) {
        best = &s;
        best_score = score;
      }
    }
    if (!best) throw core::NoFeasibleResource(t->cores);
    best->tasks.push_back(t->task_id);
    best->load += t->core_seconds();
  }

  std::map<std::string, const core::TaskDescription*> by_id;
  for (const auto& t : workload.tasks) by_id[t.task_id] = &t;

  ExecutionStrategy strategy;
  for (const auto& s : slots) {
    strategy.rationale[s.rank.resource_id] = s.rank.estimated_wait;
    strategy.ranked_resource_ids.push_back(s.rank.resource_id);
    if (s.tasks.empty()) continue;
    core::Workload part;
    for (const auto& id : s.tasks) part.tasks.push_back(*by_id.at(id));
    core::WorkloadRequirements preqs = core::aggregate_requirements(part);
    if (dag) {
      core::WorkflowDag induced;
      for (const auto& t : part.tasks) induced.add_task(t);
      for (const auto& [from, to] : dag->edges)
        if (induced.tasks.count(from) && induced.tasks.count(to)) induced.add_edge(from, to);
      preqs.longest_task_runtime =
          std::max(preqs.longest_task_runtime, core::critical_path_runtime(induced));
    }
    const resource::ResourceModel& m = s.rank.handle->model();
    const resource::QueueSpec& q = m.queues.front();
    core::PilotSizing sizing = core::size_pilot(preqs, m.total_cores, q.max_walltime);
    // serialized-runtime lower bound: running the partition back to back at
    // the mean task width must fit in the pilot lifetime
    double sum_runtime = 0.0, mean_cores = 0.0;
    for (const auto& t : part.tasks) {
      sum_runtime += t.runtime_estimate;
      mean_cores += t.cores;
    }
    mean_cores /= static_cast<double>(part.tasks.size());
    double serial_bound = sum_runtime / (static_cast<double>(sizing.cores) / mean_cores);
    sizing.duration = std::min(
        q.max_walltime,
        std::max(sizing.duration, core::kPilotDurationSafetyFactor * serial_bound));

    PilotBinding b;
    b.resource_id = s.rank.resource_id;
    b.pilot.cores = sizing.cores;
    b.pilot.duration = sizing.duration;
    b.pilot.target_resource = s.rank.resource_id;
    b.pilot.queue_name = q.name;
    b.partition = s.tasks;
    std::sort(b.partition.begin(), b.partition.end());
    b.estimated_wait = s.rank.estimated_wait;
    strategy.bindings.push_back(std::move(b));
  }
  return strategy;
}

// Structural invariants every strategy must satisfy for its workload.
inline void validate_strategy(const ExecutionStrategy& strategy, const core::Workload& workload) {
  std::set<std::string> seen;
  std::map<std::string, const core::TaskDescription*> by_id;
  for (const auto& t : workload.tasks) by_id[t.task_id] = &t;
  for (const auto& b : strategy.bindings) {
    int max_cores = 0;
    double mean_cores = 0.0, sum_runtime = 0.0;
    for (const auto& id : b.partition) {
      if (!seen.insert(id).second)
        throw core::BadValue("partition", "task in two partitions: " + id);
      auto it = by_id.find(id);
      if (it == by_id.end()) throw core::BadValue("partition", "task not in workload: " + id);
      max_cores = std::max(max_cores, it->second->cores);
      mean_cores += it->second->cores;
      sum_runtime += it->second->runtime_estimate;
    }
    if (b.partition.empty()) throw core::BadValue("partition", "empty partition");
    mean_cores /= static_cast<double>(b.partition.size());
    if (b.pilot.cores < max_cores)
      throw core::BadValue("pilot", "pilot narrower than its largest task");
    double serial_bound = sum_runtime / (static_cast<double>(b.pilot.cores) / mean_cores);
    if (b.pilot.duration + 1e-9 < serial_bound)
      throw core::BadValue("pilot", "duration below the serialized-runtime bound");
  }
  if (seen.size() != workload.tasks.size())
    throw core::BadValue("partition", "partitions do not cover the workload");
}

}  // namespace blockflow::wlms
