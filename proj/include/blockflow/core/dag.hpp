#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "blockflow/core/errors.hpp"
#include "blockflow/core/task.hpp"

namespace blockflow::core {

// A workflow: tasks plus dependency edges (predecessor, successor).
struct WorkflowDag {
  std::map<std::string, TaskDescription> tasks;
  std::set<std::pair<std::string, std::string>> edges;

  void add_task(TaskDescription task) {
    if (tasks.count(task.task_id)) throw DuplicateId(task.task_id);
    tasks.emplace(task.task_id, std::move(task));
  }

  void add_edge(const std::string& from, const std::string& to) {
    edges.emplace(from, to);
  }

  std::vector<std::string> predecessors(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& [from, to] : edges)
      if (to == id) out.push_back(from);
    return out;
  }

  bool operator==(const WorkflowDag&) const = default;
};

struct DagIssue {
  std::string code;  // CycleDetected | UnknownEndpoint
  std::string detail;
  std::vector<std::string> cycle_path;  // populated for CycleDetected
};

// Structural check: all edge endpoints present, no self-edges, acyclic.
// Duplicate ids cannot be represented in the map and are rejected at
// add_task time.
inline std::optional<DagIssue> validate_dag(const WorkflowDag& dag) {
  for (const auto& [from, to] : dag.edges) {
    if (!dag.tasks.count(from)) return DagIssue{"UnknownEndpoint", from, {}};
    if (!dag.tasks.count(to)) return DagIssue{"UnknownEndpoint", to, {}};
    if (from == to) return DagIssue{"CycleDetected", "self edge on " + from, {from, from}};
  }

  // Kahn's algorithm; whatever survives is part of a cycle.
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& [id, t] : dag.tasks) indegree[id] = 0;
  for (const auto& [from, to] : dag.edges) {
    indegree[to]++;
    succ[from].push_back(to);
  }
  std::vector<std::string> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push_back(id);
  std::size_t visited = 0;
  while (!ready.empty()) {
    std::string id = ready.back();
    ready.pop_back();
    ++visited;
    for (const auto& s : succ[id])
      if (--indegree[s] == 0) ready.push_back(s);
  }
  if (visited == dag.tasks.size()) return std::nullopt;

  // Walk the residual graph to surface one concrete cycle.
  std::string start;
  for (const auto& [id, deg] : indegree)
    if (deg > 0) {
      start = id;
      break;
    }
  std::vector<std::string> path;
  std::set<std::string> seen;
  std::string cur = start;
  while (!seen.count(cur)) {
    seen.insert(cur);
    path.push_back(cur);
    for (const auto& s : succ[cur])
      if (indegree[s] > 0) {
        cur = s;
        break;
      }
  }
  path.push_back(cur);
  auto first = std::find(path.begin(), path.end(), cur);
  return DagIssue{"CycleDetected", "cycle through " + cur,
                  std::vector<std::string>(first, path.end())};
}

inline void ensure_valid(const WorkflowDag& dag) {
  if (auto issue = validate_dag(dag)) {
    if (issue->code == "CycleDetected") throw CycleDetected(issue->cycle_path);
    throw UnknownEndpoint(issue->detail);
  }
}

// The tasks whose dependencies are satisfied at a given instant and that may
// run concurrently.
struct Workload {
  std::vector<TaskDescription> tasks;
  double snapshot_time = 0.0;
};

// Longest runtime-weighted path through the dag. For an edge-free dag this
// is the longest single task.
inline double critical_path_runtime(const WorkflowDag& dag) {
  ensure_valid(dag);
  std::map<std::string, std::vector<std::string>> preds;
  for (const auto& [from, to] : dag.edges) preds[to].push_back(from);
  std::map<std::string, double> finish;
  // map order is not topological; iterate until fixpoint (small graphs)
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [id, task] : dag.tasks) {
      double start = 0.0;
      for (const auto& p : preds[id]) start = std::max(start, finish[p]);
      double f = start + task.runtime_estimate;
      if (f > finish[id]) {
        finish[id] = f;
        changed = true;
      }
    }
  }
  double cp = 0.0;
  for (const auto& [id, f] : finish) cp = std::max(cp, f);
  return cp;
}

// Eligible = not yet completed or in flight, and every predecessor completed.
// Result is sorted by task_id so repeated derivations are reproducible.
inline Workload derive_workload(const WorkflowDag& dag, const std::set<std::string>& completed,
                                const std::set<std::string>& in_flight, double now) {
  if (auto issue = validate_dag(dag)) throw InvalidDag(issue->code + ": " + issue->detail);
  for (const auto& id : completed)
    if (in_flight.count(id)) throw InvalidDag("task both completed and in flight: " + id);

  std::map<std::string, std::vector<std::string>> preds;
  for (const auto& [from, to] : dag.edges) preds[to].push_back(from);

  Workload out;
  out.snapshot_time = now;
  for (const auto& [id, task] : dag.tasks) {  // map order == sorted by id
    if (completed.count(id) || in_flight.count(id)) continue;
    bool eligible = true;
    for (const auto& p : preds[id])
      if (!completed.count(p)) {
        eligible = false;
        break;
      }
    if (eligible) out.tasks.push_back(task);
  }
  return out;
}

}  // namespace blockflow::core
