#pragma once

// Shared test utilities: random DAG generation and the independent oracles
// the suites check implementations against. Everything here is written
// against the public core surface only and deliberately avoids reusing the
// production algorithms it is meant to cross-check.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "blockflow/core/dag.hpp"
#include "blockflow/core/rand.hpp"
#include "blockflow/core/task.hpp"

namespace testutil {

inline std::string task_name(int i) {
  std::string n = std::to_string(i);
  return "t" + std::string(n.size() < 2 ? 2 - n.size() : 0, '0') + n;
}

inline blockflow::core::TaskDescription simple_task(const std::string& id, int cores = 1,
                                                    double runtime = 100.0) {
  blockflow::core::TaskDescription t;
  t.task_id = id;
  t.executable = "/bin/true";
  t.cores = cores;
  t.is_mpi = cores > 1;
  t.runtime_estimate = runtime;
  return t;
}

// Random DAG with a guaranteed topological order: nodes are shuffled, edges
// only go from earlier to later positions in the shuffle.
inline blockflow::core::WorkflowDag random_dag(blockflow::core::Rng& rng, int max_nodes = 20,
                                               double edge_prob = 0.25) {
  using namespace blockflow::core;
  int n = static_cast<int>(rng.range(1, max_nodes));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.range(0, i)]);

  WorkflowDag dag;
  for (int i = 0; i < n; ++i)
    dag.add_task(simple_task(task_name(i), 1, 10.0 + static_cast<double>(rng.range(0, 90))));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.unit() < edge_prob) dag.add_edge(task_name(order[i]), task_name(order[j]));
  return dag;
}

// Kahn's algorithm, independent of the library implementation. Returns an
// empty optional when the graph has a cycle.
inline std::optional<std::vector<std::string>> kahn_order(
    const blockflow::core::WorkflowDag& dag) {
  std::map<std::string, int> indeg;
  std::map<std::string, std::set<std::string>> succ;
  for (const auto& [id, t] : dag.tasks) indeg[id] = 0;
  for (const auto& [a, b] : dag.edges) {
    if (succ[a].insert(b).second) indeg[b]++;
  }
  std::set<std::string> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.insert(id);
  std::vector<std::string> out;
  while (!ready.empty()) {
    std::string id = *ready.begin();
    ready.erase(ready.begin());
    out.push_back(id);
    for (const auto& s : succ[id])
      if (--indeg[s] == 0) ready.insert(s);
  }
  if (out.size() != dag.tasks.size()) return std::nullopt;
  return out;
}

// Brute-force scan of the dependency predicate: eligible iff not done, not
// in flight, and every predecessor done.
inline std::set<std::string> eligible_oracle(const blockflow::core::WorkflowDag& dag,
                                             const std::set<std::string>& completed,
                                             const std::set<std::string>& in_flight) {
  std::set<std::string> out;
  for (const auto& [id, t] : dag.tasks) {
    if (completed.count(id) || in_flight.count(id)) continue;
    bool ok = true;
    for (const auto& [a, b] : dag.edges)
      if (b == id && !completed.count(a)) ok = false;
    if (ok) out.insert(id);
  }
  return out;
}

}  // namespace testutil
