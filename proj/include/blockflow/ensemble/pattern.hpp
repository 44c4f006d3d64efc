#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "blockflow/core/dag.hpp"
#include "blockflow/core/errors.hpp"
#include "blockflow/core/task.hpp"
#include "blockflow/core/translate.hpp"

namespace blockflow::ensemble {

struct Stage {
  std::string stage_id;
  std::vector<core::TaskDescription> tasks;  // mutually independent
};

struct Pipeline {
  std::string pipeline_id;
  std::vector<Stage> stages;  // execute strictly in order
};

enum class PatternKind { SimulationAnalysis, ReplicaExchange, ConcurrentPipelines };

// Pre-determined ensemble execution patterns. Task fields come from
// templates; the expanders only replicate structure and never look at what
// the executables are.
struct PatternSpec {
  PatternKind kind = PatternKind::SimulationAnalysis;

  // SimulationAnalysis
  int n_sim = 0;
  int n_analysis = 0;
  int iterations = 0;
  core::TaskDescription sim_task;
  core::TaskDescription analysis_task;

  // ReplicaExchange
  int n_replicas = 0;
  int n_cycles = 0;
  core::TaskDescription md_task;
  core::TaskDescription exchange_task;  // cores stay 1 by convention

  // ConcurrentPipelines
  std::vector<Pipeline> pipelines;
  std::vector<int> sync_points;  // barrier between stage s and s+1
};

namespace detail {

inline core::TaskDescription instantiate(const core::TaskDescription& tmpl,
                                         const std::string& id) {
  core::TaskDescription t = tmpl;
  t.task_id = id;
  core::validate(t);
  return t;
}

}  // namespace detail

// iterations x (n_sim parallel sims -> n_analysis analyses); each analysis
// depends on all sims of its iteration, the next iteration's sims depend on
// all analyses.
inline core::WorkflowDag expand_simulation_analysis(const PatternSpec& spec) {
  if (spec.iterations < 1 || spec.n_sim < 1 || spec.n_analysis < 1)
    throw core::InvalidSpec("simulation-analysis needs iterations, n_sim, n_analysis >= 1");
  core::WorkflowDag dag;
  for (int it = 0; it < spec.iterations; ++it) {
    std::vector<std::string> sims, anas;
    for (int k = 0; k < spec.n_sim; ++k) {
      std::string id = "it" + std::to_string(it) + ".sim" + std::to_string(k);
      dag.add_task(detail::instantiate(spec.sim_task, id));
      sims.push_back(id);
    }
    for (int k = 0; k < spec.n_analysis; ++k) {
      std::string id = "it" + std::to_string(it) + ".ana" + std::to_string(k);
      dag.add_task(detail::instantiate(spec.analysis_task, id));
      anas.push_back(id);
    }
    for (const auto& a : anas)
      for (const auto& s : sims) dag.add_edge(s, a);
    if (it > 0) {
      for (int k = 0; k < spec.n_analysis; ++k) {
        std::string prev = "it" + std::to_string(it - 1) + ".ana" + std::to_string(k);
        for (const auto& s : sims) dag.add_edge(prev, s);
      }
    }
  }
  return dag;
}

// Neighbor pairs for one exchange cycle: even cycles pair (0,1),(2,3),...;
// odd cycles pair (1,2),(3,4),...
inline std::vector<std::pair<int, int>> exchange_pairs(int cycle, int n_replicas) {
  std::vector<std::pair<int, int>> pairs;
  for (int lo = cycle % 2; lo + 1 < n_replicas; lo += 2) pairs.emplace_back(lo, lo + 1);
  return pairs;
}

// n_cycles of per-replica MD followed by neighbor exchanges. The next
// cycle's MD depends on the exchange touching that replica, or directly on
// the previous MD when the replica sat that exchange out.
inline core::WorkflowDag expand_replica_exchange(const PatternSpec& spec) {
  if (spec.n_replicas < 2) throw core::InvalidSpec("replica-exchange needs n_replicas >= 2");
  if (spec.n_cycles < 1) throw core::InvalidSpec("replica-exchange needs n_cycles >= 1");
  core::WorkflowDag dag;
  auto md_id = [](int c, int r) {
    return "c" + std::to_string(c) + ".md" + std::to_string(r);
  };
  auto ex_id = [](int c, int lo, int hi) {
    return "c" + std::to_string(c) + ".ex" + std::to_string(lo) + "-" + std::to_string(hi);
  };
  for (int c = 0; c < spec.n_cycles; ++c) {
    for (int r = 0; r < spec.n_replicas; ++r)
      dag.add_task(detail::instantiate(spec.md_task, md_id(c, r)));
    if (c > 0) {
      for (int r = 0; r < spec.n_replicas; ++r) {
        bool touched = false;
        for (const auto& [lo, hi] : exchange_pairs(c - 1, spec.n_replicas))
          if (lo == r || hi == r) {
            dag.add_edge(ex_id(c - 1, lo, hi), md_id(c, r));
            touched = true;
          }
        if (!touched) dag.add_edge(md_id(c - 1, r), md_id(c, r));
      }
    }
    for (const auto& [lo, hi] : exchange_pairs(c, spec.n_replicas)) {
      std::string id = ex_id(c, lo, hi);
      dag.add_task(detail::instantiate(spec.exchange_task, id));
      dag.add_edge(md_id(c, lo), id);
      dag.add_edge(md_id(c, hi), id);
    }
  }
  return dag;
}

// Pipelines run concurrently; within a pipeline each stage depends on the
// previous one; at every sync point stage s+1 of every pipeline waits for
// stage s of all pipelines.
inline core::WorkflowDag expand_concurrent_pipelines(const PatternSpec& spec) {
  if (spec.pipelines.empty()) throw core::InvalidSpec("at least one pipeline required");
  for (const auto& p : spec.pipelines) {
    if (p.stages.empty()) throw core::InvalidSpec("pipeline without stages: " + p.pipeline_id);
    for (const auto& s : p.stages)
      if (s.tasks.empty())
        throw core::InvalidSpec("stage without tasks: " + p.pipeline_id + "/" + s.stage_id);
  }
  for (int s : spec.sync_points)
    for (const auto& p : spec.pipelines)
      if (s < 0 || s >= static_cast<int>(p.stages.size())) throw core::BadSyncPoint(s);

  core::WorkflowDag dag;
  auto tid = [](const Pipeline& p, const Stage& s, std::size_t k, const std::string& base) {
    std::string leaf = base.empty() ? "t" + std::to_string(k) : base;
    return p.pipeline_id + "." + s.stage_id + "." + leaf;
  };
  for (const auto& p : spec.pipelines)
    for (const auto& s : p.stages)
      for (std::size_t k = 0; k < s.tasks.size(); ++k)
        dag.add_task(detail::instantiate(s.tasks[k], tid(p, s, k, s.tasks[k].task_id)));

  auto stage_ids = [&](const Pipeline& p, int j) {
    std::vector<std::string> out;
    const Stage& s = p.stages[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < s.tasks.size(); ++k) out.push_back(tid(p, s, k, s.tasks[k].task_id));
    return out;
  };

  for (const auto& p : spec.pipelines)
    for (std::size_t j = 1; j < p.stages.size(); ++j)
      for (const auto& to : stage_ids(p, static_cast<int>(j)))
        for (const auto& from : stage_ids(p, static_cast<int>(j) - 1)) dag.add_edge(from, to);

  for (int s : spec.sync_points) {
    for (const auto& dependent : spec.pipelines) {
      if (s + 1 >= static_cast<int>(dependent.stages.size())) continue;
      for (const auto& to : stage_ids(dependent, s + 1))
        for (const auto& provider : spec.pipelines) {
          if (provider.pipeline_id == dependent.pipeline_id) continue;
          for (const auto& from : stage_ids(provider, s)) dag.add_edge(from, to);
        }
    }
  }
  return dag;
}

inline core::WorkflowDag expand(const PatternSpec& spec) {
  switch (spec.kind) {
    case PatternKind::SimulationAnalysis: return expand_simulation_analysis(spec);
    case PatternKind::ReplicaExchange: return expand_replica_exchange(spec);
    case PatternKind::ConcurrentPipelines: return expand_concurrent_pipelines(spec);
  }
  throw core::InvalidSpec("unknown pattern kind");
}

// Closed-form task counts, asserted against expander output in the tests.
inline int expected_task_count(const PatternSpec& spec) {
  switch (spec.kind) {
    case PatternKind::SimulationAnalysis:
      return spec.iterations * (spec.n_sim + spec.n_analysis);
    case PatternKind::ReplicaExchange: {
      int n = spec.n_cycles * spec.n_replicas;
      for (int c = 0; c < spec.n_cycles; ++c)
        n += static_cast<int>(exchange_pairs(c, spec.n_replicas).size());
      return n;
    }
    case PatternKind::ConcurrentPipelines: {
      int n = 0;
      for (const auto& p : spec.pipelines)
        for (const auto& s : p.stages) n += static_cast<int>(s.tasks.size());
      return n;
    }
  }
  return 0;
}

namespace detail {

inline core::TaskDescription template_from_json(const nlohmann::json& j) {
  core::ExternalTaskRecord rec = j;
  if (!rec.contains("id")) rec["id"] = "template";
  if (!rec.contains("exe")) rec["exe"] = "/bin/true";
  core::TaskDescription t = core::translate_task(rec);
  t.task_id.clear();
  return t;
}

}  // namespace detail

// Scenario block: {"kind": "SimulationAnalysis"|"ReplicaExchange"|
// "ConcurrentPipelines", parameters per kind, task templates in the task
// file dialect}
inline PatternSpec pattern_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw core::InvalidSpec("pattern needs a \"kind\"");
  PatternSpec spec;
  std::string kind = j["kind"].get<std::string>();
  if (kind == "SimulationAnalysis") {
    spec.kind = PatternKind::SimulationAnalysis;
    spec.iterations = j.value("iterations", 0);
    spec.n_sim = j.value("n_sim", 0);
    spec.n_analysis = j.value("n_analysis", 0);
    spec.sim_task = detail::template_from_json(j.value("sim_task", nlohmann::json::object()));
    spec.analysis_task =
        detail::template_from_json(j.value("analysis_task", nlohmann::json::object()));
  } else if (kind == "ReplicaExchange") {
    spec.kind = PatternKind::ReplicaExchange;
    spec.n_replicas = j.value("n_replicas", 0);
    spec.n_cycles = j.value("n_cycles", 0);
    spec.md_task = detail::template_from_json(j.value("md_task", nlohmann::json::object()));
    spec.exchange_task =
        detail::template_from_json(j.value("exchange_task", nlohmann::json::object()));
  } else if (kind == "ConcurrentPipelines") {
    spec.kind = PatternKind::ConcurrentPipelines;
    if (j.contains("sync_points"))
      for (const auto& s : j["sync_points"]) spec.sync_points.push_back(s.get<int>());
    if (!j.contains("pipelines")) throw core::InvalidSpec("pipelines missing");
    for (const auto& pj : j["pipelines"]) {
      Pipeline p;
      p.pipeline_id = pj.value("pipeline_id", "p" + std::to_string(spec.pipelines.size()));
      for (const auto& sj : pj.value("stages", nlohmann::json::array())) {
        Stage st;
        st.stage_id = sj.value("stage_id", "s" + std::to_string(p.stages.size()));
        for (const auto& tj : sj.value("tasks", nlohmann::json::array())) {
          core::TaskDescription t = detail::template_from_json(tj);
          if (tj.contains("id")) t.task_id = tj["id"].get<std::string>();
          st.tasks.push_back(t);
        }
        p.stages.push_back(st);
      }
      spec.pipelines.push_back(p);
    }
  } else {
    throw core::InvalidSpec("unknown pattern kind: " + kind);
  }
  return spec;
}

}  // namespace blockflow::ensemble
