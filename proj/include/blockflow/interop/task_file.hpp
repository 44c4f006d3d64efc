#pragma once

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockflow/core/dag.hpp"
#include "blockflow/core/errors.hpp"
#include "blockflow/core/translate.hpp"

namespace blockflow::interop {

// Filesystem task-description exchange: one task per line-delimited JSON
// object (keys: id, exe, args, cores, mpi, runtime, inputs, outputs,
// depends). read(write(dag)) reproduces the dag exactly.

inline void write_task_file(const std::string& path, const core::WorkflowDag& dag) {
  core::ensure_valid(dag);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw core::IoError("cannot write " + path);
  std::map<std::string, std::set<std::string>> depends;
  for (const auto& [from, to] : dag.edges) depends[to].insert(from);
  for (const auto& [id, task] : dag.tasks) {
    core::ExternalTaskRecord rec = core::to_record(task);
    rec["depends"] = depends[id];
    out << rec.dump() << '\n';
  }
  if (!out) throw core::IoError("short write to " + path);
}

inline core::WorkflowDag read_task_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw core::IoError("cannot read " + path);
  core::WorkflowDag dag;
  std::vector<std::pair<std::string, std::vector<std::string>>> deps;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::ordered_json rec = nlohmann::ordered_json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw core::ParseError(lineno, "not valid JSON");
    core::TaskDescription task;
    try {
      task = core::translate_task(rec);
    } catch (const core::Error& e) {
      throw core::ParseError(lineno, e.what());
    }
    if (dag.tasks.count(task.task_id)) throw core::ParseError(lineno, "duplicate id " + task.task_id);
    dag.add_task(task);
    std::vector<std::string> d;
    if (rec.contains("depends")) {
      if (!rec["depends"].is_array()) throw core::ParseError(lineno, "depends must be an array");
      for (const auto& v : rec["depends"]) d.push_back(v.get<std::string>());
    }
    deps.emplace_back(task.task_id, std::move(d));
  }
  for (const auto& [id, d] : deps)
    for (const auto& pred : d) {
      if (!dag.tasks.count(pred)) throw core::UnresolvedDependency(pred);
      dag.add_edge(pred, id);
    }
  core::ensure_valid(dag);
  return dag;
}

}  // namespace blockflow::interop
