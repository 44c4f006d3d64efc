#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "blockflow/core/errors.hpp"
#include "blockflow/core/task.hpp"

namespace blockflow::core {

// External task dialect: a JSON object with the keys
//   id, exe, args, cores, mpi, runtime, inputs, outputs, depends, meta
// Only id and exe are required; cores defaults to 1, runtime to 1.0 s.
// Unknown keys are preserved into metadata so nothing is lost in
// translation. "depends" is structural (edges) and is handled by the file
// reader, not here.
using ExternalTaskRecord = nlohmann::ordered_json;

namespace detail {

inline std::vector<std::string> string_list(const ExternalTaskRecord& rec, const std::string& key) {
  std::vector<std::string> out;
  if (!rec.contains(key)) return out;
  if (!rec[key].is_array()) throw BadValue(key, "expected an array of strings");
  for (const auto& v : rec[key]) {
    if (!v.is_string()) throw BadValue(key, "expected an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline TaskDescription translate_task(const ExternalTaskRecord& rec) {
  if (!rec.is_object()) throw BadValue("record", "expected a JSON object");
  if (!rec.contains("id") || !rec["id"].is_string() || rec["id"].get<std::string>().empty())
    throw MissingField("id");
  if (!rec.contains("exe") || !rec["exe"].is_string() || rec["exe"].get<std::string>().empty())
    throw MissingField("exe");

  TaskDescription t;
  t.task_id = rec["id"].get<std::string>();
  t.executable = rec["exe"].get<std::string>();
  t.arguments = detail::string_list(rec, "args");

  if (rec.contains("cores")) {
    if (!rec["cores"].is_number_integer())
      throw BadValue("cores", "expected an integer, got " + rec["cores"].dump());
    t.cores = rec["cores"].get<int>();
  }
  if (rec.contains("mpi")) {
    if (!rec["mpi"].is_boolean()) throw BadValue("mpi", "expected a boolean");
    t.is_mpi = rec["mpi"].get<bool>();
  }
  if (rec.contains("runtime")) {
    if (!rec["runtime"].is_number()) throw BadValue("runtime", "expected a number");
    t.runtime_estimate = rec["runtime"].get<double>();
  }
  t.input_files = detail::string_list(rec, "inputs");
  t.output_files = detail::string_list(rec, "outputs");

  if (rec.contains("meta")) {
    if (!rec["meta"].is_object()) throw BadValue("meta", "expected an object");
    for (auto it = rec["meta"].begin(); it != rec["meta"].end(); ++it)
      t.metadata[it.key()] = it.value().is_string() ? it.value().get<std::string>()
                                                    : it.value().dump();
  }
  // Forward compatibility: unknown keys survive the translation.
  static const std::vector<std::string> known = {"id",  "exe",    "args",    "cores",   "mpi",
                                                 "runtime", "inputs", "outputs", "depends", "meta"};
  for (auto it = rec.begin(); it != rec.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
    t.metadata[it.key()] = it.value().is_string() ? it.value().get<std::string>()
                                                  : it.value().dump();
  }

  validate(t);
  return t;
}

// Inverse of translate_task (metadata goes back under "meta").
inline ExternalTaskRecord to_record(const TaskDescription& t) {
  ExternalTaskRecord rec;
  rec["id"] = t.task_id;
  rec["exe"] = t.executable;
  rec["args"] = t.arguments;
  rec["cores"] = t.cores;
  rec["mpi"] = t.is_mpi;
  rec["runtime"] = t.runtime_estimate;
  rec["inputs"] = t.input_files;
  rec["outputs"] = t.output_files;
  if (!t.metadata.empty()) {
    ExternalTaskRecord meta;
    for (const auto& [k, v] : t.metadata) meta[k] = v;
    rec["meta"] = meta;
  }
  return rec;
}

}  // namespace blockflow::core
