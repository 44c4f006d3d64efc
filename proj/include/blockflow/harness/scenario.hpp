#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockflow/core/dag.hpp"
#include "blockflow/core/errors.hpp"
#include "blockflow/core/translate.hpp"
#include "blockflow/ensemble/pattern.hpp"
#include "blockflow/pilot/types.hpp"
#include "blockflow/resource/model.hpp"
#include "blockflow/wlms/enact.hpp"

namespace blockflow::harness {

enum class Composition { FullStack, PilotOnly, WlmsOnly };

inline const char* to_string(Composition c) {
  switch (c) {
    case Composition::FullStack: return "FullStack";
    case Composition::PilotOnly: return "PilotOnly";
    case Composition::WlmsOnly: return "WlmsOnly";
  }
  return "?";
}

enum class SourceKind { Pattern, File, Inline };

struct PilotAt {
  double submit_time = 0.0;
  pilot::PilotDescription description;
};

// A complete, reproducible experiment: resources, workload, composition,
// faults, seed. Everything random derives from the seed.
struct Scenario {
  std::uint64_t seed = 0;
  std::vector<resource::ResourceModel> resources;
  Composition composition = Composition::FullStack;
  SourceKind source_kind = SourceKind::Inline;
  ensemble::PatternSpec pattern;
  core::WorkflowDag inline_dag;
  std::string task_file;  // resolved against the scenario file's directory
  std::vector<PilotAt> pilots;
  int max_resources = wlms::kDefaultMaxResources;
  double jitter_fraction = 0.0;
  std::vector<wlms::Fault> faults;
};

inline core::WorkflowDag dag_from_records(const nlohmann::json& records) {
  core::WorkflowDag dag;
  std::vector<std::pair<std::string, std::vector<std::string>>> deps;
  for (const auto& rec : records) {
    core::TaskDescription t = core::translate_task(rec);
    dag.add_task(t);
    std::vector<std::string> d;
    if (rec.contains("depends"))
      for (const auto& v : rec["depends"]) d.push_back(v.get<std::string>());
    deps.emplace_back(t.task_id, std::move(d));
  }
  for (const auto& [id, d] : deps)
    for (const auto& pred : d) {
      if (!dag.tasks.count(pred)) throw core::UnresolvedDependency(pred);
      dag.add_edge(pred, id);
    }
  core::ensure_valid(dag);
  return dag;
}

inline Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir = ".") {
  if (!j.is_object()) throw core::ConfigError("scenario must be a JSON object");
  Scenario s;
  try {
    s.seed = j.value("seed", 0ull);
    if (!j.contains("resources") || !j["resources"].is_array() || j["resources"].empty())
      throw core::ConfigError("scenario needs a non-empty \"resources\" array");
    for (const auto& rj : j["resources"]) s.resources.push_back(resource::model_from_json(rj));

    std::string comp = j.value("composition", "FullStack");
    if (comp == "FullStack")
      s.composition = Composition::FullStack;
    else if (comp == "PilotOnly")
      s.composition = Composition::PilotOnly;
    else if (comp == "WlmsOnly")
      s.composition = Composition::WlmsOnly;
    else
      throw core::ConfigError("unknown composition: " + comp);

    if (!j.contains("workload_source"))
      throw core::ConfigError("scenario needs a \"workload_source\"");
    const auto& ws = j["workload_source"];
    std::string kind = ws.value("kind", "");
    if (kind == "pattern") {
      s.source_kind = SourceKind::Pattern;
      s.pattern = ensemble::pattern_from_json(ws.at("pattern"));
    } else if (kind == "file") {
      s.source_kind = SourceKind::File;
      std::filesystem::path p = ws.at("path").get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      if (!std::filesystem::exists(p))
        throw core::ConfigError("task file does not exist: " + p.string());
      s.task_file = p.string();
    } else if (kind == "inline") {
      s.source_kind = SourceKind::Inline;
      s.inline_dag = dag_from_records(ws.at("tasks"));
    } else {
      throw core::ConfigError("workload_source.kind must be pattern|file|inline");
    }

    if (j.contains("pilots")) {
      for (const auto& pj : j["pilots"]) {
        PilotAt p;
        p.submit_time = pj.value("submit_time", 0.0);
        p.description.cores = pj.at("cores").get<int>();
        p.description.duration = pj.at("duration").get<double>();
        p.description.target_resource = pj.at("target_resource").get<std::string>();
        p.description.queue_name = pj.value("queue_name", s.resources.front().queues.front().name);
        s.pilots.push_back(p);
      }
    }
    if (s.composition == Composition::PilotOnly && s.pilots.empty())
      throw core::ConfigError("PilotOnly composition needs a \"pilots\" list");

    s.max_resources = j.value("max_resources", wlms::kDefaultMaxResources);
    if (j.contains("perturbation")) s.jitter_fraction = j["perturbation"].value("fraction", 0.0);
    if (s.jitter_fraction < 0.0 || s.jitter_fraction >= 1.0)
      throw core::ConfigError("perturbation fraction must be in [0, 1)");

    if (j.contains("faults")) {
      for (const auto& fj : j["faults"]) {
        wlms::Fault f;
        f.time = fj.at("time").get<double>();
        f.kind = fj.at("kind").get<std::string>();
        f.target = fj.at("target").get<std::string>();
        if (f.kind != "kill_pilot" && f.kind != "kill_unit")
          throw core::ConfigError("fault kind must be kill_pilot|kill_unit");
        s.faults.push_back(f);
      }
    }
  } catch (const core::ConfigError&) {
    throw;
  } catch (const core::Error& e) {
    throw core::ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw core::ConfigError(e.what());
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw core::ConfigError("cannot open scenario file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw core::ConfigError("scenario file is not valid JSON: " + path);
  return scenario_from_json(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace blockflow::harness
