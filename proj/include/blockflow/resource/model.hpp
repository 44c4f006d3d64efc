#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "blockflow/core/errors.hpp"
#include "blockflow/core/rand.hpp"

namespace blockflow::resource {

enum class QueuePolicy { FCFS, FCFS_BACKFILL };

inline const char* to_string(QueuePolicy p) {
  return p == QueuePolicy::FCFS ? "FCFS" : "FCFS_BACKFILL";
}

struct QueueSpec {
  std::string name;
  double max_walltime = 0.0;
  QueuePolicy policy = QueuePolicy::FCFS;
};

struct TraceEntry {
  double arrival_time = 0.0;
  int cores = 0;
  double duration = 0.0;
};

enum class Connectivity { full, none };

// Capability description of one resource: core pool, queues and their
// policies, plus a synthetic competing-load trace replayed by the simulated
// backend.
struct ResourceModel {
  std::string resource_id;
  int total_cores = 0;
  std::vector<QueueSpec> queues;
  std::vector<TraceEntry> background_load_trace;
  Connectivity connectivity = Connectivity::full;

  const QueueSpec* find_queue(const std::string& name) const {
    for (const auto& q : queues)
      if (q.name == name) return &q;
    return nullptr;
  }
};

inline void validate(const ResourceModel& m) {
  if (m.resource_id.empty()) throw core::MissingField("resource_id");
  if (m.total_cores <= 0) throw core::BadValue("total_cores", "must be > 0");
  if (m.queues.empty()) throw core::BadValue("queues", "at least one queue required");
  for (const auto& q : m.queues) {
    if (q.name.empty()) throw core::MissingField("queues[].name");
    if (q.max_walltime <= 0) throw core::BadValue("max_walltime", "must be > 0");
  }
  for (const auto& e : m.background_load_trace) {
    if (e.cores <= 0 || e.cores > m.total_cores)
      throw core::BadValue("trace", "entry cores must be in [1, total_cores]");
    if (e.duration <= 0 || e.arrival_time < 0)
      throw core::BadValue("trace", "entry needs arrival >= 0 and duration > 0");
  }
}

// Deterministic synthetic trace: `count` jobs spread over [0, horizon) with
// core counts and durations drawn from the given ranges.
struct TraceGenSpec {
  std::uint64_t seed = 0;
  int count = 0;
  double horizon = 0.0;
  int min_cores = 1, max_cores = 1;
  double min_duration = 1.0, max_duration = 1.0;
};

inline std::vector<TraceEntry> generate_trace(const TraceGenSpec& g) {
  core::Rng rng(g.seed);
  std::vector<TraceEntry> out;
  out.reserve(static_cast<std::size_t>(g.count));
  for (int i = 0; i < g.count; ++i) {
    TraceEntry e;
    e.arrival_time = g.horizon * rng.unit();
    e.cores = static_cast<int>(rng.range(g.min_cores, g.max_cores));
    e.duration = g.min_duration + (g.max_duration - g.min_duration) * rng.unit();
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const TraceEntry& a, const TraceEntry& b) {
    return a.arrival_time < b.arrival_time;
  });
  return out;
}

// Config file schema:
//   {"resource_id": ..., "total_cores": ..., "queues": [{"name": ...,
//    "max_walltime": ..., "policy": "FCFS"|"FCFS_BACKFILL"}, ...],
//    "trace": [[t, cores, dur], ...]}
// An optional "trace_gen" object may replace or extend "trace".
inline ResourceModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw core::ConfigError("resource model must be an object");
  ResourceModel m;
  if (!j.contains("resource_id")) throw core::MissingField("resource_id");
  m.resource_id = j["resource_id"].get<std::string>();
  if (!j.contains("total_cores")) throw core::MissingField("total_cores");
  m.total_cores = j["total_cores"].get<int>();
  if (j.contains("queues")) {
    for (const auto& q : j["queues"]) {
      QueueSpec spec;
      spec.name = q.at("name").get<std::string>();
      spec.max_walltime = q.at("max_walltime").get<double>();
      std::string policy = q.value("policy", "FCFS");
      if (policy == "FCFS")
        spec.policy = QueuePolicy::FCFS;
      else if (policy == "FCFS_BACKFILL")
        spec.policy = QueuePolicy::FCFS_BACKFILL;
      else
        throw core::BadValue("policy", "unknown queue policy: " + policy);
      m.queues.push_back(spec);
    }
  }
  if (j.contains("trace")) {
    for (const auto& row : j["trace"]) {
      if (!row.is_array() || row.size() != 3)
        throw core::BadValue("trace", "expected [t, cores, dur] triples");
      m.background_load_trace.push_back(
          TraceEntry{row[0].get<double>(), row[1].get<int>(), row[2].get<double>()});
    }
  }
  if (j.contains("trace_gen")) {
    const auto& g = j["trace_gen"];
    TraceGenSpec spec;
    spec.seed = g.value("seed", 0ull);
    spec.count = g.at("count").get<int>();
    spec.horizon = g.at("horizon").get<double>();
    spec.min_cores = g.value("min_cores", 1);
    spec.max_cores = g.value("max_cores", spec.min_cores);
    spec.min_duration = g.value("min_duration", 1.0);
    spec.max_duration = g.value("max_duration", spec.min_duration);
    auto gen = generate_trace(spec);
    m.background_load_trace.insert(m.background_load_trace.end(), gen.begin(), gen.end());
    std::stable_sort(m.background_load_trace.begin(), m.background_load_trace.end(),
                     [](const TraceEntry& a, const TraceEntry& b) {
                       return a.arrival_time < b.arrival_time;
                     });
  }
  if (j.contains("connectivity")) {
    std::string c = j["connectivity"].get<std::string>();
    if (c == "full")
      m.connectivity = Connectivity::full;
    else if (c == "none")
      m.connectivity = Connectivity::none;
    else
      throw core::BadValue("connectivity", "expected full|none");
  }
  validate(m);
  return m;
}

inline nlohmann::ordered_json model_to_json(const ResourceModel& m) {
  nlohmann::ordered_json j;
  j["resource_id"] = m.resource_id;
  j["total_cores"] = m.total_cores;
  j["queues"] = nlohmann::ordered_json::array();
  for (const auto& q : m.queues)
    j["queues"].push_back({{"name", q.name},
                           {"max_walltime", q.max_walltime},
                           {"policy", to_string(q.policy)}});
  j["trace"] = nlohmann::ordered_json::array();
  for (const auto& e : m.background_load_trace)
    j["trace"].push_back({e.arrival_time, e.cores, e.duration});
  j["connectivity"] = m.connectivity == Connectivity::full ? "full" : "none";
  return j;
}

}  // namespace blockflow::resource
