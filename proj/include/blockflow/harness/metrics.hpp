#pragma once

#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "blockflow/core/errors.hpp"
#include "blockflow/core/events.hpp"

namespace blockflow::harness {

struct Metrics {
  double ttc = 0.0;
  std::map<std::string, double> utilization_per_resource;  // used / offered core-seconds
  double utilization = 0.0;                                // overall ratio, 0 when no pilots
  double mean_queue_wait = 0.0;                            // over api-submitted jobs
  int tasks_done = 0;
  int tasks_failed = 0;
  int resubmissions = 0;

  bool operator==(const Metrics&) const = default;
};

// Pure function of the event log: everything is reconstructed from events.
inline Metrics compute_metrics(const core::EventLog& log) {
  Metrics m;
  if (log.empty()) return m;
  double horizon = log.events().back().time;

  double first_submit = -1.0, last_end = -1.0;
  int declared_tasks = -1;
  std::set<std::string> done_tasks, seen_tasks;
  std::map<std::string, double> job_submit;     // api jobs awaiting start
  double wait_sum = 0.0;
  int wait_count = 0;

  struct PilotSpan {
    std::string resource;
    int cores = 0;
    double active = -1.0, end = -1.0;
  };
  std::map<std::string, PilotSpan> pilots;
  struct UnitSpan {
    std::string pilot;
    int cores = 0;
    double start = -1.0;
  };
  std::map<std::string, UnitSpan> executing;
  std::map<std::string, double> used_per_resource;

  for (const auto& e : log.events()) {
    if (e.kind == "run_started") {
      declared_tasks = std::stoi(e.attr("tasks"));
      if (first_submit < 0) first_submit = e.time;
    } else if (e.kind == "job_submitted") {
      if (e.attr("origin") == "api") {
        job_submit[e.entity] = e.time;
        if (first_submit < 0) first_submit = e.time;
      }
    } else if (e.kind == "job_started") {
      auto it = job_submit.find(e.entity);
      if (it != job_submit.end()) {
        wait_sum += e.time - it->second;
        wait_count++;
        job_submit.erase(it);
      }
    } else if (e.kind == "pilot_submitted") {
      pilots[e.attr("pilot")].resource = e.attr("resource");
      if (first_submit < 0) first_submit = e.time;
    } else if (e.kind == "pilot_active") {
      PilotSpan& p = pilots[e.attr("pilot")];
      p.cores = std::stoi(e.attr("cores"));
      p.active = e.time;
    } else if (e.kind == "pilot_done" || e.kind == "pilot_failed" ||
               e.kind == "pilot_canceled") {
      pilots[e.attr("pilot")].end = e.time;
    } else if (e.kind == "unit_submitted") {
      if (first_submit < 0) first_submit = e.time;
      seen_tasks.insert(e.attr("task"));
    } else if (e.kind == "unit_started") {
      executing[e.attr("unit")] =
          UnitSpan{e.attr("pilot"), std::stoi(e.attr("cores")), e.time};
    } else if (e.kind == "unit_done" || e.kind == "unit_failed") {
      auto it = executing.find(e.attr("unit"));
      if (it != executing.end()) {
        const UnitSpan& u = it->second;
        auto pit = pilots.find(u.pilot);
        if (pit != pilots.end())
          used_per_resource[pit->second.resource] +=
              static_cast<double>(u.cores) * (e.time - u.start);
        executing.erase(it);
      }
      if (e.kind == "unit_done") {
        done_tasks.insert(e.attr("task"));
        last_end = std::max(last_end, e.time);
      }
    } else if (e.kind == "unit_resubmitted") {
      m.resubmissions++;
    }
  }

  if (first_submit >= 0 && last_end > first_submit) m.ttc = last_end - first_submit;
  m.tasks_done = static_cast<int>(done_tasks.size());
  int total = declared_tasks >= 0 ? declared_tasks : static_cast<int>(seen_tasks.size());
  if (m.tasks_done > total) throw core::MalformedLog("more tasks done than declared");
  m.tasks_failed = total - m.tasks_done;
  if (wait_count > 0) m.mean_queue_wait = wait_sum / wait_count;

  std::map<std::string, double> offered_per_resource;
  for (const auto& [id, p] : pilots) {
    if (p.active < 0) continue;
    double end = p.end >= 0 ? p.end : horizon;
    offered_per_resource[p.resource] += static_cast<double>(p.cores) * (end - p.active);
  }
  double used_total = 0.0, offered_total = 0.0;
  for (const auto& [res, offered] : offered_per_resource) {
    double used = used_per_resource.count(res) ? used_per_resource.at(res) : 0.0;
    m.utilization_per_resource[res] = offered > 0 ? used / offered : 0.0;
    used_total += used;
    offered_total += offered;
  }
  if (offered_total > 0) m.utilization = used_total / offered_total;
  return m;
}

inline constexpr const char* kCsvHeader = "ttc,utilization,mean_wait,done,failed,resubmitted";

inline void emit_csv(const Metrics& m, std::ostream& out) {
  out << kCsvHeader << '\n'
      << core::fmt_double(m.ttc) << ',' << core::fmt_double(m.utilization) << ','
      << core::fmt_double(m.mean_queue_wait) << ',' << m.tasks_done << ',' << m.tasks_failed
      << ',' << m.resubmissions << '\n';
}

inline void emit_text(const Metrics& m, std::ostream& out) {
  out << "ttc: " << core::fmt_double(m.ttc) << "\n"
      << "utilization: " << core::fmt_double(m.utilization) << "\n"
      << "mean_wait: " << core::fmt_double(m.mean_queue_wait) << "\n"
      << "done: " << m.tasks_done << "\n"
      << "failed: " << m.tasks_failed << "\n"
      << "resubmitted: " << m.resubmissions << "\n";
  for (const auto& [res, u] : m.utilization_per_resource)
    out << "utilization[" << res << "]: " << core::fmt_double(u) << "\n";
}

inline Metrics parse_csv(std::istream& in) {
  std::string header, row;
  if (!std::getline(in, header) || header != kCsvHeader)
    throw core::ParseError(1, "bad metrics header");
  if (!std::getline(in, row)) throw core::ParseError(2, "missing metrics row");
  std::stringstream ss(row);
  std::string field;
  Metrics m;
  auto next = [&] {
    if (!std::getline(ss, field, ',')) throw core::ParseError(2, "short metrics row");
    return field;
  };
  m.ttc = std::stod(next());
  m.utilization = std::stod(next());
  m.mean_queue_wait = std::stod(next());
  m.tasks_done = std::stoi(next());
  m.tasks_failed = std::stoi(next());
  m.resubmissions = std::stoi(next());
  return m;
}

}  // namespace blockflow::harness
