#pragma once

#include <deque>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockflow/core/errors.hpp"
#include "blockflow/core/events.hpp"
#include "blockflow/core/translate.hpp"
#include "blockflow/pilot/runtime.hpp"
#include "blockflow/pilot/saga_connector.hpp"

namespace blockflow::interop {

enum class MessageKind { TaskSubmit, CapacityReport, StateUpdate };

inline const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::TaskSubmit: return "TaskSubmit";
    case MessageKind::CapacityReport: return "CapacityReport";
    case MessageKind::StateUpdate: return "StateUpdate";
  }
  return "?";
}

// Protocol unit: tasks and resource information only. No workflow semantics,
// and deliberately no pilot identifiers anywhere in the schema.
struct BrokerMessage {
  MessageKind kind = MessageKind::TaskSubmit;
  nlohmann::ordered_json payload;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = to_string(kind);
    j["payload"] = payload;
    return j;
  }

  static BrokerMessage from_json(const nlohmann::ordered_json& j) {
    BrokerMessage m;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "TaskSubmit")
      m.kind = MessageKind::TaskSubmit;
    else if (kind == "CapacityReport")
      m.kind = MessageKind::CapacityReport;
    else if (kind == "StateUpdate")
      m.kind = MessageKind::StateUpdate;
    else
      throw core::BadValue("kind", "unknown broker message kind: " + kind);
    m.payload = j.at("payload");
    return m;
  }
};

// FIFO queue standing in for the coordination database; every message is
// also persisted to an append-only line-delimited JSON file.
class BrokerQueue {
public:
  explicit BrokerQueue(std::string name, std::string persist_path = {})
      : name_(std::move(name)) {
    if (!persist_path.empty()) {
      persist_.open(persist_path, std::ios::app);
      if (!persist_) throw core::IoError("cannot open broker persistence file " + persist_path);
    }
  }

  void push(const BrokerMessage& msg) {
    if (!open_) throw core::QueueClosed(name_);
    if (persist_.is_open()) {
      persist_ << msg.to_json().dump() << '\n';
      persist_.flush();
    }
    messages_.push_back(msg);
  }

  std::vector<BrokerMessage> poll() {
    if (!open_) throw core::QueueClosed(name_);
    std::vector<BrokerMessage> out(messages_.begin(), messages_.end());
    messages_.clear();
    return out;
  }

  void close() { open_ = false; }
  bool is_open() const { return open_; }
  std::size_t size() const { return messages_.size(); }
  const std::string& name() const { return name_; }

private:
  std::string name_;
  std::deque<BrokerMessage> messages_;
  bool open_ = true;
  std::ofstream persist_;
};

inline BrokerMessage make_task_submit(const core::TaskDescription& task) {
  BrokerMessage m;
  m.kind = MessageKind::TaskSubmit;
  m.payload = core::to_record(task);
  return m;
}

// Executor side of the broker protocol: behaves like a resource queue. The
// broker never learns about pilots, only about task terminal states and
// aggregated capacity.
class BrokerExecutor {
public:
  BrokerExecutor(core::SimClock& clock, core::EventLog& log, resource::Resource* res,
                 std::vector<pilot::PilotDescription> pilots)
      : clock_(clock), log_(log), runtime_(clock, log, connector_) {
    if (res->model().connectivity == resource::Connectivity::none)
      throw core::ConfigError("resource " + res->model().resource_id +
                              " has no WAN connectivity; broker interface unavailable");
    connector_.add_resource(res);
    for (const auto& pd : pilots) runtime_.submit_pilot(pd);
  }

  // Consumes TaskSubmits from `submissions`, runs them, answers with one
  // terminal StateUpdate per task plus CapacityReports whenever the
  // aggregated capacity changes.
  void serve(BrokerQueue& submissions, BrokerQueue& reports) {
    for (const auto& msg : submissions.poll()) {
      if (msg.kind != MessageKind::TaskSubmit) continue;
      core::TaskDescription task = core::translate_task(msg.payload);
      runtime_.submit_units({pilot::make_unit(task)});
    }
    report_capacity(reports);
    runtime_.advance_to(clock_.now);
    flush(reports);
    while (true) {
      double t = std::numeric_limits<double>::infinity();
      if (auto tc = connector_.next_event_time()) t = std::min(t, *tc);
      if (auto tr = runtime_.next_event_time()) t = std::min(t, *tr);
      if (!std::isfinite(t)) break;
      clock_.now = std::max(clock_.now, t);
      connector_.advance_to(t);
      runtime_.advance_to(t);
      flush(reports);
    }
  }

  pilot::PilotRuntime& runtime() { return runtime_; }

private:
  void flush(BrokerQueue& reports) {
    for (const auto& u : runtime_.drain_finished()) {
      BrokerMessage m;
      m.kind = MessageKind::StateUpdate;
      m.payload["task"] = u.task.task_id;
      m.payload["state"] = core::to_string(u.state.current);
      m.payload["start"] = u.start_time;
      m.payload["end"] = u.end_time;
      if (!u.fail_reason.empty()) m.payload["reason"] = u.fail_reason;
      reports.push(m);
    }
    report_capacity(reports);
  }

  void report_capacity(BrokerQueue& reports) {
    pilot::AggregatedCapacity cap = runtime_.expose_capacity();
    if (have_last_ && cap.total_free_cores == last_free_ &&
        cap.total_remaining_seconds == last_remaining_)
      return;
    have_last_ = true;
    last_free_ = cap.total_free_cores;
    last_remaining_ = cap.total_remaining_seconds;
    BrokerMessage m;
    m.kind = MessageKind::CapacityReport;
    m.payload["t"] = clock_.now;
    m.payload["free_cores"] = cap.total_free_cores;
    m.payload["remaining_seconds"] = cap.total_remaining_seconds;
    reports.push(m);
    log_.append(clock_.now, "broker", "capacity",
                {{"free_cores", std::to_string(cap.total_free_cores)},
                 {"remaining_seconds", core::fmt_double(cap.total_remaining_seconds)}});
  }

  core::SimClock& clock_;
  core::EventLog& log_;
  pilot::SagaConnector connector_;
  pilot::PilotRuntime runtime_;
  bool have_last_ = false;
  int last_free_ = 0;
  double last_remaining_ = 0.0;
};

}  // namespace blockflow::interop
