#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blockflow/core/errors.hpp"

namespace blockflow::core {

// Shortest round-trip decimal form, identical on every run.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// Simulated time owned by whichever loop drives a scenario.
struct SimClock {
  double now = 0.0;
};

using Attrs = std::vector<std::pair<std::string, std::string>>;

struct Event {
  double time = 0.0;
  std::string entity;
  std::string kind;
  Attrs attrs;

  std::string attr(const std::string& key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return v;
    return {};
  }
};

// Append-only, time-ordered record that every block writes into. Appending
// is the only mutation; serialization is line-delimited JSON with stable key
// order so identical runs produce identical bytes.
class EventLog {
public:
  void append(double time, std::string entity, std::string kind, Attrs attrs = {}) {
    if (!events_.empty() && time < events_.back().time - 1e-9)
      throw MalformedLog("event at t=" + fmt_double(time) + " before t=" +
                         fmt_double(events_.back().time));
    events_.push_back(Event{time, std::move(entity), std::move(kind), std::move(attrs)});
  }

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  void write_jsonl(std::ostream& out) const {
    for (const auto& e : events_) {
      nlohmann::ordered_json j;
      j["t"] = e.time;
      j["entity"] = e.entity;
      j["kind"] = e.kind;
      for (const auto& [k, v] : e.attrs) j[k] = v;
      out << j.dump() << '\n';
    }
  }

  static EventLog read_jsonl(std::istream& in) {
    EventLog log;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::ordered_json j = nlohmann::ordered_json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("t") || !j.contains("entity") || !j.contains("kind"))
        throw MalformedLog("bad log line " + std::to_string(lineno));
      Event e;
      e.time = j["t"].get<double>();
      e.entity = j["entity"].get<std::string>();
      e.kind = j["kind"].get<std::string>();
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "t" || it.key() == "entity" || it.key() == "kind") continue;
        e.attrs.emplace_back(it.key(), it.value().get<std::string>());
      }
      log.events_.push_back(std::move(e));
    }
    return log;
  }

private:
  std::vector<Event> events_;
};

}  // namespace blockflow::core
