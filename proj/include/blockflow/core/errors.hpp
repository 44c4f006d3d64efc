#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace blockflow::core {

// Base class for every error raised by the toolkit. `code()` is a stable
// machine-readable tag; what() carries the human-readable detail.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

// --- entity model ---

class CycleDetected : public Error {
public:
  explicit CycleDetected(std::vector<std::string> cycle_path)
      : Error("CycleDetected", "dependency cycle: " + join(cycle_path)),
        path(std::move(cycle_path)) {}

  std::vector<std::string> path;

private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out;
    for (const auto& id : p) {
      if (!out.empty()) out += " -> ";
      out += id;
    }
    return out;
  }
};

class UnknownEndpoint : public Error {
public:
  explicit UnknownEndpoint(const std::string& id)
      : Error("UnknownEndpoint", "edge endpoint not in task set: " + id), task_id(id) {}
  std::string task_id;
};

class DuplicateId : public Error {
public:
  explicit DuplicateId(const std::string& id)
      : Error("DuplicateId", "duplicate task id: " + id), task_id(id) {}
  std::string task_id;
};

class InvalidDag : public Error {
public:
  explicit InvalidDag(const std::string& why) : Error("InvalidDag", why) {}
};

class IllegalTransition : public Error {
public:
  IllegalTransition(const std::string& from, const std::string& event)
      : Error("IllegalTransition", "no transition from " + from + " on " + event),
        from_state(from), on_event(event) {}
  std::string from_state;
  std::string on_event;
};

class MissingField : public Error {
public:
  explicit MissingField(const std::string& name)
      : Error("MissingField", "missing required field: " + name), field(name) {}
  std::string field;
};

class BadValue : public Error {
public:
  BadValue(const std::string& field_name, const std::string& reason)
      : Error("BadValue", field_name + ": " + reason), field(field_name) {}
  std::string field;
};

// --- resource layer ---

class OversizedJob : public Error {
public:
  OversizedJob(int requested, int total)
      : Error("OversizedJob", "job wants " + std::to_string(requested) + " cores, resource has " +
                                  std::to_string(total)) {}
};

class UnknownQueue : public Error {
public:
  explicit UnknownQueue(const std::string& name)
      : Error("UnknownQueue", "no such queue: " + name) {}
};

class WalltimeExceedsQueueLimit : public Error {
public:
  WalltimeExceedsQueueLimit(double requested, double limit)
      : Error("WalltimeExceedsQueueLimit",
              "walltime " + std::to_string(requested) + "s exceeds queue limit " +
                  std::to_string(limit) + "s") {}
};

class UnknownJob : public Error {
public:
  explicit UnknownJob(const std::string& id) : Error("UnknownJob", "no such job: " + id) {}
};

// --- pilot runtime ---

class DuplicateUnitId : public Error {
public:
  explicit DuplicateUnitId(const std::string& id)
      : Error("DuplicateUnitId", "duplicate unit id: " + id) {}
};

// --- workload manager ---

class NoFeasibleResource : public Error {
public:
  explicit NoFeasibleResource(int largest_task_cores)
      : Error("NoFeasibleResource", "no resource fits a " + std::to_string(largest_task_cores) +
                                        "-core task") {}
};

class ExecutionFailed : public Error {
public:
  explicit ExecutionFailed(std::vector<std::string> failed_tasks)
      : Error("ExecutionFailed", std::to_string(failed_tasks.size()) + " task(s) failed"),
        task_ids(std::move(failed_tasks)) {}
  std::vector<std::string> task_ids;
};

// --- ensemble kit ---

class InvalidSpec : public Error {
public:
  explicit InvalidSpec(const std::string& why) : Error("InvalidSpec", why) {}
};

class BadSyncPoint : public Error {
public:
  explicit BadSyncPoint(int index)
      : Error("BadSyncPoint", "sync point " + std::to_string(index) + " out of range") {}
};

// --- interop ---

class ParseError : public Error {
public:
  ParseError(int line_number, const std::string& reason)
      : Error("ParseError", "line " + std::to_string(line_number) + ": " + reason),
        line(line_number) {}
  int line;
};

class UnresolvedDependency : public Error {
public:
  explicit UnresolvedDependency(const std::string& id)
      : Error("UnresolvedDependency", "depends on unknown task: " + id), task_id(id) {}
  std::string task_id;
};

class QueueClosed : public Error {
public:
  explicit QueueClosed(const std::string& name)
      : Error("QueueClosed", "broker queue closed: " + name) {}
};

// --- harness ---

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& why) : Error("ConfigError", why) {}
};

class MalformedLog : public Error {
public:
  explicit MalformedLog(const std::string& why) : Error("MalformedLog", why) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& why) : Error("IoError", why) {}
};

}  // namespace blockflow::core
