#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockflow/core/errors.hpp"

namespace blockflow::core {

// One shared vocabulary of states; each entity kind uses a subset.
enum class State { New, Scheduled, Submitted, Executing, Queued, Active, Running, Done, Failed, Canceled };

enum class TransitionEvent { Schedule, Submit, Execute, Activate, Run, Complete, Fail, Cancel };

enum class EntityKind { TaskUnit, Pilot, Job };

inline const char* to_string(State s) {
  switch (s) {
    case State::New: return "New";
    case State::Scheduled: return "Scheduled";
    case State::Submitted: return "Submitted";
    case State::Executing: return "Executing";
    case State::Queued: return "Queued";
    case State::Active: return "Active";
    case State::Running: return "Running";
    case State::Done: return "Done";
    case State::Failed: return "Failed";
    case State::Canceled: return "Canceled";
  }
  return "?";
}

inline const char* to_string(TransitionEvent e) {
  switch (e) {
    case TransitionEvent::Schedule: return "Schedule";
    case TransitionEvent::Submit: return "Submit";
    case TransitionEvent::Execute: return "Execute";
    case TransitionEvent::Activate: return "Activate";
    case TransitionEvent::Run: return "Run";
    case TransitionEvent::Complete: return "Complete";
    case TransitionEvent::Fail: return "Fail";
    case TransitionEvent::Cancel: return "Cancel";
  }
  return "?";
}

inline const char* to_string(EntityKind k) {
  switch (k) {
    case EntityKind::TaskUnit: return "TaskUnit";
    case EntityKind::Pilot: return "Pilot";
    case EntityKind::Job: return "Job";
  }
  return "?";
}

inline bool is_terminal(State s) {
  return s == State::Done || s == State::Failed || s == State::Canceled;
}

// Transition tables.
//   Task/Unit: New -> Scheduled -> Submitted -> Executing -> {Done, Failed, Canceled}
//   Pilot:     New -> Queued -> Active -> {Done, Failed, Canceled}
//   Job:       New -> Queued -> Running -> {Done, Failed, Canceled}
// Fail and Cancel are accepted from any non-terminal state.
inline std::optional<State> transition_state(EntityKind kind, State from, TransitionEvent event) {
  if (is_terminal(from)) return std::nullopt;
  if (event == TransitionEvent::Cancel) return State::Canceled;
  if (event == TransitionEvent::Fail) return State::Failed;
  switch (kind) {
    case EntityKind::TaskUnit:
      if (from == State::New && event == TransitionEvent::Schedule) return State::Scheduled;
      if (from == State::Scheduled && event == TransitionEvent::Submit) return State::Submitted;
      if (from == State::Submitted && event == TransitionEvent::Execute) return State::Executing;
      if (from == State::Executing && event == TransitionEvent::Complete) return State::Done;
      break;
    case EntityKind::Pilot:
      if (from == State::New && event == TransitionEvent::Submit) return State::Queued;
      if (from == State::Queued && event == TransitionEvent::Activate) return State::Active;
      if (from == State::Active && event == TransitionEvent::Complete) return State::Done;
      break;
    case EntityKind::Job:
      if (from == State::New && event == TransitionEvent::Submit) return State::Queued;
      if (from == State::Queued && event == TransitionEvent::Run) return State::Running;
      if (from == State::Running && event == TransitionEvent::Complete) return State::Done;
      break;
  }
  return std::nullopt;
}

struct StateRecord {
  State state;
  double timestamp;
  std::string actor;

  bool operator==(const StateRecord&) const = default;
};

// Value-semantics state holder; transition() returns a new value so replaying
// a history is trivially reproducible.
struct EntityState {
  EntityKind kind = EntityKind::TaskUnit;
  State current = State::New;
  std::vector<StateRecord> history;

  bool operator==(const EntityState&) const = default;
};

inline EntityState make_state(EntityKind kind, double now, const std::string& actor) {
  return EntityState{kind, State::New, {StateRecord{State::New, now, actor}}};
}

inline EntityState transition(const EntityState& es, TransitionEvent event, double now,
                              const std::string& actor) {
  auto next = transition_state(es.kind, es.current, event);
  if (!next) throw IllegalTransition(to_string(es.current), to_string(event));
  if (!es.history.empty() && now < es.history.back().timestamp)
    throw BadValue("timestamp", "history timestamps must be non-decreasing");
  EntityState out = es;
  out.current = *next;
  out.history.push_back(StateRecord{*next, now, actor});
  return out;
}

}  // namespace blockflow::core
