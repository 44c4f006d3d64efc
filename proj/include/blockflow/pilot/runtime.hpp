#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "blockflow/core/errors.hpp"
#include "blockflow/core/events.hpp"
#include "blockflow/core/state.hpp"
#include "blockflow/pilot/connector.hpp"
#include "blockflow/pilot/types.hpp"

namespace blockflow::pilot {

// What a scheduler sees of one pilot when placing a unit.
struct PilotView {
  std::size_t index = 0;  // global submission order
  std::string pilot_id;
  int free_cores = 0;
  double remaining_seconds = 0.0;
  int total_cores = 0;
};

// Placement policy for one unit over the currently eligible pilots.
class UnitScheduler {
public:
  virtual ~UnitScheduler() = default;
  virtual std::size_t place(const ComputeUnit& unit, const std::vector<PilotView>& eligible) = 0;
};

// Default policy: FIFO over units (imposed by the caller), round-robin over
// eligible pilots.
class RoundRobinScheduler : public UnitScheduler {
public:
  std::size_t place(const ComputeUnit&, const std::vector<PilotView>& eligible) override {
    std::size_t best = 0;
    bool found = false;
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      if (eligible[i].index >= cursor_) {
        best = i;
        found = true;
        break;
      }
    }
    if (!found) best = 0;  // wrap
    cursor_ = eligible[best].index + 1;
    return best;
  }

private:
  std::size_t cursor_ = 0;
};

struct PilotInfo {
  std::string pilot_id;
  PilotDescription description;
  core::State state = core::State::New;
  std::string job_id;
  double activation_time = -1.0;
  double end_time = -1.0;  // planned while Active, actual once terminal
};

// L2 runtime: acquires placeholders through a connector, keeps units unbound
// until an Active pilot has free core slots and enough remaining lifetime,
// then executes them against those slots. Simulated unit runtime equals the
// estimate unless a jitter function is installed.
class PilotRuntime {
public:
  PilotRuntime(core::SimClock& clock, core::EventLog& log, ResourceConnector& connector)
      : clock_(clock), log_(log), connector_(connector),
        scheduler_(std::make_shared<RoundRobinScheduler>()) {}

  void set_scheduler(std::shared_ptr<UnitScheduler> s) { scheduler_ = std::move(s); }
  void set_runtime_jitter(std::function<double(const ComputeUnit&)> j) { jitter_ = std::move(j); }

  std::string submit_pilot(const PilotDescription& pd) {
    std::string job_id = connector_.submit_placeholder(pd);
    std::string pilot_id = "p" + std::to_string(++pilot_seq_);
    PilotRec rec;
    rec.info.pilot_id = pilot_id;
    rec.info.description = pd;
    rec.info.job_id = job_id;
    rec.state = core::make_state(core::EntityKind::Pilot, clock_.now, "pilot-manager");
    rec.state = core::transition(rec.state, core::TransitionEvent::Submit, clock_.now,
                                 "pilot-manager");
    rec.info.state = rec.state.current;
    rec.free_cores = pd.cores;
    pilots_.push_back(rec);
    log_.append(clock_.now, "pilot:" + pilot_id, "pilot_submitted",
                {{"pilot", pilot_id},
                 {"resource", pd.target_resource},
                 {"cores", std::to_string(pd.cores)},
                 {"duration", core::fmt_double(pd.duration)},
                 {"queue", pd.queue_name},
                 {"job", job_id}});
    return pilot_id;
  }

  // Units enter New; nothing is bound here (late binding).
  std::vector<std::string> submit_units(const std::vector<ComputeUnit>& units) {
    std::vector<std::string> accepted;
    for (const auto& incoming : units) {
      if (units_.count(incoming.unit_id)) throw core::DuplicateUnitId(incoming.unit_id);
      core::validate(incoming.task);
      ComputeUnit u = incoming;
      u.state = core::make_state(core::EntityKind::TaskUnit, clock_.now, "unit-manager");
      units_.emplace(u.unit_id, u);
      pending_.push_back(u.unit_id);
      log_.append(clock_.now, "unit:" + u.unit_id, "unit_submitted",
                  {{"unit", u.unit_id},
                   {"task", u.task.task_id},
                   {"cores", std::to_string(u.task.cores)},
                   {"attempt", std::to_string(u.attempt)}});
      accepted.push_back(u.unit_id);
    }
    return accepted;
  }

  void pin_unit(const std::string& unit_id, const std::string& pilot_id) {
    unit_ref(unit_id).pinned_pilot = pilot_id;
  }

  // One scheduling pass at time `at`; returns (unit, pilot) assignments.
  std::vector<std::pair<std::string, std::string>> bind_units(double at) {
    std::vector<std::pair<std::string, std::string>> assignments;
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& unit_id : std::vector<std::string>(pending_.begin(), pending_.end())) {
        ComputeUnit& u = unit_ref(unit_id);
        if (u.state.current != core::State::New) continue;

        std::vector<PilotView> eligible;
        for (std::size_t i = 0; i < pilots_.size(); ++i) {
          PilotRec& p = pilots_[i];
          if (p.state.current != core::State::Active) continue;
          if (u.pinned_pilot && *u.pinned_pilot != p.info.pilot_id) continue;
          double remaining = p.info.end_time - at;
          if (p.free_cores >= u.task.cores && remaining >= u.task.runtime_estimate)
            eligible.push_back(PilotView{i, p.info.pilot_id, p.free_cores, remaining,
                                         p.info.description.cores});
        }
        if (eligible.empty()) {
          if (!u.pinned_pilot && never_schedulable(u, at)) fail_unit_at(u, "Unschedulable", at);
          continue;
        }
        std::size_t pick = scheduler_->place(u, eligible);
        start_unit(u, pilots_[eligible[pick].index], at);
        assignments.emplace_back(u.unit_id, eligible[pick].pilot_id);
        progress = true;
      }
    }
    return assignments;
  }

  // Processes discovered pilot activations/terminations and scheduled unit
  // completions up to time t. Events sharing a timestamp are drained as one
  // group (completions first, then activations, then endings) before a bind
  // pass runs at that instant.
  void advance_to(double t) {
    poll_pilots();
    while (!queue_.empty() && queue_.begin()->time <= t + 1e-12) {
      double group_time = queue_.begin()->time;
      while (!queue_.empty() && queue_.begin()->time <= group_time + 1e-12) {
        InternalEvent ev = *queue_.begin();
        queue_.erase(queue_.begin());
        dispatch(ev);
      }
      bind_units(group_time);
      poll_pilots();
    }
    bind_units(t);
  }

  std::optional<double> next_event_time() const {
    if (queue_.empty()) return std::nullopt;
    return queue_.begin()->time;
  }

  // Standalone driver: interleaves connector and runtime events until
  // neither side has any left. Owns the clock for the duration.
  void run_to_completion() {
    advance_to(clock_.now);
    while (true) {
      double t = std::numeric_limits<double>::infinity();
      if (auto tc = connector_.next_event_time()) t = std::min(t, *tc);
      if (auto tu = next_event_time()) t = std::min(t, *tu);
      if (!std::isfinite(t)) break;
      clock_.now = std::max(clock_.now, t);
      connector_.advance_to(t);
      advance_to(t);
    }
  }

  // Terminal units since the previous call.
  std::vector<ComputeUnit> drain_finished() {
    std::vector<ComputeUnit> out;
    out.swap(finished_);
    return out;
  }

  void fail_unit(const std::string& unit_id, const std::string& reason) {
    fail_unit_at(unit_ref(unit_id), reason, clock_.now);
  }

  void cancel_pilot(const std::string& pilot_id) {
    connector_.cancel(pilot_rec(pilot_id).info.job_id);
  }

  AggregatedCapacity expose_capacity() const {
    std::vector<std::string> ids;
    for (const auto& p : pilots_) ids.push_back(p.info.pilot_id);
    return expose_capacity(ids);
  }

  AggregatedCapacity expose_capacity(const std::vector<std::string>& pilot_ids) const {
    AggregatedCapacity cap;
    for (const auto& id : pilot_ids) {
      const PilotRec* p = nullptr;
      for (const auto& rec : pilots_)
        if (rec.info.pilot_id == id) p = &rec;
      if (!p || p->state.current != core::State::Active) continue;
      AggregatedCapacity::PilotCapacity pc;
      pc.pilot_id = id;
      pc.free_cores = p->free_cores;
      pc.remaining_seconds = std::max(0.0, p->info.end_time - clock_.now);
      cap.total_free_cores += pc.free_cores;
      cap.total_remaining_seconds += pc.remaining_seconds;
      cap.pilots.push_back(pc);
    }
    return cap;
  }

  const ComputeUnit& unit(const std::string& unit_id) const {
    auto it = units_.find(unit_id);
    if (it == units_.end()) throw core::UnknownJob(unit_id);
    return it->second;
  }

  PilotInfo pilot_info(const std::string& pilot_id) const {
    for (const auto& p : pilots_)
      if (p.info.pilot_id == pilot_id) {
        PilotInfo info = p.info;
        info.state = p.state.current;
        return info;
      }
    throw core::UnknownJob(pilot_id);
  }

  std::vector<PilotInfo> pilots() const {
    std::vector<PilotInfo> out;
    for (const auto& p : pilots_) {
      PilotInfo info = p.info;
      info.state = p.state.current;
      out.push_back(info);
    }
    return out;
  }

  std::size_t pending_count() const { return pending_.size(); }

  bool all_pilots_terminal() const {
    for (const auto& p : pilots_)
      if (!core::is_terminal(p.state.current)) return false;
    return true;
  }

private:
  struct PilotRec {
    PilotInfo info;
    core::EntityState state;
    int free_cores = 0;
    std::set<std::string> executing;
    bool saw_active = false;
    bool saw_end = false;
  };

  struct InternalEvent {
    double time = 0.0;
    int prio = 0;  // unit completions before pilot endings at equal times
    long seq = 0;
    enum Kind { UnitComplete, PilotActive, PilotEnd } kind = UnitComplete;
    std::string id;
    core::State job_state = core::State::Done;
    std::string reason;

    bool operator<(const InternalEvent& o) const {
      if (time != o.time) return time < o.time;
      if (prio != o.prio) return prio < o.prio;
      return seq < o.seq;
    }
  };

  ComputeUnit& unit_ref(const std::string& id) {
    auto it = units_.find(id);
    if (it == units_.end()) throw core::UnknownJob(id);
    return it->second;
  }

  PilotRec& pilot_rec(const std::string& id) {
    for (auto& p : pilots_)
      if (p.info.pilot_id == id) return p;
    throw core::UnknownJob(id);
  }

  // No non-terminal pilot could ever take this unit: every one is either too
  // narrow or too short-lived even at full lifetime.
  bool never_schedulable(const ComputeUnit& u, double at) const {
    if (pilots_.empty()) return false;  // late binding: wait for pilots
    for (const auto& p : pilots_) {
      if (core::is_terminal(p.state.current)) continue;
      double best_remaining = p.state.current == core::State::Active
                                  ? p.info.end_time - at
                                  : p.info.description.duration;
      if (p.info.description.cores >= u.task.cores && best_remaining >= u.task.runtime_estimate)
        return false;
    }
    return true;
  }

  void start_unit(ComputeUnit& u, PilotRec& p, double at) {
    u.bound_pilot = p.info.pilot_id;
    u.state = core::transition(u.state, core::TransitionEvent::Schedule, at, "unit-manager");
    log_.append(at, "unit:" + u.unit_id, "unit_bound",
                {{"unit", u.unit_id}, {"pilot", p.info.pilot_id}, {"task", u.task.task_id}});
    u.state = core::transition(u.state, core::TransitionEvent::Submit, at, "unit-manager");
    u.state = core::transition(u.state, core::TransitionEvent::Execute, at, "agent");
    u.start_time = at;
    double factor = jitter_ ? jitter_(u) : 1.0;
    double actual = std::max(1e-9, u.task.runtime_estimate * factor);
    u.end_time = at + actual;
    p.free_cores -= u.task.cores;
    p.executing.insert(u.unit_id);
    pending_.erase(std::remove(pending_.begin(), pending_.end(), u.unit_id), pending_.end());
    InternalEvent done;
    done.time = u.end_time;
    done.prio = 0;
    done.seq = ++seq_;
    done.kind = InternalEvent::UnitComplete;
    done.id = u.unit_id;
    queue_.insert(done);
    log_.append(at, "unit:" + u.unit_id, "unit_started",
                {{"unit", u.unit_id},
                 {"pilot", p.info.pilot_id},
                 {"task", u.task.task_id},
                 {"cores", std::to_string(u.task.cores)}});
  }

  void fail_unit_at(ComputeUnit& u, const std::string& reason, double at) {
    if (core::is_terminal(u.state.current))
      throw core::IllegalTransition(core::to_string(u.state.current), "Fail");
    if (u.state.current == core::State::Executing && u.bound_pilot) {
      PilotRec& p = pilot_rec(*u.bound_pilot);
      p.free_cores += u.task.cores;
      p.executing.erase(u.unit_id);
      drop_events_for(u.unit_id);
    }
    pending_.erase(std::remove(pending_.begin(), pending_.end(), u.unit_id), pending_.end());
    u.state = core::transition(u.state, core::TransitionEvent::Fail, at, "agent");
    u.fail_reason = reason;
    u.end_time = at;
    log_.append(at, "unit:" + u.unit_id, "unit_failed",
                {{"unit", u.unit_id},
                 {"task", u.task.task_id},
                 {"reason", reason},
                 {"pilot", u.bound_pilot.value_or("")}});
    finished_.push_back(u);
  }

  void drop_events_for(const std::string& unit_id) {
    for (auto it = queue_.begin(); it != queue_.end();) {
      if (it->kind == InternalEvent::UnitComplete && it->id == unit_id)
        it = queue_.erase(it);
      else
        ++it;
    }
  }

  void poll_pilots() {
    for (auto& p : pilots_) {
      if (p.saw_end) continue;
      ConnectorJobStatus st = connector_.status(p.info.job_id);
      if (!p.saw_active && st.start_time >= 0.0 &&
          (st.state == core::State::Running || core::is_terminal(st.state))) {
        p.saw_active = true;
        InternalEvent ev;
        ev.time = st.start_time;
        ev.prio = 1;
        ev.seq = ++seq_;
        ev.kind = InternalEvent::PilotActive;
        ev.id = p.info.pilot_id;
        queue_.insert(ev);
      }
      if (core::is_terminal(st.state)) {
        p.saw_end = true;
        InternalEvent ev;
        ev.time = st.end_time;
        ev.prio = 2;
        ev.seq = ++seq_;
        ev.kind = InternalEvent::PilotEnd;
        ev.id = p.info.pilot_id;
        ev.job_state = st.state;
        ev.reason = st.reason;
        queue_.insert(ev);
      }
    }
  }

  void dispatch(const InternalEvent& ev) {
    switch (ev.kind) {
      case InternalEvent::UnitComplete: {
        ComputeUnit& u = unit_ref(ev.id);
        PilotRec& p = pilot_rec(*u.bound_pilot);
        u.state = core::transition(u.state, core::TransitionEvent::Complete, ev.time, "agent");
        p.free_cores += u.task.cores;
        p.executing.erase(u.unit_id);
        log_.append(ev.time, "unit:" + u.unit_id, "unit_done",
                    {{"unit", u.unit_id}, {"task", u.task.task_id}, {"pilot", p.info.pilot_id}});
        finished_.push_back(u);
        break;
      }
      case InternalEvent::PilotActive: {
        PilotRec& p = pilot_rec(ev.id);
        if (p.state.current != core::State::Queued) break;
        p.state = core::transition(p.state, core::TransitionEvent::Activate, ev.time,
                                   "pilot-manager");
        p.info.state = p.state.current;
        p.info.activation_time = ev.time;
        p.info.end_time = ev.time + p.info.description.duration;
        log_.append(ev.time, "pilot:" + p.info.pilot_id, "pilot_active",
                    {{"pilot", p.info.pilot_id},
                     {"resource", p.info.description.target_resource},
                     {"cores", std::to_string(p.info.description.cores)}});
        break;
      }
      case InternalEvent::PilotEnd: {
        PilotRec& p = pilot_rec(ev.id);
        if (core::is_terminal(p.state.current)) break;
        // whatever is still executing here is lost work
        for (const auto& uid : std::vector<std::string>(p.executing.begin(), p.executing.end()))
          fail_unit_at(unit_ref(uid), "PilotExpired", ev.time);
        core::TransitionEvent te = core::TransitionEvent::Complete;
        const char* kind = "pilot_done";
        if (ev.job_state == core::State::Failed) {
          te = core::TransitionEvent::Fail;
          kind = "pilot_failed";
        } else if (ev.job_state == core::State::Canceled) {
          te = core::TransitionEvent::Cancel;
          kind = "pilot_canceled";
        }
        p.state = core::transition(p.state, te, ev.time, "pilot-manager");
        p.info.state = p.state.current;
        p.info.end_time = ev.time;
        log_.append(ev.time, "pilot:" + p.info.pilot_id, kind,
                    {{"pilot", p.info.pilot_id}, {"reason", ev.reason}});
        break;
      }
    }
  }

  core::SimClock& clock_;
  core::EventLog& log_;
  ResourceConnector& connector_;
  std::shared_ptr<UnitScheduler> scheduler_;
  std::function<double(const ComputeUnit&)> jitter_;

  std::vector<PilotRec> pilots_;
  std::map<std::string, ComputeUnit> units_;
  std::deque<std::string> pending_;
  std::set<InternalEvent> queue_;
  std::vector<ComputeUnit> finished_;
  long pilot_seq_ = 0;
  long seq_ = 0;
};

}  // namespace blockflow::pilot
