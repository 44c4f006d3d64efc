#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "blockflow/core/errors.hpp"
#include "blockflow/core/events.hpp"
#include "blockflow/core/state.hpp"
#include "blockflow/resource/backend.hpp"
#include "blockflow/resource/model.hpp"

namespace blockflow::resource {

// Discrete-event simulated batch system. Queues run FCFS; FCFS_BACKFILL
// queues additionally apply EASY backfill: the blocked head of queue gets a
// single earliest-start reservation, and any queued job may start out of
// order if it fits in the free cores and its walltime cannot push past that
// reservation. Background load comes from the model's trace and is replayed
// exactly, so identical submission sequences produce identical event logs.
class SimBatchResource : public Resource {
public:
  SimBatchResource(ResourceModel model, core::SimClock& clock, core::EventLog& log)
      : model_(std::move(model)), clock_(clock), log_(log), free_cores_(model_.total_cores) {
    validate(model_);
    for (const auto& q : model_.queues) queues_.push_back(QueueState{q, {}});
    trace_ = model_.background_load_trace;
    std::stable_sort(trace_.begin(), trace_.end(),
                     [](const TraceEntry& a, const TraceEntry& b) {
                       return a.arrival_time < b.arrival_time;
                     });
  }

  const ResourceModel& model() const override { return model_; }

  std::string submit_job(const JobDescription& jd) override {
    validate_against(model_, jd);
    double now = clock_.now;
    std::string id = model_.resource_id + ".j" + std::to_string(++seq_);
    JobRec rec;
    rec.id = id;
    rec.jd = jd;
    rec.duration = jd.simulated_runtime.value_or(jd.walltime_limit);
    rec.submit_time = now;
    rec.state = core::make_state(core::EntityKind::Job, now, model_.resource_id);
    rec.state = core::transition(rec.state, core::TransitionEvent::Submit, now, model_.resource_id);
    jobs_.emplace(id, rec);
    queue_for(jd.queue_name).pending.push_back(id);
    log_.append(now, "job:" + id, "job_submitted",
                {{"resource", model_.resource_id},
                 {"cores", std::to_string(jd.cores)},
                 {"walltime", core::fmt_double(jd.walltime_limit)},
                 {"queue", jd.queue_name},
                 {"origin", "api"}});
    schedule_pass(now);
    return id;
  }

  core::State job_state(const std::string& job_id) override { return find(job_id).state.current; }

  JobInfo job_info(const std::string& job_id) override {
    const JobRec& r = find(job_id);
    JobInfo info;
    info.job_id = r.id;
    info.state = r.state.current;
    info.submit_time = r.submit_time;
    info.start_time = r.start_time;
    info.end_time = r.state.current == core::State::Running ? -1.0 : r.end_time;
    if (core::is_terminal(r.state.current)) info.end_time = r.terminal_time;
    info.cores = r.jd.cores;
    info.walltime_limit = r.jd.walltime_limit;
    info.queue_name = r.jd.queue_name;
    info.reason = r.reason;
    info.backfilled = r.backfilled;
    return info;
  }

  void cancel_job(const std::string& job_id) override {
    JobRec& r = find(job_id);
    double now = clock_.now;
    if (core::is_terminal(r.state.current))
      throw core::IllegalTransition(core::to_string(r.state.current), "Cancel");
    std::string was = core::to_string(r.state.current);
    if (r.state.current == core::State::Queued) {
      auto& pend = queue_for(r.jd.queue_name).pending;
      pend.erase(std::remove(pend.begin(), pend.end(), job_id), pend.end());
    } else if (r.state.current == core::State::Running) {
      free_cores_ += r.jd.cores;
      running_.erase(std::remove(running_.begin(), running_.end(), job_id), running_.end());
    }
    r.state = core::transition(r.state, core::TransitionEvent::Cancel, now, model_.resource_id);
    r.terminal_time = now;
    log_.append(now, "job:" + job_id, "job_canceled",
                {{"resource", model_.resource_id}, {"was", was}});
    schedule_pass(now);
  }

  double estimate_queue_wait(const JobDescription& jd) const override {
    validate_against(model_, jd);
    double now = clock_.now;

    struct SnapJob {
      int cores;
      double walltime;
      bool probe;
    };
    struct SnapQueue {
      QueuePolicy policy;
      std::deque<SnapJob> pending;
    };
    std::vector<std::pair<double, int>> running;  // (end, cores)
    for (const auto& id : running_) {
      const JobRec& r = jobs_.at(id);
      running.emplace_back(r.end_time, r.jd.cores);
    }
    std::vector<SnapQueue> queues;
    for (const auto& q : queues_) {
      SnapQueue sq{q.spec.policy, {}};
      for (const auto& id : q.pending) {
        const JobRec& r = jobs_.at(id);
        sq.pending.push_back(SnapJob{r.jd.cores, r.jd.walltime_limit, false});
      }
      if (q.spec.name == jd.queue_name)
        sq.pending.push_back(SnapJob{jd.cores, jd.walltime_limit, true});
      queues.push_back(std::move(sq));
    }

    int free = free_cores_;
    double t = now;
    auto earliest = [&](int need, double at) {
      int avail = free;
      if (avail >= need) return at;
      auto ends = running;
      std::sort(ends.begin(), ends.end());
      for (const auto& [end, cores] : ends) {
        avail += cores;
        if (avail >= need) return std::max(end, at);
      }
      return std::numeric_limits<double>::infinity();
    };
    auto start_snap = [&](SnapJob j, double at) -> std::optional<double> {
      free -= j.cores;
      running.emplace_back(at + j.walltime, j.cores);
      return j.probe ? std::optional<double>(at) : std::nullopt;
    };

    // Forward replay, arrivals after now ignored.
    while (true) {
      for (auto& q : queues) {
        while (!q.pending.empty() && q.pending.front().cores <= free) {
          if (auto s = start_snap(q.pending.front(), t)) return *s - now;
          q.pending.pop_front();
        }
        if (q.pending.empty()) continue;
        double reserved = earliest(q.pending.front().cores, t);
        if (q.policy == QueuePolicy::FCFS_BACKFILL) {
          for (std::size_t i = 1; i < q.pending.size();) {
            const SnapJob& j = q.pending[i];
            if (j.cores <= free && t + j.walltime <= reserved) {
              if (auto s = start_snap(j, t)) return *s - now;
              q.pending.erase(q.pending.begin() + static_cast<long>(i));
            } else {
              ++i;
            }
          }
        }
      }
      // advance to the next completion
      double next = std::numeric_limits<double>::infinity();
      for (const auto& [end, cores] : running) next = std::min(next, end);
      if (!std::isfinite(next)) return 0.0;  // queues empty, probe already started
      t = next;
      std::vector<std::pair<double, int>> keep;
      for (const auto& [end, cores] : running) {
        if (end <= t + 1e-12)
          free += cores;
        else
          keep.emplace_back(end, cores);
      }
      running = std::move(keep);
    }
  }

  std::vector<core::Event> step_queue(double until) override {
    std::size_t before = log_.size();
    while (auto t = next_event_time()) {
      if (*t > until + 1e-12) break;
      process_time(*t);
    }
    return std::vector<core::Event>(log_.events().begin() + static_cast<long>(before),
                                    log_.events().end());
  }

  std::optional<double> next_event_time() const override {
    double next = std::numeric_limits<double>::infinity();
    if (trace_next_ < trace_.size()) next = std::min(next, trace_[trace_next_].arrival_time);
    for (const auto& id : running_) next = std::min(next, jobs_.at(id).end_time);
    if (!std::isfinite(next)) return std::nullopt;
    return next;
  }

  int free_cores() const { return free_cores_; }
  int queued_count() const {
    int n = 0;
    for (const auto& q : queues_) n += static_cast<int>(q.pending.size());
    return n;
  }

private:
  struct JobRec {
    std::string id;
    JobDescription jd;
    double duration = 0.0;
    core::EntityState state;
    double submit_time = 0.0;
    double start_time = -1.0;
    double end_time = -1.0;      // scheduled completion while Running
    double terminal_time = -1.0; // when a terminal state was entered
    double reserved_start = -1.0;
    bool is_trace = false;
    bool backfilled = false;
    std::string reason;
  };

  struct QueueState {
    QueueSpec spec;
    std::deque<std::string> pending;
  };

  JobRec& find(const std::string& id) {
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw core::UnknownJob(id);
    return it->second;
  }

  QueueState& queue_for(const std::string& name) {
    for (auto& q : queues_)
      if (q.spec.name == name) return q;
    throw core::UnknownQueue(name);
  }

  double earliest_fit(int need, double at) const {
    int avail = free_cores_;
    if (avail >= need) return at;
    std::vector<std::pair<double, int>> ends;
    for (const auto& id : running_) {
      const JobRec& r = jobs_.at(id);
      ends.emplace_back(r.end_time, r.jd.cores);
    }
    std::sort(ends.begin(), ends.end());
    for (const auto& [end, cores] : ends) {
      avail += cores;
      if (avail >= need) return std::max(end, at);
    }
    return std::numeric_limits<double>::infinity();
  }

  void start_job(JobRec& r, double at, const char* method) {
    free_cores_ -= r.jd.cores;
    r.start_time = at;
    r.end_time = at + std::min(r.duration, r.jd.walltime_limit);
    r.backfilled = std::string(method) == "backfill";
    r.state = core::transition(r.state, core::TransitionEvent::Run, at, model_.resource_id);
    running_.push_back(r.id);
    log_.append(at, "job:" + r.id, "job_started",
                {{"resource", model_.resource_id},
                 {"cores", std::to_string(r.jd.cores)},
                 {"method", method},
                 {"origin", r.is_trace ? "trace" : "api"}});
  }

  void schedule_pass(double at) {
    for (auto& q : queues_) {
      while (!q.pending.empty()) {
        JobRec& head = jobs_.at(q.pending.front());
        if (head.jd.cores > free_cores_) break;
        q.pending.pop_front();
        start_job(head, at, "fcfs");
      }
      if (q.pending.empty()) continue;

      JobRec& head = jobs_.at(q.pending.front());
      double reserved = earliest_fit(head.jd.cores, at);
      if (reserved != head.reserved_start) {
        head.reserved_start = reserved;
        log_.append(at, "job:" + head.id, "job_reservation",
                    {{"resource", model_.resource_id}, {"start", core::fmt_double(reserved)}});
      }
      if (q.spec.policy != QueuePolicy::FCFS_BACKFILL) continue;

      for (std::size_t i = 1; i < q.pending.size();) {
        JobRec& j = jobs_.at(q.pending[i]);
        if (j.jd.cores <= free_cores_ && at + j.jd.walltime_limit <= reserved) {
          q.pending.erase(q.pending.begin() + static_cast<long>(i));
          start_job(j, at, "backfill");
        } else {
          ++i;
        }
      }
    }
  }

  void process_time(double t) {
    // completions first, then arrivals, then one scheduling pass
    std::vector<std::string> finished;
    for (const auto& id : running_)
      if (jobs_.at(id).end_time <= t + 1e-12) finished.push_back(id);
    for (const auto& id : finished) {
      JobRec& r = jobs_.at(id);
      running_.erase(std::remove(running_.begin(), running_.end(), id), running_.end());
      free_cores_ += r.jd.cores;
      r.terminal_time = t;
      if (r.duration > r.jd.walltime_limit) {
        r.reason = "Walltime";
        r.state = core::transition(r.state, core::TransitionEvent::Fail, t, model_.resource_id);
        log_.append(t, "job:" + id, "job_failed",
                    {{"resource", model_.resource_id}, {"reason", r.reason}});
      } else {
        r.state = core::transition(r.state, core::TransitionEvent::Complete, t, model_.resource_id);
        log_.append(t, "job:" + id, "job_finished", {{"resource", model_.resource_id}});
      }
    }

    while (trace_next_ < trace_.size() && trace_[trace_next_].arrival_time <= t + 1e-12) {
      const TraceEntry& e = trace_[trace_next_++];
      std::string id = model_.resource_id + ".bg" + std::to_string(trace_next_);
      JobRec rec;
      rec.id = id;
      rec.jd.cores = e.cores;
      rec.jd.walltime_limit = e.duration;
      rec.jd.queue_name = queues_.front().spec.name;
      rec.jd.executable = "background";
      rec.duration = e.duration;
      rec.is_trace = true;
      rec.submit_time = t;
      rec.state = core::make_state(core::EntityKind::Job, t, model_.resource_id);
      rec.state = core::transition(rec.state, core::TransitionEvent::Submit, t, model_.resource_id);
      jobs_.emplace(id, rec);
      queues_.front().pending.push_back(id);
      log_.append(t, "job:" + id, "job_submitted",
                  {{"resource", model_.resource_id},
                   {"cores", std::to_string(e.cores)},
                   {"walltime", core::fmt_double(e.duration)},
                   {"queue", rec.jd.queue_name},
                   {"origin", "trace"}});
    }

    schedule_pass(t);
  }

  ResourceModel model_;
  core::SimClock& clock_;
  core::EventLog& log_;
  int free_cores_;
  std::map<std::string, JobRec> jobs_;
  std::vector<QueueState> queues_;
  std::vector<std::string> running_;  // insertion order
  std::vector<TraceEntry> trace_;
  std::size_t trace_next_ = 0;
  long seq_ = 0;
};

}  // namespace blockflow::resource
