#pragma once

#include <sys/types.h>
#include <sys/wait.h>

#include <csignal>
#include <chrono>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "blockflow/core/errors.hpp"
#include "blockflow/core/events.hpp"
#include "blockflow/core/state.hpp"
#include "blockflow/resource/backend.hpp"
#include "blockflow/resource/model.hpp"

namespace blockflow::resource {

// Local process executor behind the same interface as the simulated batch
// system. Jobs run as real child processes; state updates are serialized
// through the polling path (submit/poll/cancel/step), never concurrently.
// Timestamps are wall-clock seconds since construction.
class LocalResource : public Resource {
public:
  explicit LocalResource(core::EventLog& log, int total_cores = 4,
                         std::string resource_id = "local")
      : log_(log), epoch_(std::chrono::steady_clock::now()) {
    model_.resource_id = std::move(resource_id);
    model_.total_cores = total_cores;
    model_.queues.push_back(QueueSpec{"local", 86400.0, QueuePolicy::FCFS});
    free_cores_ = total_cores;
  }

  ~LocalResource() override {
    for (auto& [id, r] : jobs_)
      if (r.pid > 0 && r.state.current == core::State::Running) {
        ::kill(r.pid, SIGKILL);
        int status = 0;
        ::waitpid(r.pid, &status, 0);
      }
  }

  LocalResource(const LocalResource&) = delete;
  LocalResource& operator=(const LocalResource&) = delete;

  const ResourceModel& model() const override { return model_; }

  std::string submit_job(const JobDescription& jd) override {
    validate_against(model_, jd);
    double now = elapsed();
    std::string id = model_.resource_id + ".j" + std::to_string(++seq_);
    JobRec rec;
    rec.id = id;
    rec.jd = jd;
    rec.submit_time = now;
    rec.state = core::make_state(core::EntityKind::Job, now, model_.resource_id);
    rec.state = core::transition(rec.state, core::TransitionEvent::Submit, now, model_.resource_id);
    jobs_.emplace(id, rec);
    pending_.push_back(id);
    log_.append(now, "job:" + id, "job_submitted",
                {{"resource", model_.resource_id},
                 {"cores", std::to_string(jd.cores)},
                 {"walltime", core::fmt_double(jd.walltime_limit)},
                 {"queue", jd.queue_name},
                 {"origin", "api"}});
    poll_children();
    schedule_pass();
    return id;
  }

  core::State job_state(const std::string& job_id) override {
    poll_children();
    schedule_pass();
    return find(job_id).state.current;
  }

  JobInfo job_info(const std::string& job_id) override {
    poll_children();
    schedule_pass();
    const JobRec& r = find(job_id);
    JobInfo info;
    info.job_id = r.id;
    info.state = r.state.current;
    info.submit_time = r.submit_time;
    info.start_time = r.start_time;
    info.end_time = r.end_time;
    info.cores = r.jd.cores;
    info.walltime_limit = r.jd.walltime_limit;
    info.queue_name = r.jd.queue_name;
    info.reason = r.reason;
    return info;
  }

  void cancel_job(const std::string& job_id) override {
    poll_children();
    JobRec& r = find(job_id);
    if (core::is_terminal(r.state.current))
      throw core::IllegalTransition(core::to_string(r.state.current), "Cancel");
    double now = elapsed();
    std::string was = core::to_string(r.state.current);
    if (r.state.current == core::State::Queued) {
      pending_.erase(std::remove(pending_.begin(), pending_.end(), job_id), pending_.end());
    } else if (r.state.current == core::State::Running) {
      ::kill(r.pid, SIGKILL);
      int status = 0;
      ::waitpid(r.pid, &status, 0);
      r.pid = -1;
      free_cores_ += r.jd.cores;
    }
    r.state = core::transition(r.state, core::TransitionEvent::Cancel, now, model_.resource_id);
    r.end_time = now;
    log_.append(now, "job:" + job_id, "job_canceled",
                {{"resource", model_.resource_id}, {"was", was}});
    schedule_pass();
  }

  double estimate_queue_wait(const JobDescription& jd) const override {
    validate_against(model_, jd);
    double now = elapsed();
    // Replay with walltime limits as runtimes, FCFS order.
    std::vector<std::pair<double, int>> running;
    for (const auto& [id, r] : jobs_)
      if (r.state.current == core::State::Running) {
        double remaining = std::max(0.0, r.start_time + r.jd.walltime_limit - now);
        running.emplace_back(now + remaining, r.jd.cores);
      }
    int free = free_cores_;
    double t = now;
    std::deque<std::pair<int, double>> queue;  // (cores, walltime)
    for (const auto& id : pending_) {
      const JobRec& r = jobs_.at(id);
      queue.emplace_back(r.jd.cores, r.jd.walltime_limit);
    }
    queue.emplace_back(jd.cores, jd.walltime_limit);
    while (true) {
      while (!queue.empty() && queue.front().first <= free) {
        auto [cores, wt] = queue.front();
        queue.pop_front();
        if (queue.empty()) return t - now;  // probe is the last entry
        free -= cores;
        running.emplace_back(t + wt, cores);
      }
      double next = std::numeric_limits<double>::infinity();
      for (const auto& [end, cores] : running) next = std::min(next, end);
      if (!std::isfinite(next)) return t - now;
      t = next;
      std::vector<std::pair<double, int>> keep;
      for (const auto& [end, cores] : running) {
        if (end <= t)
          free += cores;
        else
          keep.emplace_back(end, cores);
      }
      running = std::move(keep);
    }
  }

  std::vector<core::Event> step_queue(double) override {
    std::size_t before = log_.size();
    poll_children();
    schedule_pass();
    return std::vector<core::Event>(log_.events().begin() + static_cast<long>(before),
                                    log_.events().end());
  }

  std::optional<double> next_event_time() const override { return std::nullopt; }

  // Blocks until the job is terminal or the (wall-clock) timeout expires.
  core::State wait_for(const std::string& job_id, double timeout_s) {
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(static_cast<long>(timeout_s * 1000));
    while (std::chrono::steady_clock::now() < deadline) {
      core::State s = job_state(job_id);
      if (core::is_terminal(s)) return s;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return job_state(job_id);
  }

private:
  struct JobRec {
    std::string id;
    JobDescription jd;
    core::EntityState state;
    pid_t pid = -1;
    double submit_time = 0.0;
    double start_time = -1.0;
    double end_time = -1.0;
    std::string reason;
  };

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
  }

  JobRec& find(const std::string& id) {
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw core::UnknownJob(id);
    return it->second;
  }

  void schedule_pass() {
    double now = elapsed();
    while (!pending_.empty()) {
      JobRec& head = jobs_.at(pending_.front());
      if (head.jd.cores > free_cores_) break;
      pending_.pop_front();
      spawn(head, now);
    }
  }

  void spawn(JobRec& r, double now) {
    pid_t pid = ::fork();
    if (pid == 0) {
      std::vector<char*> argv;
      argv.push_back(const_cast<char*>(r.jd.executable.c_str()));
      for (const auto& a : r.jd.arguments) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      ::execvp(argv[0], argv.data());
      ::_exit(127);
    }
    if (pid < 0) {
      r.state = core::transition(r.state, core::TransitionEvent::Fail, now, model_.resource_id);
      r.reason = "SpawnFailed";
      r.end_time = now;
      log_.append(now, "job:" + r.id, "job_failed",
                  {{"resource", model_.resource_id}, {"reason", r.reason}});
      return;
    }
    r.pid = pid;
    r.start_time = now;
    free_cores_ -= r.jd.cores;
    r.state = core::transition(r.state, core::TransitionEvent::Run, now, model_.resource_id);
    log_.append(now, "job:" + r.id, "job_started",
                {{"resource", model_.resource_id},
                 {"cores", std::to_string(r.jd.cores)},
                 {"method", "fcfs"},
                 {"origin", "api"}});
  }

  void poll_children() {
    double now = elapsed();
    for (auto& [id, r] : jobs_) {
      if (r.state.current != core::State::Running || r.pid <= 0) continue;
      int status = 0;
      pid_t got = ::waitpid(r.pid, &status, WNOHANG);
      if (got == r.pid) {
        r.pid = -1;
        free_cores_ += r.jd.cores;
        r.end_time = now;
        bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
        if (ok) {
          r.state = core::transition(r.state, core::TransitionEvent::Complete, now,
                                     model_.resource_id);
          log_.append(now, "job:" + id, "job_finished", {{"resource", model_.resource_id}});
        } else {
          r.reason = WIFEXITED(status) ? "ExitCode" + std::to_string(WEXITSTATUS(status))
                                       : "Signaled";
          r.state = core::transition(r.state, core::TransitionEvent::Fail, now,
                                     model_.resource_id);
          log_.append(now, "job:" + id, "job_failed",
                      {{"resource", model_.resource_id}, {"reason", r.reason}});
        }
      } else if (now - r.start_time > r.jd.walltime_limit) {
        ::kill(r.pid, SIGKILL);
        ::waitpid(r.pid, &status, 0);
        r.pid = -1;
        free_cores_ += r.jd.cores;
        r.end_time = now;
        r.reason = "Walltime";
        r.state = core::transition(r.state, core::TransitionEvent::Fail, now, model_.resource_id);
        log_.append(now, "job:" + id, "job_failed",
                    {{"resource", model_.resource_id}, {"reason", r.reason}});
      }
    }
  }

  ResourceModel model_;
  core::EventLog& log_;
  std::chrono::steady_clock::time_point epoch_;
  int free_cores_;
  std::map<std::string, JobRec> jobs_;
  std::deque<std::string> pending_;
  long seq_ = 0;
};

}  // namespace blockflow::resource
