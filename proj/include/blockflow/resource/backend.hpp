#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockflow/core/events.hpp"
#include "blockflow/core/state.hpp"
#include "blockflow/resource/model.hpp"

namespace blockflow::resource {

// Resource-specific wrapper around a task or pilot.
struct JobDescription {
  int cores = 1;
  double walltime_limit = 0.0;  // seconds
  std::string executable;
  std::vector<std::string> arguments;
  std::string queue_name;
  std::string project;
  // Actual runtime in simulation; defaults to walltime_limit. Values above
  // the walltime get the job killed (Failed, reason=Walltime).
  std::optional<double> simulated_runtime;
};

struct JobInfo {
  std::string job_id;
  core::State state = core::State::New;
  double submit_time = 0.0;
  double start_time = -1.0;
  double end_time = -1.0;
  int cores = 0;
  double walltime_limit = 0.0;
  std::string queue_name;
  std::string reason;      // set on Failed
  bool backfilled = false; // started out of FCFS order
};

// Homogeneous job-submission interface. The same test suite must pass
// against every implementation; callers never see backend specifics beyond
// the ResourceModel.
class Resource {
public:
  virtual ~Resource() = default;

  virtual const ResourceModel& model() const = 0;

  // Job enters Queued; may start within the same scheduling step.
  virtual std::string submit_job(const JobDescription& jd) = 0;

  virtual core::State job_state(const std::string& job_id) = 0;
  virtual JobInfo job_info(const std::string& job_id) = 0;

  // Moves a non-terminal job to Canceled and frees its cores.
  virtual void cancel_job(const std::string& job_id) = 0;

  // Deterministic forward-replay of the current queue contents; ignores
  // arrivals after now, so the estimate is a lower bound.
  virtual double estimate_queue_wait(const JobDescription& jd) const = 0;

  // Advances the backend to `until` and returns the events it produced.
  virtual std::vector<core::Event> step_queue(double until) = 0;

  // Next internal event (trace arrival or job completion), if any.
  virtual std::optional<double> next_event_time() const = 0;
};

inline void validate_against(const ResourceModel& m, const JobDescription& jd) {
  if (jd.cores <= 0) throw core::BadValue("cores", "must be >= 1");
  if (jd.cores > m.total_cores) throw core::OversizedJob(jd.cores, m.total_cores);
  const QueueSpec* q = m.find_queue(jd.queue_name);
  if (!q) throw core::UnknownQueue(jd.queue_name);
  if (jd.walltime_limit <= 0) throw core::BadValue("walltime_limit", "must be > 0");
  if (jd.walltime_limit > q->max_walltime)
    throw core::WalltimeExceedsQueueLimit(jd.walltime_limit, q->max_walltime);
}

}  // namespace blockflow::resource
