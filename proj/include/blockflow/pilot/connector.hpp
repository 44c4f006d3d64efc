#pragma once

#include <optional>
#include <string>

#include "blockflow/core/state.hpp"
#include "blockflow/pilot/types.hpp"

namespace blockflow::pilot {

struct ConnectorJobStatus {
  core::State state = core::State::New;
  double start_time = -1.0;  // when the placeholder began running
  double end_time = -1.0;    // set once terminal
  std::string reason;        // set on Failed
};

// Everything the pilot runtime needs from a resource access layer. Keeping
// this abstract lets the runtime run against any backend, including plain
// test stubs, without the resource layer present.
class ResourceConnector {
public:
  virtual ~ResourceConnector() = default;

  // Submits the placeholder as a resource job; throws backend errors
  // (OversizedJob, UnknownQueue, WalltimeExceedsQueueLimit, ...) unchanged.
  virtual std::string submit_placeholder(const PilotDescription& pd) = 0;

  virtual ConnectorJobStatus status(const std::string& job_id) = 0;

  virtual void cancel(const std::string& job_id) = 0;

  // Discrete-event stepping; wall-clock connectors may return nullopt and
  // rely on polling.
  virtual std::optional<double> next_event_time() const = 0;
  virtual void advance_to(double t) = 0;
};

}  // namespace blockflow::pilot
