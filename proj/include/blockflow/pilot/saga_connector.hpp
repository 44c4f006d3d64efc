#pragma once

#include <map>
#include <string>
#include <vector>

#include "blockflow/core/errors.hpp"
#include "blockflow/pilot/connector.hpp"
#include "blockflow/resource/backend.hpp"

namespace blockflow::pilot {

// Connector backed by the resource layer: pilots become jobs on the named
// resources. This is the only pilot header that pulls the resource layer in.
class SagaConnector : public ResourceConnector {
public:
  void add_resource(resource::Resource* r) { resources_[r->model().resource_id] = r; }

  resource::Resource* find(const std::string& resource_id) const {
    auto it = resources_.find(resource_id);
    if (it == resources_.end())
      throw core::BadValue("target_resource", "unknown resource: " + resource_id);
    return it->second;
  }

  std::string submit_placeholder(const PilotDescription& pd) override {
    resource::Resource* r = find(pd.target_resource);
    resource::JobDescription jd;
    jd.cores = pd.cores;
    jd.walltime_limit = pd.duration;
    jd.executable = "pilot-agent";
    jd.queue_name = pd.queue_name;
    std::string job_id = r->submit_job(jd);
    owner_[job_id] = r;
    return job_id;
  }

  ConnectorJobStatus status(const std::string& job_id) override {
    auto it = owner_.find(job_id);
    if (it == owner_.end()) throw core::UnknownJob(job_id);
    resource::JobInfo info = it->second->job_info(job_id);
    ConnectorJobStatus st;
    st.state = info.state;
    st.start_time = info.start_time;
    st.end_time = info.end_time;
    st.reason = info.reason;
    return st;
  }

  void cancel(const std::string& job_id) override {
    auto it = owner_.find(job_id);
    if (it == owner_.end()) throw core::UnknownJob(job_id);
    it->second->cancel_job(job_id);
  }

  std::optional<double> next_event_time() const override {
    std::optional<double> next;
    for (const auto& [id, r] : resources_) {
      auto t = r->next_event_time();
      if (t && (!next || *t < *next)) next = t;
    }
    return next;
  }

  void advance_to(double t) override {
    for (const auto& [id, r] : resources_) r->step_queue(t);
  }

  std::vector<resource::Resource*> resources() const {
    std::vector<resource::Resource*> out;
    for (const auto& [id, r] : resources_) out.push_back(r);
    return out;
  }

private:
  std::map<std::string, resource::Resource*> resources_;
  std::map<std::string, resource::Resource*> owner_;
};

}  // namespace blockflow::pilot
