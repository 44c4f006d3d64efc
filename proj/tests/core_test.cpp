#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "blockflow/core/dag.hpp"
#include "blockflow/core/errors.hpp"
#include "blockflow/core/events.hpp"
#include "blockflow/core/requirements.hpp"
#include "blockflow/core/state.hpp"
#include "blockflow/core/task.hpp"
#include "blockflow/core/translate.hpp"
#include "helpers.hpp"

using namespace blockflow;
using testutil::simple_task;

TEST_CASE("validate_dag: empty dag is ok") {
  core::WorkflowDag dag;
  CHECK(!core::validate_dag(dag).has_value());
}

TEST_CASE("validate_dag: two-cycle is detected") {
  core::WorkflowDag dag;
  dag.add_task(simple_task("A"));
  dag.add_task(simple_task("B"));
  dag.add_edge("A", "B");
  dag.add_edge("B", "A");
  auto issue = core::validate_dag(dag);
  REQUIRE(issue.has_value());
  CHECK(issue->code == "CycleDetected");
  CHECK(issue->cycle_path.size() >= 2);
  CHECK_THROWS_AS(core::ensure_valid(dag), core::CycleDetected);
}

TEST_CASE("validate_dag: self edge and unknown endpoint") {
  core::WorkflowDag dag;
  dag.add_task(simple_task("A"));
  dag.add_edge("A", "A");
  auto issue = core::validate_dag(dag);
  REQUIRE(issue.has_value());
  CHECK(issue->code == "CycleDetected");

  core::WorkflowDag dag2;
  dag2.add_task(simple_task("A"));
  dag2.add_edge("A", "ghost");
  auto issue2 = core::validate_dag(dag2);
  REQUIRE(issue2.has_value());
  CHECK(issue2->code == "UnknownEndpoint");
}

TEST_CASE("duplicate task ids are rejected") {
  core::WorkflowDag dag;
  dag.add_task(simple_task("A"));
  CHECK_THROWS_AS(dag.add_task(simple_task("A")), core::DuplicateId);
}

TEST_CASE("validate_dag: random generated dags are valid per Kahn oracle") {
  core::Rng rng(1234);
  for (int i = 0; i < 50; ++i) {
    auto dag = testutil::random_dag(rng, 15);
    CHECK(!core::validate_dag(dag).has_value());
    CHECK(testutil::kahn_order(dag).has_value());
  }
}

TEST_CASE("derive_workload: chain returns only the root") {
  core::WorkflowDag dag;
  dag.add_task(simple_task("A"));
  dag.add_task(simple_task("B"));
  dag.add_task(simple_task("C"));
  dag.add_edge("A", "B");
  dag.add_edge("B", "C");
  auto wl = core::derive_workload(dag, {}, {}, 0.0);
  REQUIRE(wl.tasks.size() == 1);
  CHECK(wl.tasks[0].task_id == "A");
}

TEST_CASE("derive_workload: diamond after the root completes") {
  core::WorkflowDag dag;
  for (const char* id : {"A", "B", "C", "D"}) dag.add_task(simple_task(id));
  dag.add_edge("A", "B");
  dag.add_edge("A", "C");
  dag.add_edge("B", "D");
  dag.add_edge("C", "D");

  auto expected = testutil::eligible_oracle(dag, {"A"}, {});
  auto wl = core::derive_workload(dag, {"A"}, {}, 5.0);
  std::set<std::string> got;
  for (const auto& t : wl.tasks) got.insert(t.task_id);
  CHECK(got == expected);
  CHECK(got == std::set<std::string>{"B", "C"});
  CHECK(wl.snapshot_time == 5.0);

  auto expected2 = testutil::eligible_oracle(dag, {"A"}, {"B"});
  auto wl2 = core::derive_workload(dag, {"A"}, {"B"}, 6.0);
  std::set<std::string> got2;
  for (const auto& t : wl2.tasks) got2.insert(t.task_id);
  CHECK(got2 == expected2);
  CHECK(got2 == std::set<std::string>{"C"});
}

TEST_CASE("derive_workload: completed and in-flight must not overlap") {
  core::WorkflowDag dag;
  dag.add_task(simple_task("A"));
  CHECK_THROWS_AS(core::derive_workload(dag, {"A"}, {"A"}, 0.0), core::InvalidDag);
}

TEST_CASE("derive_workload fixpoint visits every task once in topological order") {
  core::Rng rng(777);
  for (int round = 0; round < 100; ++round) {
    auto dag = testutil::random_dag(rng, 20);
    std::set<std::string> completed;
    std::vector<std::string> emitted;
    while (completed.size() < dag.tasks.size()) {
      auto wl = core::derive_workload(dag, completed, {}, 0.0);
      REQUIRE(!wl.tasks.empty());
      for (const auto& t : wl.tasks) {
        // never emitted before all predecessors are complete
        for (const auto& p : dag.predecessors(t.task_id)) CHECK(completed.count(p) == 1);
        CHECK(completed.insert(t.task_id).second);  // exactly once
        emitted.push_back(t.task_id);
      }
    }
    CHECK(emitted.size() == dag.tasks.size());
    CHECK(testutil::kahn_order(dag).has_value());
  }
}

TEST_CASE("derive_workload on an untouched dag returns exactly the source set") {
  core::Rng rng(4242);
  for (int round = 0; round < 30; ++round) {
    auto dag = testutil::random_dag(rng, 12);
    std::set<std::string> sources;
    for (const auto& [id, t] : dag.tasks)
      if (dag.predecessors(id).empty()) sources.insert(id);
    auto wl = core::derive_workload(dag, {}, {}, 0.0);
    std::set<std::string> got;
    for (const auto& t : wl.tasks) got.insert(t.task_id);
    CHECK(got == sources);
  }
}

// Frozen copy of the documented transition tables; the implementation must
// agree on the full (state x event) matrix.
namespace {

using core::EntityKind;
using core::State;
using core::TransitionEvent;

struct TableRow {
  State from;
  TransitionEvent event;
  State to;
};

const std::vector<TableRow> kTaskTable = {
    {State::New, TransitionEvent::Schedule, State::Scheduled},
    {State::Scheduled, TransitionEvent::Submit, State::Submitted},
    {State::Submitted, TransitionEvent::Execute, State::Executing},
    {State::Executing, TransitionEvent::Complete, State::Done},
};
const std::vector<TableRow> kPilotTable = {
    {State::New, TransitionEvent::Submit, State::Queued},
    {State::Queued, TransitionEvent::Activate, State::Active},
    {State::Active, TransitionEvent::Complete, State::Done},
};
const std::vector<TableRow> kJobTable = {
    {State::New, TransitionEvent::Submit, State::Queued},
    {State::Queued, TransitionEvent::Run, State::Running},
    {State::Running, TransitionEvent::Complete, State::Done},
};

const std::vector<State> kAllStates = {
    State::New,    State::Scheduled, State::Submitted, State::Executing, State::Queued,
    State::Active, State::Running,   State::Done,      State::Failed,    State::Canceled};
const std::vector<TransitionEvent> kAllEvents = {
    TransitionEvent::Schedule, TransitionEvent::Submit,   TransitionEvent::Execute,
    TransitionEvent::Activate, TransitionEvent::Run,      TransitionEvent::Complete,
    TransitionEvent::Fail,     TransitionEvent::Cancel};

std::optional<State> table_lookup(const std::vector<TableRow>& table, State from,
                                  TransitionEvent ev) {
  if (core::is_terminal(from)) return std::nullopt;
  if (ev == TransitionEvent::Cancel) return State::Canceled;
  if (ev == TransitionEvent::Fail) return State::Failed;
  for (const auto& row : table)
    if (row.from == from && row.event == ev) return row.to;
  return std::nullopt;
}

}  // namespace

TEST_CASE("transition: documented happy paths and terminal rejections") {
  auto s = core::make_state(EntityKind::TaskUnit, 0.0, "test");
  s = core::transition(s, TransitionEvent::Schedule, 1.0, "test");
  CHECK(s.current == State::Scheduled);
  s = core::transition(s, TransitionEvent::Submit, 2.0, "test");
  s = core::transition(s, TransitionEvent::Execute, 3.0, "test");
  s = core::transition(s, TransitionEvent::Complete, 4.0, "test");
  CHECK(s.current == State::Done);
  CHECK_THROWS_AS(core::transition(s, TransitionEvent::Execute, 5.0, "test"),
                  core::IllegalTransition);
  CHECK(s.history.size() == 5);
  for (std::size_t i = 1; i < s.history.size(); ++i)
    CHECK(s.history[i].timestamp >= s.history[i - 1].timestamp);
}

TEST_CASE("transition matrix matches the frozen table for every entity kind") {
  struct KindTable {
    EntityKind kind;
    const std::vector<TableRow>* table;
  };
  for (const auto& [kind, table] : {KindTable{EntityKind::TaskUnit, &kTaskTable},
                                    KindTable{EntityKind::Pilot, &kPilotTable},
                                    KindTable{EntityKind::Job, &kJobTable}}) {
    for (State from : kAllStates)
      for (TransitionEvent ev : kAllEvents) {
        auto expected = table_lookup(*table, from, ev);
        auto got = core::transition_state(kind, from, ev);
        CHECK(got == expected);
      }
  }
}

TEST_CASE("transition is pure: replaying a history reproduces the final state") {
  core::Rng rng(99);
  std::vector<TransitionEvent> taskEvents = {TransitionEvent::Schedule, TransitionEvent::Submit,
                                             TransitionEvent::Execute, TransitionEvent::Complete};
  for (int round = 0; round < 20; ++round) {
    auto s = core::make_state(EntityKind::TaskUnit, 0.0, "a");
    std::vector<TransitionEvent> applied;
    double t = 0.0;
    for (auto ev : taskEvents) {
      if (rng.unit() < 0.2) break;
      t += 1.0;
      s = core::transition(s, ev, t, "a");
      applied.push_back(ev);
    }
    auto replay = core::make_state(EntityKind::TaskUnit, 0.0, "a");
    double rt = 0.0;
    for (auto ev : applied) {
      rt += 1.0;
      replay = core::transition(replay, ev, rt, "a");
    }
    CHECK(replay == s);
  }
}

TEST_CASE("task validation enforces the mpi/cores rule") {
  auto t = simple_task("x", 1);
  CHECK_NOTHROW(core::validate(t));
  t.cores = 4;
  t.is_mpi = false;
  CHECK_THROWS_AS(core::validate(t), core::BadValue);
  t.metadata[core::kThreadsPerTaskKey] = "4";
  CHECK_NOTHROW(core::validate(t));
}

TEST_CASE("translate_task: documented defaults and bad values") {
  core::ExternalTaskRecord rec;
  rec["id"] = "d1";
  rec["exe"] = "/bin/date";
  auto t = core::translate_task(rec);
  CHECK(t.cores == 1);
  CHECK(t.executable == "/bin/date");
  CHECK(t.runtime_estimate > 0.0);

  rec["cores"] = "-2";
  CHECK_THROWS_AS(core::translate_task(rec), core::BadValue);
  rec["cores"] = -2;
  CHECK_THROWS_AS(core::translate_task(rec), core::BadValue);

  core::ExternalTaskRecord missing;
  missing["exe"] = "/bin/date";
  CHECK_THROWS_AS(core::translate_task(missing), core::MissingField);
}

TEST_CASE("translate_task preserves unknown fields in metadata") {
  core::ExternalTaskRecord rec;
  rec["id"] = "d1";
  rec["exe"] = "/bin/date";
  rec["priority"] = 7;
  rec["site_hint"] = "cluster9";
  auto t = core::translate_task(rec);
  CHECK(t.metadata.at("priority") == "7");
  CHECK(t.metadata.at("site_hint") == "cluster9");
}

TEST_CASE("translate round-trips a generated 50-record corpus") {
  core::Rng rng(2024);
  for (int i = 0; i < 50; ++i) {
    core::TaskDescription t;
    t.task_id = testutil::task_name(i);
    t.executable = "/usr/bin/app" + std::to_string(rng.range(0, 9));
    int nargs = static_cast<int>(rng.range(0, 3));
    for (int a = 0; a < nargs; ++a) t.arguments.push_back("--opt" + std::to_string(a));
    t.cores = static_cast<int>(rng.range(1, 16));
    t.is_mpi = t.cores > 1;
    t.runtime_estimate = 1.0 + 10.0 * rng.unit();
    if (rng.unit() < 0.5) t.input_files.push_back("in" + std::to_string(i) + ".dat");
    if (rng.unit() < 0.5) t.output_files.push_back("out" + std::to_string(i) + ".dat");
    if (rng.unit() < 0.5) t.metadata["note"] = "n" + std::to_string(i);

    auto back = core::translate_task(core::to_record(t));
    CHECK(back == t);
  }
}

TEST_CASE("aggregate_requirements: arithmetic examples") {
  core::Workload wl;
  wl.tasks.push_back(simple_task("a", 4, 100.0));
  auto r = core::aggregate_requirements(wl);
  CHECK(r.max_concurrency_cores == 4);
  CHECK(r.total_core_seconds == doctest::Approx(400.0));
  CHECK(r.longest_task_runtime == doctest::Approx(100.0));
  CHECK(r.task_count == 1);
  CHECK(r.max_task_cores == 4);

  core::Workload wl10;
  for (int i = 0; i < 10; ++i) wl10.tasks.push_back(simple_task(testutil::task_name(i), 1, 100.0));
  auto r10 = core::aggregate_requirements(wl10);
  CHECK(r10.max_concurrency_cores == 10);
  CHECK(r10.total_core_seconds == doctest::Approx(1000.0));
  CHECK(r10.longest_task_runtime == doctest::Approx(100.0));
  CHECK(r10.task_count == 10);
}

TEST_CASE("aggregate_requirements: empty workload is all zeros") {
  auto r = core::aggregate_requirements(core::Workload{});
  CHECK(r.task_count == 0);
  CHECK(r.max_concurrency_cores == 0);
  CHECK(r.total_core_seconds == 0.0);
}

TEST_CASE("aggregate_requirements matches naive re-summation and is permutation-invariant") {
  core::Rng rng(5150);
  for (int round = 0; round < 40; ++round) {
    core::Workload wl;
    int n = static_cast<int>(rng.range(1, 25));
    for (int i = 0; i < n; ++i) {
      int cores = static_cast<int>(rng.range(1, 8));
      auto t = simple_task(testutil::task_name(i), cores, 1.0 + 100.0 * rng.unit());
      wl.tasks.push_back(t);
    }
    // independent summation
    int sum_cores = 0, maxc = 0;
    double core_s = 0, longest = 0;
    for (const auto& t : wl.tasks) {
      sum_cores += t.cores;
      core_s += t.cores * t.runtime_estimate;
      longest = std::max(longest, t.runtime_estimate);
      maxc = std::max(maxc, t.cores);
    }
    auto r = core::aggregate_requirements(wl);
    CHECK(r.max_concurrency_cores == sum_cores);
    CHECK(r.total_core_seconds == doctest::Approx(core_s));
    CHECK(r.longest_task_runtime == doctest::Approx(longest));
    CHECK(r.max_task_cores == maxc);
    CHECK(r.task_count == n);
    CHECK(r.max_concurrency_cores >= r.max_task_cores);

    core::Workload shuffled = wl;
    for (std::size_t i = shuffled.tasks.size() - 1; i > 0; --i)
      std::swap(shuffled.tasks[i], shuffled.tasks[rng.bounded(i + 1)]);
    auto r2 = core::aggregate_requirements(shuffled);
    CHECK(r2.max_concurrency_cores == r.max_concurrency_cores);
    CHECK(r2.total_core_seconds == doctest::Approx(r.total_core_seconds));
    CHECK(r2.longest_task_runtime == doctest::Approx(r.longest_task_runtime));
  }
}

TEST_CASE("event log guards ordering and round-trips jsonl") {
  core::EventLog log;
  log.append(0.0, "run", "run_started", {{"tasks", "2"}});
  log.append(1.5, "task:A", "unit_done", {{"pilot", "p1"}});
  CHECK_THROWS_AS(log.append(1.0, "task:B", "unit_done"), core::MalformedLog);

  std::ostringstream out;
  log.write_jsonl(out);
  std::istringstream in(out.str());
  auto back = core::EventLog::read_jsonl(in);
  REQUIRE(back.size() == 2);
  CHECK(back.events()[1].attr("pilot") == "p1");
  CHECK(back.events()[1].time == doctest::Approx(1.5));

  std::ostringstream out2;
  back.write_jsonl(out2);
  CHECK(out.str() == out2.str());
}
