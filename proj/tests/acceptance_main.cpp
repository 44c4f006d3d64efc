// Acceptance suite: one pass/fail line per criterion, non-zero exit when
// anything fails. Budgets are enforced with wall-clock timers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "blockflow/blockflow.hpp"
#include "audit.hpp"
#include "helpers.hpp"
#include "layering.hpp"

using namespace blockflow;

namespace {

const std::string kScenarioDir = BLOCKFLOW_SCENARIO_DIR;
const std::filesystem::path kRoot = BLOCKFLOW_SOURCE_DIR;

struct Check {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& info) {
    if (detail.empty()) detail = info;
  }
  void require(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

harness::RunResult run_bundled(const std::string& name) {
  auto scenario = harness::load_scenario(kScenarioDir + "/" + name);
  return harness::ScenarioRunner().run(scenario);
}

// ---------------------------------------------------------------- 1
Check criterion_workload_oracle() {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  core::Rng rng(20250617);
  for (int round = 0; round < 1000; ++round) {
    auto dag = testutil::random_dag(rng, 20);
    auto oracle_order = testutil::kahn_order(dag);
    if (!oracle_order) {
      c.fail("generator produced a cyclic dag");
      break;
    }
    std::set<std::string> completed;
    std::size_t emitted = 0;
    while (completed.size() < dag.tasks.size()) {
      auto wl = core::derive_workload(dag, completed, {}, 0.0);
      if (wl.tasks.empty()) {
        c.fail("fixpoint stalled");
        break;
      }
      for (const auto& t : wl.tasks) {
        for (const auto& p : dag.predecessors(t.task_id))
          if (!completed.count(p)) c.fail(t.task_id + " emitted before " + p);
        if (!completed.insert(t.task_id).second) c.fail(t.task_id + " emitted twice");
        emitted++;
      }
      if (!c.ok) break;
    }
    if (c.ok && emitted != dag.tasks.size()) c.fail("not every task emitted");
    if (!c.ok) break;
  }
  double elapsed = seconds_since(t0);
  c.require(elapsed < 10.0, "runtime " + std::to_string(elapsed) + "s over the 10s budget");
  c.note("1000 dags against the topological oracle in " + core::fmt_double(elapsed) + "s");
  return c;
}

// ---------------------------------------------------------------- 2
Check criterion_multi_resource_ttc() {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  auto scenario = harness::load_scenario(kScenarioDir + "/two-resource-ttc.json");
  harness::ScenarioRunner runner;

  auto multi = runner.run(scenario);
  c.require(!multi.execution_failed, "multi-resource run failed");

  double singles[2] = {0, 0};
  for (int i = 0; i < 2; ++i) {
    harness::Scenario restricted = scenario;
    restricted.resources = {scenario.resources[static_cast<std::size_t>(i)]};
    auto r = runner.run(restricted);
    if (r.execution_failed) c.fail("single-resource run failed");
    singles[i] = r.metrics.ttc;
  }
  double best_single = std::min(singles[0], singles[1]);
  c.require(multi.metrics.ttc < best_single, "multi ttc not strictly better");
  c.require(multi.metrics.ttc <= 0.9 * best_single + 1e-9,
            "multi ttc misses the 0.9 bound: " + core::fmt_double(multi.metrics.ttc) + " vs " +
                core::fmt_double(best_single));
  double elapsed = seconds_since(t0);
  c.require(elapsed < 5.0, "over the 5s budget");
  c.note("ttc multi=" + core::fmt_double(multi.metrics.ttc) + " vs singles " +
         core::fmt_double(singles[0]) + "/" + core::fmt_double(singles[1]));
  return c;
}

// ---------------------------------------------------------------- 3
Check criterion_backfill() {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  auto scenario = harness::load_scenario(kScenarioDir + "/titan-backfill.json");
  for (const auto& p : scenario.pilots)
    c.require(p.description.cores * 10 <= scenario.resources[0].total_cores,
              "pilot wider than 10% of the machine");

  harness::ScenarioRunner runner;
  auto backfill = runner.run(scenario);
  c.require(!backfill.execution_failed, "backfill run failed");

  int pilot_jobs = 0;
  for (const auto& e : backfill.log.events())
    if (e.kind == "job_started" && e.attr("origin") == "api") {
      pilot_jobs++;
      if (e.attr("method") != "backfill") c.fail(e.entity + " started without backfill");
    }
  c.require(pilot_jobs == static_cast<int>(scenario.pilots.size()),
            "not every pilot job started");

  std::string easy = testutil::audit_easy_safety(backfill.log);
  c.require(easy.empty(), "EASY safety violated: " + easy);

  harness::Scenario fcfs = scenario;
  for (auto& q : fcfs.resources[0].queues) q.policy = resource::QueuePolicy::FCFS;
  auto plain = runner.run(fcfs);
  c.require(!plain.execution_failed, "fcfs run failed");
  c.require(plain.metrics.mean_queue_wait > 0, "fcfs comparison run shows no waiting");
  c.require(backfill.metrics.mean_queue_wait <= 0.1 * plain.metrics.mean_queue_wait,
            "mean wait ratio over 10%: " + core::fmt_double(backfill.metrics.mean_queue_wait) +
                " vs " + core::fmt_double(plain.metrics.mean_queue_wait));
  double elapsed = seconds_since(t0);
  c.require(elapsed < 30.0, "over the 30s budget");
  c.note("mean wait " + core::fmt_double(backfill.metrics.mean_queue_wait) + "s backfill vs " +
         core::fmt_double(plain.metrics.mean_queue_wait) + "s fcfs");
  return c;
}

// ---------------------------------------------------------------- 4
Check criterion_late_binding() {
  Check c;
  int binds = 0;
  for (const char* name : {"two-resource-ttc.json", "titan-backfill.json", "repex-4x2.json",
                           "htbac-2pipes.json"}) {
    auto result = run_bundled(name);
    std::string violation = testutil::audit_late_binding(result.log);
    c.require(violation.empty(), std::string(name) + ": " + violation);
    for (const auto& e : result.log.events())
      if (e.kind == "unit_bound") binds++;
  }
  c.note(std::to_string(binds) + " bindings audited, zero violations");
  return c;
}

// ---------------------------------------------------------------- 5
Check criterion_state_machines() {
  Check c;
  using core::EntityKind;
  using core::State;
  using core::TransitionEvent;
  struct Row {
    State from;
    TransitionEvent ev;
    State to;
  };
  const std::vector<Row> task_rows = {{State::New, TransitionEvent::Schedule, State::Scheduled},
                                      {State::Scheduled, TransitionEvent::Submit, State::Submitted},
                                      {State::Submitted, TransitionEvent::Execute, State::Executing},
                                      {State::Executing, TransitionEvent::Complete, State::Done}};
  const std::vector<Row> pilot_rows = {{State::New, TransitionEvent::Submit, State::Queued},
                                       {State::Queued, TransitionEvent::Activate, State::Active},
                                       {State::Active, TransitionEvent::Complete, State::Done}};
  const std::vector<Row> job_rows = {{State::New, TransitionEvent::Submit, State::Queued},
                                     {State::Queued, TransitionEvent::Run, State::Running},
                                     {State::Running, TransitionEvent::Complete, State::Done}};
  const std::vector<State> states = {State::New,    State::Scheduled, State::Submitted,
                                     State::Executing, State::Queued, State::Active,
                                     State::Running, State::Done,     State::Failed,
                                     State::Canceled};
  const std::vector<TransitionEvent> events = {
      TransitionEvent::Schedule, TransitionEvent::Submit,   TransitionEvent::Execute,
      TransitionEvent::Activate, TransitionEvent::Run,      TransitionEvent::Complete,
      TransitionEvent::Fail,     TransitionEvent::Cancel};

  int cells = 0;
  auto verify = [&](EntityKind kind, const std::vector<Row>& rows, const char* label) {
    for (State from : states)
      for (TransitionEvent ev : events) {
        std::optional<State> expected;
        if (!core::is_terminal(from)) {
          if (ev == TransitionEvent::Cancel)
            expected = State::Canceled;
          else if (ev == TransitionEvent::Fail)
            expected = State::Failed;
          else
            for (const auto& row : rows)
              if (row.from == from && row.ev == ev) expected = row.to;
        }
        auto got = core::transition_state(kind, from, ev);
        cells++;
        if (got != expected)
          c.fail(std::string(label) + ": (" + core::to_string(from) + ", " +
                 core::to_string(ev) + ")");
      }
  };
  verify(EntityKind::TaskUnit, task_rows, "task");
  verify(EntityKind::Pilot, pilot_rows, "pilot");
  verify(EntityKind::Job, job_rows, "job");
  c.note(std::to_string(cells) + " matrix cells agree with the documented tables");
  return c;
}

// ---------------------------------------------------------------- 6
Check criterion_pattern_formulas() {
  Check c;
  core::Rng rng(31415);
  auto tmpl = [](double runtime) {
    auto t = testutil::simple_task("x", 1, runtime);
    t.task_id.clear();
    return t;
  };
  for (int round = 0; round < 100; ++round) {
    ensemble::PatternSpec spec;
    int which = static_cast<int>(rng.range(0, 2));
    if (which == 0) {
      spec.kind = ensemble::PatternKind::SimulationAnalysis;
      spec.iterations = static_cast<int>(rng.range(1, 5));
      spec.n_sim = static_cast<int>(rng.range(1, 8));
      spec.n_analysis = static_cast<int>(rng.range(1, 4));
      spec.sim_task = tmpl(100);
      spec.analysis_task = tmpl(50);
      int expected = spec.iterations * (spec.n_sim + spec.n_analysis);
      if (ensemble::expected_task_count(spec) != expected)
        c.fail("closed form mismatch (simulation-analysis)");
    } else if (which == 1) {
      spec.kind = ensemble::PatternKind::ReplicaExchange;
      spec.n_replicas = static_cast<int>(rng.range(2, 10));
      spec.n_cycles = static_cast<int>(rng.range(1, 6));
      spec.md_task = tmpl(100);
      spec.exchange_task = tmpl(10);
      int pairs = 0;
      for (int cyc = 0; cyc < spec.n_cycles; ++cyc)
        pairs += (cyc % 2 == 0) ? spec.n_replicas / 2 : (spec.n_replicas - 1) / 2;
      int expected = spec.n_cycles * spec.n_replicas + pairs;
      if (ensemble::expected_task_count(spec) != expected)
        c.fail("closed form mismatch (replica-exchange)");
    } else {
      spec.kind = ensemble::PatternKind::ConcurrentPipelines;
      int stages = static_cast<int>(rng.range(1, 4));
      for (int p = 0; p < static_cast<int>(rng.range(1, 4)); ++p) {
        ensemble::Pipeline pipe;
        pipe.pipeline_id = "p" + std::to_string(p);
        for (int j = 0; j < stages; ++j) {
          ensemble::Stage st;
          st.stage_id = "s" + std::to_string(j);
          for (int k = 0; k < static_cast<int>(rng.range(1, 3)); ++k)
            st.tasks.push_back(tmpl(60));
          pipe.stages.push_back(st);
        }
        spec.pipelines.push_back(pipe);
      }
      if (stages > 1 && rng.unit() < 0.5)
        spec.sync_points.push_back(static_cast<int>(rng.range(0, stages - 2)));
    }
    auto dag = ensemble::expand(spec);
    if (static_cast<int>(dag.tasks.size()) != ensemble::expected_task_count(spec))
      c.fail("expander count mismatch");
    if (core::validate_dag(dag).has_value()) c.fail("expanded dag failed validation");
    if (!c.ok) break;
  }
  c.note("100 randomized specs match their closed-form counts");
  return c;
}

// ---------------------------------------------------------------- 7
Check criterion_interop_equivalence() {
  Check c;
  std::vector<core::TaskDescription> tasks;
  for (int i = 0; i < 30; ++i) tasks.push_back(testutil::simple_task(testutil::task_name(i), 1, 120.0));
  core::WorkflowDag dag;
  for (const auto& t : tasks) dag.add_task(t);

  resource::ResourceModel model;
  model.resource_id = "site";
  model.total_cores = 16;
  model.queues.push_back(resource::QueueSpec{"batch", 100000.0,
                                             resource::QueuePolicy::FCFS_BACKFILL});

  auto ordering = [](const core::EventLog& log) {
    std::vector<std::string> out;
    for (const auto& e : log.events()) {
      if (e.kind == "unit_started") out.push_back("start " + e.attr("task"));
      if (e.kind == "unit_done") out.push_back("end " + e.attr("task"));
    }
    return out;
  };

  // path 1: filesystem task-description exchange into the workload manager
  std::string path =
      (std::filesystem::temp_directory_path() / "bf_acceptance_tasks.jsonl").string();
  interop::write_task_file(path, dag);
  std::vector<std::string> file_order;
  {
    core::SimClock clock;
    core::EventLog log;
    resource::SimBatchResource res(model, clock, log);
    auto loaded = interop::read_task_file(path);
    core::Workload all;
    for (const auto& [id, t] : loaded.tasks) all.tasks.push_back(t);
    auto strategy = wlms::derive_strategy(core::aggregate_dag_requirements(loaded), all, {&res},
                                          1, &loaded);
    wlms::Enactor enactor(clock, log, {&res});
    enactor.enact(strategy, loaded);
    file_order = ordering(log);
  }
  std::remove(path.c_str());

  // path 2: broker queue protocol
  std::vector<std::string> broker_order;
  {
    core::SimClock clock;
    core::EventLog log;
    resource::SimBatchResource res(model, clock, log);
    core::Workload all;
    all.tasks = tasks;
    auto reqs = core::aggregate_requirements(all);
    auto sizing = core::size_pilot(reqs, model.total_cores, model.queues[0].max_walltime);
    pilot::PilotDescription pd;
    pd.cores = sizing.cores;
    pd.duration = sizing.duration;
    pd.target_resource = "site";
    pd.queue_name = "batch";
    interop::BrokerExecutor executor(clock, log, &res, {pd});
    interop::BrokerQueue submissions("submissions"), reports("reports");
    for (const auto& t : tasks) submissions.push(interop::make_task_submit(t));
    executor.serve(submissions, reports);
    int terminal = 0;
    for (const auto& m : reports.poll())
      if (m.kind == interop::MessageKind::StateUpdate) terminal++;
    c.require(terminal == 30, "broker path returned " + std::to_string(terminal) +
                                  " terminal updates");
    broker_order = ordering(log);
  }

  // path 3: embedded subsystem
  std::vector<std::string> subsystem_order;
  {
    core::SimClock clock;
    core::EventLog log;
    resource::SimBatchResource res(model, clock, log);
    interop::SubsystemExecutor sub(clock, log, &res);
    auto outcomes = sub.submit(tasks);
    for (const auto& [id, out] : outcomes)
      if (out.state != core::State::Done) c.fail("subsystem task not done: " + id);
    subsystem_order = ordering(log);
  }

  c.require(!file_order.empty(), "no events recorded");
  c.require(file_order == broker_order, "file vs broker orderings differ");
  c.require(file_order == subsystem_order, "file vs subsystem orderings differ");
  c.note(std::to_string(file_order.size()) + " start/end events identical across all 3 paths");
  return c;
}

// ---------------------------------------------------------------- 8
Check criterion_determinism() {
  Check c;
  for (const char* name : {"two-resource-ttc.json", "titan-backfill.json", "repex-4x2.json",
                           "htbac-2pipes.json"}) {
    auto a = run_bundled(name);
    auto b = run_bundled(name);
    if (testutil::log_bytes(a.log) != testutil::log_bytes(b.log))
      c.fail(std::string(name) + ": event logs differ");
    std::ostringstream csv_a, csv_b;
    harness::emit_csv(a.metrics, csv_a);
    harness::emit_csv(b.metrics, csv_b);
    if (csv_a.str() != csv_b.str()) c.fail(std::string(name) + ": csv reports differ");
  }
  c.note("4 scenarios, byte-identical logs and csv on repeat runs");
  return c;
}

// ---------------------------------------------------------------- 9
Check criterion_self_sufficiency() {
  Check c;
  auto check_closure = [&](const std::filesystem::path& file,
                           const std::set<std::string>& allowed, const std::string& label) {
    auto closure = testutil::include_closure(kRoot, file);
    std::string bad = testutil::layering_violation(closure, allowed);
    c.require(bad.empty(), label + " reaches " + bad);
  };
  for (const auto& entry :
       std::filesystem::directory_iterator(kRoot / "include/blockflow/resource"))
    check_closure(entry.path(), {"resource"}, "resource header");
  for (const auto& entry : std::filesystem::directory_iterator(kRoot / "include/blockflow/pilot"))
    if (entry.path().filename() != "saga_connector.hpp")
      check_closure(entry.path(), {"pilot"}, "pilot header");
  check_closure(kRoot / "include/blockflow/ensemble/pattern.hpp", {"ensemble"},
                "pattern expanders");
  check_closure(kRoot / "tests/resource_test.cpp", {"resource"}, "resource suite");
  check_closure(kRoot / "tests/pilot_test.cpp", {"pilot"}, "pilot suite");
  check_closure(kRoot / "tests/ensemble_test.cpp", {"ensemble"}, "ensemble suite");
  c.note("module and suite include closures stay within block + core");
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "workload derivation matches the topological oracle", criterion_workload_oracle},
      {2, "multi-resource ttc beats the best single resource by 10%", criterion_multi_resource_ttc},
      {3, "pilot-sized jobs backfill with <=10% of the FCFS wait", criterion_backfill},
      {4, "late binding holds across all bundled scenarios", criterion_late_binding},
      {5, "state machines match the documented tables exhaustively", criterion_state_machines},
      {6, "pattern expanders match their closed-form task counts", criterion_pattern_formulas},
      {7, "file, broker and subsystem ingest execute identically", criterion_interop_equivalence},
      {8, "bundled scenarios replay byte-identically", criterion_determinism},
      {9, "blocks and their suites are self-sufficient", criterion_self_sufficiency},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    Check result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result.fail(std::string("exception: ") + e.what());
    }
    if (!result.ok) failures++;
    std::printf("criterion %d: %s - %s%s%s\n", criterion.id, result.ok ? "PASS" : "FAIL",
                criterion.title, result.detail.empty() ? "" : " | ", result.detail.c_str());
  }
  if (failures) std::printf("%d criterion(s) failing\n", failures);
  return failures == 0 ? 0 : 1;
}
