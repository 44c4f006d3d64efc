// Scenario runner CLI.
//
//   blockflow run <scenario.json> [--seed N] [--out DIR] [--format csv|text]
//   blockflow validate <scenario.json>
//   blockflow expand <pattern.json>
//
// Exit codes: 0 success, 2 config error, 3 execution failure.
// BLOCKFLOW_LOG_LEVEL in {error, info, debug} controls stderr chatter.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "blockflow/blockflow.hpp"

namespace {

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("BLOCKFLOW_LOG_LEVEL");
  if (!env) return LogLevel::info;
  std::string v(env);
  if (v == "error") return LogLevel::error;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::info;
}

void say(LogLevel at, const std::string& msg) {
  if (static_cast<int>(log_level()) >= static_cast<int>(at)) std::cerr << msg << "\n";
}

int run_command(const std::string& path, std::uint64_t seed, bool seed_set,
                const std::string& out_dir, const std::string& format) {
  namespace bf = blockflow;
  bf::harness::Scenario scenario;
  try {
    scenario = bf::harness::load_scenario(path);
    if (seed_set) scenario.seed = seed;
  } catch (const bf::core::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  say(LogLevel::info, "running scenario " + path + " (composition " +
                          std::string(bf::harness::to_string(scenario.composition)) + ", seed " +
                          std::to_string(scenario.seed) + ")");
  bf::harness::ScenarioRunner runner;
  bf::harness::RunResult result;
  try {
    result = runner.run(scenario);
  } catch (const bf::core::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  if (log_level() >= LogLevel::debug)
    for (const auto& e : result.log.events())
      std::cerr << "  [" << bf::core::fmt_double(e.time) << "] " << e.entity << " " << e.kind
                << "\n";

  bf::harness::ReportFormat fmt =
      format == "text" ? bf::harness::ReportFormat::text : bf::harness::ReportFormat::csv;
  if (!out_dir.empty()) {
    bf::harness::write_outputs(result, out_dir, fmt);
    say(LogLevel::info, "wrote " + out_dir + "/events.jsonl and metrics." +
                            (fmt == bf::harness::ReportFormat::csv ? "csv" : "txt"));
  }
  if (fmt == bf::harness::ReportFormat::csv)
    bf::harness::emit_csv(result.metrics, std::cout);
  else
    bf::harness::emit_text(result.metrics, std::cout);

  if (result.execution_failed) {
    std::cerr << "execution failed: " << result.failed_tasks.size() << " task(s)\n";
    return 3;
  }
  return 0;
}

int validate_command(const std::string& path) {
  try {
    blockflow::harness::load_scenario(path);
  } catch (const blockflow::core::Error& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return 2;
  }
  std::cout << "ok\n";
  return 0;
}

int expand_command(const std::string& path) {
  namespace bf = blockflow;
  try {
    std::ifstream in(path);
    if (!in) throw bf::core::ConfigError("cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw bf::core::ConfigError("not valid JSON: " + path);
    auto spec = bf::ensemble::pattern_from_json(j);
    auto dag = bf::ensemble::expand(spec);
    // print in the task file dialect, one record per line
    std::map<std::string, std::set<std::string>> depends;
    for (const auto& [from, to] : dag.edges) depends[to].insert(from);
    for (const auto& [id, task] : dag.tasks) {
      auto rec = bf::core::to_record(task);
      rec["depends"] = depends[id];
      std::cout << rec.dump() << "\n";
    }
  } catch (const bf::core::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"building-block workflow scenario runner"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, format = "csv";
  std::uint64_t seed = 0;
  bool seed_set = false;

  CLI::App* run = app.add_subcommand("run", "run a scenario to completion");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--seed", seed, "override the scenario seed")
      ->each([&](const std::string&) { seed_set = true; });
  run->add_option("--out", out_dir, "directory for events.jsonl and the metrics report");
  run->add_option("--format", format, "metrics format")
      ->check(CLI::IsMember({"csv", "text"}));

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("scenario", validate_path, "scenario JSON file")->required();

  std::string pattern_path;
  CLI::App* expand = app.add_subcommand("expand", "expand a pattern spec and print its dag");
  expand->add_option("pattern", pattern_path, "pattern JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return run_command(scenario_path, seed, seed_set, out_dir, format);
  if (validate->parsed()) return validate_command(validate_path);
  if (expand->parsed()) return expand_command(pattern_path);
  return 2;
}
