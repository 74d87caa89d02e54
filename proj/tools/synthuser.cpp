// synthuser command line: serve, synthesize, play, report.
#include <chrono>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "synthuser/http_api.hpp"
#include "synthuser/synthuser.hpp"

namespace fs = std::filesystem;
using namespace synthuser;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitFindings = 1;
constexpr int kExitRunError = 2;

httplib::Server* g_http = nullptr;

void on_signal(int) {
  if (g_http) g_http->stop();
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> config;
  std::optional<std::string> trace_out;
  std::optional<std::string> static_dir;
  std::optional<std::uint64_t> seed;
  bool fault_alert_nav = false;
  std::optional<double> fault_follow_p;
};

int run_serve(const ServeArgs& a) {
  RunConfig cfg = a.config ? parse_config(fs::path(*a.config)) : RunConfig{};
  if (!a.config) cfg.faults.follow_error_probability = 0.0;
  if (a.seed) cfg.seed = a.seed;
  if (a.fault_alert_nav) cfg.faults.alert_nav_bug_enabled = true;
  if (a.fault_follow_p) cfg.faults.follow_error_probability = *a.fault_follow_p;
  validate(cfg.faults);

  Server target(cfg.seed.value_or(0), cfg.faults);
  seed_population(target, cfg.population);

  std::unique_ptr<TraceLog> log;
  std::unique_ptr<ActionReporter> reporter;
  if (a.trace_out) {
    log = TraceLog::open(*a.trace_out);
    reporter = std::make_unique<ActionReporter>(*log, wall_clock());
  }

  httplib::Server http;
  mount_routes(http, target, reporter.get());
  if (a.static_dir && !http.set_mount_point("/", *a.static_dir)) {
    throw Error(ErrorCode::io, "static directory '" + *a.static_dir + "' not found");
  }
  g_http = &http;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving on http://" << a.host << ':' << a.port << (reporter ? ", recording to " + *a.trace_out : "")
            << '\n';
  if (!http.listen(a.host, a.port)) throw Error(ErrorCode::run, "cannot listen on " + a.host + ":" + std::to_string(a.port));
  if (reporter) {
    reporter->flush();
    if (reporter->dropped() > 0) std::cerr << "warning: " << reporter->dropped() << " events could not be written\n";
  }
  return kExitClean;
}

int run_synthesize(const std::vector<std::string>& inputs, const std::string& output) {
  std::vector<Trace> traces;
  for (const auto& path : inputs) {
    for (Trace& t : load_trace_file(path)) traces.push_back(std::move(t));
  }
  FrequencyModel model = build_frequency_model(traces, utc_now());
  save_model(model, output);
  std::size_t events = 0;
  for (const Trace& t : traces) events += t.events.size();
  std::cout << "model: " << model.action_table.size() << " states, " << model.state_table.size()
            << " state-action pairs from " << traces.size() << " sessions (" << events << " events) -> " << output
            << '\n';
  return kExitClean;
}

struct PlayArgs {
  std::optional<std::string> model;
  std::optional<std::string> replay;
  bool random = false;
  std::optional<std::string> config;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  bool fault_alert_nav = false;
  std::optional<double> fault_follow_p;
  std::optional<std::string> trace_out;
};

int run_play(const PlayArgs& a) {
  RunConfig cfg = a.config ? parse_config(fs::path(*a.config)) : RunConfig{};
  if (a.seed) cfg.seed = a.seed;
  if (a.fault_alert_nav) cfg.faults.alert_nav_bug_enabled = true;
  if (a.fault_follow_p) cfg.faults.follow_error_probability = *a.fault_follow_p;
  validate(cfg.faults);

  std::optional<fs::path> model_path = a.model ? std::optional<fs::path>(*a.model) : cfg.model;
  std::optional<fs::path> replay_path = a.replay ? std::optional<fs::path>(*a.replay) : cfg.replay;
  int sources = (a.model ? 1 : 0) + (a.replay ? 1 : 0) + (a.random ? 1 : 0);
  if (sources > 1) throw Error(ErrorCode::config, "choose one of --model, --replay, --random");
  if (sources == 0 && model_path && replay_path) {
    throw Error(ErrorCode::config, "config names both a model and a replay trace; pick one on the command line");
  }

  SimulationConfig sim;
  sim.seed = require_seed(cfg);
  sim.faults = cfg.faults;
  sim.time_scale = cfg.time_scale;
  sim.max_steps = cfg.max_steps;
  sim.stop_on_first_violation = cfg.stop_on_first_violation;
  sim.population = cfg.population;
  sim.stimulus_interval = cfg.stimulus_interval;
  sim.await_delay_ms = cfg.await_delay_ms;

  if (a.random) {
    for (std::uint64_t i = 0; i < cfg.agents; ++i) sim.agents.push_back(AgentSpec{AgentKind::random, {}, {}, cfg.max_steps});
  } else if (replay_path) {
    auto sessions = load_trace_file(*replay_path);
    if (sessions.empty()) throw Error(ErrorCode::config, "replay trace '" + replay_path->string() + "' has no sessions");
    for (std::uint64_t i = 0; i < cfg.agents; ++i) {
      auto trace = std::make_shared<const Trace>(sessions[i % sessions.size()]);
      sim.agents.push_back(AgentSpec{AgentKind::replay, trace, {}, cfg.max_steps});
    }
  } else if (model_path) {
    auto model = std::make_shared<const FrequencyModel>(load_model(*model_path));
    for (std::uint64_t i = 0; i < cfg.agents; ++i) sim.agents.push_back(AgentSpec{AgentKind::frequency, {}, model, cfg.max_steps});
  } else {
    throw Error(ErrorCode::config, "no agent source: pass --model, --replay or --random");
  }

  std::unique_ptr<TraceLog> log;
  if (a.trace_out) log = TraceLog::open(*a.trace_out);

  auto started = std::chrono::steady_clock::now();
  SimulationReport report = run_simulation(sim, default_target, log.get());
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  std::optional<fs::path> out = a.output ? std::optional<fs::path>(*a.output) : cfg.report;
  if (out) write_report(report, *out);
  std::cout << summarize(report);
  std::cerr << "throughput: " << report.totals.steps << " steps in " << seconds << " s";
  if (seconds > 0) std::cerr << " (" << static_cast<std::uint64_t>(static_cast<double>(report.totals.steps) / seconds) << " steps/s)";
  std::cerr << '\n';
  return exit_code(report) == 0 ? kExitClean : kExitFindings;
}

int run_report(const std::string& path) {
  SimulationReport report = load_report(path);
  std::cout << summarize(report);
  return exit_code(report) == 0 ? kExitClean : kExitFindings;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthuser: record, synthesize and play synthetic end users"};
  app.require_subcommand(1);

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "run the demo target with tracker endpoints");
  serve->add_option("--host", serve_args.host, "bind address")->capture_default_str();
  serve->add_option("--port", serve_args.port, "listen port")->capture_default_str();
  serve->add_option("--config", serve_args.config, "JSON config file");
  serve->add_option("--trace-out", serve_args.trace_out, "append reported UI actions to this trace file");
  serve->add_option("--static-dir", serve_args.static_dir, "serve the web UI from this directory");
  serve->add_option("--seed", serve_args.seed, "target seed (overrides config)");
  serve->add_flag("--fault-alert-nav", serve_args.fault_alert_nav, "enable the alert navigation fault");
  serve->add_option("--fault-follow-p", serve_args.fault_follow_p, "follow failure probability")->check(CLI::Range(0.0, 1.0));

  std::vector<std::string> synth_inputs;
  std::string synth_output;
  auto* synth = app.add_subcommand("synthesize", "build a frequency model from trace files");
  synth->add_option("traces", synth_inputs, "trace files")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--output", synth_output, "model file to write")->required();

  PlayArgs play_args;
  auto* play = app.add_subcommand("play", "run agents against a fresh target");
  auto* model_opt = play->add_option("--model", play_args.model, "frequency model file");
  auto* replay_opt = play->add_option("--replay", play_args.replay, "trace file to replay");
  auto* random_opt = play->add_flag("--random", play_args.random, "random agents");
  model_opt->excludes(replay_opt)->excludes(random_opt);
  replay_opt->excludes(random_opt);
  play->add_option("--config", play_args.config, "JSON config file");
  play->add_option("-o,--output", play_args.output, "report file to write");
  play->add_option("--seed", play_args.seed, "master seed (overrides config)");
  play->add_flag("--fault-alert-nav", play_args.fault_alert_nav, "enable the alert navigation fault");
  play->add_option("--fault-follow-p", play_args.fault_follow_p, "follow failure probability")->check(CLI::Range(0.0, 1.0));
  play->add_option("--trace-out", play_args.trace_out, "record agent actions to this trace file");

  std::string report_path;
  auto* report = app.add_subcommand("report", "summarize a report file");
  report->add_option("file", report_path, "report file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitClean : kExitRunError;
  }

  try {
    if (serve->parsed()) return run_serve(serve_args);
    if (synth->parsed()) return run_synthesize(synth_inputs, synth_output);
    if (play->parsed()) return run_play(play_args);
    if (report->parsed()) return run_report(report_path);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kExitRunError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunError;
  }
  return kExitRunError;
}
