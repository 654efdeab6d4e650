// lasertele command line: run, metrics, replay, plot, serve, defaults.
// Exit codes: 0 task success, 2 incomplete, 1 error.

#include "lasertele/bridge/server.hpp"
#include "lasertele/harness/plot.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>

namespace fs = std::filesystem;
using namespace lasertele;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void print_summary(const Recording& rec, std::ostream& os) {
  const auto& s = rec.summary;
  os << "ticks " << s.value("ticks", 0) << ", end t=" << s.value("end_t", 0.0) << " s, "
     << (s.value("success", false) ? "SUCCESS" : "INCOMPLETE") << "\n";
  for (const auto& c : s.at("checks"))
    os << "  [" << (c.at("pass").get<bool>() ? "pass" : "FAIL") << "] " << c.at("name").get<std::string>() << ": "
       << c.at("detail").get<std::string>() << "\n";
  os << "metrics " << s.at("metrics").dump() << "\n";
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laser-pointer assistive teleoperation simulator"};
  app.require_subcommand(1);

  std::string scenario, recording, out;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "Run a scripted scenario and write its recording");
  run_cmd->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--out", out, "Recording directory (default runs/<scenario name>)");

  auto* metrics_cmd = app.add_subcommand("metrics", "Recompute metrics from a recording");
  metrics_cmd->add_option("recording", recording, "Recording .jsonl/.csv or directory")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Re-drive a recording from its inputs and compare");
  replay_cmd->add_option("recording", recording, "Recording .jsonl/.csv or directory")->required();
  replay_cmd->add_option("--out", out, "Write the replayed recording here");

  auto* plot_cmd = app.add_subcommand("plot", "Write an SVG plot of a recording");
  plot_cmd->add_option("recording", recording, "Recording .jsonl/.csv or directory")->required();
  plot_cmd->add_option("--out", out, "SVG path (default next to the recording)");

  ServeOptions serve_opt;
  std::string scenario_dir;
  bool paused = false;
  auto* serve_cmd = app.add_subcommand("serve", "Live WebSocket session");
  serve_cmd->add_option("scenario", scenario, "Scenario file (input type is ignored; input comes from the client)")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--address", serve_opt.address, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", serve_opt.port, "Listen port, 0 for any")->capture_default_str();
  serve_cmd->add_option("--max-observers", serve_opt.max_observers, "Read-only client cap")->capture_default_str();
  serve_cmd->add_option("--scenario-dir", scenario_dir, "Directory searched by session_control load");
  serve_cmd->add_option("--out", out, "Write the session recording here on exit");
  serve_cmd->add_flag("--paused", paused, "Wait for session_control start");

  auto* defaults_cmd = app.add_subcommand("defaults", "Default configuration files");
  defaults_cmd->require_subcommand(1);
  std::string export_dir = "defaults";
  auto* export_cmd = defaults_cmd->add_subcommand("export", "Write default config, scene, arm model and keyboard layout");
  export_cmd->add_option("--out", export_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // --help is not an error
  }

  try {
    if (*run_cmd) {
      RunSpec spec = load_run_spec(scenario);
      if (seed) spec.scenario.seed = *seed;
      Recording rec = run(spec);
      fs::path dir = out.empty() ? fs::path("runs") / spec.scenario.name : fs::path(out);
      fs::path p = write_recording(rec, dir);
      print_summary(rec, std::cout);
      std::cout << "recording " << p.string() << "\n";
      return exit_code(rec);
    }
    if (*metrics_cmd) {
      Recording rec = read_recording(recording);
      Metrics m = compute_metrics(rec);
      std::cout << metrics_to_json(m).dump(2) << "\n";
      return m.complete ? 0 : 2;
    }
    if (*replay_cmd) {
      Recording original = read_recording(recording);
      Recording again = replay(original);
      if (!out.empty()) write_recording(again, out);
      nlohmann::json a = metrics_to_json(compute_metrics(original));
      nlohmann::json b = metrics_to_json(compute_metrics(again));
      bool same_rows = recording_csv(again) == recording_csv(original);
      std::cout << "original " << a.dump() << "\nreplayed " << b.dump() << "\n"
                << (a == b ? "metrics identical" : "METRICS DIFFER") << ", "
                << (same_rows ? "rows identical" : "ROWS DIFFER") << "\n";
      if (a != b || !same_rows) return 1;
      return exit_code(again);
    }
    if (*plot_cmd) {
      Recording rec = read_recording(recording);
      fs::path p = out;
      if (p.empty()) {
        p = fs::path(recording);
        if (fs::is_directory(p)) p /= "run.svg";
        else p.replace_extension(".svg");
      }
      write_text(p, plot_svg(rec));
      std::cout << "plot " << p.string() << "\n";
      return 0;
    }
    if (*serve_cmd) {
      RunSpec spec;
      if (!scenario.empty()) {
        spec = load_run_spec(scenario);
      } else {
        spec = make_run_spec({{"schema", 1}, {"name", "live"}, {"duration_s", 3600.0}, {"input", {{"type", "live"}}}},
                             fs::current_path());
      }
      fs::path dir = scenario_dir.empty() && !scenario.empty() ? fs::path(scenario).parent_path() : fs::path(scenario_dir);
      LiveSession live(spec, dir, !paused);
      BridgeServer server(live, serve_opt);
      server.start();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving ws://" << serve_opt.address << ":" << server.port() << "/ (Ctrl-C to stop)" << std::endl;
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      Recording rec = live.finished_recording();
      if (!out.empty()) std::cout << "recording " << write_recording(rec, out).string() << "\n";
      print_summary(rec, std::cout);
      return exit_code(rec);
    }
    if (*export_cmd) {
      fs::path dir(export_dir);
      Scene scene = default_scene();
      write_text(dir / "config.json", config_to_json(Config{}).dump(2) + "\n");
      write_text(dir / "scene.json", scene_to_json(scene).dump(2) + "\n");
      write_text(dir / "arm_model.json", arm_model_to_json(default_arm_model()).dump(2) + "\n");
      write_text(dir / "keyboard_layout.json", buttons_to_json(default_buttons()).dump(2) + "\n");
      std::cout << "wrote defaults to " << dir.string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
