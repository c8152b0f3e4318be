#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiment.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_interrupt(int) { g_stop.store(true); }

std::string metadata_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace risd2d::runner;

  CLI::App app{"Ergodic-rate experiments for active-RIS aided D2D networks"};
  app.require_subcommand(1);

  std::string source;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::vector<std::string> overrides;
  bool timing = false;

  auto* run = app.add_subcommand("run", "Run a builtin or a config file and write CSV");
  run->add_option("spec", source, "Builtin name or config file")->required();
  run->add_option("--seed", seed, "Master seed for optimization and Monte-Carlo");
  run->add_option("--trials", trials, "Monte-Carlo trials per cell (0 skips simulation)");
  run->add_option("--out", out, "Output CSV path");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--set", overrides, "Override a config key (key=value)");
  run->add_flag("--timing", timing, "Add elapsed_ms to the CSV");

  auto* list = app.add_subcommand("list-builtins", "List builtin experiments");

  std::string validate_source;
  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("spec", validate_source, "Builtin name or config file")->required();
  validate->add_option("--set", overrides, "Override a config key (key=value)");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto& name : builtin_names()) {
      const auto spec = builtin_spec(name);
      std::cout << name << "  sweep=" << to_string(spec.sweep) << " points="
                << spec.values.size() << " modes=" << spec.modes.size() << '\n';
    }
    return 0;
  }

  try {
    ExperimentSpec spec = load_spec(validate->parsed() ? validate_source : source);
    KeyValues extra;
    for (const auto& o : overrides) {
      auto [k, v] = parse_override(o);
      extra.set(std::move(k), std::move(v));
    }
    apply_config(spec, extra);
    if (seed) spec.seed = *seed;
    if (trials) spec.trials = *trials;
    if (out) spec.output_path = *out;
    if (workers) spec.workers = *workers;
    if (timing) spec.timing = true;
    if (spec.output_path.empty()) spec.output_path = spec.name + ".csv";
    spec.validate();

    if (validate->parsed()) {
      std::cout << "ok: " << spec.name << " (" << spec.values.size() << " points x "
                << spec.modes.size() << " modes)\n";
      return 0;
    }

    std::signal(SIGINT, on_interrupt);
    std::signal(SIGTERM, on_interrupt);
    const auto rows = run_experiment(spec, &g_stop);
    const bool complete = !g_stop.load();
    write_csv_file(spec.output_path, rows, spec.sweep, spec.timing);
    if (spec.write_metadata) {
      write_metadata_file(metadata_path(spec.output_path), spec, rows.size(), complete);
    }
    std::cerr << "wrote " << rows.size() << " rows to " << spec.output_path
              << (complete ? "" : " (interrupted)") << '\n';
    return complete ? 0 : 130;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
