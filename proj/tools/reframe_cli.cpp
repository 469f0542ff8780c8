// reframe: run inter-frame caching experiments from a JSON config.
//
//   reframe run --config configs/default.json [--out dir] [--seed n] [--scenario name]
//
// REFRAME_THREADS sets the conv worker count (results do not depend on it).

#include <iostream>

#include "CLI11.hpp"
#include "reframe/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Inter-frame layer caching experiment runner"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run scenarios and write CSV/text tables");
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string scenario;
  bool quiet = false;
  run->add_option("--config", config_path, "Run config (JSON, version 1)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Seed for scene and weights (overrides seed)");
  run->add_option("--scenario", scenario, "Scenario name or 'all' (overrides scenario)");
  run->add_flag("-q,--quiet", quiet, "Only print check results");

  CLI11_PARSE(app, argc, argv);

  try {
    reframe::RunConfig cfg = reframe::load_run_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!scenario.empty()) cfg.scenario = scenario;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    reframe::validate(cfg);

    const auto results = reframe::run_scenarios(cfg);
    reframe::write_results(results, cfg.output_dir);

    bool ok = true;
    for (const auto& r : results) {
      if (!quiet) {
        for (const auto& t : r.tables) {
          if (t.name.find("_frames") != std::string::npos) continue;
          std::cout << t.to_text() << '\n';
        }
      }
      for (const auto& c : r.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << r.scenario << ": " << c.description;
        if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << '\n';
      }
      ok = ok && r.passed();
    }
    std::cout << "tables written to " << cfg.output_dir << '\n';
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
