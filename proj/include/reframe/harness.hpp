#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reframe/netgraph.hpp"
#include "reframe/policies.hpp"
#include "reframe/workload.hpp"

namespace reframe {

// Run configuration -------------------------------------------------------------

struct NetworkConfig {
  std::string type = "unet";  // unet | unetpp | superres
  int depth = 3;
  int base_channels = 8;
  int input_channels = 6;
  int output_channels = 3;
  int height = 64;
  int width = 64;
};

struct PolicyConfig {
  std::string preset = "n5";
  std::optional<int> n;
  std::optional<double> tau;
  std::optional<double> c;
  std::optional<double> p;
  std::optional<int> refreshes;
};

struct AblationConfig {
  int unet_depth = 4;
  int unetpp_depth = 3;
};

struct NullHypothesisConfig {
  std::vector<double> noise_scales{2.0, 4.0};
};

struct SuperResConfig {
  int large_scale = 4;  // smaller input
  int small_scale = 2;  // larger input
  int output_height = 64;
  int output_width = 64;
};

struct MemoryEntry {
  std::string name;
  int count = 1;
  Shape shape;
};

struct MemoryConfig {
  std::vector<MemoryEntry> entries{{"single 24x360x640", 1, {24, 360, 640}},
                                   {"seven 64x192x256", 7, {64, 192, 256}}};
};

struct RunConfig {
  int version = 1;
  std::uint64_t seed = 1;
  int frames = 40;
  /// Frames excluded from quality and refresh statistics at the start of a run.
  int warmup = 0;
  std::string scenario = "all";
  NetworkConfig network;
  /// default | none | level<k> | config_a | config_b | multibranch
  std::string cache = "default";
  PolicyConfig policy;
  SceneConfig scene;
  std::vector<double> tau_sweep{0.05, 0.10, 0.20, 0.25, 0.40};
  AblationConfig ablation;
  NullHypothesisConfig null_hypothesis;
  SuperResConfig superres;
  MemoryConfig memory;
  std::string output_dir = "results";
};

/// Parses and validates a version-1 JSON run config. Unknown keys are errors.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config);

/// Throws std::invalid_argument on inconsistent settings.
void validate(const RunConfig& config);

/// Network described by the config, with its cache label applied.
NetworkSpec build_network(const RunConfig& config);
/// The configured policy preset with overrides applied.
RefreshPolicy build_policy(const RunConfig& config);
/// Scene settings with the run seed and network resolution applied.
SceneConfig scene_for(const RunConfig& config);

// Tables --------------------------------------------------------------------------

struct Table {
  std::string name;  // file stem
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string to_csv() const;
  std::string to_text() const;
};

std::string format_fixed(double value, int digits);
std::string format_general(double value);
std::string format_percent(double fraction);

// Scenarios -------------------------------------------------------------------------

struct Check {
  std::string description;
  bool passed = false;
  std::string detail;
};

struct ScenarioResult {
  std::string scenario;
  std::vector<Table> tables;
  std::vector<Check> checks;

  bool passed() const;
};

std::vector<std::string> scenario_names();

ScenarioResult scenario_policy_sweep(const RunConfig& config);
ScenarioResult scenario_ablation_levels(const RunConfig& config);
ScenarioResult scenario_null_hypothesis(const RunConfig& config);
ScenarioResult scenario_superres_tradeoff(const RunConfig& config);
ScenarioResult scenario_memory_report(const RunConfig& config);
ScenarioResult scenario_feature_profile(const RunConfig& config);

/// Runs one named scenario, or every scenario for "all".
std::vector<ScenarioResult> run_scenarios(const RunConfig& config);

/// Writes <table>.csv and <table>.txt per table plus checks.txt.
void write_results(const std::vector<ScenarioResult>& results, const std::filesystem::path& dir);

}  // namespace reframe
