#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reframe/metrics.hpp"
#include "reframe/netgraph.hpp"
#include "reframe/policies.hpp"
#include "reframe/workload.hpp"

namespace reframe {

/// Tensors kept between frames. `entries` and `reference_input` always come
/// from the same refresh frame.
struct CacheState {
  std::map<std::string, Tensor> entries;
  std::optional<Tensor> reference_input;
  int last_refresh_frame = -1;
  std::int64_t bytes = 0;
};

/// float32 bytes of all entries plus the reference input, if any.
std::int64_t cache_bytes_report(const CacheState& state);

enum class CorruptionKind { zero, uniform_random, normal_random, noise };

/// Null-hypothesis cache replacement. Uniform draws span each entry's
/// [min, max]; normal draws match each entry's mean and std; noise adds
/// N(0, (sigma_scale * entry std)^2).
struct Corruption {
  CorruptionKind kind = CorruptionKind::zero;
  double sigma_scale = 0.0;
  std::uint64_t seed = 0;
};

std::string describe(const Corruption& corruption);

/// Throws std::invalid_argument on an empty cache.
CacheState corrupt_cache(const CacheState& state, const Corruption& corruption);

struct FrameRecord {
  int index = 0;
  bool refreshed = false;
  std::int64_t flops = 0;
  double policy_metric = 0.0;
  Tensor output;
  std::optional<double> mse_vs_baseline;
  std::optional<double> ssim_vs_baseline;
};

struct SequenceReport {
  std::string policy;
  std::string cache_label;
  std::vector<FrameRecord> frames;
  int refresh_count = 0;
  double skipped_frame_fraction = 0.0;
  double eliminated_flops_fraction = 0.0;
  std::int64_t full_pass_flops = 0;
  std::int64_t cached_pass_flops = 0;
  std::int64_t total_flops = 0;
  /// Largest cache footprint held during the run.
  std::int64_t cache_bytes = 0;

  std::vector<FrameStats> stats() const;
  double mean_mse() const;
  double mean_ssim() const;
};

struct RunOptions {
  /// Applied to the freshly stored cache on every refresh frame; the seed is
  /// offset by the frame index.
  std::optional<Corruption> corruption;
};

/// Frame 0 runs full inference; afterwards the policy picks full (refresh)
/// or cached inference per frame.
SequenceReport run_sequence(const NetworkSpec& spec, const FrameSequence& frames,
                            const RefreshPolicy& policy, const RunOptions& options = {});

struct BaselineRun {
  std::vector<Tensor> outputs;
  std::int64_t total_flops = 0;
};

/// Full inference on every frame.
BaselineRun run_baseline(const NetworkSpec& spec, const FrameSequence& frames);

/// Fills mse_vs_baseline / ssim_vs_baseline for every frame.
void compare_to_baseline(SequenceReport& report, const BaselineRun& baseline,
                         double peak = kDefaultPeak);

std::string report_to_json(const SequenceReport& report);
/// index,refreshed,flops,policy_metric,mse_vs_baseline (empty when unknown).
std::string report_to_csv(const SequenceReport& report);

}  // namespace reframe
