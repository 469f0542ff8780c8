#include "reframe/cache_engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace reframe {

namespace {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
  float min = 0.0f;
  float max = 0.0f;
};

Moments moments(const Tensor& t) {
  Moments m;
  const auto d = t.data();
  double sum = 0.0;
  for (float v : d) sum += v;
  m.mean = sum / static_cast<double>(d.size());
  double sq = 0.0;
  for (float v : d) sq += (v - m.mean) * (v - m.mean);
  m.stddev = std::sqrt(sq / static_cast<double>(d.size()));
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  m.min = *lo;
  m.max = *hi;
  return m;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::int64_t cache_bytes_report(const CacheState& state) {
  std::int64_t total = 0;
  for (const auto& [name, t] : state.entries) total += t.bytes();
  if (state.reference_input) total += state.reference_input->bytes();
  return total;
}

std::string describe(const Corruption& c) {
  switch (c.kind) {
    case CorruptionKind::zero:
      return "zero";
    case CorruptionKind::uniform_random:
      return "uniform";
    case CorruptionKind::normal_random:
      return "normal";
    case CorruptionKind::noise: {
      std::ostringstream os;
      os << "noise(" << c.sigma_scale << "sigma)";
      return os.str();
    }
  }
  return "?";
}

CacheState corrupt_cache(const CacheState& state, const Corruption& corruption) {
  if (state.entries.empty()) throw std::invalid_argument("cannot corrupt an empty cache");
  if (corruption.kind == CorruptionKind::noise && !(corruption.sigma_scale >= 0.0)) {
    throw std::invalid_argument("noise sigma scale must be >= 0");
  }
  CacheState out = state;
  std::mt19937_64 gen(corruption.seed);
  for (auto& [name, tensor] : out.entries) {
    const Moments m = moments(tensor);
    auto data = tensor.data();
    switch (corruption.kind) {
      case CorruptionKind::zero:
        std::fill(data.begin(), data.end(), 0.0f);
        break;
      case CorruptionKind::uniform_random: {
        std::uniform_real_distribution<double> dist(m.min, m.max);
        for (float& v : data) v = static_cast<float>(m.min == m.max ? m.min : dist(gen));
        break;
      }
      case CorruptionKind::normal_random: {
        std::normal_distribution<double> dist(m.mean, m.stddev > 0.0 ? m.stddev : 1.0);
        for (float& v : data) v = static_cast<float>(m.stddev > 0.0 ? dist(gen) : m.mean);
        break;
      }
      case CorruptionKind::noise: {
        const double sigma = corruption.sigma_scale * m.stddev;
        if (sigma == 0.0) break;
        std::normal_distribution<double> dist(0.0, sigma);
        for (float& v : data) v = static_cast<float>(v + dist(gen));
        break;
      }
    }
  }
  out.bytes = cache_bytes_report(out);
  return out;
}

std::vector<FrameStats> SequenceReport::stats() const {
  std::vector<FrameStats> rows;
  rows.reserve(frames.size());
  for (const FrameRecord& f : frames) {
    rows.push_back(FrameStats{f.refreshed, f.flops, f.mse_vs_baseline.value_or(0.0),
                              f.ssim_vs_baseline.value_or(1.0)});
  }
  return rows;
}

double SequenceReport::mean_mse() const {
  double sum = 0.0;
  for (const FrameRecord& f : frames) {
    if (!f.mse_vs_baseline) throw std::logic_error("report has not been compared to a baseline");
    sum += *f.mse_vs_baseline;
  }
  return frames.empty() ? 0.0 : sum / static_cast<double>(frames.size());
}

double SequenceReport::mean_ssim() const {
  double sum = 0.0;
  for (const FrameRecord& f : frames) {
    if (!f.ssim_vs_baseline) throw std::logic_error("report has not been compared to a baseline");
    sum += *f.ssim_vs_baseline;
  }
  return frames.empty() ? 1.0 : sum / static_cast<double>(frames.size());
}

SequenceReport run_sequence(const NetworkSpec& spec, const FrameSequence& frames,
                            const RefreshPolicy& policy, const RunOptions& options) {
  if (frames.empty()) throw std::invalid_argument("run_sequence needs at least one frame");
  for (const FrameInput& f : frames.frames) {
    if (f.input.shape() != spec.input_shape()) {
      throw std::invalid_argument("frame " + std::to_string(f.index) + " has shape " +
                                  to_string(f.input.shape()) + ", network expects " +
                                  to_string(spec.input_shape()));
    }
  }

  SequenceReport report;
  report.policy = describe(policy);
  report.cache_label = to_string(spec.cache_config().label);
  report.full_pass_flops = spec.full_flops();
  report.cached_pass_flops = spec.cached_flops();

  const bool keeps_reference = std::holds_alternative<DeltaSmape>(policy);
  PolicyState policy_state = initial_state(policy);
  CacheState cache;

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const FrameInput& frame = frames[t];
    const Decision decision = decide(policy, policy_state, frame);
    ForwardRecord rec;
    if (decision.refresh) {
      rec = forward_full(spec, frame.input);
      CacheState next;
      next.entries = std::move(rec.edge_tensors);
      if (keeps_reference) next.reference_input = frame.input;
      next.last_refresh_frame = static_cast<int>(t);
      if (options.corruption && !next.entries.empty()) {
        Corruption c = *options.corruption;
        c.seed += t;
        next = corrupt_cache(next, c);
      }
      next.bytes = cache_bytes_report(next);
      cache = std::move(next);
      report.cache_bytes = std::max(report.cache_bytes, cache.bytes);
      ++report.refresh_count;
    } else {
      rec = forward_cached(spec, frame.input, cache.entries);
    }
    advance(policy, policy_state, frame, decision.refresh);
    report.total_flops += rec.flops_executed;
    report.frames.push_back(FrameRecord{static_cast<int>(t), decision.refresh, rec.flops_executed,
                                        decision.metric, std::move(rec.output), std::nullopt,
                                        std::nullopt});
  }

  const double count = static_cast<double>(frames.size());
  report.skipped_frame_fraction = 1.0 - report.refresh_count / count;
  report.eliminated_flops_fraction =
      1.0 - static_cast<double>(report.total_flops) /
                (count * static_cast<double>(report.full_pass_flops));
  return report;
}

BaselineRun run_baseline(const NetworkSpec& spec, const FrameSequence& frames) {
  BaselineRun run;
  run.outputs.reserve(frames.size());
  for (const FrameInput& f : frames.frames) {
    ForwardRecord rec = forward_full(spec, f.input);
    run.total_flops += rec.flops_executed;
    run.outputs.push_back(std::move(rec.output));
  }
  return run;
}

void compare_to_baseline(SequenceReport& report, const BaselineRun& baseline, double peak) {
  if (baseline.outputs.size() != report.frames.size()) {
    throw std::invalid_argument("baseline and report cover different frame counts");
  }
  for (std::size_t t = 0; t < report.frames.size(); ++t) {
    FrameRecord& f = report.frames[t];
    f.mse_vs_baseline = mse(f.output, baseline.outputs[t]);
    f.ssim_vs_baseline = ssim(f.output, baseline.outputs[t], peak);
  }
}

std::string report_to_json(const SequenceReport& report) {
  nlohmann::json frames = nlohmann::json::array();
  for (const FrameRecord& f : report.frames) {
    frames.push_back({{"index", f.index},
                      {"refreshed", f.refreshed},
                      {"flops", f.flops},
                      {"policy_metric", f.policy_metric},
                      {"mse_vs_baseline", f.mse_vs_baseline ? nlohmann::json(*f.mse_vs_baseline)
                                                            : nlohmann::json(nullptr)},
                      {"ssim_vs_baseline", f.ssim_vs_baseline ? nlohmann::json(*f.ssim_vs_baseline)
                                                              : nlohmann::json(nullptr)}});
  }
  nlohmann::json doc{{"policy", report.policy},
                     {"cache_label", report.cache_label},
                     {"frames", std::move(frames)},
                     {"refresh_count", report.refresh_count},
                     {"skipped_frame_fraction", report.skipped_frame_fraction},
                     {"eliminated_flops_fraction", report.eliminated_flops_fraction},
                     {"full_pass_flops", report.full_pass_flops},
                     {"cached_pass_flops", report.cached_pass_flops},
                     {"total_flops", report.total_flops},
                     {"cache_bytes", report.cache_bytes}};
  return doc.dump(2);
}

std::string report_to_csv(const SequenceReport& report) {
  std::ostringstream os;
  os << "index,refreshed,flops,policy_metric,mse_vs_baseline\n";
  for (const FrameRecord& f : report.frames) {
    os << f.index << ',' << (f.refreshed ? 1 : 0) << ',' << f.flops << ','
       << format_double(f.policy_metric) << ','
       << (f.mse_vs_baseline ? format_double(*f.mse_vs_baseline) : std::string()) << '\n';
  }
  return os.str();
}

}  // namespace reframe
