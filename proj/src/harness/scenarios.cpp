#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "reframe/cache_engine.hpp"
#include "reframe/harness.hpp"
#include "reframe/metrics.hpp"

namespace reframe {

namespace {

std::string slug(std::string s) {
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  }
  return s;
}

std::string exact(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Check check(std::string description, bool passed, std::string detail = {}) {
  return Check{std::move(description), passed, std::move(detail)};
}

// A policy run compared against the uncached baseline, summarised over the
// frames after warmup.
struct Measured {
  SequenceReport report;
  Summary summary;
};

Summary summarise(const SequenceReport& report, int warmup) {
  const std::vector<FrameStats> rows = report.stats();
  return aggregate(std::span(rows).subspan(static_cast<std::size_t>(warmup)), report.full_pass_flops);
}

Measured measure(const NetworkSpec& spec, const FrameSequence& frames, const RefreshPolicy& policy,
                 const BaselineRun& baseline, int warmup, const RunOptions& options = {}) {
  Measured m{run_sequence(spec, frames, policy, options), {}};
  compare_to_baseline(m.report, baseline);
  m.summary = summarise(m.report, warmup);
  return m;
}

Table frame_table(const std::string& name, const std::string& title, const SequenceReport& r) {
  Table t{name, title, {"index", "refreshed", "flops", "policy_metric", "mse_vs_baseline"}, {}};
  for (const FrameRecord& f : r.frames) {
    t.add_row({std::to_string(f.index), f.refreshed ? "1" : "0", std::to_string(f.flops),
               exact(f.policy_metric), f.mse_vs_baseline ? exact(*f.mse_vs_baseline) : ""});
  }
  return t;
}

// Recomputes refresh count and FLOPs from the emitted per-frame rows.
Check totals_consistent(const Table& frames, const Summary& s, int warmup) {
  int refreshes = 0;
  std::int64_t flops = 0;
  for (const auto& row : frames.rows) {
    if (std::stoi(row[0]) < warmup) continue;
    refreshes += row[1] == "1" ? 1 : 0;
    flops += std::stoll(row[2]);
  }
  const bool ok = refreshes == s.refresh_count && flops == s.total_flops;
  return check(frames.name + " totals recompute from per-frame rows", ok,
               "refreshes " + std::to_string(refreshes) + "/" + std::to_string(s.refresh_count) +
                   ", flops " + std::to_string(flops) + "/" + std::to_string(s.total_flops));
}

int expected_every_n(int n, int frames, int warmup) {
  int count = 0;
  for (int t = warmup; t < frames; ++t) count += (t % n == 0) ? 1 : 0;
  return count;
}

std::vector<std::string> quality_cells(const Summary& s) {
  return {format_general(s.mean_mse), format_fixed(s.psnr, 2), format_fixed(s.mean_ssim, 4)};
}

std::string policy_setting(const RefreshPolicy& policy) { return describe(policy); }

}  // namespace

bool ScenarioResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<std::string> scenario_names() {
  return {"policy_sweep", "ablation_levels", "null_hypothesis",
          "superres_tradeoff", "memory_report", "feature_profile"};
}

ScenarioResult scenario_policy_sweep(const RunConfig& cfg) {
  ScenarioResult out{"policy_sweep", {}, {}};
  const NetworkSpec spec = build_network(cfg);
  const FrameSequence seq = generate(scene_for(cfg), cfg.frames);
  const BaselineRun baseline = run_baseline(spec, seq);

  Table table{"policy_sweep",
              "Refresh policies on " + std::to_string(cfg.frames) + " frames (" +
                  to_string(spec.cache_config().label) + ")",
              {"policy", "setting", "refreshes", "skipped", "eliminated_flops", "mse", "psnr", "ssim"},
              {}};
  std::map<std::string, int> refreshes;
  for (const std::string preset : {"delta_l", "delta_h", "n5", "n2", "motion", "nonlinear", "no_update"}) {
    const RefreshPolicy policy = make_policy(preset, cfg.frames);
    const Measured m = measure(spec, seq, policy, baseline, cfg.warmup);
    refreshes[preset] = m.summary.refresh_count;
    std::vector<std::string> row{preset, policy_setting(policy), std::to_string(m.summary.refresh_count),
                                 format_percent(m.summary.skipped_frame_fraction),
                                 format_percent(m.summary.eliminated_flops_fraction)};
    for (auto& cell : quality_cells(m.summary)) row.push_back(cell);
    table.add_row(std::move(row));
    Table frames = frame_table("policy_sweep_frames_" + preset, "Per-frame record: " + preset, m.report);
    out.checks.push_back(totals_consistent(frames, m.summary, cfg.warmup));
    out.tables.push_back(std::move(frames));
  }
  out.tables.insert(out.tables.begin(), std::move(table));

  const int n5 = expected_every_n(5, cfg.frames, cfg.warmup);
  const int n2 = expected_every_n(2, cfg.frames, cfg.warmup);
  out.checks.push_back(check("N-5 refresh count", refreshes["n5"] == n5,
                             std::to_string(refreshes["n5"]) + " vs expected " + std::to_string(n5)));
  out.checks.push_back(check("N-2 refresh count", refreshes["n2"] == n2,
                             std::to_string(refreshes["n2"]) + " vs expected " + std::to_string(n2)));
  out.checks.push_back(check("Delta_H refreshes >= Delta_L refreshes",
                             refreshes["delta_h"] >= refreshes["delta_l"],
                             std::to_string(refreshes["delta_h"]) + " vs " +
                                 std::to_string(refreshes["delta_l"])));

  Table sweep{"policy_sweep_tau", "Frame-delta threshold sweep",
              {"tau", "refreshes", "skipped", "mse"}, {}};
  std::vector<double> taus = cfg.tau_sweep;
  std::sort(taus.begin(), taus.end());
  int previous = -1;
  bool monotone = true;
  std::string counts;
  for (double tau : taus) {
    const Measured m = measure(spec, seq, DeltaSmape{tau}, baseline, cfg.warmup);
    if (previous >= 0 && m.summary.refresh_count > previous) monotone = false;
    previous = m.summary.refresh_count;
    counts += (counts.empty() ? "" : " ") + std::to_string(m.summary.refresh_count);
    sweep.add_row({format_fixed(tau, 2), std::to_string(m.summary.refresh_count),
                   format_percent(m.summary.skipped_frame_fraction), format_general(m.summary.mean_mse)});
  }
  out.tables.insert(out.tables.begin() + 1, std::move(sweep));
  out.checks.push_back(check("refresh count non-increasing in tau", monotone, counts));
  return out;
}

ScenarioResult scenario_ablation_levels(const RunConfig& cfg) {
  ScenarioResult out{"ablation_levels", {}, {}};
  const Shape input{cfg.network.input_channels, cfg.network.height, cfg.network.width};
  const FrameSequence seq = generate(scene_for(cfg), cfg.frames);
  const RefreshPolicy policy = build_policy(cfg);

  Table table{"ablation_levels", "Cache levels and configurations (" + describe(policy) + ")",
              {"network", "cache", "flops_remaining", "refreshes", "eliminated_flops", "mse", "psnr", "ssim"},
              {}};
  auto add = [&](const std::string& network, const NetworkSpec& spec, const BaselineRun& baseline) {
    const Measured m = measure(spec, seq, policy, baseline, cfg.warmup);
    const double remaining =
        static_cast<double>(spec.cached_flops()) / static_cast<double>(spec.full_flops());
    std::vector<std::string> row{network, to_string(spec.cache_config().label), format_percent(remaining),
                                 std::to_string(m.summary.refresh_count),
                                 format_percent(m.summary.eliminated_flops_fraction)};
    for (auto& cell : quality_cells(m.summary)) row.push_back(cell);
    table.add_row(std::move(row));
    return std::pair{spec.cached_flops(), m.summary.mean_mse};
  };

  const UNetOptions unet_opts{cfg.ablation.unet_depth, cfg.network.base_channels, input,
                              cfg.network.output_channels, cfg.seed};
  const NetworkSpec unet = build_unet(unet_opts);
  const BaselineRun unet_base = run_baseline(unet, seq);
  std::vector<std::pair<std::int64_t, double>> levels;
  for (int k = 1; k < unet.depth(); ++k) {
    levels.push_back(add("U-Net n=" + std::to_string(unet.depth()),
                         unet.with_cache_config(unet_level_config(unet, k)), unet_base));
  }

  UNetOptions pp_opts = unet_opts;
  pp_opts.depth = cfg.ablation.unetpp_depth;
  const NetworkSpec unetpp = build_unetpp(pp_opts);
  const BaselineRun pp_base = run_baseline(unetpp, seq);
  const auto config_a = add("U-Net++ n=" + std::to_string(unetpp.depth()),
                            unetpp.with_cache_config(unetpp_config_a(unetpp)), pp_base);
  const auto config_b = add("U-Net++ n=" + std::to_string(unetpp.depth()),
                            unetpp.with_cache_config(unetpp_config_b(unetpp)), pp_base);
  out.tables.push_back(std::move(table));

  bool flops_up = true;
  bool mse_down = true;
  std::string flops_detail;
  std::string mse_detail;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    flops_detail += (k ? " < " : "") + std::to_string(levels[k].first);
    mse_detail += (k ? " >= " : "") + format_general(levels[k].second);
    if (k == 0) continue;
    flops_up = flops_up && levels[k].first > levels[k - 1].first;
    mse_down = mse_down && levels[k].second <= levels[k - 1].second;
  }
  out.checks.push_back(check("FLOPs remaining strictly increases with cache level", flops_up, flops_detail));
  out.checks.push_back(check("mean MSE non-increasing with cache level", mse_down, mse_detail));
  out.checks.push_back(check("U-Net++ Config B FLOPs remaining < Config A", config_b.first < config_a.first,
                             std::to_string(config_b.first) + " vs " + std::to_string(config_a.first)));
  return out;
}

ScenarioResult scenario_null_hypothesis(const RunConfig& cfg) {
  ScenarioResult out{"null_hypothesis", {}, {}};
  const NetworkSpec spec = build_network(cfg);
  const FrameSequence seq = generate(scene_for(cfg), cfg.frames);
  const BaselineRun baseline = run_baseline(spec, seq);
  const RefreshPolicy policy = build_policy(cfg);

  struct Variant {
    std::string name;
    RefreshPolicy policy;
    std::optional<Corruption> corruption;
  };
  std::vector<Variant> variants{{"proper", policy, std::nullopt},
                                {"noise(0sigma)", policy, Corruption{CorruptionKind::noise, 0.0, cfg.seed}},
                                {"noise(1sigma)", policy, Corruption{CorruptionKind::noise, 1.0, cfg.seed}}};
  for (double k : cfg.null_hypothesis.noise_scales) {
    variants.push_back({"noise(" + format_general(k) + "sigma)", policy,
                        Corruption{CorruptionKind::noise, k, cfg.seed}});
  }
  variants.push_back({"zero", policy, Corruption{CorruptionKind::zero, 0.0, cfg.seed}});
  variants.push_back({"uniform", policy, Corruption{CorruptionKind::uniform_random, 0.0, cfg.seed}});
  variants.push_back({"normal", policy, Corruption{CorruptionKind::normal_random, 0.0, cfg.seed}});
  variants.push_back({"no_update", make_policy("no_update", cfg.frames), std::nullopt});

  Table table{"null_hypothesis", "Cache contents vs quality (" + describe(policy) + ")",
              {"cache", "mean_mse", "mean_ssim", "psnr", "mse_vs_proper"}, {}};
  Table per_frame{"null_hypothesis_frames", "Per-frame MSE vs baseline", {"index"}, {}};
  std::map<std::string, Measured> runs;
  for (const Variant& v : variants) {
    RunOptions options;
    options.corruption = v.corruption;
    runs.emplace(v.name, measure(spec, seq, v.policy, baseline, cfg.warmup, options));
    per_frame.columns.push_back(v.name);
  }
  const double proper = runs.at("proper").summary.mean_mse;
  for (const Variant& v : variants) {
    const Summary& s = runs.at(v.name).summary;
    table.add_row({v.name, format_general(s.mean_mse), format_fixed(s.mean_ssim, 4), format_fixed(s.psnr, 2),
                   proper > 0.0 ? format_fixed(s.mean_mse / proper, 2) : "-"});
  }
  for (int t = 0; t < cfg.frames; ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (const Variant& v : variants) {
      row.push_back(exact(*runs.at(v.name).report.frames[static_cast<std::size_t>(t)].mse_vs_baseline));
    }
    per_frame.add_row(std::move(row));
  }
  out.tables.push_back(std::move(table));
  out.tables.push_back(std::move(per_frame));

  bool identical = true;
  const auto& a = runs.at("proper").report.frames;
  const auto& b = runs.at("noise(0sigma)").report.frames;
  for (std::size_t t = 0; t < a.size(); ++t) identical = identical && a[t].output == b[t].output;
  const double zero = runs.at("zero").summary.mean_mse;
  const double no_update = runs.at("no_update").summary.mean_mse;
  out.checks.push_back(check("noise(0sigma) cache reproduces the proper cache exactly", identical));
  out.checks.push_back(check("zero cache MSE > proper cache MSE", zero > proper,
                             format_general(zero) + " vs " + format_general(proper)));
  for (const std::string name : {"uniform", "normal"}) {
    const double v = runs.at(name).summary.mean_mse;
    out.checks.push_back(check(name + " random cache MSE > No-Update MSE", v > no_update,
                               format_general(v) + " vs " + format_general(no_update)));
  }
  return out;
}

ScenarioResult scenario_superres_tradeoff(const RunConfig& cfg) {
  ScenarioResult out{"superres_tradeoff", {}, {}};
  const SuperResConfig& sr = cfg.superres;
  const int channels = cfg.network.input_channels;
  const int out_channels = cfg.network.output_channels;
  if (out_channels > 3 || out_channels > channels) {
    throw std::invalid_argument("superres reference compares at most the 3 color channels");
  }

  SceneConfig hr_scene = scene_for(cfg);
  hr_scene.height = sr.output_height;
  hr_scene.width = sr.output_width;
  const FrameSequence reference_seq = generate(hr_scene, cfg.frames);
  std::vector<Tensor> reference;
  for (const FrameInput& f : reference_seq.frames) reference.push_back(slice_channels(f.input, 0, out_channels));

  struct Setup {
    int scale;
    NetworkSpec spec;
    FrameSequence seq;
  };
  auto setup = [&](int scale) {
    if (sr.output_height % scale != 0 || sr.output_width % scale != 0) {
      throw std::invalid_argument("superres output dims must be divisible by the scale factor");
    }
    SceneConfig scene = hr_scene;
    scene.height = sr.output_height / scale;
    scene.width = sr.output_width / scale;
    scene.pixel_footprint = scale;
    SuperResOptions o;
    o.low_res_input = Shape{channels, scene.height, scene.width};
    o.scale = scale;
    o.output_channels = out_channels;
    o.seed = cfg.seed;
    return Setup{scale, build_superres_network(o), generate(scene, cfg.frames)};
  };
  const Setup small = setup(sr.large_scale);  // smaller input
  const Setup large = setup(sr.small_scale);  // larger input

  const std::int64_t f_s = small.spec.full_flops();
  const std::int64_t f_l = large.spec.full_flops();
  const std::int64_t f_lc = large.spec.cached_flops();
  const double break_even = static_cast<double>(f_l - f_s) / static_cast<double>(f_l - f_lc);
  const std::int64_t frames = cfg.frames - cfg.warmup;

  Table costs{"superres_break_even", "Per-frame FLOPs and break-even skipped fraction",
              {"quantity", "value"}, {}};
  costs.add_row({"full pass, x" + std::to_string(small.scale) + " input", std::to_string(f_s)});
  costs.add_row({"full pass, x" + std::to_string(large.scale) + " input", std::to_string(f_l)});
  costs.add_row({"cached pass, x" + std::to_string(large.scale) + " input", std::to_string(f_lc)});
  costs.add_row({"break-even skipped fraction", format_fixed(break_even, 4)});

  Table table{"superres_tradeoff", "Input scale vs caching under a FLOPs budget",
              {"input", "policy", "refreshes", "skipped", "total_flops", "flops_vs_small_baseline",
               "rmse_vs_reference", "psnr_vs_reference", "rmse_vs_uncached"},
              {}};

  auto reference_quality = [&](const std::vector<Tensor>& outputs) {
    double mse_sum = 0.0;
    double rmse_sum = 0.0;
    for (std::size_t t = static_cast<std::size_t>(cfg.warmup); t < outputs.size(); ++t) {
      const double e = mse(outputs[t], reference[t]);
      mse_sum += e;
      rmse_sum += std::sqrt(e);
    }
    const double n = static_cast<double>(outputs.size()) - cfg.warmup;
    return std::pair{rmse_sum / n, psnr_from_mse(mse_sum / n)};
  };
  auto label = [](const Setup& s) {
    return std::to_string(s.spec.input_shape().height) + "x" + std::to_string(s.spec.input_shape().width) +
           " (x" + std::to_string(s.scale) + ")";
  };

  const BaselineRun small_base = run_baseline(small.spec, small.seq);
  const BaselineRun large_base = run_baseline(large.spec, large.seq);
  const std::int64_t small_total = f_s * frames;
  const std::int64_t large_total = f_l * frames;
  for (const auto* s : {&small, &large}) {
    const BaselineRun& base = s == &small ? small_base : large_base;
    const auto [rmse_ref, psnr_ref] = reference_quality(base.outputs);
    const std::int64_t total = s == &small ? small_total : large_total;
    table.add_row({label(*s), "no cache", std::to_string(frames), format_percent(0.0), std::to_string(total),
                   format_fixed(static_cast<double>(total) / static_cast<double>(small_total), 3),
                   format_general(rmse_ref), format_fixed(psnr_ref, 2), "0"});
  }
  out.checks.push_back(check("larger-input baseline costs more than smaller-input baseline",
                             large_total > small_total,
                             std::to_string(large_total) + " vs " + std::to_string(small_total)));

  for (const std::string preset : {"delta_h", "delta_l", "n5"}) {
    const Measured m = measure(large.spec, large.seq, make_policy(preset, cfg.frames), large_base, cfg.warmup);
    std::vector<Tensor> outputs;
    for (const FrameRecord& f : m.report.frames) outputs.push_back(f.output);
    const auto [rmse_ref, psnr_ref] = reference_quality(outputs);

    double cache_err = 0.0;
    double worst_slack = 0.0;
    for (std::size_t t = static_cast<std::size_t>(cfg.warmup); t < outputs.size(); ++t) {
      const double to_uncached = rmse(outputs[t], large_base.outputs[t]);
      const double gap = std::abs(rmse(outputs[t], reference[t]) - rmse(large_base.outputs[t], reference[t]));
      cache_err += to_uncached;
      worst_slack = std::max(worst_slack, gap - to_uncached);
    }
    cache_err /= static_cast<double>(frames);

    const Summary& s = m.summary;
    const std::int64_t skipped = frames - s.refresh_count;
    table.add_row({label(large), preset, std::to_string(s.refresh_count), format_percent(s.skipped_frame_fraction),
                   std::to_string(s.total_flops),
                   format_fixed(static_cast<double>(s.total_flops) / static_cast<double>(small_total), 3),
                   format_general(rmse_ref), format_fixed(psnr_ref, 2), format_general(cache_err)});

    const bool ledger = s.total_flops == s.refresh_count * f_l + skipped * f_lc;
    // total < T F_S  <=>  skipped (F_L - F_Lc) > T (F_L - F_S), in exact integers.
    const bool cheaper = s.total_flops < small_total;
    const bool predicted = skipped * (f_l - f_lc) > frames * (f_l - f_s);
    out.checks.push_back(check(preset + ": total FLOPs = refreshes x full + skipped x cached", ledger));
    out.checks.push_back(check(preset + ": cheaper than smaller-input baseline iff skipped > break-even",
                               cheaper == predicted,
                               "skipped " + format_fixed(s.skipped_frame_fraction, 4) + ", break-even " +
                                   format_fixed(break_even, 4)));
    out.checks.push_back(check(preset + ": reference RMSE within uncached RMSE +- cache error",
                               worst_slack <= 1e-9, "worst slack " + format_general(worst_slack)));
    if (preset == "n5") {
      out.checks.push_back(check("n5 (80% skipped) cheaper than smaller-input baseline", cheaper,
                                 std::to_string(s.total_flops) + " vs " + std::to_string(small_total)));
    }
  }
  out.tables.push_back(std::move(table));
  out.tables.push_back(std::move(costs));
  return out;
}

ScenarioResult scenario_memory_report(const RunConfig& cfg) {
  ScenarioResult out{"memory_report", {}, {}};
  Table table{"memory_report", "Cache memory (float32)", {"workload", "entries", "shape", "bytes", "MB"}, {}};
  auto mb = [](std::int64_t bytes) { return format_fixed(static_cast<double>(bytes) / (1024.0 * 1024.0), 1); };

  std::vector<MemoryEntry> entries = cfg.memory.entries;
  entries.insert(entries.begin(), MemoryEntry{"empty", 0, Shape{1, 1, 1}});
  for (const MemoryEntry& e : entries) {
    CacheState state;
    for (int k = 0; k < e.count; ++k) state.entries.emplace("entry" + std::to_string(k), Tensor(e.shape));
    const std::int64_t bytes = cache_bytes_report(state);
    const std::int64_t expected = static_cast<std::int64_t>(e.count) * e.shape.size() * 4;
    table.add_row({e.name, std::to_string(e.count), e.count ? to_string(e.shape) : "-", std::to_string(bytes),
                   mb(bytes)});
    out.checks.push_back(check(e.name + " bytes = entries x C x H x W x 4", bytes == expected,
                               std::to_string(bytes) + " vs " + std::to_string(expected)));
  }
  out.tables.push_back(std::move(table));

  Table nets{"memory_networks", "Cache memory of the built networks",
             {"network", "cache", "entries", "bytes", "bytes_with_reference"}, {}};
  const FrameSequence seq = generate(scene_for(cfg), 1);
  auto add = [&](const std::string& name, const NetworkSpec& spec, const Tensor& input) {
    CacheState state;
    state.entries = forward_full(spec, input).edge_tensors;
    std::int64_t arithmetic = 0;
    for (const std::string& e : spec.cache_config().cached_edges) arithmetic += spec.edge_shape(e).size() * 4;
    const std::int64_t bytes = cache_bytes_report(state);
    state.reference_input = input;
    nets.add_row({name, to_string(spec.cache_config().label), std::to_string(spec.cache_config().cached_edges.size()),
                  std::to_string(bytes), std::to_string(cache_bytes_report(state))});
    out.checks.push_back(check(name + " " + to_string(spec.cache_config().label) +
                                   ": recorded cache bytes match edge shapes",
                               bytes == arithmetic));
  };
  const NetworkSpec spec = build_network(cfg);
  const std::string name = cfg.network.type + " n=" + std::to_string(spec.depth());
  if (spec.family() == Family::unet) {
    for (int k = 1; k < spec.depth(); ++k) {
      add(name, spec.with_cache_config(unet_level_config(spec, k)), seq[0].input);
    }
  } else if (spec.family() == Family::unetpp) {
    add(name, spec.with_cache_config(unetpp_config_a(spec)), seq[0].input);
    add(name, spec.with_cache_config(unetpp_config_b(spec)), seq[0].input);
  } else {
    add(cfg.network.type, spec, seq[0].input);
  }
  out.tables.push_back(std::move(nets));
  return out;
}

ScenarioResult scenario_feature_profile(const RunConfig& cfg) {
  ScenarioResult out{"feature_profile", {}, {}};
  if (cfg.frames < 2) throw std::invalid_argument("feature_profile needs at least two frames");
  NetworkSpec spec = build_network(cfg);
  if (spec.family() != Family::unet && spec.family() != Family::unetpp) {
    const Shape input{cfg.network.input_channels, cfg.network.height, cfg.network.width};
    spec = build_unet(UNetOptions{cfg.network.depth, cfg.network.base_channels, input,
                                  cfg.network.output_channels, cfg.seed});
  }
  const FrameSequence seq = generate(scene_for(cfg), cfg.frames);
  const std::vector<Tensor> inputs = seq.inputs();
  const auto profile = feature_delta_profile(spec, inputs);

  Table table{"feature_profile", "Feature SMAPE vs frame 0 per encoder depth", {"frame"}, {}};
  for (const auto& [depth, values] : profile) table.columns.push_back("depth" + std::to_string(depth));
  for (int t = 0; t < cfg.frames; ++t) {
    std::vector<std::string> row{std::to_string(t)};
    for (const auto& [depth, values] : profile) row.push_back(exact(values[static_cast<std::size_t>(t)]));
    table.add_row(std::move(row));
  }
  out.tables.push_back(std::move(table));
  bool starts_at_zero = true;
  for (const auto& [depth, values] : profile) starts_at_zero = starts_at_zero && values.front() == 0.0;
  out.checks.push_back(check("every depth profile starts at 0 on frame 0", starts_at_zero));
  return out;
}

std::vector<ScenarioResult> run_scenarios(const RunConfig& cfg) {
  validate(cfg);
  const std::map<std::string, std::function<ScenarioResult(const RunConfig&)>> table{
      {"policy_sweep", scenario_policy_sweep},       {"ablation_levels", scenario_ablation_levels},
      {"null_hypothesis", scenario_null_hypothesis}, {"superres_tradeoff", scenario_superres_tradeoff},
      {"memory_report", scenario_memory_report},     {"feature_profile", scenario_feature_profile}};
  std::vector<ScenarioResult> results;
  for (const std::string& name : scenario_names()) {
    if (cfg.scenario == "all" || cfg.scenario == name) results.push_back(table.at(name)(cfg));
  }
  return results;
}

void write_results(const std::vector<ScenarioResult>& results, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream os(dir / file);
    if (!os) throw std::runtime_error("cannot write " + (dir / file).string());
    os << text;
  };
  std::ostringstream checks;
  for (const ScenarioResult& r : results) {
    for (const Table& t : r.tables) {
      write(slug(t.name) + ".csv", t.to_csv());
      write(slug(t.name) + ".txt", t.to_text());
    }
    for (const Check& c : r.checks) {
      checks << r.scenario << ": " << (c.passed ? "PASS" : "FAIL") << "  " << c.description;
      if (!c.detail.empty()) checks << " (" << c.detail << ")";
      checks << '\n';
    }
  }
  write("checks.txt", checks.str());
}

}  // namespace reframe
