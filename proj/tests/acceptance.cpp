// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "reframe/cache_engine.hpp"
#include "reframe/harness.hpp"

using namespace reframe;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::vector<NetworkSpec> configurations(const NetworkSpec& spec) {
  std::vector<NetworkSpec> out{spec.with_cache_config(no_cache_config(spec))};
  if (spec.family() == Family::unet) {
    for (int k = 1; k < spec.depth(); ++k) out.push_back(spec.with_cache_config(unet_level_config(spec, k)));
  } else if (spec.family() == Family::unetpp) {
    out.push_back(spec.with_cache_config(unetpp_config_a(spec)));
    out.push_back(spec.with_cache_config(unetpp_config_b(spec)));
  } else {
    out.push_back(spec);
  }
  return out;
}

std::vector<NetworkSpec> builder_zoo() {
  const Shape input{6, 64, 64};
  std::vector<NetworkSpec> nets;
  for (int n : {2, 3, 4}) nets.push_back(build_unet(UNetOptions{n, 8, input, 3, 1}));
  for (int n : {2, 3}) nets.push_back(build_unetpp(UNetOptions{n, 8, input, 3, 1}));
  nets.push_back(build_superres_network(SuperResOptions{}));

  auto conv_block = [](int in, int out) {
    BlockDef d;
    d.layers = {ConvParams::zeros(in, out, 3, 1, 1), Relu{}};
    return d;
  };
  BlockDef pooled = conv_block(6, 8);
  pooled.layers.emplace_back(MaxPool2{});
  pooled.layers.emplace_back(ConvParams::zeros(8, 8, 3, 1, 1));
  pooled.layers.emplace_back(Upsample2{});
  std::vector<Branch> branches{{"temporal", conv_block(6, 4)}, {"hr", std::move(pooled)}, {"lr", conv_block(6, 4)}};
  BlockDef fusion = conv_block(16, 8);
  fusion.layers.emplace_back(ConvParams::zeros(8, 3, 1));
  nets.push_back(build_multibranch(input, std::move(branches), std::move(fusion), std::nullopt, 5));
  return nets;
}

Tensor random_input(const Shape& s, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  return oracle::random_tensor(gen, s, 0.0f, 1.0f);
}

FrameSequence coherent_scene(int frames, double speed = 1.0) {
  SceneConfig scene;
  scene.pan_speed = speed;
  return generate(scene, frames);
}

// 1 --------------------------------------------------------------------------
Outcome substitution_equivalence() {
  Outcome o;
  int checked = 0;
  for (const NetworkSpec& net : builder_zoo()) {
    for (const NetworkSpec& spec : configurations(net)) {
      const Tensor in = random_input(spec.input_shape(), 42);
      const ForwardRecord full = forward_full(spec, in);
      const ForwardRecord cached = forward_cached(spec, in, full.edge_tensors);
      o.require(cached.output == full.output, to_string(spec.cache_config().label) + " output differs");
      ++checked;
    }
  }
  o.detail = o.passed ? std::to_string(checked) + " network/cache configurations bit-identical" : o.detail;
  return o;
}

// 2 --------------------------------------------------------------------------
Outcome refresh_counts() {
  Outcome o;
  const NetworkSpec spec = build_unet(UNetOptions{3, 4, {6, 64, 64}, 3, 1});
  const FrameSequence seq = coherent_scene(10);
  const int n5 = run_sequence(spec, seq, EveryN{5}).refresh_count;
  const int n2 = run_sequence(spec, seq, EveryN{2}).refresh_count;
  const int nl = run_sequence(spec, seq, NonLinear{kNonLinearC, kNonLinearP, 10, 2}).refresh_count;
  o.require(n5 == 2, "N-5 gave " + std::to_string(n5));
  o.require(n2 == 5, "N-2 gave " + std::to_string(n2));
  o.require(nl == 2, "Non-Linear gave " + std::to_string(nl));
  if (o.passed) o.detail = "N-5=2, N-2=5, Non-Linear(K=2)=2";
  return o;
}

// 3 --------------------------------------------------------------------------
Outcome flops_ledger() {
  Outcome o;
  int nets = 0;
  for (const NetworkSpec& net : builder_zoo()) {
    for (const NetworkSpec& spec : configurations(net)) {
      const Tensor in = random_input(spec.input_shape(), 7);
      const ForwardRecord full = forward_full(spec, in);
      const ForwardRecord cached = forward_cached(spec, in, full.edge_tensors);
      std::int64_t skipped = 0;
      for (const Block& b : spec.blocks()) {
        if (spec.cache_config().live_blocks.contains(b.id)) continue;
        skipped += spec.block_flops(b.id);
      }
      o.require(full.flops_executed == cached.flops_executed + skipped,
                to_string(spec.cache_config().label) + " ledger mismatch");
      ++nets;
    }
  }
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> ch(1, 6), k(1, 5), s(1, 3), pad(0, 2), hw(5, 16);
  const int configs = 30;
  for (int t = 0; t < configs; ++t) {
    const int kh = k(gen);
    const int kw = k(gen);
    const ConvParams p = oracle::random_conv(gen, ch(gen), ch(gen), kh, kw, s(gen), std::min({pad(gen), kh - 1, kw - 1}));
    const Tensor in = oracle::random_tensor(gen, Shape{p.in_channels, hw(gen), hw(gen)});
    const oracle::ConvResult r = oracle::naive_conv(in, p);
    o.require(conv_flops(p, r.output.height(), r.output.width()) == r.ops, "conv_flops differs from counter");
  }
  if (o.passed) {
    o.detail = std::to_string(nets) + " configurations balanced; " + std::to_string(configs) +
               " random convs match the instrumented counter";
  }
  return o;
}

// 4 --------------------------------------------------------------------------
Outcome static_scene() {
  Outcome o;
  const int frames = 10;
  const NetworkSpec spec = build_unet(UNetOptions{3, 8, {6, 64, 64}, 3, 1});
  const FrameSequence seq = coherent_scene(frames, 0.0);
  SequenceReport r = run_sequence(spec, seq, DeltaSmape{0.25});
  const BaselineRun base = run_baseline(spec, seq);
  double worst = 0.0;
  for (const FrameRecord& f : r.frames) {
    worst = std::max(worst, oracle::max_relative_error(f.output, base.outputs[static_cast<std::size_t>(f.index)]));
  }
  o.require(r.refresh_count == 1, "refreshes " + std::to_string(r.refresh_count));
  o.require(r.skipped_frame_fraction == static_cast<double>(frames - 1) / frames,
            "skipped " + num(r.skipped_frame_fraction));
  o.require(worst <= 1e-6, "max error " + num(worst));
  if (o.passed) o.detail = "1 refresh, skipped 9/10, max output error " + num(worst);
  return o;
}

// 5 --------------------------------------------------------------------------
Outcome threshold_monotonicity() {
  Outcome o;
  const NetworkSpec spec = build_unet(UNetOptions{3, 4, {6, 64, 64}, 3, 1});
  const FrameSequence seq = coherent_scene(40);
  std::string counts;
  int previous = std::numeric_limits<int>::max();
  for (double tau : {0.05, 0.10, 0.20, 0.25, 0.40}) {
    const int c = run_sequence(spec, seq, DeltaSmape{tau}).refresh_count;
    o.require(c <= previous, "count rose at tau " + num(tau));
    previous = c;
    counts += (counts.empty() ? "" : ",") + std::to_string(c);
  }
  const int high = run_sequence(spec, seq, make_policy("delta_h", 40)).refresh_count;
  const int low = run_sequence(spec, seq, make_policy("delta_l", 40)).refresh_count;
  o.require(high >= low, "Delta_H " + std::to_string(high) + " < Delta_L " + std::to_string(low));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("refreshes by tau ") + counts +
              "; Delta_H=" + std::to_string(high) + " Delta_L=" + std::to_string(low);
  return o;
}

// 6 --------------------------------------------------------------------------
Outcome ablation_ordering() {
  Outcome o;
  const FrameSequence seq = coherent_scene(40);
  const RefreshPolicy policy = EveryN{5};
  const NetworkSpec unet = build_unet(UNetOptions{4, 8, {6, 64, 64}, 3, 1});
  const BaselineRun base = run_baseline(unet, seq);
  std::int64_t prev_flops = 0;
  double prev_mse = std::numeric_limits<double>::infinity();
  std::string detail;
  for (int k = 1; k <= 3; ++k) {
    const NetworkSpec spec = unet.with_cache_config(unet_level_config(unet, k));
    SequenceReport r = run_sequence(spec, seq, policy);
    compare_to_baseline(r, base);
    const double remaining = static_cast<double>(spec.cached_flops()) / static_cast<double>(spec.full_flops());
    o.require(spec.cached_flops() > prev_flops, "FLOPs not increasing at level " + std::to_string(k));
    o.require(r.mean_mse() <= prev_mse, "MSE rose at level " + std::to_string(k));
    prev_flops = spec.cached_flops();
    prev_mse = r.mean_mse();
    detail += "L" + std::to_string(k) + " " + num(100 * remaining) + "% mse " + num(r.mean_mse()) + ", ";
  }
  const NetworkSpec pp = build_unetpp(UNetOptions{3, 8, {6, 64, 64}, 3, 1});
  const std::int64_t a = pp.with_cache_config(unetpp_config_a(pp)).cached_flops();
  const std::int64_t b = pp.with_cache_config(unetpp_config_b(pp)).cached_flops();
  o.require(b < a, "Config B not below Config A");
  detail += "Config A " + num(100.0 * a / pp.full_flops()) + "% vs B " + num(100.0 * b / pp.full_flops()) + "%";
  o.detail += (o.detail.empty() ? "" : "; ") + detail;
  return o;
}

// 7 --------------------------------------------------------------------------
Outcome null_hypothesis() {
  Outcome o;
  const RunConfig cfg = parse_run_config(R"({"version": 1, "cache": "level1"})");
  const NetworkSpec spec = build_network(cfg);
  const FrameSequence seq = generate(scene_for(cfg), cfg.frames);
  const BaselineRun base = run_baseline(spec, seq);
  const RefreshPolicy policy = build_policy(cfg);
  auto run = [&](const RefreshPolicy& p, std::optional<Corruption> c) {
    RunOptions options;
    options.corruption = c;
    SequenceReport r = run_sequence(spec, seq, p, options);
    compare_to_baseline(r, base);
    return r.mean_mse();
  };
  const double proper = run(policy, std::nullopt);
  const double noise = run(policy, Corruption{CorruptionKind::noise, 1.0, cfg.seed});
  const double zero = run(policy, Corruption{CorruptionKind::zero, 0.0, cfg.seed});
  const double uniform = run(policy, Corruption{CorruptionKind::uniform_random, 0.0, cfg.seed});
  const double normal = run(policy, Corruption{CorruptionKind::normal_random, 0.0, cfg.seed});
  const double stale = run(make_policy("no_update", cfg.frames), std::nullopt);

  auto gap = [&](double lo, double hi, const std::string& what) {
    o.require(hi >= 2.0 * lo, what + " ratio " + num(hi / lo) + " < 2");
  };
  gap(proper, noise, "proper<noise(1sigma)");
  o.require(noise <= zero, "noise(1sigma) > zero");
  gap(zero, uniform, "zero<uniform");
  gap(zero, normal, "zero<normal");
  gap(stale, uniform, "No-Update<uniform");
  gap(stale, normal, "No-Update<normal");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("mse proper ") + num(proper) + ", noise1 " + num(noise) +
              ", zero " + num(zero) + ", uniform " + num(uniform) + ", normal " + num(normal) + ", no-update " +
              num(stale);
  return o;
}

// 8 --------------------------------------------------------------------------
Outcome memory_arithmetic() {
  Outcome o;
  CacheState a;
  a.entries.emplace("e", Tensor(24, 360, 640));
  CacheState b;
  for (int k = 0; k < 7; ++k) b.entries.emplace("e" + std::to_string(k), Tensor(64, 192, 256));
  const std::int64_t ba = cache_bytes_report(a);
  const std::int64_t bb = cache_bytes_report(b);
  o.require(ba == 22118400, "single entry " + std::to_string(ba));
  o.require(bb == 88080384, "seven entries " + std::to_string(bb));
  o.require(cache_bytes_report(CacheState{}) == 0, "empty cache not 0");
  if (o.passed) o.detail = "22,118,400 and 88,080,384 bytes";
  return o;
}

// 9 --------------------------------------------------------------------------
Outcome motion_policy() {
  Outcome o;
  double worst = 0.0;
  for (double s : {0.5, 1.0, 2.0, 3.0}) {
    for (const FrameInput& f : coherent_scene(5, s).frames) worst = std::max(worst, std::abs(mean_motion_magnitude(f) - s));
  }
  o.require(worst <= 1e-6, "motion error " + num(worst));
  const NetworkSpec spec = build_unet(UNetOptions{3, 4, {6, 64, 64}, 3, 1});
  const int fast = run_sequence(spec, coherent_scene(10, 2.0), MotionThreshold{1.0}).refresh_count;
  const int slow = run_sequence(spec, coherent_scene(10, 0.5), MotionThreshold{1.0}).refresh_count;
  o.require(fast == 10, "s=2 refreshed " + std::to_string(fast) + "/10");
  o.require(slow == 1, "s=0.5 refreshed " + std::to_string(slow) + "/10");
  if (o.passed) o.detail = "max motion error " + num(worst) + "; s=2 -> 10/10, s=0.5 -> 1/10";
  return o;
}

// 10 -------------------------------------------------------------------------
Outcome superres_tradeoff() {
  Outcome o;
  const RunConfig cfg = parse_run_config(R"({"version": 1, "scenario": "superres_tradeoff"})");
  const ScenarioResult r = scenario_superres_tradeoff(cfg);
  for (const Check& c : r.checks) o.require(c.passed, c.description + " (" + c.detail + ")");

  // Independent restatement of the 80% row from per-frame costs.
  SuperResOptions small;
  small.low_res_input = Shape{6, 16, 16};
  small.scale = 4;
  SuperResOptions large;
  large.low_res_input = Shape{6, 32, 32};
  large.scale = 2;
  const NetworkSpec s = build_superres_network(small);
  const NetworkSpec l = build_superres_network(large);
  const std::int64_t t = cfg.frames;
  const std::int64_t refreshes = t / 5;
  const std::int64_t cached_total = refreshes * l.full_flops() + (t - refreshes) * l.cached_flops();
  o.require(cached_total < t * s.full_flops(), "80% skipped row not cheaper");
  const double break_even = static_cast<double>(l.full_flops() - s.full_flops()) /
                            static_cast<double>(l.full_flops() - l.cached_flops());
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("break-even skipped ") + num(break_even) +
              ", 80% skipped costs " + num(static_cast<double>(cached_total) / static_cast<double>(t * s.full_flops())) +
              "x the x4 baseline";
  return o;
}

// 11 -------------------------------------------------------------------------
Outcome metric_identities() {
  Outcome o;
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<int> ch(1, 3), hw(8, 20);
  std::uniform_real_distribution<float> scale(0.1f, 3.0f);
  double worst_ssim = 0.0;
  double worst_mse = 0.0;
  double worst_smape = 0.0;
  const int pairs = 1000;
  for (int k = 0; k < pairs; ++k) {
    const Shape shape{ch(gen), hw(gen), hw(gen)};
    const float sa = scale(gen);
    const Tensor a = oracle::random_tensor(gen, shape, -sa, sa);
    const Tensor b = k % 4 == 0 ? a : oracle::random_tensor(gen, shape, 0.0f, scale(gen));
    o.require(mse(a, a) == 0.0 && smape(a, a) == 0.0, "identity failed");
    o.require(std::abs(ssim(a, a) - 1.0) <= 1e-9, "ssim(a,a) != 1");
    o.require(mse(a, b) == mse(b, a) && ssim(a, b) == ssim(b, a) && smape(a, b) == smape(b, a), "asymmetry");
    const double m = oracle::mse(a, b);
    worst_mse = std::max(worst_mse, std::abs(mse(a, b) - m) / std::max(m, 1e-300));
    worst_ssim = std::max(worst_ssim, std::abs(ssim(a, b) - oracle::ssim(a, b)));
    worst_smape = std::max(worst_smape, std::abs(smape(a, b) - oracle::smape(a, b)));
  }
  o.require(worst_mse <= 1e-12, "mse oracle gap " + num(worst_mse));
  o.require(worst_ssim <= 1e-9, "ssim oracle gap " + num(worst_ssim));
  o.require(worst_smape <= 1e-9, "smape oracle gap " + num(worst_smape));
  if (o.passed) {
    o.detail = std::to_string(pairs) + " pairs; oracle gaps mse " + num(worst_mse) + ", ssim " + num(worst_ssim) +
               ", smape " + num(worst_smape);
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"substitution equivalence", substitution_equivalence},
      {"refresh-count exactness", refresh_counts},
      {"FLOPs ledger", flops_ledger},
      {"static-scene property", static_scene},
      {"threshold monotonicity", threshold_monotonicity},
      {"ablation ordering", ablation_ordering},
      {"null hypothesis", null_hypothesis},
      {"memory arithmetic", memory_arithmetic},
      {"motion policy", motion_policy},
      {"super-resolution trade-off", superres_tradeoff},
      {"metric identities", metric_identities},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out = Outcome{false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += out.passed ? 0 : 1;
    std::cout << (out.passed ? "PASS" : "FAIL") << "  criterion " << (k + 1) << " " << criteria[k].first << " ["
              << num(secs) << " s]: " << out.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
