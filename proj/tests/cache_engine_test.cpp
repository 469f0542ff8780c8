#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "reframe/cache_engine.hpp"

using namespace reframe;

namespace {

NetworkSpec small_unet(int depth = 3) { return build_unet(UNetOptions{depth, 4, {6, 32, 32}, 3, 3}); }

FrameSequence pan(double speed, int frames) {
  SceneConfig s;
  s.height = 32;
  s.width = 32;
  s.pan_speed = speed;
  return generate(s, frames);
}

CacheState filled(const NetworkSpec& spec, const Tensor& input) {
  CacheState state;
  state.entries = forward_full(spec, input).edge_tensors;
  state.bytes = cache_bytes_report(state);
  return state;
}

}  // namespace

TEST_SUITE("cache_engine") {

TEST_CASE("cache byte accounting") {
  CacheState empty;
  CHECK(cache_bytes_report(empty) == 0);

  CacheState one;
  one.entries.emplace("a", Tensor(24, 360, 640));
  CHECK(cache_bytes_report(one) == 22118400);

  CacheState seven;
  for (int k = 0; k < 7; ++k) seven.entries.emplace("e" + std::to_string(k), Tensor(64, 192, 256));
  CHECK(cache_bytes_report(seven) == 88080384);

  CacheState mixed;
  mixed.entries.emplace("a", Tensor(3, 4, 5));
  mixed.entries.emplace("b", Tensor(2, 2, 2));
  mixed.reference_input = Tensor(6, 4, 4);
  CHECK(cache_bytes_report(mixed) == (60 + 8 + 96) * 4);
}

TEST_CASE("constant sequence with frame-delta policy refreshes once") {
  const NetworkSpec spec = small_unet();
  const FrameSequence seq = pan(0.0, 10);
  SequenceReport r = run_sequence(spec, seq, DeltaSmape{0.25});
  CHECK(r.refresh_count == 1);
  CHECK(r.skipped_frame_fraction == doctest::Approx(0.9));
  const BaselineRun base = run_baseline(spec, seq);
  compare_to_baseline(r, base);
  for (const FrameRecord& f : r.frames) CHECK(oracle::max_relative_error(f.output, base.outputs[f.index]) <= 1e-6);
}

TEST_CASE("report totals") {
  const NetworkSpec spec = small_unet();
  const FrameSequence seq = pan(1.0, 10);
  const SequenceReport r = run_sequence(spec, seq, EveryN{5});
  CHECK(r.refresh_count == 2);
  CHECK(r.skipped_frame_fraction == doctest::Approx(0.8));
  std::int64_t sum = 0;
  for (const FrameRecord& f : r.frames) {
    sum += f.flops;
    CHECK(f.flops == (f.refreshed ? spec.full_flops() : spec.cached_flops()));
  }
  CHECK(sum == r.total_flops);
  CHECK(r.total_flops == 2 * spec.full_flops() + 8 * spec.cached_flops());
  const double saving = 1.0 - static_cast<double>(spec.cached_flops()) / static_cast<double>(spec.full_flops());
  CHECK(r.eliminated_flops_fraction == doctest::Approx(r.skipped_frame_fraction * saving).epsilon(1e-12));
  CHECK(r.cache_bytes > 0);
}

TEST_CASE("refresh frames match the uncached baseline exactly") {
  const NetworkSpec spec = small_unet(4);
  const FrameSequence seq = pan(1.0, 12);
  SequenceReport r = run_sequence(spec, seq, EveryN{3});
  const BaselineRun base = run_baseline(spec, seq);
  compare_to_baseline(r, base);
  for (const FrameRecord& f : r.frames) {
    if (f.refreshed) {
      CHECK(f.output == base.outputs[f.index]);
      CHECK(*f.mse_vs_baseline == 0.0);
    }
  }
  CHECK(r.frames[1].mse_vs_baseline.value() > 0.0);
}

TEST_CASE("every-frame refresh equals the baseline") {
  const NetworkSpec spec = small_unet();
  const FrameSequence seq = pan(2.0, 5);
  SequenceReport r = run_sequence(spec, seq, EveryN{1});
  compare_to_baseline(r, run_baseline(spec, seq));
  CHECK(r.mean_mse() == 0.0);
  CHECK(r.mean_ssim() == doctest::Approx(1.0));
  CHECK(r.eliminated_flops_fraction == 0.0);
}

TEST_CASE("corruption modes") {
  const NetworkSpec spec = small_unet();
  const Tensor in = pan(0.0, 1)[0].input;
  const CacheState state = filled(spec, in);

  const CacheState zero = corrupt_cache(state, Corruption{CorruptionKind::zero, 0.0, 1});
  for (const auto& [name, t] : zero.entries) {
    for (float v : t.data()) CHECK(v == 0.0f);
  }
  const CacheState same = corrupt_cache(state, Corruption{CorruptionKind::noise, 0.0, 1});
  CHECK(same.entries == state.entries);

  const CacheState uni = corrupt_cache(state, Corruption{CorruptionKind::uniform_random, 0.0, 1});
  const CacheState norm = corrupt_cache(state, Corruption{CorruptionKind::normal_random, 0.0, 1});
  for (const auto& [name, t] : state.entries) {
    const auto d = t.data();
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    for (float v : uni.entries.at(name).data()) CHECK((v >= *lo && v <= *hi));
    double mean = 0.0, nmean = 0.0;
    for (float v : d) mean += v;
    for (float v : norm.entries.at(name).data()) nmean += v;
    mean /= static_cast<double>(d.size());
    nmean /= static_cast<double>(d.size());
    CHECK(uni.entries.at(name).shape() == t.shape());
    CHECK(std::abs(nmean - mean) < 0.2 * (*hi - *lo));
  }
  CHECK(corrupt_cache(state, Corruption{CorruptionKind::normal_random, 0.0, 1}).entries == norm.entries);
  CHECK_FALSE(corrupt_cache(state, Corruption{CorruptionKind::normal_random, 0.0, 2}).entries == norm.entries);
  CHECK_THROWS_AS(corrupt_cache(CacheState{}, Corruption{}), std::invalid_argument);
}

TEST_CASE("corrupted caches degrade quality in order") {
  const NetworkSpec spec = small_unet();
  const FrameSequence seq = pan(1.0, 10);
  const BaselineRun base = run_baseline(spec, seq);
  auto run = [&](std::optional<Corruption> c) {
    RunOptions options;
    options.corruption = c;
    SequenceReport r = run_sequence(spec, seq, EveryN{5}, options);
    compare_to_baseline(r, base);
    return r.mean_mse();
  };
  const double proper = run(std::nullopt);
  CHECK(run(Corruption{CorruptionKind::noise, 0.0, 1}) == proper);
  CHECK(run(Corruption{CorruptionKind::zero, 0.0, 1}) > proper);
  CHECK(run(Corruption{CorruptionKind::noise, 1.0, 1}) > proper);
}

TEST_CASE("run_sequence errors") {
  const NetworkSpec spec = small_unet();
  CHECK_THROWS_AS(run_sequence(spec, FrameSequence{}, EveryN{1}), std::invalid_argument);
  SceneConfig s;
  s.height = 16;
  s.width = 16;
  CHECK_THROWS_AS(run_sequence(spec, generate(s, 2), EveryN{1}), std::invalid_argument);
}

TEST_CASE("serialization") {
  const NetworkSpec spec = small_unet();
  const FrameSequence seq = pan(1.0, 6);
  SequenceReport r = run_sequence(spec, seq, EveryN{2});
  CHECK(report_to_csv(r).find("index,refreshed,flops,policy_metric,mse_vs_baseline\n0,1,") == 0);
  compare_to_baseline(r, run_baseline(spec, seq));

  const std::string csv = report_to_csv(r);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::int64_t flops = 0;
  int rows = 0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::vector<std::string> parts;
    while (std::getline(cells, cell, ',')) parts.push_back(cell);
    REQUIRE(parts.size() == 5);
    flops += std::stoll(parts[2]);
    CHECK(std::stod(parts[4]) == *r.frames[static_cast<std::size_t>(rows)].mse_vs_baseline);
    ++rows;
  }
  CHECK(rows == 6);
  CHECK(flops == r.total_flops);

  const auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j["refresh_count"] == 3);
  CHECK(j["frames"].size() == 6);
  CHECK(j["total_flops"].get<std::int64_t>() == r.total_flops);
}

}  // TEST_SUITE
