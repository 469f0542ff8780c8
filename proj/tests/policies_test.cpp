#include <limits>

#include "doctest.h"
#include "reframe/policies.hpp"

using namespace reframe;

namespace {

std::vector<int> refresh_frames(const RefreshPolicy& policy, const FrameSequence& seq) {
  PolicyState state = initial_state(policy);
  std::vector<int> out;
  for (const FrameInput& f : seq.frames) {
    const bool r = should_refresh(policy, state, f);
    if (r) out.push_back(f.index);
    advance(policy, state, f, r);
  }
  return out;
}

FrameSequence pan(double speed, int frames) {
  SceneConfig scene;
  scene.height = 32;
  scene.width = 32;
  scene.pan_speed = speed;
  return generate(scene, frames);
}

}  // namespace

TEST_SUITE("policies") {

TEST_CASE("every-N") {
  const FrameSequence seq = pan(1.0, 10);
  CHECK(refresh_frames(EveryN{5}, seq) == std::vector<int>{0, 5});
  CHECK(refresh_frames(EveryN{2}, seq).size() == 5);
  CHECK(refresh_frames(EveryN{1}, seq).size() == 10);
  CHECK(refresh_frames(EveryN{20}, seq) == std::vector<int>{0});
  CHECK_THROWS_AS(validate(EveryN{0}), std::invalid_argument);
}

TEST_CASE("non-linear schedule") {
  CHECK(nonlinear_schedule(5, 1.0, 10) == std::vector<int>{0, 2, 5, 7, 9});
  CHECK(nonlinear_schedule(2, 1.4, 10) == std::vector<int>{0, 9});
  CHECK(nonlinear_schedule(1, 1.4, 10) == std::vector<int>{0});
  // p > 1 packs refreshes toward the start.
  const auto s = nonlinear_schedule(4, 2.0, 31);
  CHECK(s == std::vector<int>{0, 3, 13, 30});
  CHECK(refresh_frames(NonLinear{110.0, 1.4, 10, 2}, pan(1.0, 10)) == std::vector<int>{0, 9});
  CHECK_THROWS_AS(nonlinear_schedule(0, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(validate(NonLinear{110.0, 0.0, 10, 2}), std::invalid_argument);
}

TEST_CASE("frame-delta policy") {
  const FrameSequence still = pan(0.0, 10);
  CHECK(refresh_frames(DeltaSmape{0.25}, still) == std::vector<int>{0});

  const FrameSequence moving = pan(1.0, 30);
  int previous = std::numeric_limits<int>::max();
  for (double tau : {0.05, 0.10, 0.20, 0.25, 0.40}) {
    const int count = static_cast<int>(refresh_frames(DeltaSmape{tau}, moving).size());
    CHECK(count <= previous);
    previous = count;
  }
  CHECK(refresh_frames(DeltaSmape{kDeltaHighTau}, moving).size() >=
        refresh_frames(DeltaSmape{kDeltaLowTau}, moving).size());
  CHECK(refresh_frames(DeltaSmape{std::numeric_limits<double>::infinity()}, moving) == std::vector<int>{0});

  // Compares against the input stored at the last refresh, not the previous frame.
  PolicyState state = initial_state(DeltaSmape{0.2});
  advance(DeltaSmape{0.2}, state, moving[0], true);
  advance(DeltaSmape{0.2}, state, moving[1], false);
  const Decision d = decide(DeltaSmape{0.2}, state, moving[2]);
  CHECK(d.metric == smape(moving[2].input, moving[0].input));
  CHECK_THROWS_AS(validate(DeltaSmape{0.0}), std::invalid_argument);
}

TEST_CASE("motion threshold") {
  CHECK(refresh_frames(MotionThreshold{1.0}, pan(2.0, 10)).size() == 10);
  CHECK(refresh_frames(MotionThreshold{1.0}, pan(0.5, 10)) == std::vector<int>{0});
  FrameInput no_motion{Tensor(1, 2, 2), std::nullopt, 0};
  CHECK_THROWS_AS(mean_motion_magnitude(no_motion), std::invalid_argument);
}

TEST_CASE("decide does not mutate state") {
  const FrameSequence seq = pan(1.0, 3);
  const RefreshPolicy policy = DeltaSmape{0.2};
  PolicyState state = initial_state(policy);
  advance(policy, state, seq[0], true);
  const Decision a = decide(policy, state, seq[1]);
  const Decision b = decide(policy, state, seq[1]);
  CHECK(a.refresh == b.refresh);
  CHECK(a.metric == b.metric);
  CHECK(state.frame_index == 1);
}

TEST_CASE("presets") {
  for (const std::string& name : policy_preset_names()) CHECK_NOTHROW(validate(make_policy(name, 10)));
  CHECK(std::get<DeltaSmape>(make_policy("delta_h", 10)).tau == 0.20);
  CHECK(std::get<DeltaSmape>(make_policy("delta_l", 10)).tau == 0.25);
  CHECK(std::get<MotionThreshold>(make_policy("motion", 10)).tau == 1.0);
  const auto nl = std::get<NonLinear>(make_policy("nonlinear", 10));
  CHECK(nl.c == 110.0);
  CHECK(nl.p == 1.4);
  CHECK(nl.refreshes == 2);
  CHECK(std::get<EveryN>(make_policy("n5", 10)).n == 5);
  CHECK_THROWS_AS(make_policy("bogus", 10), std::invalid_argument);
}

}  // TEST_SUITE
