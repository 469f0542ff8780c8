#pragma once

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "reframe/tensor.hpp"
#include "reframe/workload.hpp"

namespace reframe {

struct EveryN {
  int n = 5;
};

/// Power-spaced schedule over a fixed horizon. `c` is carried for provenance
/// only; the schedule is determined by `refreshes`, `p` and `horizon`.
struct NonLinear {
  double c = 110.0;
  double p = 1.4;
  int horizon = 10;
  int refreshes = 2;
};

/// Refresh when SMAPE(current input, input stored at last refresh) > tau.
struct DeltaSmape {
  double tau = 0.25;
};

/// Refresh when the frame's mean motion magnitude (pixels/frame) > tau.
struct MotionThreshold {
  double tau = 1.0;
};

using RefreshPolicy = std::variant<EveryN, NonLinear, DeltaSmape, MotionThreshold>;

std::string describe(const RefreshPolicy& policy);

/// Throws std::invalid_argument on out-of-range parameters.
void validate(const RefreshPolicy& policy);

struct PolicyState {
  int frame_index = 0;
  int frames_since_refresh = 0;
  std::optional<std::vector<int>> schedule;  // NonLinear
  std::optional<Tensor> stored_input;        // DeltaSmape
};

PolicyState initial_state(const RefreshPolicy& policy);

struct Decision {
  bool refresh = false;
  /// Quantity the policy compared: frames since refresh, schedule membership,
  /// SMAPE, or mean motion.
  double metric = 0.0;
};

/// Frame 0 always refreshes. Pure in (policy, state, frame).
Decision decide(const RefreshPolicy& policy, const PolicyState& state, const FrameInput& frame);

inline bool should_refresh(const RefreshPolicy& policy, const PolicyState& state,
                           const FrameInput& frame) {
  return decide(policy, state, frame).refresh;
}

/// Moves the state past `frame`.
void advance(const RefreshPolicy& policy, PolicyState& state, const FrameInput& frame,
             bool refreshed);

/// unique{ round((k / (K-1))^p * (T-1)) : k = 0..K-1 }, ascending; {0} for K = 1.
std::vector<int> nonlinear_schedule(int refreshes, double p, int horizon);

double mean_motion_magnitude(const FrameInput& frame);

/// Named presets: delta_h, delta_l, n2, n5, motion, nonlinear, no_update,
/// every_frame. `horizon` is the sequence length (used by nonlinear).
RefreshPolicy make_policy(const std::string& preset, int horizon);
std::vector<std::string> policy_preset_names();

inline constexpr double kDeltaHighTau = 0.20;
inline constexpr double kDeltaLowTau = 0.25;
inline constexpr double kMotionTau = 1.0;
inline constexpr double kNonLinearC = 110.0;
inline constexpr double kNonLinearP = 1.4;

}  // namespace reframe
