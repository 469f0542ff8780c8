#include "reframe/policies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace reframe {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string describe(const RefreshPolicy& policy) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const EveryN& p) { os << "every_n(" << p.n << ")"; },
                 [&](const NonLinear& p) {
                   os << "nonlinear(K=" << p.refreshes << ",p=" << p.p << ",c=" << p.c
                      << ",T=" << p.horizon << ")";
                 },
                 [&](const DeltaSmape& p) { os << "delta_smape(" << p.tau << ")"; },
                 [&](const MotionThreshold& p) { os << "motion(" << p.tau << ")"; },
             },
             policy);
  return os.str();
}

void validate(const RefreshPolicy& policy) {
  std::visit(overloaded{
                 [](const EveryN& p) {
                   if (p.n < 1) throw std::invalid_argument("every-N needs n >= 1");
                 },
                 [](const NonLinear& p) {
                   if (!(p.c > 0.0) || !(p.p > 0.0)) {
                     throw std::invalid_argument("non-linear policy needs c > 0 and p > 0");
                   }
                   if (p.horizon < 1 || p.refreshes < 1) {
                     throw std::invalid_argument("non-linear policy needs horizon, K >= 1");
                   }
                 },
                 [](const DeltaSmape& p) {
                   if (!(p.tau > 0.0)) throw std::invalid_argument("SMAPE threshold must be > 0");
                 },
                 [](const MotionThreshold& p) {
                   if (!(p.tau >= 0.0)) throw std::invalid_argument("motion threshold must be >= 0");
                 },
             },
             policy);
}

PolicyState initial_state(const RefreshPolicy& policy) {
  validate(policy);
  PolicyState state;
  if (const auto* nl = std::get_if<NonLinear>(&policy)) {
    state.schedule = nonlinear_schedule(nl->refreshes, nl->p, nl->horizon);
  }
  return state;
}

Decision decide(const RefreshPolicy& policy, const PolicyState& state, const FrameInput& frame) {
  const bool first = state.frame_index == 0;
  return std::visit(
      overloaded{
          [&](const EveryN& p) {
            return Decision{first || state.frame_index % p.n == 0,
                            static_cast<double>(state.frames_since_refresh)};
          },
          [&](const NonLinear&) {
            if (!state.schedule) throw std::logic_error("non-linear policy state has no schedule");
            const bool hit = std::binary_search(state.schedule->begin(), state.schedule->end(),
                                                state.frame_index);
            return Decision{first || hit, hit ? 1.0 : 0.0};
          },
          [&](const DeltaSmape& p) {
            if (first) return Decision{true, 0.0};
            if (!state.stored_input) {
              throw std::logic_error("frame-delta policy has no stored input after frame 0");
            }
            const double delta = smape(frame.input, *state.stored_input);
            return Decision{delta > p.tau, delta};
          },
          [&](const MotionThreshold& p) {
            const double motion = mean_motion_magnitude(frame);
            return Decision{first || motion > p.tau, motion};
          },
      },
      policy);
}

void advance(const RefreshPolicy& policy, PolicyState& state, const FrameInput& frame,
             bool refreshed) {
  if (refreshed) {
    state.frames_since_refresh = 0;
    if (std::holds_alternative<DeltaSmape>(policy)) state.stored_input = frame.input;
  } else {
    ++state.frames_since_refresh;
  }
  ++state.frame_index;
}

std::vector<int> nonlinear_schedule(int refreshes, double p, int horizon) {
  if (horizon < 1) throw std::invalid_argument("non-linear schedule needs horizon >= 1");
  if (refreshes < 1) throw std::invalid_argument("non-linear schedule needs K >= 1");
  if (!(p > 0.0)) throw std::invalid_argument("non-linear schedule needs p > 0");
  const int k_count = std::min(refreshes, horizon);
  std::vector<int> out;
  if (k_count == 1) return {0};
  for (int k = 0; k < k_count; ++k) {
    const double frac = static_cast<double>(k) / (k_count - 1);
    const int frame = static_cast<int>(std::round(std::pow(frac, p) * (horizon - 1)));
    if (out.empty() || out.back() != frame) out.push_back(frame);
  }
  return out;
}

double mean_motion_magnitude(const FrameInput& frame) {
  if (!frame.motion) throw std::invalid_argument("frame has no motion field");
  const Tensor& m = *frame.motion;
  if (m.channels() != 2) throw std::invalid_argument("motion field must have 2 channels");
  const auto dx = m.channel(0);
  const auto dy = m.channel(1);
  double sum = 0.0;
  for (std::size_t k = 0; k < dx.size(); ++k) {
    const double x = dx[k];
    const double y = dy[k];
    sum += std::sqrt(x * x + y * y);
  }
  return sum / static_cast<double>(dx.size());
}

RefreshPolicy make_policy(const std::string& preset, int horizon) {
  if (preset == "delta_h") return DeltaSmape{kDeltaHighTau};
  if (preset == "delta_l") return DeltaSmape{kDeltaLowTau};
  if (preset == "n2") return EveryN{2};
  if (preset == "n5") return EveryN{5};
  if (preset == "motion") return MotionThreshold{kMotionTau};
  if (preset == "nonlinear") {
    // Same refresh budget as every-5.
    return NonLinear{kNonLinearC, kNonLinearP, std::max(1, horizon), std::max(1, (horizon + 4) / 5)};
  }
  if (preset == "no_update") return DeltaSmape{std::numeric_limits<double>::infinity()};
  if (preset == "every_frame") return EveryN{1};
  throw std::invalid_argument("unknown policy preset '" + preset + "'");
}

std::vector<std::string> policy_preset_names() {
  return {"delta_l", "delta_h", "n5", "n2", "motion", "nonlinear", "no_update", "every_frame"};
}

}  // namespace reframe
