#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "reframe/tensor.hpp"

namespace reframe {

struct FrameInput {
  Tensor input;
  /// 2 x H x W screen-space displacement (dx, dy) in pixels per frame.
  std::optional<Tensor> motion;
  int index = 0;
};

struct FrameSequence {
  std::uint64_t seed = 0;
  std::vector<FrameInput> frames;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  const FrameInput& operator[](std::size_t t) const { return frames[t]; }
  std::vector<Tensor> inputs() const;
};

struct PanSegment {
  int frames = 1;
  double speed = 0.0;  // world units per frame
};

/// Procedural scene: fractal value noise under a translating camera with
/// optional screen-space sprites. Channels, in order: color x3, depth,
/// signed normal x2 in [-1, 1], then zero padding.
struct SceneConfig {
  std::uint64_t seed = 1;
  int channels = 6;
  int height = 64;
  int width = 64;
  double pan_speed = 1.0;
  std::array<double, 2> pan_direction{1.0, 0.0};
  /// Overrides pan_speed when non-empty; the last segment extends forever.
  std::vector<PanSegment> pan_schedule;
  int sprite_count = 0;
  double sprite_radius = 5.0;
  double sprite_speed = 1.5;
  int texture_octaves = 4;
  /// Lattice period of the lowest octave, in world units.
  double feature_scale = 16.0;
  /// World units covered by one pixel; >1 renders a lower-resolution view of
  /// the same world, with motion reported in this view's pixels.
  double pixel_footprint = 1.0;
};

/// Camera speed (world units/frame) used to reach frame `t`.
double pan_speed_at(const SceneConfig& config, int t);

FrameSequence generate(const SceneConfig& config, int frame_count);

/// SMAPE between consecutive frame inputs; element t-1 compares t with t-1.
std::vector<double> inter_frame_delta_stats(const FrameSequence& sequence);

/// Flat binary fixture: "RFSQ", u32 version, u32 channels, u32 height,
/// u32 width, u32 frame_count, u64 seed, then per frame the input tensor
/// followed by its 2-channel motion field, all little-endian float32.
void write_sequence_binary(const std::filesystem::path& path, const FrameSequence& sequence);
FrameSequence read_sequence_binary(const std::filesystem::path& path);

}  // namespace reframe
