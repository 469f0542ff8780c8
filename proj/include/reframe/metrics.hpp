#pragma once

#include <cstdint>
#include <span>

#include "reframe/tensor.hpp"

namespace reframe {

inline constexpr double kDefaultPeak = 1.0;
inline constexpr int kSsimWindow = 8;
inline constexpr int kSsimStride = 4;

double mse(const Tensor& a, const Tensor& b);
double rmse(const Tensor& a, const Tensor& b);

/// 10 log10(peak^2 / mse); +infinity when the inputs are identical.
double psnr(const Tensor& a, const Tensor& b, double peak = kDefaultPeak);
double psnr_from_mse(double mse, double peak = kDefaultPeak);

/// Mean SSIM over 8x8 uniform windows placed every 4 pixels, per channel,
/// with C1 = (0.01 peak)^2, C2 = (0.03 peak)^2 and population variances.
/// Throws if either spatial dim is smaller than the window.
double ssim(const Tensor& a, const Tensor& b, double peak = kDefaultPeak);

struct QualityReport {
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 1.0;
  double smape = 0.0;
};

QualityReport evaluate(const Tensor& a, const Tensor& b, double peak = kDefaultPeak);

/// One frame of a sequence run, as it appears in a per-frame table.
struct FrameStats {
  bool refreshed = false;
  std::int64_t flops = 0;
  double mse = 0.0;
  double ssim = 1.0;
};

struct Summary {
  int frames = 0;
  int refresh_count = 0;
  double skipped_frame_fraction = 0.0;
  double eliminated_flops_fraction = 0.0;
  std::int64_t total_flops = 0;
  double mean_mse = 0.0;
  double mean_ssim = 0.0;
  /// PSNR of the sequence-mean MSE (per-frame PSNR is infinite on refresh frames).
  double psnr = 0.0;
};

/// Sequence means plus the skipped-frames / eliminated-FLOPs columns.
/// `full_pass_flops` is the cost of one uncached inference.
Summary aggregate(std::span<const FrameStats> rows, std::int64_t full_pass_flops,
                  double peak = kDefaultPeak);

}  // namespace reframe
