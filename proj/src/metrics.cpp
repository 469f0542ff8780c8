#include "reframe/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace reframe {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(what) + " shape mismatch: " + to_string(a.shape()) +
                                " vs " + to_string(b.shape()));
  }
}

// Summed-area table with a zero guard row/column: (h+1) x (w+1).
class Integral {
 public:
  Integral(int h, int w) : w_(w + 1), data_(static_cast<std::size_t>(h + 1) * (w + 1), 0.0) {}

  template <class F>
  void build(int h, int w, F value) {
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += value(y, x);
        at(y + 1, x + 1) = at(y, x + 1) + row;
      }
    }
  }

  double box(int y, int x, int size) const {
    return at(y + size, x + size) - at(y, x + size) - at(y + size, x) + at(y, x);
  }

 private:
  double& at(int y, int x) { return data_[static_cast<std::size_t>(y) * w_ + x]; }
  double at(int y, int x) const { return data_[static_cast<std::size_t>(y) * w_ + x]; }

  int w_;
  std::vector<double> data_;
};

}  // namespace

double mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  if (a.empty()) return 0.0;
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    sum += d * d;
  }
  return sum / static_cast<double>(da.size());
}

double rmse(const Tensor& a, const Tensor& b) { return std::sqrt(mse(a, b)); }

double psnr_from_mse(double value, double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr peak must be positive");
  if (value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / value);
}

double psnr(const Tensor& a, const Tensor& b, double peak) { return psnr_from_mse(mse(a, b), peak); }

double ssim(const Tensor& a, const Tensor& b, double peak) {
  require_same_shape(a, b, "ssim");
  const int h = a.height();
  const int w = a.width();
  if (h < kSsimWindow || w < kSsimWindow) {
    throw std::invalid_argument("ssim needs at least 8x8 pixels, got " + to_string(a.shape()));
  }
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const double n = kSsimWindow * kSsimWindow;

  double total = 0.0;
  long windows = 0;
  for (int c = 0; c < a.channels(); ++c) {
    const auto pa = a.channel(c);
    const auto pb = b.channel(c);
    auto va = [&](int y, int x) { return static_cast<double>(pa[static_cast<std::size_t>(y) * w + x]); };
    auto vb = [&](int y, int x) { return static_cast<double>(pb[static_cast<std::size_t>(y) * w + x]); };
    Integral sa(h, w), sb(h, w), saa(h, w), sbb(h, w), sab(h, w);
    sa.build(h, w, va);
    sb.build(h, w, vb);
    saa.build(h, w, [&](int y, int x) { return va(y, x) * va(y, x); });
    sbb.build(h, w, [&](int y, int x) { return vb(y, x) * vb(y, x); });
    sab.build(h, w, [&](int y, int x) { return va(y, x) * vb(y, x); });

    for (int y = 0; y + kSsimWindow <= h; y += kSsimStride) {
      for (int x = 0; x + kSsimWindow <= w; x += kSsimStride) {
        const double mu_a = sa.box(y, x, kSsimWindow) / n;
        const double mu_b = sb.box(y, x, kSsimWindow) / n;
        const double var_a = saa.box(y, x, kSsimWindow) / n - mu_a * mu_a;
        const double var_b = sbb.box(y, x, kSsimWindow) / n - mu_b * mu_b;
        const double cov = sab.box(y, x, kSsimWindow) / n - mu_a * mu_b;
        total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                 ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        ++windows;
      }
    }
  }
  return total / static_cast<double>(windows);
}

QualityReport evaluate(const Tensor& a, const Tensor& b, double peak) {
  QualityReport r;
  r.mse = mse(a, b);
  r.psnr = psnr_from_mse(r.mse, peak);
  r.ssim = ssim(a, b, peak);
  r.smape = smape(a, b);
  return r;
}

Summary aggregate(std::span<const FrameStats> rows, std::int64_t full_pass_flops, double peak) {
  if (rows.empty()) throw std::invalid_argument("aggregate needs at least one frame");
  if (full_pass_flops <= 0) throw std::invalid_argument("full-pass FLOPs must be positive");
  Summary s;
  s.frames = static_cast<int>(rows.size());
  double mse_sum = 0.0;
  double ssim_sum = 0.0;
  for (const FrameStats& r : rows) {
    s.refresh_count += r.refreshed ? 1 : 0;
    s.total_flops += r.flops;
    mse_sum += r.mse;
    ssim_sum += r.ssim;
  }
  const double t = static_cast<double>(s.frames);
  s.skipped_frame_fraction = 1.0 - s.refresh_count / t;
  s.eliminated_flops_fraction =
      1.0 - static_cast<double>(s.total_flops) / (t * static_cast<double>(full_pass_flops));
  s.mean_mse = mse_sum / t;
  s.mean_ssim = ssim_sum / t;
  s.psnr = psnr_from_mse(s.mean_mse, peak);
  return s;
}

}  // namespace reframe
