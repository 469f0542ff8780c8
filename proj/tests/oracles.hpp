// Reference implementations used as test oracles. Each one is written
// independently of the library code paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "reframe/tensor.hpp"

namespace oracle {

using reframe::ConvParams;
using reframe::Shape;
using reframe::Tensor;

inline Tensor random_tensor(std::mt19937_64& gen, Shape shape, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> dist(lo, hi);
  Tensor t(shape);
  for (float& v : t.data()) v = dist(gen);
  return t;
}

inline ConvParams random_conv(std::mt19937_64& gen, int in, int out, int kh, int kw, int stride,
                              int padding) {
  ConvParams p;
  p.in_channels = in;
  p.out_channels = out;
  p.kernel_h = kh;
  p.kernel_w = kw;
  p.stride = stride;
  p.padding = padding;
  std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
  p.weights.resize(static_cast<std::size_t>(out) * in * kh * kw);
  p.bias.resize(static_cast<std::size_t>(out));
  for (float& w : p.weights) w = dist(gen);
  for (float& b : p.bias) b = dist(gen);
  return p;
}

struct ConvResult {
  Tensor output;
  std::int64_t ops = 0;  // multiplies + adds of the weighted sum, bias excluded
};

// Six nested loops over (oc, oy, ox, ic, ky, kx); padded taps still count as
// a multiply and an add, like a dense kernel would execute them.
inline ConvResult naive_conv(const Tensor& in, const ConvParams& p) {
  const int ho = (in.height() + 2 * p.padding - p.kernel_h) / p.stride + 1;
  const int wo = (in.width() + 2 * p.padding - p.kernel_w) / p.stride + 1;
  ConvResult r{Tensor(p.out_channels, ho, wo), 0};
  for (int oc = 0; oc < p.out_channels; ++oc) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        long double acc = 0.0L;
        for (int ic = 0; ic < p.in_channels; ++ic) {
          for (int ky = 0; ky < p.kernel_h; ++ky) {
            for (int kx = 0; kx < p.kernel_w; ++kx) {
              const int y = oy * p.stride + ky - p.padding;
              const int x = ox * p.stride + kx - p.padding;
              const bool inside = y >= 0 && y < in.height() && x >= 0 && x < in.width();
              const long double v = inside ? in.at(ic, y, x) : 0.0L;
              acc += static_cast<long double>(p.weight(oc, ic, ky, kx)) * v;
              r.ops += 2;
            }
          }
        }
        r.output.at(oc, oy, ox) = static_cast<float>(acc + p.bias[static_cast<std::size_t>(oc)]);
      }
    }
  }
  return r;
}

inline double max_relative_error(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t k = 0; k < da.size(); ++k) {
    const double diff = std::abs(static_cast<double>(da[k]) - db[k]);
    const double scale = std::max({1.0, std::abs(static_cast<double>(da[k])), std::abs(static_cast<double>(db[k]))});
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

inline double mse(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        const double d = static_cast<double>(a.at(c, y, x)) - b.at(c, y, x);
        s += d * d;
      }
    }
  }
  return s / static_cast<double>(a.size());
}

inline double smape(const Tensor& a, const Tensor& b, double eps = 1e-6) {
  double s = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        const double u = a.at(c, y, x);
        const double v = b.at(c, y, x);
        s += std::abs(u - v) / (std::abs(u) + std::abs(v) + eps);
      }
    }
  }
  return s / static_cast<double>(a.size());
}

// Direct two-pass statistics per 8x8 window, stride 4.
inline double ssim(const Tensor& a, const Tensor& b, double peak = 1.0) {
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  double total = 0.0;
  int count = 0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y0 = 0; y0 + 8 <= a.height(); y0 += 4) {
      for (int x0 = 0; x0 + 8 <= a.width(); x0 += 4) {
        double ma = 0.0, mb = 0.0;
        for (int y = y0; y < y0 + 8; ++y) {
          for (int x = x0; x < x0 + 8; ++x) {
            ma += a.at(c, y, x);
            mb += b.at(c, y, x);
          }
        }
        ma /= 64.0;
        mb /= 64.0;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (int y = y0; y < y0 + 8; ++y) {
          for (int x = x0; x < x0 + 8; ++x) {
            const double da = a.at(c, y, x) - ma;
            const double db = b.at(c, y, x) - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
          }
        }
        va /= 64.0;
        vb /= 64.0;
        cov /= 64.0;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    }
  }
  return total / count;
}

}  // namespace oracle
