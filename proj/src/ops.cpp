#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "reframe/tensor.hpp"

namespace reframe {

namespace {

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
int ceil_div(int a, int b) { return -floor_div(-a, b); }

// Accumulates one output plane in double, then rounds once to float. The
// summation order (bias, then ic, ky, kx ascending) is fixed.
void conv_channel(const Tensor& input, const ConvParams& p, const Shape& out, int oc,
                  std::vector<double>& acc, std::span<float> dst) {
  const int in_h = input.height();
  const int in_w = input.width();
  std::fill(acc.begin(), acc.end(), static_cast<double>(p.bias[oc]));
  for (int ic = 0; ic < p.in_channels; ++ic) {
    const std::span<const float> plane = input.channel(ic);
    for (int ky = 0; ky < p.kernel_h; ++ky) {
      const int oy_lo = std::max(0, ceil_div(p.padding - ky, p.stride));
      const int oy_hi = std::min(out.height - 1, floor_div(in_h - 1 + p.padding - ky, p.stride));
      for (int kx = 0; kx < p.kernel_w; ++kx) {
        const double w = p.weight(oc, ic, ky, kx);
        const int ox_lo = std::max(0, ceil_div(p.padding - kx, p.stride));
        const int ox_hi =
            std::min(out.width - 1, floor_div(in_w - 1 + p.padding - kx, p.stride));
        if (ox_lo > ox_hi) continue;
        for (int oy = oy_lo; oy <= oy_hi; ++oy) {
          const int iy = oy * p.stride - p.padding + ky;
          const float* row = plane.data() + static_cast<std::size_t>(iy) * in_w;
          double* acc_row = acc.data() + static_cast<std::size_t>(oy) * out.width;
          if (p.stride == 1) {
            const float* src = row + (ox_lo - p.padding + kx);
            for (int ox = ox_lo; ox <= ox_hi; ++ox) acc_row[ox] += w * src[ox - ox_lo];
          } else {
            for (int ox = ox_lo; ox <= ox_hi; ++ox) {
              acc_row[ox] += w * row[ox * p.stride - p.padding + kx];
            }
          }
        }
      }
    }
  }
  std::transform(acc.begin(), acc.end(), dst.begin(),
                 [](double v) { return static_cast<float>(v); });
}

}  // namespace

Shape conv_output_shape(const ConvParams& params, const Shape& input) {
  if (input.channels != params.in_channels) {
    throw std::invalid_argument("conv2d expects " + std::to_string(params.in_channels) +
                                " input channels, got " + std::to_string(input.channels));
  }
  const int h = floor_div(input.height + 2 * params.padding - params.kernel_h, params.stride) + 1;
  const int w = floor_div(input.width + 2 * params.padding - params.kernel_w, params.stride) + 1;
  if (h < 1 || w < 1) {
    throw std::invalid_argument("conv2d output would be empty for input " + to_string(input));
  }
  return Shape{params.out_channels, h, w};
}

Tensor conv2d(const Tensor& input, const ConvParams& params) {
  params.validate();
  const Shape out_shape = conv_output_shape(params, input.shape());
  Tensor out(out_shape);

  const int workers = std::min(thread_count(), params.out_channels);
  auto run = [&](int first, int step) {
    std::vector<double> acc(out_shape.plane());
    for (int oc = first; oc < params.out_channels; oc += step) {
      conv_channel(input, params, out_shape, oc, acc, out.channel(oc));
    }
  };
  if (workers <= 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(run, t, workers);
    run(0, workers);
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (float& v : out.data()) v = std::max(v, 0.0f);
  return out;
}

Tensor maxpool2(const Tensor& input) {
  if (input.height() % 2 != 0 || input.width() % 2 != 0) {
    throw std::invalid_argument("maxpool2 needs even spatial dims, got " +
                                to_string(input.shape()));
  }
  Tensor out(input.channels(), input.height() / 2, input.width() / 2);
  for (int c = 0; c < out.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        out.at(c, y, x) = std::max({input.at(c, 2 * y, 2 * x), input.at(c, 2 * y, 2 * x + 1),
                                    input.at(c, 2 * y + 1, 2 * x),
                                    input.at(c, 2 * y + 1, 2 * x + 1)});
      }
    }
  }
  return out;
}

Tensor upsample_nearest2(const Tensor& input) {
  Tensor out(input.channels(), input.height() * 2, input.width() * 2);
  for (int c = 0; c < out.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) out.at(c, y, x) = input.at(c, y / 2, x / 2);
    }
  }
  return out;
}

Tensor concat_channels(std::span<const Tensor* const> inputs) {
  if (inputs.empty()) throw std::invalid_argument("concat_channels needs at least one input");
  const int h = inputs.front()->height();
  const int w = inputs.front()->width();
  int channels = 0;
  for (const Tensor* t : inputs) {
    if (t->height() != h || t->width() != w) {
      throw std::invalid_argument("concat_channels spatial mismatch: " +
                                  to_string(inputs.front()->shape()) + " vs " +
                                  to_string(t->shape()));
    }
    channels += t->channels();
  }
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(channels) * h * w);
  for (const Tensor* t : inputs) data.insert(data.end(), t->data().begin(), t->data().end());
  return Tensor(Shape{channels, h, w}, std::move(data));
}

Tensor concat_channels(std::span<const Tensor> inputs) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(inputs.size());
  for (const Tensor& t : inputs) ptrs.push_back(&t);
  return concat_channels(std::span<const Tensor* const>(ptrs));
}

Tensor concat_channels(std::initializer_list<Tensor> inputs) {
  return concat_channels(std::span<const Tensor>(inputs.begin(), inputs.size()));
}

Tensor slice_channels(const Tensor& input, int begin, int count) {
  if (begin < 0 || count <= 0 || begin + count > input.channels()) {
    throw std::invalid_argument("slice_channels range out of bounds");
  }
  const std::size_t plane = input.shape().plane();
  auto first = input.data().begin() + static_cast<std::ptrdiff_t>(begin * plane);
  return Tensor(Shape{count, input.height(), input.width()},
                std::vector<float>(first, first + static_cast<std::ptrdiff_t>(count * plane)));
}

std::int64_t conv_flops(const ConvParams& params, int out_h, int out_w) {
  return std::int64_t{2} * params.kernel_h * params.kernel_w * params.in_channels *
         params.out_channels * out_h * out_w;
}

double smape(const Tensor& a, const Tensor& b, double eps) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("smape shape mismatch: " + to_string(a.shape()) + " vs " +
                                to_string(b.shape()));
  }
  if (a.empty()) return 0.0;
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double x = da[i];
    const double y = db[i];
    sum += std::abs(x - y) / (std::abs(x) + std::abs(y) + eps);
  }
  return sum / static_cast<double>(da.size());
}

}  // namespace reframe
