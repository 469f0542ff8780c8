#include "reframe/tensor.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace reframe {

namespace {

void require_positive(const Shape& shape) {
  if (shape.channels <= 0 || shape.height <= 0 || shape.width <= 0) {
    throw std::invalid_argument("tensor dims must be positive, got " + to_string(shape));
  }
}

int initial_thread_count() {
  if (const char* env = std::getenv("REFRAME_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::atomic<int>& thread_setting() {
  static std::atomic<int> threads{initial_thread_count()};
  return threads;
}

}  // namespace

std::string to_string(const Shape& shape) {
  return std::to_string(shape.channels) + "x" + std::to_string(shape.height) + "x" +
         std::to_string(shape.width);
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  require_positive(shape);
  data_.assign(shape.size(), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  require_positive(shape);
  if (data_.size() != shape.size()) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape " + to_string(shape));
  }
}

std::span<float> Tensor::channel(int c) {
  return std::span<float>(data_).subspan(static_cast<std::size_t>(c) * shape_.plane(),
                                         shape_.plane());
}

std::span<const float> Tensor::channel(int c) const {
  return std::span<const float>(data_).subspan(static_cast<std::size_t>(c) * shape_.plane(),
                                               shape_.plane());
}

ConvParams ConvParams::zeros(int in_channels, int out_channels, int kernel, int stride,
                             int padding) {
  ConvParams p;
  p.in_channels = in_channels;
  p.out_channels = out_channels;
  p.kernel_h = kernel;
  p.kernel_w = kernel;
  p.stride = stride;
  p.padding = padding;
  if (in_channels <= 0 || out_channels <= 0 || kernel <= 0) {
    throw std::invalid_argument("conv dims must be positive");
  }
  p.weights.assign(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel, 0.0f);
  p.bias.assign(static_cast<std::size_t>(out_channels), 0.0f);
  p.validate();
  return p;
}

void ConvParams::validate() const {
  if (in_channels <= 0 || out_channels <= 0 || kernel_h <= 0 || kernel_w <= 0 || stride <= 0) {
    throw std::invalid_argument("conv channels, kernel and stride must be positive");
  }
  if (padding < 0) throw std::invalid_argument("conv padding must be non-negative");
  const std::size_t expected =
      static_cast<std::size_t>(out_channels) * in_channels * kernel_h * kernel_w;
  if (weights.size() != expected) {
    throw std::invalid_argument("conv weights length " + std::to_string(weights.size()) +
                                ", expected " + std::to_string(expected));
  }
  if (bias.size() != static_cast<std::size_t>(out_channels)) {
    throw std::invalid_argument("conv bias length " + std::to_string(bias.size()) +
                                ", expected " + std::to_string(out_channels));
  }
}

int thread_count() { return thread_setting().load(); }

void set_thread_count(int threads) {
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
  thread_setting().store(threads);
}

}  // namespace reframe
