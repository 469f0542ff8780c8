#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace reframe {

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  std::size_t plane() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

/// Dense channels x height x width feature map of float32, channel-major then
/// row-major. A default-constructed tensor is empty (all dims zero); every
/// other constructor requires strictly positive dims.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(int channels, int height, int width, float fill = 0.0f)
      : Tensor(Shape{channels, height, width}, fill) {}
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  std::span<float> channel(int c);
  std::span<const float> channel(int c) const;

  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  /// Storage footprint of the payload in bytes (float32).
  std::int64_t bytes() const { return static_cast<std::int64_t>(data_.size() * sizeof(float)); }

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x;
  }

  Shape shape_{};
  std::vector<float> data_;
};

struct ConvParams {
  int in_channels = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  std::vector<float> weights;  // [out][in][kh][kw]
  std::vector<float> bias;     // [out]

  /// Zero-initialised parameters of the given geometry.
  static ConvParams zeros(int in_channels, int out_channels, int kernel, int stride = 1,
                          int padding = 0);

  float weight(int oc, int ic, int ky, int kx) const {
    return weights[((static_cast<std::size_t>(oc) * in_channels + ic) * kernel_h + ky) * kernel_w +
                   kx];
  }
  float& weight(int oc, int ic, int ky, int kx) {
    return weights[((static_cast<std::size_t>(oc) * in_channels + ic) * kernel_h + ky) * kernel_w +
                   kx];
  }

  /// Throws std::invalid_argument if dims are non-positive or array lengths disagree.
  void validate() const;

  bool operator==(const ConvParams&) const = default;
};

/// Output shape of `params` applied to `input`; throws on channel mismatch or
/// a non-positive output dimension.
Shape conv_output_shape(const ConvParams& params, const Shape& input);

Tensor conv2d(const Tensor& input, const ConvParams& params);
Tensor relu(const Tensor& input);
Tensor maxpool2(const Tensor& input);
Tensor upsample_nearest2(const Tensor& input);

Tensor concat_channels(std::span<const Tensor* const> inputs);
Tensor concat_channels(std::span<const Tensor> inputs);
Tensor concat_channels(std::initializer_list<Tensor> inputs);
Tensor slice_channels(const Tensor& input, int begin, int count);

/// Multiply and add each count as one op; bias adds are not counted.
std::int64_t conv_flops(const ConvParams& params, int out_h, int out_w);

inline constexpr double kSmapeEpsilon = 1e-6;

/// Mean over all elements of |a-b| / (|a| + |b| + eps).
double smape(const Tensor& a, const Tensor& b, double eps = kSmapeEpsilon);

/// Worker threads used inside conv2d. Results are bit-identical for any
/// count since each output channel is reduced independently. Defaults to the
/// REFRAME_THREADS environment variable, else 1.
int thread_count();
void set_thread_count(int threads);

}  // namespace reframe
