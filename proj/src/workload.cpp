#include "reframe/workload.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace reframe {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double unit_hash(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  const std::uint64_t h = mix(a ^ mix(b ^ mix(c)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t salt) {
  return unit_hash(static_cast<std::uint64_t>(ix), static_cast<std::uint64_t>(iy), salt);
}

double value_noise(double x, double y, std::uint64_t salt) {
  const double x0 = std::floor(x);
  const double y0 = std::floor(y);
  const auto ix = static_cast<std::int64_t>(x0);
  const auto iy = static_cast<std::int64_t>(y0);
  const double fx = x - x0;
  const double fy = y - y0;
  const double sx = fx * fx * (3.0 - 2.0 * fx);
  const double sy = fy * fy * (3.0 - 2.0 * fy);
  const double a = lattice(ix, iy, salt);
  const double b = lattice(ix + 1, iy, salt);
  const double c = lattice(ix, iy + 1, salt);
  const double d = lattice(ix + 1, iy + 1, salt);
  const double top = a + (b - a) * sx;
  const double bottom = c + (d - c) * sx;
  return top + (bottom - top) * sy;
}

// Fractal sum normalised back into [0, 1].
double fbm(double x, double y, int octaves, std::uint64_t salt) {
  double sum = 0.0;
  double norm = 0.0;
  double amp = 1.0;
  double freq = 1.0;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(x * freq, y * freq, salt + 977u * static_cast<std::uint64_t>(o));
    norm += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  return sum / norm;
}

struct Sprite {
  double x0, y0;  // view pixels at frame 0
  double vx, vy;  // view pixels per frame
  std::array<double, 3> color;
};

struct Scene {
  const SceneConfig& cfg;
  std::array<double, 2> dir;
  std::vector<Sprite> sprites;

  double depth(double wx, double wy) const {
    const double s = 2.0 * cfg.feature_scale;
    return 0.2 + 0.8 * fbm(wx / s, wy / s, 2, cfg.seed * 31u + 10u);
  }
};

std::array<double, 2> normalized_direction(const SceneConfig& cfg) {
  const double len = std::sqrt(cfg.pan_direction[0] * cfg.pan_direction[0] +
                               cfg.pan_direction[1] * cfg.pan_direction[1]);
  if (len == 0.0) return {1.0, 0.0};
  return {cfg.pan_direction[0] / len, cfg.pan_direction[1] / len};
}

std::vector<Sprite> make_sprites(const SceneConfig& cfg) {
  std::vector<Sprite> out;
  const double speed = cfg.sprite_speed / cfg.pixel_footprint;
  for (int k = 0; k < cfg.sprite_count; ++k) {
    const auto key = static_cast<std::uint64_t>(k);
    Sprite s{};
    s.x0 = unit_hash(cfg.seed, key, 1) * cfg.width;
    s.y0 = unit_hash(cfg.seed, key, 2) * cfg.height;
    double dx = 2.0 * unit_hash(cfg.seed, key, 3) - 1.0;
    double dy = 2.0 * unit_hash(cfg.seed, key, 4) - 1.0;
    double len = std::sqrt(dx * dx + dy * dy);
    if (len < 1e-3) {
      dx = 1.0;
      dy = 0.0;
      len = 1.0;
    }
    s.vx = speed * dx / len;
    s.vy = speed * dy / len;
    for (int c = 0; c < 3; ++c) s.color[c] = unit_hash(cfg.seed, key, 5 + c);
    out.push_back(s);
  }
  return out;
}

// fBm values cluster around 0.5; stretch colors to use more of [0, 1].
constexpr double kColorContrast = 2.5;

double wrap_delta(double d, double period) { return d - period * std::round(d / period); }

FrameInput render_frame(const Scene& scene, int t, double cam_x, double cam_y, double speed) {
  const SceneConfig& cfg = scene.cfg;
  const int h = cfg.height;
  const int w = cfg.width;
  Tensor input(cfg.channels, h, w);
  Tensor motion(2, h, w);
  const double fp = cfg.pixel_footprint;
  const double inv_scale = 1.0 / cfg.feature_scale;
  const std::uint64_t salt = cfg.seed * 31u;
  const auto bg_dx = static_cast<float>(-speed * scene.dir[0] / fp);
  const auto bg_dy = static_cast<float>(-speed * scene.dir[1] / fp);
  const double bump = cfg.feature_scale;
  const double radius = cfg.sprite_radius / fp;

  auto put = [&](int c, int y, int x, double v) {
    if (c < cfg.channels) input.at(c, y, x) = static_cast<float>(v);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double wx = (x + 0.5) * fp + cam_x;
      const double wy = (y + 0.5) * fp + cam_y;
      const double u = wx * inv_scale;
      const double v = wy * inv_scale;
      const double base = fbm(u, v, cfg.texture_octaves, salt);
      std::array<double, 6> px{};
      for (int c = 0; c < 3; ++c) {
        const double mixed = 0.5 * base + 0.5 * fbm(u, v, cfg.texture_octaves, salt + 1u + c);
        px[c] = std::clamp(0.5 + kColorContrast * (mixed - 0.5), 0.0, 1.0);
      }
      px[3] = scene.depth(wx, wy);
      const double e = 0.5;
      const double gx = (scene.depth(wx + e, wy) - scene.depth(wx - e, wy)) / (2 * e) * bump;
      const double gy = (scene.depth(wx, wy + e) - scene.depth(wx, wy - e)) / (2 * e) * bump;
      const double n = std::sqrt(gx * gx + gy * gy + 1.0);
      px[4] = -gx / n;
      px[5] = -gy / n;
      float mdx = bg_dx;
      float mdy = bg_dy;

      for (const Sprite& s : scene.sprites) {
        const double sx = s.x0 + s.vx * t;
        const double sy = s.y0 + s.vy * t;
        const double dx = wrap_delta(x + 0.5 - sx, w);
        const double dy = wrap_delta(y + 0.5 - sy, h);
        const double r2 = dx * dx + dy * dy;
        if (r2 >= radius * radius) continue;
        const double nx = dx / radius;
        const double ny = dy / radius;
        const double shade = std::sqrt(std::max(0.0, 1.0 - nx * nx - ny * ny));
        for (int c = 0; c < 3; ++c) px[c] = s.color[c] * (0.4 + 0.6 * shade);
        px[3] = 0.1;
        px[4] = nx;
        px[5] = ny;
        mdx = static_cast<float>(s.vx);
        mdy = static_cast<float>(s.vy);
      }
      for (int c = 0; c < 6; ++c) put(c, y, x, px[c]);
      motion.at(0, y, x) = mdx;
      motion.at(1, y, x) = mdy;
    }
  }
  return FrameInput{std::move(input), std::move(motion), t};
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated sequence file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  const std::uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

void put_tensor(std::ostream& out, const Tensor& t) {
  for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

Tensor get_tensor(std::istream& in, Shape shape) {
  std::vector<float> data(shape.size());
  for (float& v : data) v = std::bit_cast<float>(get_u32(in));
  return Tensor(shape, std::move(data));
}

constexpr char kMagic[4] = {'R', 'F', 'S', 'Q'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::vector<Tensor> FrameSequence::inputs() const {
  std::vector<Tensor> out;
  out.reserve(frames.size());
  for (const FrameInput& f : frames) out.push_back(f.input);
  return out;
}

double pan_speed_at(const SceneConfig& config, int t) {
  if (config.pan_schedule.empty()) return config.pan_speed;
  int start = 0;
  for (const PanSegment& seg : config.pan_schedule) {
    if (t < start + seg.frames) return seg.speed;
    start += seg.frames;
  }
  return config.pan_schedule.back().speed;
}

FrameSequence generate(const SceneConfig& config, int frame_count) {
  if (frame_count < 1) throw std::invalid_argument("frame_count must be >= 1");
  if (config.channels < 1 || config.height < 1 || config.width < 1) {
    throw std::invalid_argument("scene dims must be positive");
  }
  if (config.pixel_footprint <= 0.0 || config.feature_scale <= 0.0) {
    throw std::invalid_argument("pixel_footprint and feature_scale must be positive");
  }
  if (config.texture_octaves < 1) throw std::invalid_argument("texture_octaves must be >= 1");
  if (config.pan_speed < 0.0) throw std::invalid_argument("pan speed must be >= 0");
  for (const PanSegment& seg : config.pan_schedule) {
    if (seg.speed < 0.0 || seg.frames < 1) throw std::invalid_argument("invalid pan segment");
  }

  const Scene scene{config, normalized_direction(config), make_sprites(config)};
  FrameSequence seq;
  seq.seed = config.seed;
  seq.frames.reserve(frame_count);
  double travelled = 0.0;
  for (int t = 0; t < frame_count; ++t) {
    const double speed = pan_speed_at(config, t);
    if (t > 0) travelled += speed;
    seq.frames.push_back(
        render_frame(scene, t, travelled * scene.dir[0], travelled * scene.dir[1], speed));
  }
  return seq;
}

std::vector<double> inter_frame_delta_stats(const FrameSequence& sequence) {
  if (sequence.size() < 2) throw std::invalid_argument("need at least two frames");
  std::vector<double> out;
  out.reserve(sequence.size() - 1);
  for (std::size_t t = 1; t < sequence.size(); ++t) {
    out.push_back(smape(sequence[t].input, sequence[t - 1].input));
  }
  return out;
}

void write_sequence_binary(const std::filesystem::path& path, const FrameSequence& sequence) {
  if (sequence.empty()) throw std::invalid_argument("cannot write an empty sequence");
  const Shape shape = sequence[0].input.shape();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(shape.channels));
  put_u32(out, static_cast<std::uint32_t>(shape.height));
  put_u32(out, static_cast<std::uint32_t>(shape.width));
  put_u32(out, static_cast<std::uint32_t>(sequence.size()));
  put_u64(out, sequence.seed);
  const Shape motion_shape{2, shape.height, shape.width};
  for (const FrameInput& f : sequence.frames) {
    if (f.input.shape() != shape) throw std::invalid_argument("frames differ in shape");
    put_tensor(out, f.input);
    put_tensor(out, f.motion ? *f.motion : Tensor(motion_shape));
  }
}

FrameSequence read_sequence_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a sequence file: " + path.string());
  }
  if (get_u32(in) != kVersion) throw std::runtime_error("unsupported sequence file version");
  const int c = static_cast<int>(get_u32(in));
  const int h = static_cast<int>(get_u32(in));
  const int w = static_cast<int>(get_u32(in));
  const int count = static_cast<int>(get_u32(in));
  FrameSequence seq;
  seq.seed = get_u64(in);
  for (int t = 0; t < count; ++t) {
    Tensor input = get_tensor(in, Shape{c, h, w});
    Tensor motion = get_tensor(in, Shape{2, h, w});
    seq.frames.push_back(FrameInput{std::move(input), std::move(motion), t});
  }
  return seq;
}

}  // namespace reframe
