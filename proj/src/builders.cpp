#include <cmath>
#include <random>
#include <stdexcept>

#include "reframe/netgraph.hpp"

namespace reframe {

namespace {

BlockDef double_conv(int in_channels, int out_channels) {
  BlockDef def;
  def.layers.emplace_back(ConvParams::zeros(in_channels, out_channels, 3, 1, 1));
  def.layers.emplace_back(Relu{});
  def.layers.emplace_back(ConvParams::zeros(out_channels, out_channels, 3, 1, 1));
  def.layers.emplace_back(Relu{});
  return def;
}

void add_head(BlockDef& def, int in_channels, int out_channels) {
  def.layers.emplace_back(ConvParams::zeros(in_channels, out_channels, 1));
}

Edge make_edge(const std::optional<Block>& producer, const Block& consumer, int slot,
               Resample resample = Resample::none) {
  return Edge{(producer ? producer->name : std::string("input")) + "->" + consumer.name,
              producer ? std::optional<BlockId>(producer->id) : std::nullopt, consumer.id, slot,
              resample};
}

void check_common(const UNetOptions& o, int levels_below_top) {
  if (o.base_channels < 1) throw std::invalid_argument("base_channels must be >= 1");
  if (o.output_channels < 1) throw std::invalid_argument("output_channels must be >= 1");
  if (o.input.channels < 1 || o.input.height < 1 || o.input.width < 1) {
    throw std::invalid_argument("input dims must be positive");
  }
  const int factor = 1 << levels_below_top;
  if (o.input.height % factor != 0 || o.input.width % factor != 0) {
    throw std::invalid_argument("input " + to_string(o.input) + " is not divisible by " +
                                std::to_string(factor));
  }
}

// Live set -> cache config: every edge entering a live block from a block that
// is not live becomes a cached edge.
CacheConfig config_from_live(const NetworkSpec& spec, std::set<BlockId> live, CacheLabel label) {
  CacheConfig config;
  config.live_blocks = std::move(live);
  config.label = std::move(label);
  for (const Edge& e : spec.edges()) {
    if (e.producer && config.live_blocks.contains(e.consumer) &&
        !config.live_blocks.contains(*e.producer)) {
      config.cached_edges.insert(e.name);
    }
  }
  spec.validate_cache_config(config);
  return config;
}

CacheConfig all_live(const std::vector<Block>& blocks) {
  CacheConfig c;
  for (const Block& b : blocks) c.live_blocks.insert(b.id);
  return c;
}

}  // namespace

void initialize_weights(std::vector<Block>& blocks, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (Block& block : blocks) {
    for (Layer& layer : block.def.layers) {
      auto* conv = std::get_if<ConvParams>(&layer);
      if (!conv) continue;
      const double fan_in = static_cast<double>(conv->in_channels) * conv->kernel_h * conv->kernel_w;
      // U(-a, a) has variance a^2 / 3 = 2 / fan_in.
      const double a = std::sqrt(6.0 / fan_in);
      for (float& w : conv->weights) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        w = static_cast<float>((2.0 * u - 1.0) * a);
      }
      std::fill(conv->bias.begin(), conv->bias.end(), 0.0f);
    }
  }
}

NetworkSpec build_unet(const UNetOptions& o) {
  const int n = o.depth;
  if (n < 2) throw std::invalid_argument("U-Net depth must be >= 2");
  check_common(o, n - 1);

  auto channels = [&](int d) { return o.base_channels << d; };
  std::vector<Block> blocks;
  std::vector<Edge> edges;
  for (int d = 0; d < n; ++d) {
    Block b{BlockId{BlockKind::unet, d, 0}, "X" + std::to_string(d),
            double_conv(d == 0 ? o.input.channels : channels(d - 1), channels(d)), d};
    if (d == 0) {
      edges.push_back(make_edge(std::nullopt, b, 0));
    } else {
      edges.push_back(make_edge(blocks.back(), b, 0, Resample::down2));
    }
    blocks.push_back(std::move(b));
  }
  const int last = 2 * (n - 1);
  for (int d = n - 2; d >= 0; --d) {
    const int m = last - d;
    Block b{BlockId{BlockKind::unet, m, 0}, "X" + std::to_string(m),
            double_conv(channels(d + 1) + channels(d), channels(d)), std::nullopt};
    if (d == 0) add_head(b.def, channels(0), o.output_channels);
    edges.push_back(make_edge(blocks[m - 1], b, 0, Resample::up2));
    edges.push_back(make_edge(blocks[d], b, 1));
    blocks.push_back(std::move(b));
  }
  initialize_weights(blocks, o.seed);

  const BlockId output{BlockKind::unet, last, 0};
  CacheConfig initial = all_live(blocks);
  NetworkSpec spec(o.input, std::move(blocks), std::move(edges), output, initial,
                   o.seed, Family::unet, n);
  return spec.with_cache_config(unet_level_config(spec, 1));
}

NetworkSpec build_unetpp(const UNetOptions& o) {
  const int n = o.depth;
  if (n < 2) throw std::invalid_argument("U-Net++ depth must be >= 2");
  check_common(o, n);

  auto channels = [&](int i) { return o.base_channels << i; };
  auto name = [](int i, int j) { return "X" + std::to_string(i) + "," + std::to_string(j); };
  std::vector<Block> blocks;
  std::vector<Edge> edges;
  std::map<std::pair<int, int>, std::size_t> at;

  for (int i = 0; i <= n; ++i) {
    Block b{BlockId{BlockKind::unetpp, i, 0}, name(i, 0),
            double_conv(i == 0 ? o.input.channels : channels(i - 1), channels(i)), i};
    if (i == 0) {
      edges.push_back(make_edge(std::nullopt, b, 0));
    } else {
      edges.push_back(make_edge(blocks[at.at({i - 1, 0})], b, 0, Resample::down2));
    }
    at[{i, 0}] = blocks.size();
    blocks.push_back(std::move(b));
  }
  for (int j = 1; j <= n; ++j) {
    for (int i = 0; i + j <= n; ++i) {
      Block b{BlockId{BlockKind::unetpp, i, j}, name(i, j),
              double_conv(channels(i + 1) + j * channels(i), channels(i)), std::nullopt};
      if (i == 0 && j == n) add_head(b.def, channels(0), o.output_channels);
      edges.push_back(make_edge(blocks[at.at({i + 1, j - 1})], b, 0, Resample::up2));
      for (int k = j - 1, slot = 1; k >= 0; --k, ++slot) {
        edges.push_back(make_edge(blocks[at.at({i, k})], b, slot));
      }
      at[{i, j}] = blocks.size();
      blocks.push_back(std::move(b));
    }
  }
  initialize_weights(blocks, o.seed);

  const BlockId output{BlockKind::unetpp, 0, n};
  CacheConfig initial = all_live(blocks);
  NetworkSpec spec(o.input, std::move(blocks), std::move(edges), output, initial,
                   o.seed, Family::unetpp, n);
  return spec.with_cache_config(unetpp_config_b(spec));
}

NetworkSpec build_multibranch(Shape input, std::vector<Branch> branches, BlockDef fusion,
                              std::optional<std::set<std::string>> cached_branches,
                              std::optional<std::uint64_t> seed) {
  if (branches.empty()) throw std::invalid_argument("multibranch network needs branches");
  std::vector<Block> blocks;
  std::vector<Edge> edges;
  std::set<std::string> names;
  Block fusion_block{BlockId{BlockKind::fusion, 0, 0}, "fusion", std::move(fusion), std::nullopt};
  for (std::size_t k = 0; k < branches.size(); ++k) {
    if (branches[k].name.empty() || branches[k].name == "fusion" || branches[k].name == "input" ||
        !names.insert(branches[k].name).second) {
      throw std::invalid_argument("invalid or duplicate branch name '" + branches[k].name + "'");
    }
    Block b{BlockId{BlockKind::branch, static_cast<int>(k), 0}, branches[k].name,
            std::move(branches[k].def), std::nullopt};
    edges.push_back(make_edge(std::nullopt, b, 0));
    edges.push_back(make_edge(b, fusion_block, static_cast<int>(k)));
    blocks.push_back(std::move(b));
  }
  blocks.push_back(std::move(fusion_block));
  if (seed) initialize_weights(blocks, *seed);

  std::set<std::string> cached;
  if (cached_branches) {
    cached = *cached_branches;
  } else {
    for (const std::string& n : names) {
      if (n != "lr") cached.insert(n);
    }
  }
  const BlockId output{BlockKind::fusion, 0, 0};
  CacheConfig initial = all_live(blocks);
  NetworkSpec spec(input, std::move(blocks), std::move(edges), output, initial,
                   seed, Family::multibranch, 0);
  return spec.with_cache_config(multibranch_config(spec, cached));
}

NetworkSpec build_superres_network(const SuperResOptions& o) {
  int ups = 0;
  for (int s = o.scale; s > 1; s /= 2) {
    if (s % 2 != 0) throw std::invalid_argument("super-resolution scale must be a power of two");
    ++ups;
  }
  const int c = o.low_res_input.channels;
  auto upsample = [&](BlockDef& def) {
    for (int k = 0; k < ups; ++k) def.layers.emplace_back(Upsample2{});
  };

  BlockDef temporal;
  temporal.layers.emplace_back(ConvParams::zeros(c, o.temporal_channels, 3, 1, 1));
  temporal.layers.emplace_back(Relu{});
  upsample(temporal);
  temporal.layers.emplace_back(ConvParams::zeros(o.temporal_channels, o.temporal_channels, 3, 1, 1));
  temporal.layers.emplace_back(Relu{});

  BlockDef hr;
  upsample(hr);
  hr.layers.emplace_back(ConvParams::zeros(c, o.hr_channels, 3, 1, 1));
  hr.layers.emplace_back(Relu{});
  hr.layers.emplace_back(ConvParams::zeros(o.hr_channels, o.hr_channels, 3, 1, 1));
  hr.layers.emplace_back(Relu{});

  BlockDef lr = double_conv(c, o.lr_channels);
  upsample(lr);

  BlockDef fusion;
  fusion.layers.emplace_back(ConvParams::zeros(
      o.temporal_channels + o.hr_channels + o.lr_channels, o.fusion_channels, 3, 1, 1));
  fusion.layers.emplace_back(Relu{});
  add_head(fusion, o.fusion_channels, o.output_channels);

  std::vector<Branch> branches{{"temporal", std::move(temporal)}, {"hr", std::move(hr)},
                               {"lr", std::move(lr)}};
  return build_multibranch(o.low_res_input, std::move(branches), std::move(fusion),
                           std::set<std::string>{"temporal", "hr"}, o.seed);
}

CacheConfig unet_level_config(const NetworkSpec& spec, int level) {
  if (spec.family() != Family::unet) throw std::invalid_argument("not a U-Net");
  const int n = spec.depth();
  if (level < 1 || level > n - 1) {
    throw std::invalid_argument("U-Net level must be in [1, " + std::to_string(n - 1) + "]");
  }
  const int last = 2 * (n - 1);
  std::set<BlockId> live;
  for (int d = 0; d < level; ++d) {
    live.insert(BlockId{BlockKind::unet, d, 0});
    live.insert(BlockId{BlockKind::unet, last - d, 0});
  }
  return config_from_live(spec, std::move(live), CacheLabel{CacheLabel::Kind::unet_level, level, {}});
}

CacheConfig unetpp_config_a(const NetworkSpec& spec) {
  if (spec.family() != Family::unetpp) throw std::invalid_argument("not a U-Net++");
  const int n = spec.depth();
  std::set<BlockId> live;
  for (int i = 0; i <= n; ++i) {
    live.insert(BlockId{BlockKind::unetpp, i, 0});
    live.insert(BlockId{BlockKind::unetpp, i, n - i});
  }
  return config_from_live(spec, std::move(live),
                          CacheLabel{CacheLabel::Kind::unetpp_config_a, 0, {}});
}

CacheConfig unetpp_config_b(const NetworkSpec& spec) {
  if (spec.family() != Family::unetpp) throw std::invalid_argument("not a U-Net++");
  std::set<BlockId> live;
  for (int j = 0; j <= spec.depth(); ++j) live.insert(BlockId{BlockKind::unetpp, 0, j});
  return config_from_live(spec, std::move(live),
                          CacheLabel{CacheLabel::Kind::unetpp_config_b, 0, {}});
}

CacheConfig multibranch_config(const NetworkSpec& spec, const std::set<std::string>& cached) {
  if (spec.family() != Family::multibranch) throw std::invalid_argument("not a multibranch network");
  std::set<BlockId> live{spec.output_block()};
  std::set<std::string> seen;
  for (const Block& b : spec.blocks()) {
    if (b.id.kind != BlockKind::branch) continue;
    if (cached.contains(b.name)) {
      seen.insert(b.name);
    } else {
      live.insert(b.id);
    }
  }
  for (const std::string& name : cached) {
    if (!seen.contains(name)) throw std::invalid_argument("unknown branch '" + name + "'");
  }
  return config_from_live(
      spec, std::move(live),
      CacheLabel{CacheLabel::Kind::multi_branch, 0, std::vector<std::string>(cached.begin(), cached.end())});
}

CacheConfig no_cache_config(const NetworkSpec& spec) {
  std::set<BlockId> live;
  for (const Block& b : spec.blocks()) live.insert(b.id);
  return config_from_live(spec, std::move(live), CacheLabel{CacheLabel::Kind::custom, 0, {}});
}

}  // namespace reframe
