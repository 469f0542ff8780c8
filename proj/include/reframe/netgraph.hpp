#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "reframe/tensor.hpp"

namespace reframe {

enum class BlockKind { unet, unetpp, branch, fusion };

/// Identifies a block. U-Net blocks are numbered X^0..X^m along the data path
/// (encoder first, then decoder) with j = 0; U-Net++ blocks use the nested
/// grid X^{i,j}; branch blocks use i as their position in the branch list.
struct BlockId {
  BlockKind kind = BlockKind::unet;
  int i = 0;
  int j = 0;

  auto operator<=>(const BlockId&) const = default;
};

std::string to_string(const BlockId& id);

struct Relu {
  bool operator==(const Relu&) const = default;
};
struct MaxPool2 {
  bool operator==(const MaxPool2&) const = default;
};
struct Upsample2 {
  bool operator==(const Upsample2&) const = default;
};

using Layer = std::variant<ConvParams, Relu, MaxPool2, Upsample2>;

/// Layers applied in order to the channel concatenation of a block's inputs.
struct BlockDef {
  std::vector<Layer> layers;
};

struct Block {
  BlockId id;
  std::string name;
  BlockDef def;
  /// Set for encoder-path blocks; the resolution level they operate at.
  std::optional<int> encoder_depth;
};

/// Applied by the consumer to the producer's tensor before concatenation, so
/// the producer-side tensor is what gets cached.
enum class Resample { none, down2, up2 };

struct Edge {
  std::string name;
  std::optional<BlockId> producer;  // nullopt = network input
  BlockId consumer;
  int slot = 0;
  Resample resample = Resample::none;
};

struct CacheLabel {
  enum class Kind { unet_level, unetpp_config_a, unetpp_config_b, multi_branch, custom };
  Kind kind = Kind::custom;
  int level = 0;                      // unet_level
  std::vector<std::string> branches;  // multi_branch: cached branch names

  bool operator==(const CacheLabel&) const = default;
};

std::string to_string(const CacheLabel& label);

struct CacheConfig {
  std::set<std::string> cached_edges;
  std::set<BlockId> live_blocks;
  CacheLabel label;

  bool operator==(const CacheConfig&) const = default;
};

enum class Family { unet, unetpp, multibranch, custom };

/// Immutable, validated network graph. Construction checks acyclicity, slot
/// coverage, channel and spatial consistency along every edge, and the cache
/// configuration; any violation throws std::invalid_argument.
class NetworkSpec {
 public:
  NetworkSpec(Shape input, std::vector<Block> blocks, std::vector<Edge> edges, BlockId output,
              CacheConfig cache, std::optional<std::uint64_t> seed = std::nullopt,
              Family family = Family::custom, int depth = 0);

  const Shape& input_shape() const { return input_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Edge>& edges() const { return edges_; }
  BlockId output_block() const { return output_; }
  const CacheConfig& cache_config() const { return cache_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  Family family() const { return family_; }
  /// Builder depth parameter (0 for multibranch/custom networks).
  int depth() const { return depth_; }

  const Block& block(const BlockId& id) const;
  bool has_block(const BlockId& id) const;
  const Edge& edge(const std::string& name) const;
  bool has_edge(const std::string& name) const;

  /// Blocks in evaluation order.
  const std::vector<BlockId>& topological_order() const { return order_; }
  /// Input edges of a block sorted by slot.
  std::vector<const Edge*> inputs_of(const BlockId& id) const;
  Shape output_shape(const BlockId& id) const;
  Shape network_output_shape() const { return output_shape(output_); }
  /// Shape of the producer-side tensor carried by an edge.
  Shape edge_shape(const std::string& name) const;

  std::int64_t block_flops(const BlockId& id) const;
  std::int64_t full_flops() const;
  /// FLOPs of one cached pass under the current cache configuration.
  std::int64_t cached_flops() const;

  /// Copy with a different cache configuration (validated).
  NetworkSpec with_cache_config(CacheConfig cache) const;

  /// Throws std::invalid_argument if `cache` is not statically satisfiable.
  void validate_cache_config(const CacheConfig& cache) const;

 private:
  std::size_t index_of(const BlockId& id) const;

  Shape input_;
  std::vector<Block> blocks_;
  std::vector<Edge> edges_;
  BlockId output_;
  CacheConfig cache_;
  std::optional<std::uint64_t> seed_;
  Family family_;
  int depth_;

  std::map<BlockId, std::size_t> index_;
  std::map<std::string, std::size_t> edge_index_;
  std::vector<BlockId> order_;
  std::vector<std::vector<std::size_t>> inputs_;  // edge indices by slot
  std::vector<Shape> shapes_;
  std::vector<std::int64_t> flops_;
};

struct ForwardRecord {
  Tensor output;
  std::map<std::string, Tensor> edge_tensors;
  std::int64_t flops_executed = 0;
  /// Encoder output per resolution level; filled when requested.
  std::map<int, Tensor> per_level_features;
};

struct ForwardOptions {
  bool record_features = false;
};

/// Evaluates every block; records producer-side tensors of every cached edge.
ForwardRecord forward_full(const NetworkSpec& spec, const Tensor& input,
                           const ForwardOptions& options = {});

/// Evaluates only the live blocks, reading cached edges from `cache`.
ForwardRecord forward_cached(const NetworkSpec& spec, const Tensor& input,
                             const std::map<std::string, Tensor>& cache);

/// Per encoder depth, SMAPE of each frame's features against frame 0's.
std::map<int, std::vector<double>> feature_delta_profile(const NetworkSpec& spec,
                                                         std::span<const Tensor> frames);

// Builders -------------------------------------------------------------------

struct UNetOptions {
  int depth = 3;
  int base_channels = 8;
  Shape input{6, 64, 64};
  int output_channels = 3;
  std::uint64_t seed = 1;
};

/// `depth` resolution levels: encoder X^0..X^{depth-1}, decoder mirrors back
/// up to X^{2(depth-1)}, which ends in a 1x1 output head.
NetworkSpec build_unet(const UNetOptions& options);

/// Nested grid X^{i,j} with i + j <= depth; output from X^{0,depth}.
NetworkSpec build_unetpp(const UNetOptions& options);

struct Branch {
  std::string name;
  BlockDef def;
};

/// Every branch reads the network input; their outputs are concatenated in
/// list order into the fusion block. By default every branch except one named
/// "lr" is cached.
NetworkSpec build_multibranch(Shape input, std::vector<Branch> branches, BlockDef fusion,
                              std::optional<std::set<std::string>> cached_branches = std::nullopt,
                              std::optional<std::uint64_t> seed = std::nullopt);

struct SuperResOptions {
  Shape low_res_input{6, 16, 16};
  int scale = 4;  // power of two
  int temporal_channels = 8;
  int hr_channels = 16;
  int lr_channels = 8;
  int fusion_channels = 16;
  int output_channels = 3;
  std::uint64_t seed = 1;
};

/// Three-branch supersampling network: a temporal branch and an HR feature
/// branch (both cached) plus a cheap LR branch that stays live.
NetworkSpec build_superres_network(const SuperResOptions& options);

CacheConfig unet_level_config(const NetworkSpec& spec, int level);
CacheConfig unetpp_config_a(const NetworkSpec& spec);
CacheConfig unetpp_config_b(const NetworkSpec& spec);
CacheConfig multibranch_config(const NetworkSpec& spec, const std::set<std::string>& cached);
/// No cached edges, every block live.
CacheConfig no_cache_config(const NetworkSpec& spec);

/// He-style uniform init (variance 2/fan_in, zero bias) of every conv, in
/// block order, from a seeded mt19937_64.
void initialize_weights(std::vector<Block>& blocks, std::uint64_t seed);

// Serialization ----------------------------------------------------------------

enum class WeightsMode { from_seed, inline_values };

std::string to_json(const NetworkSpec& spec, WeightsMode mode = WeightsMode::from_seed);
NetworkSpec network_from_json(const std::string& text);

}  // namespace reframe
