#include "reframe/netgraph.hpp"

#include <algorithm>
#include <stdexcept>

namespace reframe {

namespace {

[[noreturn]] void fail(const std::string& message) { throw std::invalid_argument(message); }

Shape resample_shape(const Shape& s, Resample r, const std::string& where) {
  switch (r) {
    case Resample::none:
      return s;
    case Resample::up2:
      return Shape{s.channels, s.height * 2, s.width * 2};
    case Resample::down2:
      if (s.height % 2 != 0 || s.width % 2 != 0) {
        fail(where + ": cannot downsample odd dims " + to_string(s));
      }
      return Shape{s.channels, s.height / 2, s.width / 2};
  }
  return s;
}

Tensor apply_resample(const Tensor& t, Resample r) {
  switch (r) {
    case Resample::up2:
      return upsample_nearest2(t);
    case Resample::down2:
      return maxpool2(t);
    case Resample::none:
      break;
  }
  return t;
}

struct BlockEval {
  Tensor output;
  std::int64_t flops = 0;
};

// Runs one block on already-resolved inputs (slot order).
BlockEval run_block(const Block& block, const std::vector<const Edge*>& edges,
                    const std::vector<const Tensor*>& sources) {
  std::vector<Tensor> resampled;
  resampled.reserve(edges.size());
  std::vector<const Tensor*> parts;
  parts.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (edges[k]->resample == Resample::none) {
      parts.push_back(sources[k]);
    } else {
      resampled.push_back(apply_resample(*sources[k], edges[k]->resample));
      parts.push_back(&resampled.back());
    }
  }

  BlockEval eval;
  Tensor current;
  const Tensor* x = nullptr;
  if (parts.size() == 1) {
    x = parts.front();
  } else {
    current = concat_channels(std::span<const Tensor* const>(parts));
    x = &current;
  }
  for (const Layer& layer : block.def.layers) {
    Tensor next;
    if (const auto* conv = std::get_if<ConvParams>(&layer)) {
      next = conv2d(*x, *conv);
      eval.flops += conv_flops(*conv, next.height(), next.width());
    } else if (std::holds_alternative<Relu>(layer)) {
      next = relu(*x);
    } else if (std::holds_alternative<MaxPool2>(layer)) {
      next = maxpool2(*x);
    } else {
      next = upsample_nearest2(*x);
    }
    current = std::move(next);
    x = &current;
  }
  if (x == &current) {
    eval.output = std::move(current);
  } else {
    eval.output = *x;
  }
  return eval;
}

}  // namespace

std::string to_string(const BlockId& id) {
  switch (id.kind) {
    case BlockKind::unet:
      return "X" + std::to_string(id.i);
    case BlockKind::unetpp:
      return "X" + std::to_string(id.i) + "," + std::to_string(id.j);
    case BlockKind::branch:
      return "branch" + std::to_string(id.i);
    case BlockKind::fusion:
      return "fusion" + std::to_string(id.i);
  }
  return "?";
}

std::string to_string(const CacheLabel& label) {
  switch (label.kind) {
    case CacheLabel::Kind::unet_level:
      return "unet_level" + std::to_string(label.level);
    case CacheLabel::Kind::unetpp_config_a:
      return "unetpp_a";
    case CacheLabel::Kind::unetpp_config_b:
      return "unetpp_b";
    case CacheLabel::Kind::multi_branch: {
      std::string s = "multibranch(";
      for (std::size_t k = 0; k < label.branches.size(); ++k) {
        s += (k ? "," : "") + label.branches[k];
      }
      return s + ")";
    }
    case CacheLabel::Kind::custom:
      return "custom";
  }
  return "?";
}

NetworkSpec::NetworkSpec(Shape input, std::vector<Block> blocks, std::vector<Edge> edges,
                         BlockId output, CacheConfig cache, std::optional<std::uint64_t> seed,
                         Family family, int depth)
    : input_(input),
      blocks_(std::move(blocks)),
      edges_(std::move(edges)),
      output_(output),
      cache_(std::move(cache)),
      seed_(seed),
      family_(family),
      depth_(depth) {
  if (input_.channels <= 0 || input_.height <= 0 || input_.width <= 0) {
    fail("network input dims must be positive, got " + to_string(input_));
  }
  if (blocks_.empty()) fail("network has no blocks");

  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (!index_.emplace(blocks_[k].id, k).second) {
      fail("duplicate block id " + to_string(blocks_[k].id));
    }
  }
  if (!index_.contains(output_)) fail("output block " + to_string(output_) + " does not exist");

  inputs_.assign(blocks_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (!edge_index_.emplace(edge.name, e).second) fail("duplicate edge name " + edge.name);
    if (edge.producer && !index_.contains(*edge.producer)) {
      fail("edge " + edge.name + " has unknown producer " + to_string(*edge.producer));
    }
    if (!index_.contains(edge.consumer)) {
      fail("edge " + edge.name + " has unknown consumer " + to_string(edge.consumer));
    }
    inputs_[index_of(edge.consumer)].push_back(e);
  }

  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    auto& in = inputs_[b];
    if (in.empty()) fail("block " + blocks_[b].name + " has no inputs");
    std::sort(in.begin(), in.end(),
              [&](std::size_t l, std::size_t r) { return edges_[l].slot < edges_[r].slot; });
    for (std::size_t s = 0; s < in.size(); ++s) {
      if (edges_[in[s]].slot != static_cast<int>(s)) {
        fail("block " + blocks_[b].name + " slot " + std::to_string(s) +
             " is not filled exactly once");
      }
    }
  }

  // Kahn's algorithm, preferring declaration order among ready blocks.
  std::vector<int> pending(blocks_.size(), 0);
  std::vector<std::vector<std::size_t>> consumers(blocks_.size());
  for (const Edge& edge : edges_) {
    if (!edge.producer) continue;
    const std::size_t from = index_of(*edge.producer);
    const std::size_t to = index_of(edge.consumer);
    consumers[from].push_back(to);
    ++pending[to];
  }
  std::set<std::size_t> ready;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (pending[b] == 0) ready.insert(b);
  }
  while (!ready.empty()) {
    const std::size_t b = *ready.begin();
    ready.erase(ready.begin());
    order_.push_back(blocks_[b].id);
    for (std::size_t c : consumers[b]) {
      if (--pending[c] == 0) ready.insert(c);
    }
  }
  if (order_.size() != blocks_.size()) fail("network graph contains a cycle");

  // Shape inference along the evaluation order.
  shapes_.assign(blocks_.size(), Shape{});
  flops_.assign(blocks_.size(), 0);
  for (const BlockId& id : order_) {
    const std::size_t b = index_of(id);
    const Block& block = blocks_[b];
    Shape current{0, 0, 0};
    for (std::size_t e : inputs_[b]) {
      const Edge& edge = edges_[e];
      const Shape src = edge.producer ? shapes_[index_of(*edge.producer)] : input_;
      const Shape s = resample_shape(src, edge.resample, "edge " + edge.name);
      if (current.channels == 0) {
        current = s;
      } else {
        if (s.height != current.height || s.width != current.width) {
          fail("block " + block.name + " concatenates mismatched spatial dims " +
               to_string(current) + " and " + to_string(s) + " (edge " + edge.name + ")");
        }
        current.channels += s.channels;
      }
    }
    for (const Layer& layer : block.def.layers) {
      if (const auto* conv = std::get_if<ConvParams>(&layer)) {
        conv->validate();
        try {
          current = conv_output_shape(*conv, current);
        } catch (const std::invalid_argument& err) {
          fail("block " + block.name + ": " + err.what());
        }
        flops_[b] += conv_flops(*conv, current.height, current.width);
      } else if (std::holds_alternative<MaxPool2>(layer)) {
        current = resample_shape(current, Resample::down2, "block " + block.name);
      } else if (std::holds_alternative<Upsample2>(layer)) {
        current = resample_shape(current, Resample::up2, "block " + block.name);
      }
    }
    shapes_[b] = current;
  }

  validate_cache_config(cache_);
}

std::size_t NetworkSpec::index_of(const BlockId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) fail("unknown block " + to_string(id));
  return it->second;
}

const Block& NetworkSpec::block(const BlockId& id) const { return blocks_[index_of(id)]; }

bool NetworkSpec::has_block(const BlockId& id) const { return index_.contains(id); }

const Edge& NetworkSpec::edge(const std::string& name) const {
  auto it = edge_index_.find(name);
  if (it == edge_index_.end()) fail("unknown edge " + name);
  return edges_[it->second];
}

bool NetworkSpec::has_edge(const std::string& name) const { return edge_index_.contains(name); }

std::vector<const Edge*> NetworkSpec::inputs_of(const BlockId& id) const {
  std::vector<const Edge*> out;
  for (std::size_t e : inputs_[index_of(id)]) out.push_back(&edges_[e]);
  return out;
}

Shape NetworkSpec::output_shape(const BlockId& id) const { return shapes_[index_of(id)]; }

Shape NetworkSpec::edge_shape(const std::string& name) const {
  const Edge& e = edge(name);
  return e.producer ? output_shape(*e.producer) : input_;
}

std::int64_t NetworkSpec::block_flops(const BlockId& id) const { return flops_[index_of(id)]; }

std::int64_t NetworkSpec::full_flops() const {
  std::int64_t total = 0;
  for (std::int64_t f : flops_) total += f;
  return total;
}

std::int64_t NetworkSpec::cached_flops() const {
  std::int64_t total = 0;
  for (const BlockId& id : cache_.live_blocks) total += block_flops(id);
  return total;
}

NetworkSpec NetworkSpec::with_cache_config(CacheConfig cache) const {
  validate_cache_config(cache);
  NetworkSpec copy = *this;
  copy.cache_ = std::move(cache);
  return copy;
}

void NetworkSpec::validate_cache_config(const CacheConfig& cache) const {
  for (const BlockId& id : cache.live_blocks) {
    if (!has_block(id)) fail("cache config names unknown live block " + to_string(id));
  }
  if (!cache.live_blocks.contains(output_)) {
    fail("cache config must keep the output block " + block(output_).name + " live");
  }
  for (const std::string& name : cache.cached_edges) {
    if (!has_edge(name)) fail("cache config names unknown edge " + name);
    const Edge& e = edge(name);
    if (!e.producer) fail("cached edge " + name + " carries the network input");
    if (cache.live_blocks.contains(*e.producer)) {
      fail("cached edge " + name + " is produced by live block " + block(*e.producer).name);
    }
    if (!cache.live_blocks.contains(e.consumer)) {
      fail("cached edge " + name + " feeds block " + block(e.consumer).name +
           ", which is not live");
    }
  }
  for (const BlockId& id : cache.live_blocks) {
    for (const Edge* e : inputs_of(id)) {
      const bool ok = !e->producer || cache.live_blocks.contains(*e->producer) ||
                      cache.cached_edges.contains(e->name);
      if (!ok) {
        fail("live block " + block(id).name + " slot " + std::to_string(e->slot) +
             " (edge " + e->name + ") is neither live, input, nor cached");
      }
    }
  }
}

ForwardRecord forward_full(const NetworkSpec& spec, const Tensor& input,
                           const ForwardOptions& options) {
  if (input.shape() != spec.input_shape()) {
    fail("forward_full expects input " + to_string(spec.input_shape()) + ", got " +
         to_string(input.shape()));
  }
  ForwardRecord record;
  std::map<BlockId, Tensor> outputs;
  for (const BlockId& id : spec.topological_order()) {
    const auto edges = spec.inputs_of(id);
    std::vector<const Tensor*> sources;
    sources.reserve(edges.size());
    for (const Edge* e : edges) sources.push_back(e->producer ? &outputs.at(*e->producer) : &input);
    BlockEval eval = run_block(spec.block(id), edges, sources);
    record.flops_executed += eval.flops;
    outputs.emplace(id, std::move(eval.output));
  }
  for (const std::string& name : spec.cache_config().cached_edges) {
    record.edge_tensors.emplace(name, outputs.at(*spec.edge(name).producer));
  }
  if (options.record_features) {
    for (const Block& block : spec.blocks()) {
      if (block.encoder_depth) {
        record.per_level_features.emplace(*block.encoder_depth, outputs.at(block.id));
      }
    }
  }
  record.output = std::move(outputs.at(spec.output_block()));
  return record;
}

ForwardRecord forward_cached(const NetworkSpec& spec, const Tensor& input,
                             const std::map<std::string, Tensor>& cache) {
  if (input.shape() != spec.input_shape()) {
    fail("forward_cached expects input " + to_string(spec.input_shape()) + ", got " +
         to_string(input.shape()));
  }
  const CacheConfig& config = spec.cache_config();
  for (const std::string& name : config.cached_edges) {
    auto it = cache.find(name);
    if (it == cache.end()) fail("cache is missing edge " + name);
    if (it->second.shape() != spec.edge_shape(name)) {
      fail("cache entry " + name + " has shape " + to_string(it->second.shape()) + ", expected " +
           to_string(spec.edge_shape(name)));
    }
  }

  ForwardRecord record;
  std::map<BlockId, Tensor> outputs;
  for (const BlockId& id : spec.topological_order()) {
    if (!config.live_blocks.contains(id)) continue;
    const auto edges = spec.inputs_of(id);
    std::vector<const Tensor*> sources;
    sources.reserve(edges.size());
    for (const Edge* e : edges) {
      if (config.cached_edges.contains(e->name)) {
        sources.push_back(&cache.at(e->name));
      } else if (e->producer) {
        sources.push_back(&outputs.at(*e->producer));
      } else {
        sources.push_back(&input);
      }
    }
    BlockEval eval = run_block(spec.block(id), edges, sources);
    record.flops_executed += eval.flops;
    outputs.emplace(id, std::move(eval.output));
  }
  record.output = std::move(outputs.at(spec.output_block()));
  return record;
}

std::map<int, std::vector<double>> feature_delta_profile(const NetworkSpec& spec,
                                                         std::span<const Tensor> frames) {
  if (frames.size() < 2) fail("feature_delta_profile needs at least two frames");
  std::map<int, Tensor> reference;
  std::map<int, std::vector<double>> profile;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    ForwardRecord rec = forward_full(spec, frames[t], ForwardOptions{.record_features = true});
    if (rec.per_level_features.empty()) fail("network has no encoder levels to profile");
    if (t == 0) reference = std::move(rec.per_level_features);
    for (const auto& [depth, ref] : reference) {
      profile[depth].push_back(t == 0 ? 0.0 : smape(rec.per_level_features.at(depth), ref));
    }
  }
  return profile;
}

}  // namespace reframe
