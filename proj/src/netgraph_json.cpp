#include <stdexcept>

#include "json.hpp"
#include "reframe/netgraph.hpp"

namespace reframe {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

const char* kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::unet:
      return "unet";
    case BlockKind::unetpp:
      return "unetpp";
    case BlockKind::branch:
      return "branch";
    case BlockKind::fusion:
      return "fusion";
  }
  return "?";
}

BlockKind parse_kind(const std::string& s) {
  if (s == "unet") return BlockKind::unet;
  if (s == "unetpp") return BlockKind::unetpp;
  if (s == "branch") return BlockKind::branch;
  if (s == "fusion") return BlockKind::fusion;
  throw std::invalid_argument("unknown block kind '" + s + "'");
}

const char* family_name(Family f) {
  switch (f) {
    case Family::unet:
      return "unet";
    case Family::unetpp:
      return "unetpp";
    case Family::multibranch:
      return "multibranch";
    case Family::custom:
      return "custom";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "unet") return Family::unet;
  if (s == "unetpp") return Family::unetpp;
  if (s == "multibranch") return Family::multibranch;
  if (s == "custom") return Family::custom;
  throw std::invalid_argument("unknown network family '" + s + "'");
}

const char* resample_name(Resample r) {
  switch (r) {
    case Resample::none:
      return "none";
    case Resample::down2:
      return "down2";
    case Resample::up2:
      return "up2";
  }
  return "?";
}

Resample parse_resample(const std::string& s) {
  if (s == "none") return Resample::none;
  if (s == "down2") return Resample::down2;
  if (s == "up2") return Resample::up2;
  throw std::invalid_argument("unknown resample '" + s + "'");
}

const char* label_name(CacheLabel::Kind k) {
  switch (k) {
    case CacheLabel::Kind::unet_level:
      return "unet_level";
    case CacheLabel::Kind::unetpp_config_a:
      return "unetpp_a";
    case CacheLabel::Kind::unetpp_config_b:
      return "unetpp_b";
    case CacheLabel::Kind::multi_branch:
      return "multibranch";
    case CacheLabel::Kind::custom:
      return "custom";
  }
  return "?";
}

CacheLabel::Kind parse_label(const std::string& s) {
  if (s == "unet_level") return CacheLabel::Kind::unet_level;
  if (s == "unetpp_a") return CacheLabel::Kind::unetpp_config_a;
  if (s == "unetpp_b") return CacheLabel::Kind::unetpp_config_b;
  if (s == "multibranch") return CacheLabel::Kind::multi_branch;
  if (s == "custom") return CacheLabel::Kind::custom;
  throw std::invalid_argument("unknown cache label '" + s + "'");
}

json id_json(const BlockId& id) { return json{{"kind", kind_name(id.kind)}, {"i", id.i}, {"j", id.j}}; }

BlockId parse_id(const json& j) {
  return BlockId{parse_kind(j.at("kind").get<std::string>()), j.at("i").get<int>(),
                 j.at("j").get<int>()};
}

json layer_json(const Layer& layer, bool with_weights) {
  if (const auto* conv = std::get_if<ConvParams>(&layer)) {
    json j{{"op", "conv"},
           {"in", conv->in_channels},
           {"out", conv->out_channels},
           {"kh", conv->kernel_h},
           {"kw", conv->kernel_w},
           {"stride", conv->stride},
           {"padding", conv->padding}};
    if (with_weights) {
      j["weights"] = conv->weights;
      j["bias"] = conv->bias;
    }
    return j;
  }
  if (std::holds_alternative<Relu>(layer)) return json{{"op", "relu"}};
  if (std::holds_alternative<MaxPool2>(layer)) return json{{"op", "maxpool2"}};
  return json{{"op", "upsample2"}};
}

Layer parse_layer(const json& j, bool& has_weights) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "relu") return Relu{};
  if (op == "maxpool2") return MaxPool2{};
  if (op == "upsample2") return Upsample2{};
  if (op != "conv") throw std::invalid_argument("unknown layer op '" + op + "'");
  ConvParams p;
  p.in_channels = j.at("in").get<int>();
  p.out_channels = j.at("out").get<int>();
  p.kernel_h = j.at("kh").get<int>();
  p.kernel_w = j.at("kw").get<int>();
  p.stride = j.value("stride", 1);
  p.padding = j.value("padding", 0);
  if (j.contains("weights")) {
    p.weights = j.at("weights").get<std::vector<float>>();
    p.bias = j.at("bias").get<std::vector<float>>();
    has_weights = true;
  } else {
    p.weights.assign(static_cast<std::size_t>(p.out_channels) * p.in_channels * p.kernel_h *
                         p.kernel_w,
                     0.0f);
    p.bias.assign(static_cast<std::size_t>(p.out_channels), 0.0f);
  }
  p.validate();
  return p;
}

}  // namespace

std::string to_json(const NetworkSpec& spec, WeightsMode mode) {
  const bool inline_weights = mode == WeightsMode::inline_values;
  if (!inline_weights && !spec.seed()) {
    throw std::invalid_argument("network has no seed; serialize with inline weights");
  }
  json doc;
  doc["version"] = kSchemaVersion;
  doc["family"] = family_name(spec.family());
  doc["depth"] = spec.depth();
  doc["input"] = {{"channels", spec.input_shape().channels},
                  {"height", spec.input_shape().height},
                  {"width", spec.input_shape().width}};
  doc["seed"] = spec.seed() ? json(*spec.seed()) : json(nullptr);

  json blocks = json::array();
  for (const Block& b : spec.blocks()) {
    json layers = json::array();
    for (const Layer& l : b.def.layers) layers.push_back(layer_json(l, inline_weights));
    json jb = id_json(b.id);
    jb["name"] = b.name;
    jb["encoder_depth"] = b.encoder_depth ? json(*b.encoder_depth) : json(nullptr);
    jb["layers"] = std::move(layers);
    blocks.push_back(std::move(jb));
  }
  doc["blocks"] = std::move(blocks);

  json edges = json::array();
  for (const Edge& e : spec.edges()) {
    edges.push_back({{"name", e.name},
                     {"from", e.producer ? id_json(*e.producer) : json(nullptr)},
                     {"to", id_json(e.consumer)},
                     {"slot", e.slot},
                     {"resample", resample_name(e.resample)}});
  }
  doc["edges"] = std::move(edges);
  doc["output"] = id_json(spec.output_block());

  const CacheConfig& cache = spec.cache_config();
  json live = json::array();
  for (const BlockId& id : cache.live_blocks) live.push_back(id_json(id));
  doc["cache"] = {{"label", label_name(cache.label.kind)},
                  {"level", cache.label.level},
                  {"branches", cache.label.branches},
                  {"cached_edges", cache.cached_edges},
                  {"live_blocks", std::move(live)}};
  return doc.dump(2);
}

namespace {

NetworkSpec parse_network(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.at("version").get<int>() != kSchemaVersion) {
    throw std::invalid_argument("unsupported network schema version");
  }
  const Shape input{doc.at("input").at("channels").get<int>(),
                    doc.at("input").at("height").get<int>(), doc.at("input").at("width").get<int>()};
  std::optional<std::uint64_t> seed;
  if (!doc.at("seed").is_null()) seed = doc.at("seed").get<std::uint64_t>();

  std::vector<Block> blocks;
  int with_weights = 0;
  int without_weights = 0;
  for (const json& jb : doc.at("blocks")) {
    Block b;
    b.id = parse_id(jb);
    b.name = jb.at("name").get<std::string>();
    if (!jb.at("encoder_depth").is_null()) b.encoder_depth = jb.at("encoder_depth").get<int>();
    for (const json& jl : jb.at("layers")) {
      bool has = false;
      b.def.layers.push_back(parse_layer(jl, has));
      if (std::holds_alternative<ConvParams>(b.def.layers.back())) (has ? with_weights : without_weights)++;
    }
    blocks.push_back(std::move(b));
  }
  if (with_weights > 0 && without_weights > 0) {
    throw std::invalid_argument("network JSON mixes inline and seeded weights");
  }
  if (without_weights > 0) {
    if (!seed) throw std::invalid_argument("network JSON has neither weights nor seed");
    initialize_weights(blocks, *seed);
  }

  std::vector<Edge> edges;
  for (const json& je : doc.at("edges")) {
    Edge e;
    e.name = je.at("name").get<std::string>();
    if (!je.at("from").is_null()) e.producer = parse_id(je.at("from"));
    e.consumer = parse_id(je.at("to"));
    e.slot = je.at("slot").get<int>();
    e.resample = parse_resample(je.value("resample", std::string("none")));
    edges.push_back(std::move(e));
  }

  const json& jc = doc.at("cache");
  CacheConfig cache;
  cache.label.kind = parse_label(jc.at("label").get<std::string>());
  cache.label.level = jc.value("level", 0);
  cache.label.branches = jc.value("branches", std::vector<std::string>{});
  for (const auto& name : jc.at("cached_edges")) cache.cached_edges.insert(name.get<std::string>());
  for (const json& id : jc.at("live_blocks")) cache.live_blocks.insert(parse_id(id));

  return NetworkSpec(input, std::move(blocks), std::move(edges), parse_id(doc.at("output")),
                     std::move(cache), seed, parse_family(doc.value("family", std::string("custom"))),
                     doc.value("depth", 0));
}

}  // namespace

NetworkSpec network_from_json(const std::string& text) {
  try {
    return parse_network(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed network JSON: ") + e.what());
  }
}

}  // namespace reframe
