#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "reframe/harness.hpp"

namespace reframe {

namespace {

using nlohmann::json;

// Object reader that rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw std::invalid_argument(where_ + " must be a JSON object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(where_ + "." + key + ": " + e.what());
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T value{};
    get(key, value);
    out = value;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw std::invalid_argument("unknown key " + where_ + "." + key);
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Shape read_shape(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument(where + " must be [channels, height, width]");
  }
  return Shape{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

void read_network(const json& j, NetworkConfig& n) {
  Fields f(j, "network");
  f.get("type", n.type);
  f.get("depth", n.depth);
  f.get("base_channels", n.base_channels);
  f.get("input_channels", n.input_channels);
  f.get("output_channels", n.output_channels);
  f.get("height", n.height);
  f.get("width", n.width);
  f.finish();
}

void read_policy(const json& j, PolicyConfig& p) {
  if (j.is_string()) {
    p.preset = j.get<std::string>();
    return;
  }
  Fields f(j, "policy");
  f.get("preset", p.preset);
  if (const json* o = f.child("overrides")) {
    Fields g(*o, "policy.overrides");
    g.get("n", p.n);
    g.get("tau", p.tau);
    g.get("c", p.c);
    g.get("p", p.p);
    g.get("refreshes", p.refreshes);
    g.finish();
  }
  f.finish();
}

void read_scene(const json& j, SceneConfig& s) {
  Fields f(j, "scene");
  f.get("pan_speed", s.pan_speed);
  f.get("pan_direction", s.pan_direction);
  if (const json* sched = f.child("pan_schedule")) {
    if (!sched->is_array()) throw std::invalid_argument("scene.pan_schedule must be an array");
    s.pan_schedule.clear();
    for (const json& seg : *sched) {
      Fields g(seg, "scene.pan_schedule[]");
      PanSegment p;
      g.get("frames", p.frames);
      g.get("speed", p.speed);
      g.finish();
      s.pan_schedule.push_back(p);
    }
  }
  f.get("sprite_count", s.sprite_count);
  f.get("sprite_radius", s.sprite_radius);
  f.get("sprite_speed", s.sprite_speed);
  f.get("texture_octaves", s.texture_octaves);
  f.get("feature_scale", s.feature_scale);
  f.finish();
}

json scene_json(const SceneConfig& s) {
  json sched = json::array();
  for (const PanSegment& p : s.pan_schedule) sched.push_back({{"frames", p.frames}, {"speed", p.speed}});
  return {{"pan_speed", s.pan_speed},         {"pan_direction", s.pan_direction},
          {"pan_schedule", sched},            {"sprite_count", s.sprite_count},
          {"sprite_radius", s.sprite_radius}, {"sprite_speed", s.sprite_speed},
          {"texture_octaves", s.texture_octaves}, {"feature_scale", s.feature_scale}};
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("run config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Fields f(j, "config");
  f.get("version", c.version);
  if (c.version != 1) throw std::invalid_argument("unsupported run config version");
  f.get("seed", c.seed);
  f.get("frames", c.frames);
  f.get("warmup", c.warmup);
  f.get("scenario", c.scenario);
  if (const json* n = f.child("network")) read_network(*n, c.network);
  f.get("cache", c.cache);
  if (const json* p = f.child("policy")) read_policy(*p, c.policy);
  if (const json* s = f.child("scene")) read_scene(*s, c.scene);
  f.get("tau_sweep", c.tau_sweep);
  if (const json* a = f.child("ablation")) {
    Fields g(*a, "ablation");
    g.get("unet_depth", c.ablation.unet_depth);
    g.get("unetpp_depth", c.ablation.unetpp_depth);
    g.finish();
  }
  if (const json* nh = f.child("null_hypothesis")) {
    Fields g(*nh, "null_hypothesis");
    g.get("noise_scales", c.null_hypothesis.noise_scales);
    g.finish();
  }
  if (const json* sr = f.child("superres")) {
    Fields g(*sr, "superres");
    g.get("large_scale", c.superres.large_scale);
    g.get("small_scale", c.superres.small_scale);
    g.get("output_height", c.superres.output_height);
    g.get("output_width", c.superres.output_width);
    g.finish();
  }
  if (const json* m = f.child("memory")) {
    Fields g(*m, "memory");
    if (const json* entries = g.child("entries")) {
      if (!entries->is_array()) throw std::invalid_argument("memory.entries must be an array");
      c.memory.entries.clear();
      for (const json& e : *entries) {
        Fields h(e, "memory.entries[]");
        MemoryEntry entry;
        h.get("name", entry.name);
        h.get("count", entry.count);
        if (const json* s = h.child("shape")) entry.shape = read_shape(*s, "memory.entries[].shape");
        h.finish();
        c.memory.entries.push_back(entry);
      }
    }
    g.finish();
  }
  f.get("output_dir", c.output_dir);
  f.finish();
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string to_json(const RunConfig& c) {
  json overrides = json::object();
  if (c.policy.n) overrides["n"] = *c.policy.n;
  if (c.policy.tau) overrides["tau"] = *c.policy.tau;
  if (c.policy.c) overrides["c"] = *c.policy.c;
  if (c.policy.p) overrides["p"] = *c.policy.p;
  if (c.policy.refreshes) overrides["refreshes"] = *c.policy.refreshes;
  json entries = json::array();
  for (const MemoryEntry& e : c.memory.entries) {
    entries.push_back({{"name", e.name},
                       {"count", e.count},
                       {"shape", {e.shape.channels, e.shape.height, e.shape.width}}});
  }
  const NetworkConfig& n = c.network;
  json doc{{"version", c.version},
           {"seed", c.seed},
           {"frames", c.frames},
           {"warmup", c.warmup},
           {"scenario", c.scenario},
           {"network",
            {{"type", n.type},
             {"depth", n.depth},
             {"base_channels", n.base_channels},
             {"input_channels", n.input_channels},
             {"output_channels", n.output_channels},
             {"height", n.height},
             {"width", n.width}}},
           {"cache", c.cache},
           {"policy", {{"preset", c.policy.preset}, {"overrides", overrides}}},
           {"scene", scene_json(c.scene)},
           {"tau_sweep", c.tau_sweep},
           {"ablation", {{"unet_depth", c.ablation.unet_depth}, {"unetpp_depth", c.ablation.unetpp_depth}}},
           {"null_hypothesis", {{"noise_scales", c.null_hypothesis.noise_scales}}},
           {"superres",
            {{"large_scale", c.superres.large_scale},
             {"small_scale", c.superres.small_scale},
             {"output_height", c.superres.output_height},
             {"output_width", c.superres.output_width}}},
           {"memory", {{"entries", entries}}},
           {"output_dir", c.output_dir}};
  return doc.dump(2);
}

void validate(const RunConfig& c) {
  if (c.version != 1) throw std::invalid_argument("unsupported run config version");
  if (c.frames < 1) throw std::invalid_argument("frames must be >= 1");
  if (c.warmup < 0 || c.warmup >= c.frames) {
    throw std::invalid_argument("warmup must be in [0, frames)");
  }
  const auto names = scenario_names();
  if (c.scenario != "all" && std::find(names.begin(), names.end(), c.scenario) == names.end()) {
    throw std::invalid_argument("unknown scenario '" + c.scenario + "'");
  }
  const auto presets = policy_preset_names();
  if (std::find(presets.begin(), presets.end(), c.policy.preset) == presets.end()) {
    throw std::invalid_argument("unknown policy preset '" + c.policy.preset + "'");
  }
  if (c.scene.pan_speed < 0.0) throw std::invalid_argument("scene.pan_speed must be >= 0");
  for (const PanSegment& p : c.scene.pan_schedule) {
    if (p.frames < 1 || p.speed < 0.0) {
      throw std::invalid_argument("pan_schedule segments need frames >= 1 and speed >= 0");
    }
  }
  if (c.tau_sweep.empty()) throw std::invalid_argument("tau_sweep must not be empty");
  for (double s : c.null_hypothesis.noise_scales) {
    if (!(s >= 0.0)) throw std::invalid_argument("noise scales must be >= 0");
  }
  if (c.superres.small_scale >= c.superres.large_scale) {
    throw std::invalid_argument("superres.small_scale must be below large_scale");
  }
  for (const MemoryEntry& e : c.memory.entries) {
    if (e.count < 0) throw std::invalid_argument("memory entry count must be >= 0");
  }
  // Builds the network and policy once so bad dimensions surface early.
  build_network(c);
  validate(build_policy(c));
}

NetworkSpec build_network(const RunConfig& c) {
  const NetworkConfig& n = c.network;
  const Shape input{n.input_channels, n.height, n.width};
  NetworkSpec spec = [&] {
    if (n.type == "unet" || n.type == "unetpp") {
      UNetOptions o{n.depth, n.base_channels, input, n.output_channels, c.seed};
      return n.type == "unet" ? build_unet(o) : build_unetpp(o);
    }
    if (n.type == "superres") {
      SuperResOptions o;
      o.low_res_input = input;
      o.scale = c.superres.small_scale;
      o.output_channels = n.output_channels;
      o.seed = c.seed;
      return build_superres_network(o);
    }
    throw std::invalid_argument("unknown network type '" + n.type + "'");
  }();

  const std::string& label = c.cache;
  if (label == "default") return spec;
  if (label == "none") return spec.with_cache_config(no_cache_config(spec));
  if (label.rfind("level", 0) == 0) {
    int level = 0;
    try {
      level = std::stoi(label.substr(5));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad cache label '" + label + "'");
    }
    return spec.with_cache_config(unet_level_config(spec, level));
  }
  if (label == "config_a") return spec.with_cache_config(unetpp_config_a(spec));
  if (label == "config_b") return spec.with_cache_config(unetpp_config_b(spec));
  if (label == "multibranch") return spec;
  throw std::invalid_argument("unknown cache label '" + label + "'");
}

RefreshPolicy build_policy(const RunConfig& c) {
  RefreshPolicy policy = make_policy(c.policy.preset, c.frames);
  const PolicyConfig& o = c.policy;
  auto reject = [](const char* key, const char* kind) {
    throw std::invalid_argument(std::string("policy override '") + key + "' does not apply to " + kind);
  };
  if (auto* p = std::get_if<EveryN>(&policy)) {
    if (o.tau || o.c || o.p || o.refreshes) reject("tau/c/p/refreshes", "every-N");
    if (o.n) p->n = *o.n;
  } else if (auto* p = std::get_if<NonLinear>(&policy)) {
    if (o.n || o.tau) reject("n/tau", "non-linear");
    if (o.c) p->c = *o.c;
    if (o.p) p->p = *o.p;
    if (o.refreshes) p->refreshes = *o.refreshes;
  } else if (auto* p = std::get_if<DeltaSmape>(&policy)) {
    if (o.n || o.c || o.p || o.refreshes) reject("n/c/p/refreshes", "frame-delta");
    if (o.tau) p->tau = *o.tau;
  } else if (auto* p = std::get_if<MotionThreshold>(&policy)) {
    if (o.n || o.c || o.p || o.refreshes) reject("n/c/p/refreshes", "motion");
    if (o.tau) p->tau = *o.tau;
  }
  return policy;
}

SceneConfig scene_for(const RunConfig& c) {
  SceneConfig s = c.scene;
  s.seed = c.seed;
  s.channels = c.network.input_channels;
  s.height = c.network.height;
  s.width = c.network.width;
  return s;
}

}  // namespace reframe
