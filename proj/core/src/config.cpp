#include "amgcn/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "amgcn/error.hpp"

namespace amgcn {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::InvalidInput,
              "config: invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

double to_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) {
    bad_value(key, value);
  }
  return v;
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  const std::string v = lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value);
}

TrainConfig preset(std::size_t nhid1, std::size_t nhid2, double lr, double wd, std::size_t epochs,
                   std::size_t k, double gamma, double beta, std::size_t lpc) {
  TrainConfig c;
  c.nhid1 = nhid1;
  c.nhid2 = nhid2;
  c.dropout = 0.5;
  c.lr = lr;
  c.weight_decay = wd;
  c.epochs = epochs;
  c.k = k;
  c.gamma = gamma;
  c.beta = beta;
  c.labels_per_class = lpc;
  c.test_size = 1000;
  return c;
}

std::string json_scalar_to_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  throw Error(ErrorCode::InvalidInput, "config: unsupported JSON value " + v.dump());
}

}  // namespace

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::WithoutConstraints: return "wo";
    case Variant::ConsistencyOnly: return "c";
    case Variant::DisparityOnly: return "d";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  const std::string v = lower(text);
  if (v == "full") return Variant::Full;
  if (v == "wo" || v == "w/o") return Variant::WithoutConstraints;
  if (v == "c") return Variant::ConsistencyOnly;
  if (v == "d") return Variant::DisparityOnly;
  throw Error(ErrorCode::InvalidInput, "unknown variant '" + std::string(text) + "' (full|wo|c|d)");
}

SimilarityMetric parse_metric(std::string_view text, double heat_t) {
  const std::string v = lower(text);
  if (v == "cosine") return SimilarityMetric::cosine();
  if (v == "heat") return SimilarityMetric::heat(heat_t);
  throw Error(ErrorCode::InvalidInput, "unknown metric '" + std::string(text) + "' (cosine|heat)");
}

std::string_view to_string(SimilarityKind kind) noexcept {
  return kind == SimilarityKind::Cosine ? "cosine" : "heat";
}

ChannelMask parse_channels(std::string_view text) {
  const std::string v = lower(text);
  if (v == "all") return ChannelMask::all();
  if (v == "topology") return ChannelMask::topology_only();
  if (v == "feature") return ChannelMask::feature_only();
  if (v == "common") return ChannelMask{{false, true, false}};
  ChannelMask mask{{false, false, false}};
  std::istringstream in(v);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (tok == "t") {
      mask.active[index_of(Channel::Topology)] = true;
    } else if (tok == "c") {
      mask.active[index_of(Channel::Common)] = true;
    } else if (tok == "f") {
      mask.active[index_of(Channel::Feature)] = true;
    } else {
      throw Error(ErrorCode::InvalidInput, "unknown channel '" + tok + "' (t, c, f)");
    }
  }
  require(mask.any(), ErrorCode::InvalidInput, "channel list selects nothing");
  return mask;
}

std::string format_channels(const ChannelMask& mask) {
  if (mask == ChannelMask::all()) return "all";
  std::string out;
  const char names[] = {'t', 'c', 'f'};
  for (std::size_t e = 0; e < kNumChannels; ++e) {
    if (!mask.active[e]) continue;
    if (!out.empty()) out += ',';
    out += names[e];
  }
  return out;
}

LossWeights TrainConfig::loss_weights() const {
  LossWeights w{gamma, beta};
  switch (variant) {
    case Variant::Full: break;
    case Variant::WithoutConstraints: w = {0.0, 0.0}; break;
    case Variant::ConsistencyOnly: w.beta = 0.0; break;
    case Variant::DisparityOnly: w.gamma = 0.0; break;
  }
  return w;
}

ModelShape TrainConfig::model_shape(std::size_t input_dim, std::size_t num_classes) const {
  ModelShape s;
  s.input_dim = input_dim;
  s.nhid1 = nhid1;
  s.nhid2 = nhid2;
  s.attn_hidden = attn_hidden == 0 ? nhid2 : attn_hidden;
  s.num_classes = num_classes;
  s.attn_per_channel = attn_per_channel;
  return s;
}

void TrainConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorCode::InvalidInput, "config: " + what);
  };
  check(nhid1 > 0 && nhid2 > 0, "nhid1 and nhid2 must be positive");
  check(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  check(lr > 0.0 && std::isfinite(lr), "lr must be positive");
  check(weight_decay >= 0.0 && std::isfinite(weight_decay), "weight_decay must be >= 0");
  check(epochs > 0, "epochs must be positive");
  check(k >= 1, "k must be >= 1");
  check(gamma >= 0.0 && std::isfinite(gamma), "gamma must be >= 0");
  check(beta >= 0.0 && std::isfinite(beta), "beta must be >= 0");
  check(metric.kind == SimilarityKind::Cosine || metric.t > 0.0, "heat_t must be positive");
  check(channels.any(), "at least one channel must be active");
  check(labels_per_class > 0, "labels_per_class must be positive");
}

TrainConfig synthetic_defaults() {
  TrainConfig c;
  // A short, gentle schedule keeps the topology channel from memorizing the
  // 60 labels. A wide feature graph (k = 300 of 900 nodes) stays class-pure
  // on Gaussian features but averages random features toward a constant, so
  // attention can tell an informative feature graph from a useless one.
  c.epochs = 50;
  c.lr = 0.005;
  c.k = 300;
  return c;
}

const std::vector<Preset>& published_presets() {
  static const std::vector<Preset> presets = [] {
    std::vector<Preset> p;
    auto add = [&](const char* name, std::size_t lpc, std::size_t h1, std::size_t h2, double lr,
                   double wd, std::size_t epochs, std::size_t k, double gamma, double beta) {
      p.push_back({name, lpc, preset(h1, h2, lr, wd, epochs, k, gamma, beta, lpc)});
    };
    add("citeseer", 20, 768, 256, 0.0005, 5e-3, 25, 7, 0.001, 5e-10);
    add("citeseer", 40, 768, 128, 0.0005, 5e-3, 25, 7, 0.001, 5e-8);
    add("citeseer", 60, 768, 128, 0.0005, 5e-3, 25, 7, 0.001, 5e-8);
    add("uai2010", 20, 512, 128, 0.0005, 5e-4, 50, 5, 0.001, 1e-9);
    add("uai2010", 40, 512, 128, 0.0005, 5e-4, 70, 5, 0.01, 1e-9);
    add("uai2010", 60, 512, 128, 0.0005, 1e-5, 70, 5, 0.01, 1e-9);
    add("acm", 20, 768, 256, 0.0005, 5e-4, 20, 5, 0.001, 1e-8);
    add("acm", 40, 768, 256, 0.0005, 5e-4, 20, 5, 0.001, 1e-8);
    add("acm", 60, 768, 256, 0.0001, 6e-4, 30, 5, 0.001, 1e-8);
    add("blogcatalog", 20, 512, 128, 0.0002, 1e-5, 55, 5, 0.001, 5e-8);
    add("blogcatalog", 40, 512, 128, 0.0005, 5e-4, 40, 5, 0.001, 5e-8);
    add("blogcatalog", 60, 512, 128, 0.0005, 8e-4, 50, 5, 0.01, 5e-8);
    add("flickr", 20, 512, 128, 0.0003, 5e-4, 60, 5, 0.01, 1e-10);
    add("flickr", 40, 512, 128, 0.0005, 1e-5, 40, 5, 0.01, 1e-10);
    add("flickr", 60, 512, 128, 0.0005, 5e-4, 40, 5, 0.01, 1e-10);
    add("corafull", 20, 512, 32, 0.001, 5e-4, 300, 6, 0.0001, 1e-10);
    add("corafull", 40, 512, 32, 0.001, 5e-4, 300, 6, 0.00001, 1e-10);
    add("corafull", 60, 512, 32, 0.001, 5e-4, 300, 6, 0.0001, 1e-10);
    return p;
  }();
  return presets;
}

std::optional<TrainConfig> find_preset(std::string_view name) {
  const std::string key = lower(name);
  if (key == "synthetic") return synthetic_defaults();
  for (const auto& p : published_presets()) {
    if (key == p.dataset + "-" + std::to_string(p.labels_per_class)) return p.config;
  }
  return std::nullopt;
}

void apply_setting(TrainConfig& c, std::string_view raw_key, std::string_view raw_value) {
  std::string key = lower(trim(raw_key));
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw_value);
  if (key == "nhid1") {
    c.nhid1 = to_u64(key, value);
  } else if (key == "nhid2") {
    c.nhid2 = to_u64(key, value);
  } else if (key == "attn_hidden") {
    c.attn_hidden = to_u64(key, value);
  } else if (key == "dropout") {
    c.dropout = to_double(key, value);
  } else if (key == "lr") {
    c.lr = to_double(key, value);
  } else if (key == "weight_decay") {
    c.weight_decay = to_double(key, value);
  } else if (key == "epochs" || key == "epoch_max") {
    c.epochs = to_u64(key, value);
  } else if (key == "k") {
    c.k = to_u64(key, value);
  } else if (key == "metric") {
    c.metric = parse_metric(value, c.metric.t);
  } else if (key == "heat_t") {
    c.metric.t = to_double(key, value);
  } else if (key == "gamma") {
    c.gamma = to_double(key, value);
  } else if (key == "beta") {
    c.beta = to_double(key, value);
  } else if (key == "seed") {
    c.seed = to_u64(key, value);
  } else if (key == "variant") {
    c.variant = parse_variant(value);
  } else if (key == "ce_mean") {
    c.ce_mean = to_bool(key, value);
  } else if (key == "attn_per_channel") {
    c.attn_per_channel = to_bool(key, value);
  } else if (key == "decay_channel_weights_only") {
    c.decay_channel_weights_only = to_bool(key, value);
  } else if (key == "channels") {
    c.channels = parse_channels(value);
  } else if (key == "labels_per_class") {
    c.labels_per_class = to_u64(key, value);
  } else if (key == "test_size") {
    c.test_size = to_u64(key, value);
  } else {
    throw Error(ErrorCode::InvalidInput, "config: unknown key '" + std::string(raw_key) + "'");
  }
}

TrainConfig parse_config_text(std::string_view text, TrainConfig base) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidInput, std::string("config: malformed JSON: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) apply_setting(base, key, json_scalar_to_text(value));
  } else {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::InvalidInput,
                    "config line " + std::to_string(line_no) + ": expected key=value");
      }
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    }
  }
  base.validate();
  return base;
}

TrainConfig load_config_file(const std::filesystem::path& file, TrainConfig base) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::MissingFile, "config file not found: " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), std::move(base));
}

std::string config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["nhid1"] = c.nhid1;
  j["nhid2"] = c.nhid2;
  j["attn_hidden"] = c.attn_hidden;
  j["dropout"] = c.dropout;
  j["lr"] = c.lr;
  j["weight_decay"] = c.weight_decay;
  j["epochs"] = c.epochs;
  j["k"] = c.k;
  j["metric"] = std::string(to_string(c.metric.kind));
  j["heat_t"] = c.metric.t;
  j["gamma"] = c.gamma;
  j["beta"] = c.beta;
  j["seed"] = c.seed;
  j["variant"] = std::string(to_string(c.variant));
  j["ce_mean"] = c.ce_mean;
  j["attn_per_channel"] = c.attn_per_channel;
  j["decay_channel_weights_only"] = c.decay_channel_weights_only;
  j["channels"] = format_channels(c.channels);
  j["labels_per_class"] = c.labels_per_class;
  j["test_size"] = c.test_size;
  return j.dump(2);
}

TrainConfig config_from_json(std::string_view json) {
  return parse_config_text(json, TrainConfig{});
}

}  // namespace amgcn
