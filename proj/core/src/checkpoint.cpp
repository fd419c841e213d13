#include "amgcn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "amgcn/error.hpp"

namespace amgcn {

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::ordered_json j;
  j["format"] = "amgcn-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config"] = nlohmann::ordered_json::parse(config_to_json(ckpt.config));
  const ModelShape shape = ckpt.params.shape();
  j["shape"] = {{"input_dim", shape.input_dim},     {"nhid1", shape.nhid1},
                {"nhid2", shape.nhid2},             {"attn_hidden", shape.attn_hidden},
                {"num_classes", shape.num_classes}, {"attn_per_channel", shape.attn_per_channel}};
  auto tensors = nlohmann::ordered_json::array();
  for (const auto& t : ckpt.params.tensors()) {
    tensors.push_back({{"name", t.name}, {"values", std::vector<double>(t.values.begin(), t.values.end())}});
  }
  j["tensors"] = std::move(tensors);
  return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  Checkpoint ckpt;
  try {
    const auto j = nlohmann::json::parse(text);
    require(j.at("format").get<std::string>() == "amgcn-checkpoint", ErrorCode::ParseError,
            "checkpoint: unexpected format tag");
    const int version = j.at("version").get<int>();
    require(version == kCheckpointVersion, ErrorCode::ParseError,
            "checkpoint: unsupported version " + std::to_string(version));
    ckpt.config = config_from_json(j.at("config").dump());

    const auto& s = j.at("shape");
    ModelShape shape;
    shape.input_dim = s.at("input_dim").get<std::size_t>();
    shape.nhid1 = s.at("nhid1").get<std::size_t>();
    shape.nhid2 = s.at("nhid2").get<std::size_t>();
    shape.attn_hidden = s.at("attn_hidden").get<std::size_t>();
    shape.num_classes = s.at("num_classes").get<std::size_t>();
    shape.attn_per_channel = s.at("attn_per_channel").get<bool>();
    ckpt.params = ModelParams::zeros(shape);

    const auto& stored = j.at("tensors");
    auto views = ckpt.params.tensors();
    require(stored.size() == views.size(), ErrorCode::ParseError,
            "checkpoint: tensor count does not match the recorded shape");
    for (std::size_t t = 0; t < views.size(); ++t) {
      const auto& entry = stored[t];
      require(entry.at("name").get<std::string>() == views[t].name, ErrorCode::ParseError,
              "checkpoint: expected tensor " + views[t].name);
      const auto values = entry.at("values").get<std::vector<double>>();
      require(values.size() == views[t].values.size(), ErrorCode::ParseError,
              "checkpoint: wrong element count for " + views[t].name);
      std::copy(values.begin(), values.end(), views[t].values.begin());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("checkpoint: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  out << checkpoint_to_json(ckpt) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::MissingFile, "checkpoint not found: " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace amgcn
