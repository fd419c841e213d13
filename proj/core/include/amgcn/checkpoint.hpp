#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "amgcn/config.hpp"
#include "amgcn/model.hpp"

namespace amgcn {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  ModelParams params;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// JSON document:
//   {"format": "amgcn-checkpoint", "version": 1, "config": {...},
//    "shape": {...}, "tensors": [{"name", "rows", "cols", "values"}...]}
// Values are written in shortest round-trip form, so reading back is exact.
std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace amgcn
