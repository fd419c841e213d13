#include "amgcn/checkpoint.hpp"

#include <filesystem>

#include "amgcn/error.hpp"
#include "doctest.h"

using namespace amgcn;

TEST_CASE("checkpoint: JSON and file round trips are exact") {
  for (bool per_channel : {false, true}) {
    TrainConfig cfg;
    cfg.nhid1 = 5;
    cfg.nhid2 = 3;
    cfg.attn_per_channel = per_channel;
    cfg.seed = 99;
    Rng rng(4);
    Checkpoint ckpt{cfg, ModelParams::initialize(cfg.model_shape(7, 4), rng)};
    CHECK(checkpoint_from_json(checkpoint_to_json(ckpt)) == ckpt);
    const auto file = std::filesystem::temp_directory_path() / "amgcn_ckpt_test.json";
    save_checkpoint(ckpt, file);
    CHECK(load_checkpoint(file) == ckpt);
    std::filesystem::remove(file);
  }
}

TEST_CASE("checkpoint: malformed documents are rejected") {
  CHECK_THROWS_AS((void)checkpoint_from_json("{}"), Error);
  CHECK_THROWS_AS((void)checkpoint_from_json("not json"), Error);
  CHECK_THROWS_AS((void)checkpoint_from_json(R"({"format":"other","version":1})"), Error);
  TrainConfig cfg;
  cfg.nhid1 = 2;
  cfg.nhid2 = 2;
  Rng rng(1);
  Checkpoint ckpt{cfg, ModelParams::initialize(cfg.model_shape(3, 2), rng)};
  std::string text = checkpoint_to_json(ckpt);
  const auto pos = text.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 11, "\"version\":9");
  CHECK_THROWS_AS((void)checkpoint_from_json(text), Error);
  try {
    (void)load_checkpoint("/nonexistent/ckpt.json");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFile);
  }
}
