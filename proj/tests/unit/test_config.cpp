#include "amgcn/config.hpp"

#include "amgcn/error.hpp"
#include "doctest.h"

using namespace amgcn;

TEST_CASE("config: variants zero the matching constraint weights") {
  TrainConfig c;
  c.gamma = 0.5;
  c.beta = 0.25;
  CHECK(c.loss_weights().gamma == 0.5);
  c.variant = Variant::WithoutConstraints;
  CHECK(c.loss_weights().gamma == 0.0);
  CHECK(c.loss_weights().beta == 0.0);
  c.variant = Variant::ConsistencyOnly;
  CHECK(c.loss_weights().gamma == 0.5);
  CHECK(c.loss_weights().beta == 0.0);
  c.variant = Variant::DisparityOnly;
  CHECK(c.loss_weights().gamma == 0.0);
  CHECK(c.loss_weights().beta == 0.25);
  for (auto v : {Variant::Full, Variant::WithoutConstraints, Variant::ConsistencyOnly,
                 Variant::DisparityOnly})
    CHECK(parse_variant(to_string(v)) == v);
  CHECK_THROWS_AS((void)parse_variant("none"), Error);
}

TEST_CASE("config: channel masks parse and format") {
  CHECK(parse_channels("all") == ChannelMask::all());
  CHECK(parse_channels("topology") == ChannelMask::topology_only());
  CHECK(parse_channels("feature") == ChannelMask::feature_only());
  CHECK(parse_channels("t,f") == ChannelMask{{true, false, true}});
  CHECK(parse_channels(format_channels(ChannelMask{{false, true, true}})) ==
        ChannelMask{{false, true, true}});
  CHECK_THROWS_AS((void)parse_channels("x"), Error);
  CHECK_THROWS_AS((void)parse_channels(""), Error);
}

TEST_CASE("config: published presets") {
  CHECK(published_presets().size() == 18);
  const auto acm = find_preset("ACM-20");
  REQUIRE(acm.has_value());
  CHECK(acm->nhid1 == 768);
  CHECK(acm->nhid2 == 256);
  CHECK(acm->lr == 0.0005);
  CHECK(acm->weight_decay == 5e-4);
  CHECK(acm->k == 5);
  CHECK(acm->gamma == 0.001);
  CHECK(acm->beta == 1e-8);
  CHECK(acm->labels_per_class == 20);
  const auto cora = find_preset("corafull-40");
  REQUIRE(cora.has_value());
  CHECK(cora->nhid2 == 32);
  CHECK(cora->gamma == 0.00001);
  CHECK(*find_preset("synthetic") == synthetic_defaults());
  CHECK_FALSE(find_preset("pubmed-20").has_value());
}

TEST_CASE("config: key=value text with comments and aliases") {
  const TrainConfig c = parse_config_text(
      "# comment\nnhid1 = 32\nepoch_max=12  # trailing\nweight-decay=0.001\nmetric=heat\n"
      "heat_t=3\nvariant=c\nchannels=t,c\nce_mean=true\n",
      TrainConfig{});
  CHECK(c.nhid1 == 32);
  CHECK(c.epochs == 12);
  CHECK(c.weight_decay == 0.001);
  CHECK(c.metric.kind == SimilarityKind::HeatKernel);
  CHECK(c.metric.t == 3.0);
  CHECK(c.variant == Variant::ConsistencyOnly);
  CHECK(c.channels == ChannelMask{{true, true, false}});
  CHECK(c.ce_mean);
}

TEST_CASE("config: JSON text and round trip") {
  TrainConfig c = parse_config_text(R"({"lr": 0.02, "k": 4, "attn_per_channel": true})",
                                    TrainConfig{});
  CHECK(c.lr == 0.02);
  CHECK(c.k == 4);
  CHECK(c.attn_per_channel);
  c.seed = 77;
  c.channels = ChannelMask::feature_only();
  CHECK(config_from_json(config_to_json(c)) == c);
}

TEST_CASE("config: invalid input is reported") {
  TrainConfig c;
  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), Error);
  CHECK_THROWS_AS(apply_setting(c, "k", "seven"), Error);
  CHECK_THROWS_AS((void)parse_config_text("dropout=1.5", TrainConfig{}), Error);
  CHECK_THROWS_AS((void)parse_config_text("just words", TrainConfig{}), Error);
  CHECK_THROWS_AS((void)parse_config_text("{bad json", TrainConfig{}), Error);
  try {
    (void)load_config_file("/nonexistent/amgcn.cfg");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFile);
  }
}
