#include <doctest.h>

#include "lightcorners/config.hpp"
#include "lightcorners/errors.hpp"
#include "support.hpp"

using namespace lightcorners;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text, "cfg");
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a config error");
  return ErrorKind::InvalidInput;
}

}  // namespace

TEST_CASE("empty config gives defaults") {
  CHECK(parse_config("") == ExperimentConfig{});
  CHECK(parse_config("# only a comment\n\n") == ExperimentConfig{});
}

TEST_CASE("config keys parse into fields") {
  const auto cfg = parse_config(
      "crop.size = 64\n"
      "model.architecture = conv-gap:S=64:8,16\n"
      "crop.context = scene  # trailing comment\n"
      "noise.p_zero = 0.25\n"
      "train.lr = 0.0005\n"
      "train.augment = true\n"
      "train.flip_routing = same\n"
      "split.train_fraction = 0.7\n"
      "synth.scenes = 7\n"
      "eval.iou_thresholds = 0.3, 0.6, 0.9\n");
  CHECK(cfg.crop.size == 64);
  CHECK(cfg.crop.mode == ContextMode::Scene);
  CHECK(cfg.noise.p_zero == 0.25);
  CHECK(cfg.train.lr == 0.0005);
  CHECK(cfg.train.augment);
  CHECK(cfg.train.flip_routing == FlipRouting::Same);
  CHECK(cfg.split.train_fraction == 0.7);
  CHECK(cfg.synth.n_scenes == 7);
  CHECK(cfg.eval.iou_thresholds == std::vector<double>{0.3, 0.6, 0.9});
}

TEST_CASE("config rejections") {
  CHECK(kind_of("no.such.key = 1\n") == ErrorKind::Config);
  CHECK(kind_of("train.epochs = many\n") == ErrorKind::Config);
  CHECK(kind_of("train.epochs = 2.5\n") == ErrorKind::Config);
  CHECK(kind_of("train.augment = yes\n") == ErrorKind::Config);
  CHECK(kind_of("train.lr = 1\ntrain.lr = 2\n") == ErrorKind::Config);
  CHECK(kind_of("just words\n") == ErrorKind::Config);
  CHECK(kind_of("crop.size = 64\n") == ErrorKind::Config);  // architecture still expects 128
  CHECK(kind_of("split.train_fraction = 1\n") == ErrorKind::Config);
  CHECK(kind_of("train.swa_start_epoch = 30\n") == ErrorKind::Config);
  try {
    parse_config("\n\ntrain.epochs = x\n", "exp.cfg");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("exp.cfg:3") != std::string::npos);
  }
}

TEST_CASE("property: config serialization round trips") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    ExperimentConfig cfg;
    cfg.train.lr = testing::uniform(rng, 0, 0.1);
    cfg.train.weight_decay = testing::uniform(rng, 0, 1e-2);
    cfg.train.seed = rng();
    cfg.train.epochs = testing::uniform_int(rng, 1, 40);
    cfg.train.swa_start_epoch = testing::uniform_int(rng, 1, cfg.train.epochs);
    cfg.train.augment = trial % 2 == 0;
    cfg.noise.sigma = testing::uniform(rng, 0, 10);
    cfg.noise.p_zero = testing::uniform(rng, 0, 1);
    cfg.split.train_fraction = testing::uniform(rng, 0.1, 0.9);
    cfg.synth.seed = rng();
    cfg.eval.iou_thresholds = {testing::uniform(rng, 0.01, 0.99)};
    cfg.data_dir = "data dir " + std::to_string(trial);
    const std::string text = serialize_config(cfg);
    const auto back = parse_config(text);
    REQUIRE(back == cfg);
    REQUIRE(serialize_config(back) == text);
  }
}

TEST_CASE("every key can be set from text") {
  const auto text = serialize_config(ExperimentConfig{});
  for (const auto& key : config_keys()) CHECK(text.find(key + " = ") != std::string::npos);
  ExperimentConfig cfg;
  set_config_value(cfg, "train.epochs", "3");
  CHECK(cfg.train.epochs == 3);
  CHECK_THROWS_AS(set_config_value(cfg, "train.epoch", "3"), Error);
}

TEST_CASE("config files") {
  testing::TempDir dir;
  ExperimentConfig cfg;
  cfg.train.seed = 77;
  save_config(dir / "c.txt", cfg);
  CHECK(load_config(dir / "c.txt") == cfg);
  try {
    load_config(dir / "missing.txt");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}
