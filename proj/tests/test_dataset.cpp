#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lightcorners/annotations.hpp"
#include "lightcorners/dataset.hpp"
#include "lightcorners/errors.hpp"
#include "lightcorners/metrics.hpp"
#include "lightcorners/split.hpp"
#include "lightcorners/synth.hpp"
#include "support.hpp"

using namespace lightcorners;

namespace {

std::vector<LightAnnotation> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_annotations(in, "test.jsonl");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const char* kRecord =
    R"({"image": "a.ppm", "vehicle_box": [10, 10, 90, 60], "light_type": "RL", "center": [30, 40], )"
    R"("corners": [[25, 35], null, [35, 45], [25, 45]]})";

std::vector<LightAnnotation> balanced(std::size_t per_type) {
  std::vector<LightAnnotation> out;
  for (std::size_t i = 0; i < per_type; ++i) {
    for (LightType t : kLightTypes) {
      LightAnnotation a;
      a.image = "img" + std::to_string(i) + ".ppm";
      a.vehicle = {0, 0, 10, 10};
      a.light_type = t;
      a.center = {5, 5};
      a.corners[0] = Point{4, 4};
      out.push_back(a);
    }
  }
  return out;
}

SynthConfig small_synth() {
  SynthConfig cfg;
  cfg.n_scenes = 12;
  return cfg;
}

}  // namespace

TEST_CASE("annotation loader examples") {
  CHECK(parse("").empty());
  CHECK(parse("\n\n").empty());
  const auto one = parse(kRecord);
  REQUIRE(one.size() == 1);
  CHECK(one[0].visible_count() == 3);
  CHECK(one[0].corners[0].has_value());
  CHECK_FALSE(one[0].corners[1].has_value());
  CHECK(one[0].light_type == LightType::RearLeft);
  CHECK(one[0].vehicle == VehicleBox{10, 10, 90, 60});
}

TEST_CASE("annotation loader rejections carry line numbers") {
  const std::string good = std::string(kRecord) + "\n";
  CHECK(error_of(good + "{not json\n").find("test.jsonl:2") != std::string::npos);
  const std::string all_null =
      R"({"image": "a.ppm", "vehicle_box": [10, 10, 90, 60], "light_type": "RL", "center": [30, 40], "corners": [null, null, null, null]})";
  CHECK(error_of(good + good + all_null).find("test.jsonl:3") != std::string::npos);
  const std::string outside =
      R"({"image": "a.ppm", "vehicle_box": [10, 10, 90, 60], "light_type": "RL", "center": [95, 40], "corners": [[25, 35], null, null, null]})";
  CHECK(error_of(outside).find("test.jsonl:1") != std::string::npos);
  CHECK_FALSE(error_of(R"({"image": "a.ppm"})").empty());
  const std::string bad_type =
      R"({"image": "a.ppm", "vehicle_box": [10, 10, 90, 60], "light_type": "XX", "center": [30, 40], "corners": [[25, 35], null, null, null]})";
  CHECK_FALSE(error_of(bad_type).empty());
  const std::string extra =
      R"({"image": "a.ppm", "vehicle_box": [10, 10, 90, 60], "light_type": "RL", "center": [30, 40], "corners": [[25, 35], null, null, null], "note": 1})";
  CHECK_FALSE(error_of(extra).empty());
  try {
    parse(all_null);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
}

TEST_CASE("property: annotation serialization round trips") {
  Rng rng(1);
  std::vector<LightAnnotation> records;
  for (int i = 0; i < 300; ++i) records.push_back(testing::random_annotation(rng, 640, 480));
  const std::string text = serialize_annotations(records);
  const auto back = parse(text);
  CHECK(back == records);
  CHECK(serialize_annotations(back) == text);
}

TEST_CASE("annotation files resolve images relative to their directory") {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "images");
  auto records = parse(kRecord);
  records[0].image = "images/a.ppm";
  save_annotations(dir / "ann.jsonl", records);
  LoadOptions strict;
  strict.check_images = true;
  CHECK_THROWS_AS(load_annotations(dir / "ann.jsonl", strict), Error);
  write_image(dir / "images/a.ppm", Image(100, 80));
  CHECK(load_annotations(dir / "ann.jsonl", strict) == records);
  CHECK_THROWS_AS(load_annotations(dir / "missing.jsonl"), Error);
}

TEST_CASE("split examples") {
  const auto records = balanced(25);
  const auto s = split(records, 0.5, 3);
  CHECK(s.train.size() == 50);
  CHECK(s.test.size() == 50);
  for (LightType t : kLightTypes) {
    std::size_t n_test = 0;
    for (std::size_t i : s.test) n_test += records[i].light_type == t;
    CHECK(n_test >= 12);
    CHECK(n_test <= 13);
  }
  const auto again = split(records, 0.5, 3);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  CHECK_FALSE(split(records, 0.5, 4).test == s.test);
  CHECK_THROWS_AS(split(records, 0.0, 1), Error);
  CHECK_THROWS_AS(split(records, 1.0, 1), Error);
}

TEST_CASE("split puts a type with fewer than two records in train with a warning") {
  auto records = balanced(10);
  LightAnnotation lone = records[0];
  lone.light_type = LightType::FrontRight;
  std::vector<LightAnnotation> mixed;
  for (const auto& r : records) {
    if (r.light_type != LightType::FrontRight) mixed.push_back(r);
  }
  mixed.push_back(lone);
  const auto s = split(mixed, 0.7, 1);
  CHECK(s.warnings.size() == 1);
  CHECK(std::find(s.train.begin(), s.train.end(), mixed.size() - 1) != s.train.end());
}

TEST_CASE("property: split is a stratified partition") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LightAnnotation> records;
    const int n = testing::uniform_int(rng, 0, 120);
    for (int i = 0; i < n; ++i) {
      auto a = balanced(1)[0];
      a.light_type = kLightTypes[testing::uniform_int(rng, 0, 3)];
      records.push_back(a);
    }
    const double fraction = testing::uniform(rng, 0.05, 0.95);
    const auto s = split(records, fraction, rng());
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (std::size_t i : s.test) REQUIRE(all.insert(i).second);
    REQUIRE(all.size() == records.size());
    for (LightType t : kLightTypes) {
      std::size_t total = 0, test = 0;
      for (std::size_t i = 0; i < records.size(); ++i) total += records[i].light_type == t;
      for (std::size_t i : s.test) test += records[i].light_type == t;
      if (total < 2) continue;
      REQUIRE(std::abs(double(test) - (1 - fraction) * double(total)) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("synthetic generation is deterministic per seed") {
  const auto a = generate_synthetic(small_synth());
  const auto b = generate_synthetic(small_synth());
  CHECK(a.images == b.images);
  CHECK(serialize_annotations(a.annotations) == serialize_annotations(b.annotations));
  SynthConfig other = small_synth();
  other.seed = 1;
  const auto c = generate_synthetic(other);
  CHECK_FALSE(c.images == a.images);
  CHECK(generate_scene(small_synth(), 5).image == a.images[5]);
}

TEST_CASE("synthetic annotations are valid and balanced") {
  SynthConfig cfg;  // defaults
  const auto data = generate_synthetic(cfg);
  const auto counts = count_by_type(data.annotations);
  std::size_t lo = 1u << 30, hi = 0;
  for (const auto& [type, n] : counts) {
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  CHECK(hi - lo <= 1);
  for (const auto& a : data.annotations) {
    CHECK_NOTHROW(validate(a, cfg.width, cfg.height));
  }
}

TEST_CASE("synthetic ground truth matches the painted light pixels") {
  SynthConfig cfg = small_synth();
  cfg.occlusion = 0;
  const auto data = generate_synthetic(cfg);
  std::size_t scene = 0;
  for (const auto& a : data.annotations) {
    while (data.image_names[scene] != a.image) ++scene;
    const Image& img = data.images[scene];
    std::array<Point, kCorners> quad{};
    for (int j = 0; j < kCorners; ++j) {
      REQUIRE(a.corners[j].has_value());
      quad[j] = *a.corners[j];
    }
    const Box box = corner_box(a.corners);
    std::vector<std::array<int, 3>> painted;
    for (int y = int(box.y_min) - 2; y <= int(box.y_max) + 2; ++y) {
      for (int x = int(box.x_min) - 2; x <= int(box.x_max) + 2; ++x) {
        if (!quad_covers_pixel(quad, x, y)) continue;
        painted.push_back({img.at(x, y)[0], img.at(x, y)[1], img.at(x, y)[2]});
      }
    }
    REQUIRE(!painted.empty());
    // Extremal painted pixels touch each annotated corner to within 1 px.
    for (const auto& corner : quad) {
      double best = 1e9;
      for (int y = int(box.y_min) - 2; y <= int(box.y_max) + 2; ++y) {
        for (int x = int(box.x_min) - 2; x <= int(box.x_max) + 2; ++x) {
          if (!quad_covers_pixel(quad, x, y)) continue;
          const double dx = std::max({x - corner.x, 0.0, corner.x - (x + 1)});
          const double dy = std::max({y - corner.y, 0.0, corner.y - (y + 1)});
          best = std::min(best, std::hypot(dx, dy));
        }
      }
      CHECK(best < 1.0);
    }
    // Painted pixels carry the light hue.
    std::size_t hue_ok = 0;
    const bool front = a.light_type == LightType::FrontLeft || a.light_type == LightType::FrontRight;
    for (const auto& p : painted) {
      hue_ok += front ? (p[0] >= 190 && p[1] >= 190 && p[2] >= 155) : (p[0] >= 160 && p[0] > p[2] + 90);
    }
    CHECK(hue_ok == painted.size());
  }
}

TEST_CASE("irregularity 0 without occlusion gives axis-aligned rectangles") {
  SynthConfig cfg = small_synth();
  cfg.irregularity = 0;
  cfg.occlusion = 0;
  for (const auto& a : generate_synthetic(cfg).annotations) {
    REQUIRE(a.visible_count() == 4);
    const auto& c = a.corners;
    CHECK(c[0]->y == c[1]->y);
    CHECK(c[2]->y == c[3]->y);
    CHECK(c[0]->x == c[3]->x);
    CHECK(c[1]->x == c[2]->x);
    const Box box = corner_box(c);
    const double w = c[1]->x - c[0]->x, h = c[3]->y - c[0]->y;
    const double bw = box.x_max - box.x_min, bh = box.y_max - box.y_min;
    CHECK(bw == w);
    CHECK(bh == h);
    CHECK(std::sqrt(bw * bw + bh * bh) == std::sqrt(w * w + h * h));
  }
}

TEST_CASE("synthetic config guards") {
  SynthConfig cfg;
  cfg.occlusion = 1.0;
  CHECK_THROWS_AS(generate_synthetic(cfg), Error);
  cfg = {};
  cfg.light_max = 300;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.vehicles_min = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.n_scenes = 0;
  CHECK(generate_synthetic(cfg).annotations.empty());
}

TEST_CASE("occlusion hides corners but never all of them") {
  SynthConfig cfg = small_synth();
  cfg.occlusion = 0.6;
  std::size_t hidden = 0;
  for (const auto& a : generate_synthetic(cfg).annotations) {
    CHECK(a.visible_count() >= 1);
    hidden += 4 - a.visible_count();
  }
  CHECK(hidden > 0);
}

TEST_CASE("front-right imbalance knob") {
  SynthConfig cfg;
  cfg.front_right_keep = 0.25;
  const auto counts = count_by_type(generate_synthetic(cfg).annotations);
  CHECK(counts.at(LightType::FrontRight) < counts.at(LightType::FrontLeft) / 2);
}

TEST_CASE("manifest round trip and frozen noise") {
  const auto records = balanced(20);
  NoiseConfig noise;
  const auto m = make_manifest(records, 0.8, 5, noise, 99);
  CHECK(m.test.size() == 16);
  CHECK(m.test_noise.size() == m.test.size());
  for (std::size_t k = 0; k < m.test.size(); ++k) CHECK(m.test_noise[k] == frozen_noise(noise, 99, m.test[k]));
  const auto back = parse_manifest(manifest_json(m));
  CHECK(back.train == m.train);
  CHECK(back.test == m.test);
  CHECK(back.test_noise == m.test_noise);
  CHECK(back.counts == m.counts);
  CHECK(manifest_json(back) == manifest_json(m));
  CHECK(make_manifest(records, 0.8, 5, noise, 99).test_noise == m.test_noise);

  auto broken = m;
  broken.test.push_back(broken.train.front());
  broken.test_noise.push_back({0, 0});
  CHECK_THROWS_AS(parse_manifest(manifest_json(broken)), Error);
}
