#include "lightcorners/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lightcorners/errors.hpp"
#include "lightcorners/noise.hpp"

namespace lightcorners {
namespace {

struct Rgb {
  int r, g, b;
};

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

class Painter {
 public:
  explicit Painter(Image& image) : image_(image) {}

  void fill_rect(double x0, double y0, double x1, double y1, Rgb c) {
    const int px0 = std::max(0, static_cast<int>(std::ceil(x0 - 0.5)));
    const int py0 = std::max(0, static_cast<int>(std::ceil(y0 - 0.5)));
    const int px1 = std::min(image_.width - 1, static_cast<int>(std::floor(x1 - 0.5)));
    const int py1 = std::min(image_.height - 1, static_cast<int>(std::floor(y1 - 0.5)));
    for (int y = py0; y <= py1; ++y) {
      for (int x = px0; x <= px1; ++x) image_.set(x, y, clamp_byte(c.r), clamp_byte(c.g), clamp_byte(c.b));
    }
  }

  void fill_ellipse(double cx, double cy, double rx, double ry, Rgb c) {
    const int x0 = std::max(0, static_cast<int>(cx - rx) - 1), x1 = std::min(image_.width - 1, static_cast<int>(cx + rx) + 1);
    const int y0 = std::max(0, static_cast<int>(cy - ry) - 1), y1 = std::min(image_.height - 1, static_cast<int>(cy + ry) + 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        if (dx * dx + dy * dy <= 1.0) image_.set(x, y, clamp_byte(c.r), clamp_byte(c.g), clamp_byte(c.b));
      }
    }
  }

  // Light body: base color with a vertical brightness ramp.
  void fill_quad(const std::array<Point, kCorners>& quad, Rgb c, double ramp) {
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& p : quad) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y);
      y_hi = std::max(y_hi, p.y);
    }
    for (int y = std::max(0, static_cast<int>(y_lo) - 1); y <= std::min(image_.height - 1, static_cast<int>(y_hi) + 1); ++y) {
      const double shade = 1.0 - ramp * (y + 0.5 - y_lo) / std::max(1.0, y_hi - y_lo);
      for (int x = std::max(0, static_cast<int>(x_lo) - 1); x <= std::min(image_.width - 1, static_cast<int>(x_hi) + 1); ++x) {
        if (quad_covers_pixel(quad, x, y)) image_.set(x, y, clamp_byte(c.r * shade), clamp_byte(c.g * shade), clamp_byte(c.b * shade));
      }
    }
  }

 private:
  Image& image_;
};

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool chance(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

Rgb random_color(Rng& rng, int lo, int hi) { return {uniform_int(rng, lo, hi), uniform_int(rng, lo, hi), uniform_int(rng, lo, hi)}; }

Rgb light_color(LightType type, Rng& rng, bool amber) {
  if (type == LightType::FrontLeft || type == LightType::FrontRight) {
    return {uniform_int(rng, 235, 255), uniform_int(rng, 235, 255), uniform_int(rng, 195, 235)};
  }
  if (amber) return {uniform_int(rng, 240, 255), uniform_int(rng, 140, 185), uniform_int(rng, 0, 40)};
  return {uniform_int(rng, 200, 250), uniform_int(rng, 15, 55), uniform_int(rng, 15, 55)};
}

bool is_convex(const std::array<Point, kCorners>& q) {
  // clockwise in image coordinates (y down): TL -> TR -> BR -> BL
  for (int i = 0; i < kCorners; ++i) {
    const Point& a = q[i];
    const Point& b = q[(i + 1) % kCorners];
    const Point& c = q[(i + 2) % kCorners];
    const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    if (cross <= 0.0) return false;
  }
  return true;
}

// Light quadrilateral around (cx, cy). Front lights are wide, rear lights
// tall; the outer side carries a type-specific slant scaled by irregularity.
std::array<Point, kCorners> light_shape(const SynthConfig& cfg, LightType type, bool on_image_right, double cx,
                                        double cy, Rng& rng) {
  const bool front = type == LightType::FrontLeft || type == LightType::FrontRight;
  for (;;) {
    double w, h;
    if (front) {
      w = uniform(rng, cfg.light_min, cfg.light_max);
      h = std::max(cfg.light_min * 0.5, w * uniform(rng, 0.45, 0.7));
    } else {
      h = uniform(rng, cfg.light_min, cfg.light_max);
      w = std::max(cfg.light_min * 0.5, h * uniform(rng, 0.5, 0.9));
    }
    const double x0 = std::round(cx - w / 2), x1 = x0 + std::round(w);
    const double y0 = std::round(cy - h / 2), y1 = y0 + std::round(h);
    std::array<Point, kCorners> q = {Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}};
    if (cfg.irregularity > 0.0) {
      const double slant = cfg.irregularity * uniform(rng, 0.2, 0.5);
      const int outer_top = on_image_right ? 1 : 0;
      const int outer_bottom = on_image_right ? 2 : 3;
      const double outward = on_image_right ? 1.0 : -1.0;
      if (front) {
        q[outer_top].y -= std::round(slant * h);  // raised outer-top corner
      } else {
        q[outer_bottom].x += std::round(outward * slant * w);  // swept outer-bottom corner
      }
      const double jitter = cfg.irregularity * 0.15 * std::min(w, h);
      for (auto& p : q) {
        p.x += std::round(uniform(rng, -jitter, jitter));
        p.y += std::round(uniform(rng, -jitter, jitter));
      }
    }
    if (is_convex(q)) return q;
  }
}

int vehicles_in_scene(const SynthConfig& cfg, std::size_t index) {
  Rng rng(derive_seed(cfg.seed, index));
  return uniform_int(rng, cfg.vehicles_min, cfg.vehicles_max);
}

}  // namespace

void SynthConfig::validate() const {
  require(width > 0 && height > 0, ErrorKind::Config, "synth scene size must be positive");
  require(n_scenes >= 0, ErrorKind::Config, "synth.n_scenes must be >= 0");
  require(vehicles_min >= 1 && vehicles_max >= vehicles_min, ErrorKind::Config,
          "synth vehicle count range must satisfy 1 <= min <= max");
  require(light_min > 0 && light_max >= light_min, ErrorKind::Config, "synth light size range must be positive");
  require(irregularity >= 0.0 && irregularity <= 1.0, ErrorKind::Config, "synth.irregularity must lie in [0, 1]");
  require(occlusion >= 0.0 && occlusion < 1.0, ErrorKind::Config,
          "synth.occlusion must lie in [0, 1); q = 1 would leave lights without visible corners");
  require(clutter >= 0.0 && clutter <= 1.0, ErrorKind::Config, "synth.clutter must lie in [0, 1]");
  require(front_right_keep >= 0.0 && front_right_keep <= 1.0, ErrorKind::Config,
          "synth.front_right_keep must lie in [0, 1]");
  const double slot = static_cast<double>(width) / vehicles_max;
  const double min_vehicle_w = 0.7 * slot;
  const double min_vehicle_h = 0.55 * min_vehicle_w;
  // A slanted light grows by up to half its extent; two must fit side by side.
  require(2.0 * 1.6 * light_max + 8.0 <= min_vehicle_w && 1.6 * light_max + 8.0 <= min_vehicle_h, ErrorKind::Config,
          "synth lights up to " + std::to_string(light_max) + " px do not fit vehicles of " +
              std::to_string(static_cast<int>(min_vehicle_w)) + " px; enlarge the scene or shrink the lights");
  require(min_vehicle_h <= 0.9 * height, ErrorKind::Config, "synth scene too short for its vehicles");
}

std::string scene_image_name(std::size_t index) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "images/scene_%05zu.ppm", index);
  return buf;
}

bool quad_covers_pixel(const std::array<Point, kCorners>& quad, int px, int py) noexcept {
  const double x = px + 0.5, y = py + 0.5;
  for (int i = 0; i < kCorners; ++i) {
    const Point& a = quad[i];
    const Point& b = quad[(i + 1) % kCorners];
    if ((b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x) < 0.0) return false;
  }
  return true;
}

SynthScene generate_scene(const SynthConfig& cfg, std::size_t index) {
  cfg.validate();
  // Global vehicle index sets the facing so front/rear counts alternate.
  std::size_t vehicle_offset = 0;
  for (std::size_t s = 0; s < index; ++s) vehicle_offset += static_cast<std::size_t>(vehicles_in_scene(cfg, s));

  Rng rng(derive_seed(cfg.seed, index));
  const int n_vehicles = uniform_int(rng, cfg.vehicles_min, cfg.vehicles_max);

  SynthScene scene;
  scene.image_name = scene_image_name(index);
  scene.image = Image(cfg.width, cfg.height);
  Painter paint(scene.image);

  // Background: vertical gradient, then clutter shapes, some light-colored.
  const Rgb top = random_color(rng, 90, 170), bottom = random_color(rng, 50, 110);
  for (int y = 0; y < cfg.height; ++y) {
    const double t = static_cast<double>(y) / cfg.height;
    const Rgb c{static_cast<int>(top.r + t * (bottom.r - top.r)), static_cast<int>(top.g + t * (bottom.g - top.g)),
                static_cast<int>(top.b + t * (bottom.b - top.b))};
    paint.fill_rect(0, y, cfg.width, y + 1, c);
  }
  const int n_clutter = static_cast<int>(std::lround(cfg.clutter * 80));
  for (int i = 0; i < n_clutter; ++i) {
    const double cx = uniform(rng, 0, cfg.width), cy = uniform(rng, 0, cfg.height);
    if (chance(rng, 0.35)) {
      // distractor resembling a light
      const auto type = kLightTypes[uniform_int(rng, 0, 3)];
      const double s = uniform(rng, cfg.light_min * 0.6, cfg.light_max);
      paint.fill_rect(cx, cy, cx + s, cy + s * uniform(rng, 0.4, 1.2), light_color(type, rng, chance(rng, 0.3)));
    } else if (chance(rng, 0.5)) {
      paint.fill_rect(cx, cy, cx + uniform(rng, 10, 120), cy + uniform(rng, 10, 90), random_color(rng, 20, 235));
    } else {
      paint.fill_ellipse(cx, cy, uniform(rng, 5, 50), uniform(rng, 5, 50), random_color(rng, 20, 235));
    }
  }

  const double slot = static_cast<double>(cfg.width) / n_vehicles;
  const double max_slot = static_cast<double>(cfg.width) / cfg.vehicles_max;
  for (int v = 0; v < n_vehicles; ++v) {
    const bool front = (vehicle_offset + static_cast<std::size_t>(v)) % 2 == 0;
    const double vw = std::round(uniform(rng, 0.7, 0.95) * max_slot);
    const double vh = std::round(vw * uniform(rng, 0.55, 0.8));
    const double x_min = std::round(slot * v + uniform(rng, 0.0, slot - vw));
    const double y_lo = std::max(vh, 0.55 * cfg.height);
    const double y_max = std::round(uniform(rng, y_lo, std::max(y_lo, 0.97 * cfg.height)));
    const VehicleBox box{x_min, y_max - vh, x_min + vw, y_max};

    paint.fill_rect(box.x_min, box.y_min, box.x_max, box.y_max, random_color(rng, 110, 230));
    // windshield / rear window band and bumper
    paint.fill_rect(box.x_min + 0.12 * vw, box.y_min + 0.08 * vh, box.x_max - 0.12 * vw, box.y_min + 0.32 * vh,
                    random_color(rng, 20, 70));
    paint.fill_rect(box.x_min + 0.05 * vw, box.y_max - 0.12 * vh, box.x_max - 0.05 * vw, box.y_max - 0.05 * vh,
                    random_color(rng, 30, 90));

    const bool amber = chance(rng, 0.3);
    const double fy = front ? uniform(rng, 0.45, 0.65) : uniform(rng, 0.4, 0.6);
    for (int side = 0; side < 2; ++side) {
      const bool on_image_right = side == 1;
      // Seen from the front the vehicle's left light is on the image right.
      const LightType type = front ? (on_image_right ? LightType::FrontLeft : LightType::FrontRight)
                                   : (on_image_right ? LightType::RearRight : LightType::RearLeft);
      const double fx = uniform(rng, 0.16, 0.26);
      const double cx = on_image_right ? box.x_max - fx * vw : box.x_min + fx * vw;
      const double cy = box.y_min + fy * vh;
      auto quad = light_shape(cfg, type, on_image_right, cx, cy, rng);
      // keep the light inside the vehicle with a 2 px margin
      double dx = 0, dy = 0;
      for (const auto& p : quad) {
        dx = std::max(dx, box.x_min + 2 - p.x);
        dx = std::min(dx, box.x_max - 2 - p.x);
        dy = std::max(dy, box.y_min + 2 - p.y);
        dy = std::min(dy, box.y_max - 2 - p.y);
      }
      for (auto& p : quad) p = {p.x + std::round(dx), p.y + std::round(dy)};

      paint.fill_quad(quad, light_color(type, rng, amber), 0.15);

      std::array<bool, kCorners> occluded{};
      if (cfg.occlusion > 0.0) {
        do {
          for (auto& o : occluded) o = chance(rng, cfg.occlusion);
        } while (std::all_of(occluded.begin(), occluded.end(), [](bool o) { return o; }));
      }
      LightAnnotation light;
      light.image = scene.image_name;
      light.vehicle = box;
      light.light_type = type;
      double sx = 0, sy = 0;
      for (int j = 0; j < kCorners; ++j) {
        sx += quad[j].x;
        sy += quad[j].y;
        if (occluded[j]) {
          const double r = 0.3 * std::min(std::abs(quad[2].x - quad[0].x), std::abs(quad[2].y - quad[0].y)) + 2.0;
          const Rgb c = random_color(rng, 15, 80);
          paint.fill_rect(quad[j].x - r + uniform(rng, -1, 1), quad[j].y - r + uniform(rng, -1, 1),
                          quad[j].x + r + uniform(rng, -1, 1), quad[j].y + r + uniform(rng, -1, 1), c);
        } else {
          light.corners[j] = quad[j];
        }
      }
      light.center = {sx / kCorners, sy / kCorners};
      const bool keep = type != LightType::FrontRight || chance(rng, cfg.front_right_keep);
      if (keep) scene.lights.push_back(light);
    }
  }

  // sensor noise
  std::uniform_int_distribution<int> grain(-4, 4);
  for (auto& byte : scene.image.rgb) byte = clamp_byte(byte + grain(rng));
  return scene;
}

void for_each_synthetic_scene(const SynthConfig& cfg, const std::function<void(SynthScene&&)>& visit) {
  cfg.validate();
  for (int s = 0; s < cfg.n_scenes; ++s) visit(generate_scene(cfg, static_cast<std::size_t>(s)));
}

SynthDataset generate_synthetic(const SynthConfig& cfg) {
  SynthDataset out;
  for_each_synthetic_scene(cfg, [&out](SynthScene&& scene) {
    out.image_names.push_back(scene.image_name);
    out.images.push_back(std::move(scene.image));
    out.annotations.insert(out.annotations.end(), scene.lights.begin(), scene.lights.end());
  });
  return out;
}

}  // namespace lightcorners
