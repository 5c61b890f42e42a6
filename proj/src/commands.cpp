#include "lightcorners/commands.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>

#include "lightcorners/annotations.hpp"
#include "lightcorners/checkpoint.hpp"
#include "lightcorners/dataset.hpp"
#include "lightcorners/errors.hpp"
#include "lightcorners/render.hpp"
#include "lightcorners/synth.hpp"
#include "lightcorners/train.hpp"

namespace fs = std::filesystem;

namespace lightcorners {

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::Io, "cannot create directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::Io, "failed writing " + path.string());
}

std::string counts_line(const std::map<LightType, std::size_t>& counts) {
  std::string out;
  for (const auto& [type, n] : counts) {
    if (!out.empty()) out += " ";
    out += std::string(short_name(type)) + "=" + std::to_string(n);
  }
  return out;
}

void write_manifest_for(const ExperimentConfig& config, const fs::path& dir,
                        const std::vector<LightAnnotation>& annotations, std::ostream& log) {
  std::vector<std::string> warnings;
  const auto manifest = make_manifest(annotations, config.split.train_fraction, config.split.seed, config.noise,
                                      config.eval.noise_seed, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << "\n";
  write_manifest(dir / kManifestFile, manifest);
  log << "split: train=" << manifest.train.size() << " test=" << manifest.test.size() << "\n";
}

CornerRegressor model_for(const std::string& architecture) { return CornerRegressor(make_backbone(architecture)); }

struct LoadedRun {
  std::map<LightType, Checkpoint> checkpoints;
  ModelRegistry registry;
  std::string architecture;
};

LoadedRun load_run(const fs::path& run_dir, const std::vector<LightAnnotation>& needed, const CropSpec& crop) {
  LoadedRun run;
  for (LightType type : kLightTypes) {
    const auto path = checkpoint_path(run_dir, type);
    if (!fs::exists(path)) continue;
    auto ckpt = read_checkpoint(path);
    require(ckpt.light_type == type, ErrorKind::Validation, path.string() + " holds a model for another light type");
    if (run.architecture.empty()) run.architecture = ckpt.params.architecture;
    require(ckpt.params.architecture == run.architecture, ErrorKind::Config,
            "checkpoints in " + run_dir.string() + " use different architectures");
    run.registry.set(type, ckpt.params);
    run.checkpoints.emplace(type, std::move(ckpt));
  }
  for (const auto& a : needed) run.registry.at(a.light_type);
  if (!run.architecture.empty()) {
    require(make_backbone(run.architecture)->crop_size() == crop.size, ErrorKind::Config,
            "crop.size does not match the checkpoint architecture " + run.architecture);
  }
  return run;
}

struct TestSet {
  Dataset dataset;
  std::vector<LightAnnotation> annotations;
  std::vector<Point> noise;
  std::vector<LightExample> examples;
};

TestSet load_test_set(const ExperimentConfig& config) {
  TestSet t;
  t.dataset = open_dataset(config.data_dir);
  t.annotations = t.dataset.select(t.dataset.manifest.test);
  t.noise = t.dataset.manifest.test_noise;
  const int margin = margin_for_clip(t.dataset.manifest.test_noise_config.clip);
  t.examples = build_examples(config.data_dir, t.annotations, config.crop, margin);
  return t;
}

CropSample test_crop(const TestSet& t, std::size_t k, bool noisy) {
  const auto& example = t.examples[k];
  return noisy ? example.crop(noisy_center(example.annotation, t.noise[k])) : example.crop();
}

MetricSection score(const CornerRegressor& model, const ModelRegistry& registry, const TestSet& t, bool noisy,
                    const ExperimentConfig& config) {
  std::map<LightType, std::vector<CropSample>> samples;
  for (std::size_t k = 0; k < t.examples.size(); ++k) {
    samples[t.annotations[k].light_type].push_back(test_crop(t, k, noisy));
  }
  std::map<LightType, std::vector<EvalExample>> scored;
  for (const auto& [type, crops] : samples) {
    scored[type] = evaluate_samples(model, registry.at(type), crops, config.eval.batch_size);
  }
  return score_section(scored, config.crop, config.eval.iou_thresholds);
}

}  // namespace

void cmd_gen_synth(const ExperimentConfig& config, const fs::path& out_dir, bool force, std::ostream& log) {
  config.validate();
  const bool exists = fs::exists(out_dir / kManifestFile) || fs::exists(out_dir / kAnnotationsFile);
  require(!exists || force, ErrorKind::Io,
          "refusing to overwrite the dataset in " + out_dir.string() + " (pass --force to replace it)");
  ensure_dir(out_dir);
  if (force) {
    std::error_code ec;
    fs::remove_all(out_dir / "images", ec);
  }
  ensure_dir(out_dir / "images");
  std::vector<LightAnnotation> annotations;
  std::size_t scenes = 0;
  for_each_synthetic_scene(config.synth, [&](SynthScene&& scene) {
    write_image(out_dir / scene.image_name, scene.image);
    annotations.insert(annotations.end(), scene.lights.begin(), scene.lights.end());
    ++scenes;
  });
  save_annotations(out_dir / kAnnotationsFile, annotations);
  log << "generated " << scenes << " scenes, " << annotations.size()
      << " lights: " << counts_line(count_by_type(annotations)) << "\n";
  write_manifest_for(config, out_dir, annotations, log);
}

void cmd_prepare(const ExperimentConfig& config, const fs::path& data_dir, bool force, std::ostream& log) {
  config.validate();
  require(!fs::exists(data_dir / kManifestFile) || force, ErrorKind::Io,
          "refusing to overwrite " + (data_dir / kManifestFile).string() + " (pass --force to replace it)");
  LoadOptions options;
  options.check_images = true;
  const auto annotations = load_annotations(data_dir / kAnnotationsFile, options);
  log << "loaded " << annotations.size() << " lights: " << counts_line(count_by_type(annotations)) << "\n";
  write_manifest_for(config, data_dir, annotations, log);
}

void cmd_train(const ExperimentConfig& config, const fs::path& run_dir, bool force, std::ostream& log) {
  config.validate();
  bool exists = fs::exists(run_dir / kLossTraceFile);
  for (LightType type : kLightTypes) exists = exists || fs::exists(checkpoint_path(run_dir, type));
  require(!exists || force, ErrorKind::Io,
          "refusing to overwrite the run in " + run_dir.string() + " (pass --force to replace it)");
  const auto dataset = open_dataset(config.data_dir);
  const auto annotations = dataset.select(dataset.manifest.train);
  const int margin = config.train_noise ? margin_for_clip(config.noise.clip) : 0;
  const auto examples = build_examples(config.data_dir, annotations, config.crop, margin);
  const auto model = model_for(config.architecture);
  const std::optional<NoiseConfig> noise = config.train_noise ? std::optional(config.noise) : std::nullopt;
  ensure_dir(run_dir);
  for (LightType type : kLightTypes) {
    std::error_code ec;
    fs::remove(checkpoint_path(run_dir, type), ec);
  }
  log << "training on " << examples.size() << " crops (" << to_string(config.crop.mode) << " context"
      << (config.train.augment ? ", flip augmentation" : "") << (noise ? ", center noise" : "") << ")\n";

  std::map<LightType, std::vector<double>> traces;
  for (LightType type : kLightTypes) {
    if (training_pool(examples, type, config.train).empty()) {
      log << "warning: no training samples for " << short_name(type) << "; model skipped\n";
      continue;
    }
    const auto result = train_light_model(model, examples, type, config.train, noise,
                                          [&log](LightType t, int epoch, double loss) {
                                            char buf[96];
                                            std::snprintf(buf, sizeof buf, "%s epoch %3d  loss %.6f\n",
                                                          std::string(short_name(t)).c_str(), epoch, loss);
                                            log << buf << std::flush;
                                          });
    Checkpoint ckpt;
    ckpt.light_type = type;
    ckpt.params = result.params;
    ckpt.schedule = config.train.swa();
    ckpt.swa = result.swa;
    ckpt.epochs = static_cast<std::uint32_t>(config.train.epochs);
    write_checkpoint(checkpoint_path(run_dir, type), ckpt);
    traces[type] = result.loss_trace;
  }

  std::string csv = "epoch";
  for (LightType type : kLightTypes) csv += "," + std::string(short_name(type));
  csv += "\n";
  for (int epoch = 1; epoch <= config.train.epochs; ++epoch) {
    csv += std::to_string(epoch);
    for (LightType type : kLightTypes) {
      csv += ",";
      const auto it = traces.find(type);
      if (it == traces.end()) continue;
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", it->second[static_cast<std::size_t>(epoch - 1)]);
      csv += buf;
    }
    csv += "\n";
  }
  write_text(run_dir / kLossTraceFile, csv);
  save_config(run_dir / kRunConfigFile, config);
  log << "wrote " << traces.size() << " checkpoint(s) to " << run_dir.string() << "\n";
}

MetricReport cmd_eval(const ExperimentConfig& config, const fs::path& run_dir, const fs::path& out_dir,
                      std::ostream& log) {
  config.validate();
  const auto test = load_test_set(config);
  const auto run = load_run(run_dir, test.annotations, config.crop);
  MetricReport report;
  report.architecture = run.architecture.empty() ? config.architecture : run.architecture;
  report.crop = config.crop;
  const auto model = model_for(report.architecture);
  report.clean = score(model, run.registry, test, false, config);
  report.noisy = score(model, run.registry, test, true, config);
  ensure_dir(out_dir);
  write_text(out_dir / kReportJsonFile, report_json(report));
  write_text(out_dir / kReportTextFile, report_text(report));
  log << report_table(report);
  return report;
}

void cmd_predict(const ExperimentConfig& config, const fs::path& run_dir, const fs::path& out_path, bool noisy,
                 std::ostream& log) {
  config.validate();
  const auto test = load_test_set(config);
  const auto run = load_run(run_dir, test.annotations, config.crop);
  const auto model = model_for(run.architecture.empty() ? config.architecture : run.architecture);
  std::string lines;
  for (std::size_t k = 0; k < test.examples.size(); ++k) {
    const auto sample = test_crop(test, k, noisy);
    const auto corners = denormalize_prediction(predict(model, run.registry, sample), sample.crop_center, config.crop);
    nlohmann::ordered_json record;
    record["index"] = test.dataset.manifest.test[k];
    record["image"] = test.annotations[k].image;
    record["light_type"] = std::string(short_name(sample.light_type));
    record["crop_center"] = {sample.crop_center.x, sample.crop_center.y};
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& c : corners) pts.push_back({c.x, c.y});
    record["corners"] = pts;
    record["visible"] = sample.mask;
    lines += record.dump() + "\n";
  }
  if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
  write_text(out_path, lines);
  log << "wrote " << test.examples.size() << " predictions to " << out_path.string() << "\n";
}

void cmd_render(const ExperimentConfig& config, const fs::path& run_dir, const fs::path& out_dir, std::size_t limit,
                bool noisy, std::ostream& log) {
  config.validate();
  auto test = load_test_set(config);
  const std::size_t n = std::min(limit, test.examples.size());
  const auto run = load_run(run_dir, std::vector<LightAnnotation>(test.annotations.begin(),
                                                                   test.annotations.begin() + static_cast<long>(n)),
                            config.crop);
  const auto model = model_for(run.architecture.empty() ? config.architecture : run.architecture);
  ensure_dir(out_dir);
  for (std::size_t k = 0; k < n; ++k) {
    const auto sample = test_crop(test, k, noisy);
    const auto overlay = render_overlay(sample, predict(model, run.registry, sample));
    char name[64];
    std::snprintf(name, sizeof name, "overlay_%05zu_%s.png", test.dataset.manifest.test[k],
                  std::string(short_name(sample.light_type)).c_str());
    write_image(out_dir / name, overlay);
  }
  log << "wrote " << n << " overlay(s) to " << out_dir.string() << "\n";
}

}  // namespace lightcorners
