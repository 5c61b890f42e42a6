#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>

#include "lightcorners/config.hpp"
#include "lightcorners/report.hpp"

namespace lightcorners {

inline constexpr const char* kRunConfigFile = "config.txt";
inline constexpr const char* kLossTraceFile = "loss_trace.csv";
inline constexpr const char* kReportJsonFile = "report.json";
inline constexpr const char* kReportTextFile = "report.txt";
inline constexpr const char* kPredictionsFile = "predictions.jsonl";

// Synthetic scenes, annotations.jsonl and manifest.json under out_dir.
// Refuses to replace an existing dataset unless `force`.
void cmd_gen_synth(const ExperimentConfig& config, const std::filesystem::path& out_dir, bool force,
                   std::ostream& log);

// Writes manifest.json (split and frozen test noise) for an existing annotations.jsonl.
void cmd_prepare(const ExperimentConfig& config, const std::filesystem::path& data_dir, bool force,
                 std::ostream& log);

// One checkpoint per light type with training data, loss_trace.csv and the
// effective config.txt, all under run_dir.
void cmd_train(const ExperimentConfig& config, const std::filesystem::path& run_dir, bool force, std::ostream& log);

// Scores the run's checkpoints on the clean and frozen-noise test split and
// writes report.json and report.txt to out_dir. Never modifies run_dir
// contents other than those two files when out_dir == run_dir.
MetricReport cmd_eval(const ExperimentConfig& config, const std::filesystem::path& run_dir,
                      const std::filesystem::path& out_dir, std::ostream& log);

// Predicted scene-frame corners for every test record, as JSON Lines.
void cmd_predict(const ExperimentConfig& config, const std::filesystem::path& run_dir,
                 const std::filesystem::path& out_path, bool noisy, std::ostream& log);

// Overlay PNGs for the first `limit` test records.
void cmd_render(const ExperimentConfig& config, const std::filesystem::path& run_dir,
                const std::filesystem::path& out_dir, std::size_t limit, bool noisy, std::ostream& log);

}  // namespace lightcorners
