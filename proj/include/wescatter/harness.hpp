/**
 * Prequential experiment driver: wires a stream source through
 * normalisation, masking, the distributed test pass, vote/drift/prune
 * bookkeeping, training-set assembly, distributed training, fusion and
 * integration, and emits the run artifacts (trace.csv, summary.json,
 * optional model snapshot).
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wescatter/da3.hpp"
#include "wescatter/runtime.hpp"
#include "wescatter/stream.hpp"

namespace wsn {

enum class Ablation { none, no_regularization, no_augmentation, single_node };

struct ExperimentConfig {
  std::string dataset_path;      // CSV stream (mutually exclusive with synthetic)
  std::string synthetic_path;    // JSON stream spec file
  std::string synthetic_inline;  // JSON stream spec text (test convenience)
  std::size_t batch_size = 0;    // T; required for CSV sources
  std::size_t declared_classes = 0;
  double label_proportion = 0.25;
  std::uint64_t seed = 0;
  std::size_t partitions = 6;
  std::size_t worker_count = 6;
  LearnerConfig learner;
  double fac = 0.3;
  double delta = 1e-3;
  double confidence_threshold = 0.55;
  double noise_std = 0.03162277660168379;
  FusionConfig fusion;
  Ablation ablation = Ablation::none;
  std::string out_dir;
  bool save_model = false;
};

// Flat key=value file, '#' comments; unknown keys are an error.
ExperimentConfig load_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct MetricsRecord {
  std::size_t batch_index = 0;
  double accuracy = 0.0;
  std::size_t n_models = 0;
  std::size_t n_rules_total = 0;
  std::size_t n_label = 0;
  std::size_t n_aug = 0;
  std::size_t n_pseudo = 0;
  std::size_t n_pseudo_noisy = 0;
  int drift = 0;
  double drift_cut = 0.0;
  std::size_t n_extracted = 0;
  std::size_t n_fused = 0;
  // Wall-clock fields live in summary.json only; trace.csv stays
  // byte-reproducible.
  double test_seconds = 0.0;
  double train_seconds = 0.0;
};

struct RunResult {
  std::vector<MetricsRecord> records;
  Ensemble ensemble;
  std::size_t rejected_rows = 0;
  std::size_t batches_seen = 0;
  std::size_t skipped_training_batches = 0;
};

RunResult run_prequential(const ExperimentConfig& cfg);

std::string trace_csv(const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_trace_csv(const std::string& path);
std::string summary_json(const ExperimentConfig& cfg, const RunResult& result);

// Writes trace.csv, summary.json and (when configured) model.wsn under
// cfg.out_dir, creating the directory if needed.
void write_outputs(const ExperimentConfig& cfg, const RunResult& result);

}  // namespace wsn
