/**
 * Command-line front end: `wescatter run` executes one prequential
 * experiment from a config file plus overrides and writes trace.csv,
 * summary.json and optionally model.wsn to the output directory.
 */
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wescatter/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"WeScatterNet stream-learning engine"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run a prequential experiment");
  std::string config_path;
  std::string dataset, synthetic, out_dir, ablation;
  double labels = -1.0;
  long long partitions = -1, seed = -1, batch_size = -1, workers = -1;
  bool save_model = false;

  run->add_option("--config", config_path, "experiment config file (key=value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--dataset", dataset, "CSV stream (features..., class)");
  run->add_option("--synthetic", synthetic, "synthetic stream spec (JSON)");
  run->add_option("--labels", labels, "labelled proportion in (0,1]");
  run->add_option("--partitions", partitions, "partition count P");
  run->add_option("--workers", workers, "worker thread cap");
  run->add_option("--seed", seed, "run seed");
  run->add_option("--batch-size", batch_size, "batch size T");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--ablation", ablation, "one of: none, reg, aug, single-node");
  run->add_flag("--save-model", save_model, "serialize the final ensemble to model.wsn");

  CLI11_PARSE(app, argc, argv);

  try {
    wsn::ExperimentConfig cfg = wsn::load_config_file(config_path);
    if (!dataset.empty()) cfg.dataset_path = dataset;
    if (!synthetic.empty()) cfg.synthetic_path = synthetic;
    if (labels >= 0.0) cfg.label_proportion = labels;
    if (partitions >= 0) cfg.partitions = static_cast<std::size_t>(partitions);
    if (workers >= 0) cfg.worker_count = static_cast<std::size_t>(workers);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (batch_size >= 0) cfg.batch_size = static_cast<std::size_t>(batch_size);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!ablation.empty()) wsn::apply_config_entry(cfg, "ablation", ablation);
    if (save_model) cfg.save_model = true;

    if (cfg.label_proportion <= 0.0 || cfg.label_proportion > 1.0)
      throw std::runtime_error("label proportion must lie in (0,1]");

    const wsn::RunResult result = wsn::run_prequential(cfg);
    wsn::write_outputs(cfg, result);

    double mean_acc = 0.0;
    for (const auto& r : result.records) mean_acc += r.accuracy;
    if (!result.records.empty()) mean_acc /= static_cast<double>(result.records.size());
    std::cout << "batches=" << result.batches_seen << " scored=" << result.records.size()
              << " mean_accuracy=" << mean_acc << " models=" << result.ensemble.learners.size()
              << " out=" << cfg.out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
