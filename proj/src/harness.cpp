#include "wescatter/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wescatter/serialize.hpp"

namespace wsn {

namespace {

double parse_real(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad numeric value for " + key + ": " + v);
  }
}

std::uint64_t parse_uint(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer value for " + key + ": " + v);
  }
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "dataset") cfg.dataset_path = value;
  else if (key == "synthetic") cfg.synthetic_path = value;
  else if (key == "batch_size") cfg.batch_size = parse_uint(value, key);
  else if (key == "classes") cfg.declared_classes = parse_uint(value, key);
  else if (key == "labels") cfg.label_proportion = parse_real(value, key);
  else if (key == "seed") cfg.seed = parse_uint(value, key);
  else if (key == "partitions") cfg.partitions = parse_uint(value, key);
  else if (key == "workers") cfg.worker_count = parse_uint(value, key);
  else if (key == "gamma") cfg.learner.gamma = parse_real(value, key);
  else if (key == "k3") cfg.learner.k3 = parse_real(value, key);
  else if (key == "omega") cfg.learner.omega_init = parse_real(value, key);
  else if (key == "alpha") cfg.learner.alpha = parse_real(value, key);
  else if (key == "min_rules") cfg.learner.min_rules = parse_uint(value, key);
  else if (key == "fac") cfg.fac = parse_real(value, key);
  else if (key == "delta") cfg.delta = parse_real(value, key);
  else if (key == "conf_threshold") cfg.confidence_threshold = parse_real(value, key);
  else if (key == "noise_std") cfg.noise_std = parse_real(value, key);
  else if (key == "k4") cfg.fusion.k4 = parse_real(value, key);
  else if (key == "k5") cfg.fusion.k5 = parse_real(value, key);
  else if (key == "support_floor") cfg.fusion.support_floor = parse_real(value, key);
  else if (key == "z_candidates") {
    cfg.fusion.z_candidates.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
      cfg.fusion.z_candidates.push_back(static_cast<std::size_t>(parse_uint(trim(item), key)));
    if (cfg.fusion.z_candidates.empty() ||
        !std::is_sorted(cfg.fusion.z_candidates.begin(), cfg.fusion.z_candidates.end()))
      throw std::runtime_error("config: z_candidates must be a non-empty ascending list");
  } else if (key == "ablation") {
    if (value == "none") cfg.ablation = Ablation::none;
    else if (value == "reg") cfg.ablation = Ablation::no_regularization;
    else if (value == "aug") cfg.ablation = Ablation::no_augmentation;
    else if (value == "single-node") cfg.ablation = Ablation::single_node;
    else throw std::runtime_error("config: unknown ablation: " + value);
  } else if (key == "out") cfg.out_dir = value;
  else if (key == "save_model") cfg.save_model = parse_uint(value, key) != 0;
  else throw std::runtime_error("config: unknown key: " + key);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) + " is not key=value");
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

namespace {

struct StreamSource {
  std::unique_ptr<CsvStream> csv;
  std::unique_ptr<SyntheticStream> synthetic;

  std::optional<StreamBatch> next() { return csv ? csv->next() : synthetic->next(); }
  std::size_t rejected() const { return csv ? csv->rejected_rows() : 0; }
};

StreamSource open_source(const ExperimentConfig& cfg) {
  const int sources = (cfg.dataset_path.empty() ? 0 : 1) + (cfg.synthetic_path.empty() ? 0 : 1) +
                      (cfg.synthetic_inline.empty() ? 0 : 1);
  if (sources != 1)
    throw std::runtime_error("exactly one stream source (dataset or synthetic) must be configured");

  StreamSource src;
  if (!cfg.dataset_path.empty()) {
    if (cfg.batch_size == 0) throw std::runtime_error("batch_size is required for CSV streams");
    src.csv = std::make_unique<CsvStream>(cfg.dataset_path, cfg.batch_size, cfg.declared_classes);
  } else {
    SyntheticSpec spec = cfg.synthetic_inline.empty()
                             ? SyntheticSpec::from_json_file(cfg.synthetic_path)
                             : SyntheticSpec::from_json_text(cfg.synthetic_inline);
    if (cfg.batch_size > 0) spec.batch_size = cfg.batch_size;
    src.synthetic = std::make_unique<SyntheticStream>(std::move(spec), cfg.seed);
  }
  return src;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t total_rules(const Ensemble& ens) {
  std::size_t n = 0;
  for (const auto& l : ens.learners) n += l.rules().size();
  return n;
}

// One labelled original per partition, drawn with the batch-derived seed.
std::vector<ProbeSample> draw_probe_set(const std::vector<TrainingSample>& samples,
                                        const PartitionPlan& plan, std::uint64_t seed) {
  std::vector<ProbeSample> probes;
  Rng rng(mix_seed(seed, 0xb5a3ull));
  for (const auto& [begin, end] : plan.ranges) {
    std::vector<std::size_t> originals;
    for (std::size_t i = begin; i < end; ++i)
      if (samples[i].provenance == Provenance::original) originals.push_back(i);
    if (originals.empty()) continue;
    const TrainingSample& s = samples[originals[rng.bounded(originals.size())]];
    ProbeSample probe;
    probe.x = s.x;
    for (std::size_t o = 1; o < s.y.size(); ++o)
      if (s.y[o] > s.y[probe.label]) probe.label = o;
    probes.push_back(std::move(probe));
  }
  return probes;
}

}  // namespace

RunResult run_prequential(const ExperimentConfig& cfg) {
  RunResult result;
  StreamSource source = open_source(cfg);

  const std::size_t p_eff = cfg.ablation == Ablation::single_node ? 1 : std::max<std::size_t>(1, cfg.partitions);
  const std::size_t workers_eff =
      cfg.ablation == Ablation::single_node ? 1 : std::max<std::size_t>(1, cfg.worker_count);
  const bool anchoring = cfg.ablation != Ablation::no_regularization;

  Ensemble ens;
  ens.learner_cfg = cfg.learner;
  ens.fac = cfg.fac;
  ens.delta = cfg.delta;

  Normalizer normalizer;

  while (auto maybe_batch = source.next()) {
    StreamBatch batch = std::move(*maybe_batch);
    ++result.batches_seen;
    const std::size_t k = batch.index;

    if (k == 1) {
      ens.n_features = batch.features.empty() ? 0 : batch.features.front().size();
      ens.n_classes = batch.n_classes;
      ens.input_min.assign(ens.n_features, std::numeric_limits<double>::infinity());
      ens.input_max.assign(ens.n_features, -std::numeric_limits<double>::infinity());
    } else if (batch.n_classes != ens.n_classes) {
      throw std::runtime_error("class set changed after lock");
    }

    normalizer.observe(batch.features);
    normalizer.apply(batch.features);
    mask_labels(batch, cfg.label_proportion, cfg.seed);

    // Bound trackers feed the drift detector and must be current before the
    // detection pass.
    for (const auto& row : batch.features)
      for (std::size_t j = 0; j < row.size(); ++j) {
        ens.input_min[j] = std::min(ens.input_min[j], row[j]);
        ens.input_max[j] = std::max(ens.input_max[j], row[j]);
      }

    Da3Config da3;
    da3.confidence_threshold = cfg.confidence_threshold;
    da3.noise_std = cfg.noise_std;
    da3.disable_augmentation = cfg.ablation == Ablation::no_augmentation;
    da3.rng_seed = mix_seed(cfg.seed, k);

    if (ens.learners.empty()) {
      // Bootstrap: train the first model, no metrics row (nothing to test).
      const AssembledBatch assembled = assemble_training_batch(batch, {}, da3);
      if (assembled.samples.empty()) {
        std::cerr << "batch " << k << ": no usable training samples, model bootstrap deferred\n";
        ++result.skipped_training_batches;
        continue;
      }
      const BaseLearner fresh(ens.n_features, ens.n_classes, cfg.learner);
      const std::vector<TrainedPartition> parts =
          train_distributed(fresh, assembled.samples, p_eff, workers_eff, anchoring);
      const PartitionPlan train_plan = make_partitions(assembled.samples.size(), p_eff);
      const std::vector<ProbeSample> probes =
          draw_probe_set(assembled.samples, train_plan, mix_seed(cfg.seed, k));
      ens.learners.push_back(fuse(parts, probes, cfg.fusion));
      ens.betas.push_back(1.0);
      continue;
    }

    MetricsRecord rec;
    rec.batch_index = k;

    const std::size_t t_samples = batch.features.size();
    const PartitionPlan plan = make_partitions(t_samples, p_eff);

    const auto t_test0 = std::chrono::steady_clock::now();
    const TestPassResult test = test_distributed(ens, plan, batch.features, workers_eff);
    rec.test_seconds = seconds_since(t_test0);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < t_samples; ++i) {
      const EnsembleOutput out = ensemble_output(test.predictions[i], ens.betas);
      if (static_cast<int>(out.label) == batch.labels[i]) ++correct;
    }
    rec.accuracy = t_samples == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(t_samples);

    ens.betas = test.betas;
    prune_learners(ens);

    std::vector<double> stats(t_samples, 0.0);
    for (std::size_t i = 0; i < t_samples; ++i) {
      double s = 0.0;
      for (double v : batch.features[i]) s += v;
      stats[i] = ens.n_features == 0 ? 0.0 : s / static_cast<double>(ens.n_features);
    }
    double bound_a = 0.0, bound_b = 0.0;
    for (std::size_t j = 0; j < ens.n_features; ++j) {
      bound_a += ens.input_min[j];
      bound_b += ens.input_max[j];
    }
    if (ens.n_features > 0) {
      bound_a /= static_cast<double>(ens.n_features);
      bound_b /= static_cast<double>(ens.n_features);
    }
    const DriftVerdict verdict = detect_drift(stats, ens.delta, bound_a, bound_b);
    rec.drift = verdict.status == DriftStatus::drift ? 1 : 0;
    rec.drift_cut = verdict.status == DriftStatus::drift ? verdict.cut_fraction : 0.0;

    const AssembledBatch assembled = assemble_training_batch(batch, test.predictions, da3);
    rec.n_label = assembled.n_label;
    rec.n_aug = assembled.n_aug;
    rec.n_pseudo = assembled.n_pseudo;
    rec.n_pseudo_noisy = assembled.n_pseudo_noisy;

    if (assembled.samples.empty()) {
      std::cerr << "batch " << k << ": empty training set, training skipped\n";
      ++result.skipped_training_batches;
      rec.n_models = ens.learners.size();
      rec.n_rules_total = total_rules(ens);
      result.records.push_back(rec);
      continue;
    }

    const std::size_t winner = winning_learner(ens);
    const auto t_train0 = std::chrono::steady_clock::now();
    const std::vector<TrainedPartition> parts =
        train_distributed(ens.learners[winner], assembled.samples, p_eff, workers_eff, anchoring);
    rec.train_seconds = seconds_since(t_train0);

    for (const auto& part : parts) rec.n_extracted += part.learner.rules().size();
    const PartitionPlan train_plan = make_partitions(assembled.samples.size(), p_eff);
    const std::vector<ProbeSample> probes =
        draw_probe_set(assembled.samples, train_plan, mix_seed(cfg.seed, k));
    BaseLearner fused = fuse(parts, probes, cfg.fusion);
    rec.n_fused = fused.rules().size();

    integrate_model(ens, std::move(fused), winner, verdict.status);

    rec.n_models = ens.learners.size();
    rec.n_rules_total = total_rules(ens);
    result.records.push_back(rec);
  }

  result.rejected_rows = source.rejected();
  result.ensemble = std::move(ens);
  return result;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string trace_csv(const std::vector<MetricsRecord>& records) {
  std::string out =
      "batch,accuracy,n_models,n_rules,n_label,n_aug,n_pseudo,n_pseudo_noisy,drift,drift_cut,"
      "n_extracted,n_fused\n";
  for (const auto& r : records) {
    out += std::to_string(r.batch_index);
    out += ',';
    out += fmt_double(r.accuracy);
    out += ',';
    out += std::to_string(r.n_models);
    out += ',';
    out += std::to_string(r.n_rules_total);
    out += ',';
    out += std::to_string(r.n_label);
    out += ',';
    out += std::to_string(r.n_aug);
    out += ',';
    out += std::to_string(r.n_pseudo);
    out += ',';
    out += std::to_string(r.n_pseudo_noisy);
    out += ',';
    out += std::to_string(r.drift);
    out += ',';
    out += fmt_double(r.drift_cut);
    out += ',';
    out += std::to_string(r.n_extracted);
    out += ',';
    out += std::to_string(r.n_fused);
    out += '\n';
  }
  return out;
}

std::vector<MetricsRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::vector<MetricsRecord> records;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 12) throw std::runtime_error("trace row has wrong arity");
    MetricsRecord r;
    r.batch_index = parse_uint(fields[0], "batch");
    r.accuracy = parse_real(fields[1], "accuracy");
    r.n_models = parse_uint(fields[2], "n_models");
    r.n_rules_total = parse_uint(fields[3], "n_rules");
    r.n_label = parse_uint(fields[4], "n_label");
    r.n_aug = parse_uint(fields[5], "n_aug");
    r.n_pseudo = parse_uint(fields[6], "n_pseudo");
    r.n_pseudo_noisy = parse_uint(fields[7], "n_pseudo_noisy");
    r.drift = static_cast<int>(parse_uint(fields[8], "drift"));
    r.drift_cut = parse_real(fields[9], "drift_cut");
    r.n_extracted = parse_uint(fields[10], "n_extracted");
    r.n_fused = parse_uint(fields[11], "n_fused");
    records.push_back(r);
  }
  return records;
}

namespace {

nlohmann::json mean_std(const std::vector<double>& xs) {
  nlohmann::json j;
  if (xs.empty()) {
    j["mean"] = 0.0;
    j["std"] = 0.0;
    return j;
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  j["mean"] = mean;
  j["std"] = std::sqrt(var);
  return j;
}

}  // namespace

std::string summary_json(const ExperimentConfig& cfg, const RunResult& result) {
  nlohmann::json j;
  j["config"]["source"] = !cfg.dataset_path.empty() ? cfg.dataset_path
                          : !cfg.synthetic_path.empty() ? cfg.synthetic_path
                                                        : "<inline synthetic spec>";
  j["config"]["batch_size"] = cfg.batch_size;
  j["config"]["labels"] = cfg.label_proportion;
  j["config"]["seed"] = cfg.seed;
  j["config"]["partitions"] = cfg.partitions;
  j["config"]["workers"] = cfg.worker_count;
  j["config"]["gamma"] = cfg.learner.gamma;
  j["config"]["k3"] = cfg.learner.k3;
  j["config"]["omega"] = cfg.learner.omega_init;
  j["config"]["alpha"] = cfg.learner.alpha;
  j["config"]["fac"] = cfg.fac;
  j["config"]["delta"] = cfg.delta;
  j["config"]["conf_threshold"] = cfg.confidence_threshold;
  j["config"]["noise_std"] = cfg.noise_std;
  j["config"]["k4"] = cfg.fusion.k4;
  j["config"]["k5"] = cfg.fusion.k5;
  j["config"]["support_floor"] = cfg.fusion.support_floor;
  j["config"]["z_candidates"] = cfg.fusion.z_candidates;
  switch (cfg.ablation) {
    case Ablation::none: j["config"]["ablation"] = "none"; break;
    case Ablation::no_regularization: j["config"]["ablation"] = "reg"; break;
    case Ablation::no_augmentation: j["config"]["ablation"] = "aug"; break;
    case Ablation::single_node: j["config"]["ablation"] = "single-node"; break;
  }

  std::vector<double> acc, ttest, ttrain, models, rules, pseudo;
  for (const auto& r : result.records) {
    acc.push_back(r.accuracy);
    ttest.push_back(r.test_seconds);
    ttrain.push_back(r.train_seconds);
    models.push_back(static_cast<double>(r.n_models));
    rules.push_back(static_cast<double>(r.n_rules_total));
    pseudo.push_back(static_cast<double>(r.n_pseudo));
  }
  j["batches"] = result.batches_seen;
  j["scored_batches"] = result.records.size();
  j["skipped_training_batches"] = result.skipped_training_batches;
  j["rejected_rows"] = result.rejected_rows;
  j["metrics"]["accuracy"] = mean_std(acc);
  j["metrics"]["test_seconds"] = mean_std(ttest);
  j["metrics"]["train_seconds"] = mean_std(ttrain);
  j["metrics"]["n_models"] = mean_std(models);
  j["metrics"]["n_rules"] = mean_std(rules);
  j["metrics"]["n_pseudo"] = mean_std(pseudo);
  j["final"]["n_models"] = result.ensemble.learners.size();
  std::size_t rules_now = 0;
  for (const auto& l : result.ensemble.learners) rules_now += l.rules().size();
  j["final"]["n_rules"] = rules_now;
  j["final"]["betas"] = result.ensemble.betas;
  return j.dump(2) + "\n";
}

void write_outputs(const ExperimentConfig& cfg, const RunResult& result) {
  if (cfg.out_dir.empty()) throw std::runtime_error("no output directory configured");
  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path dir(cfg.out_dir);

  std::ofstream trace(dir / "trace.csv", std::ios::binary);
  trace << trace_csv(result.records);
  trace.close();

  std::ofstream summary(dir / "summary.json", std::ios::binary);
  summary << summary_json(cfg, result);
  summary.close();

  if (cfg.save_model) write_file((dir / "model.wsn").string(), serialize_ensemble(result.ensemble));
}

}  // namespace wsn
