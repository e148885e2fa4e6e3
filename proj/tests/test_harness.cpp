#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wescatter/harness.hpp"
#include "wescatter/serialize.hpp"

using namespace wsn;

namespace {

const char* kEasyStream = R"({
  "features": 2,
  "classes": 2,
  "batch_size": 60,
  "regimes": [
    {"clusters": [
      {"mean": [0.25, 0.25], "stddev": [0.06, 0.06], "weight": 1.0, "class": 0},
      {"mean": [0.75, 0.75], "stddev": [0.06, 0.06], "weight": 1.0, "class": 1}
    ]}
  ],
  "schedule": [{"regime": 0, "samples": 480}]
})";

ExperimentConfig easy_config() {
  ExperimentConfig cfg;
  cfg.synthetic_inline = kEasyStream;
  cfg.label_proportion = 0.25;
  cfg.seed = 11;
  cfg.partitions = 3;
  cfg.worker_count = 2;
  return cfg;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path.string();
}

}  // namespace

// ==== config ====

TEST_CASE("config entries land on the right fields") {
  ExperimentConfig cfg;
  apply_config_entry(cfg, "labels", "0.5");
  apply_config_entry(cfg, "seed", "99");
  apply_config_entry(cfg, "partitions", "4");
  apply_config_entry(cfg, "workers", "2");
  apply_config_entry(cfg, "gamma", "0.9");
  apply_config_entry(cfg, "alpha", "1e-6");
  apply_config_entry(cfg, "fac", "0.2");
  apply_config_entry(cfg, "conf_threshold", "0.6");
  apply_config_entry(cfg, "z_candidates", "2, 4, 6");
  apply_config_entry(cfg, "ablation", "single-node");
  CHECK(cfg.label_proportion == 0.5);
  CHECK(cfg.seed == 99);
  CHECK(cfg.partitions == 4);
  CHECK(cfg.worker_count == 2);
  CHECK(cfg.learner.gamma == 0.9);
  CHECK(cfg.learner.alpha == 1e-6);
  CHECK(cfg.fac == 0.2);
  CHECK(cfg.confidence_threshold == 0.6);
  CHECK(cfg.fusion.z_candidates == std::vector<std::size_t>{2, 4, 6});
  CHECK(cfg.ablation == Ablation::single_node);
}

TEST_CASE("unknown keys and malformed values are rejected") {
  ExperimentConfig cfg;
  CHECK_THROWS(apply_config_entry(cfg, "no_such_key", "1"));
  CHECK_THROWS(apply_config_entry(cfg, "labels", "abc"));
  CHECK_THROWS(apply_config_entry(cfg, "seed", "1.5"));
  CHECK_THROWS(apply_config_entry(cfg, "z_candidates", "5,3"));
  CHECK_THROWS(apply_config_entry(cfg, "ablation", "bogus"));
}

TEST_CASE("config files support comments and blank lines") {
  const std::string path = write_temp("wsn_harness_cfg.txt",
                                      "# experiment\n"
                                      "labels = 0.1   # sparse\n"
                                      "\n"
                                      "seed=7\n");
  const ExperimentConfig cfg = load_config_file(path);
  CHECK(cfg.label_proportion == 0.1);
  CHECK(cfg.seed == 7);
  std::filesystem::remove(path);
}

TEST_CASE("a config line without an equals sign is an error") {
  const std::string path = write_temp("wsn_harness_badcfg.txt", "labels 0.1\n");
  CHECK_THROWS(load_config_file(path));
  std::filesystem::remove(path);
}

// ==== trace io ====

TEST_CASE("trace rows survive the csv round trip") {
  MetricsRecord r;
  r.batch_index = 4;
  r.accuracy = 0.12345678901234567;
  r.n_models = 3;
  r.n_rules_total = 17;
  r.n_label = 20;
  r.n_aug = 20;
  r.n_pseudo = 5;
  r.n_pseudo_noisy = 1;
  r.drift = 1;
  r.drift_cut = 0.25;
  r.n_extracted = 30;
  r.n_fused = 8;

  const std::string path = write_temp("wsn_trace_roundtrip.csv", trace_csv({r}));
  const auto rows = read_trace_csv(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].batch_index == 4);
  CHECK(rows[0].accuracy == r.accuracy);  // %.17g is exact for doubles
  CHECK(rows[0].n_models == 3);
  CHECK(rows[0].n_rules_total == 17);
  CHECK(rows[0].drift == 1);
  CHECK(rows[0].drift_cut == 0.25);
  CHECK(rows[0].n_extracted == 30);
  CHECK(rows[0].n_fused == 8);
  std::filesystem::remove(path);
}

TEST_CASE("the trace has no wall-clock columns") {
  const std::string header = trace_csv({}).substr(0, trace_csv({}).find('\n'));
  CHECK(header.find("seconds") == std::string::npos);
  CHECK(header.find("time") == std::string::npos);
}

// ==== prequential runs ====

TEST_CASE("a run tests before training and bootstraps on the first batch") {
  const RunResult res = run_prequential(easy_config());
  CHECK(res.batches_seen == 8);
  REQUIRE(res.records.size() == 7);  // batch 1 only bootstraps
  CHECK(res.records.front().batch_index == 2);
  CHECK(res.records.back().batch_index == 8);
  CHECK(!res.ensemble.learners.empty());
  CHECK(res.ensemble.betas.size() == res.ensemble.learners.size());
  for (double b : res.ensemble.betas) {
    CHECK(b > 0.0);
    CHECK(b <= 1.0);
  }
  for (const auto& r : res.records) {
    CHECK(r.n_models >= 1);
    CHECK(r.n_rules_total >= 1);
    CHECK(r.n_fused <= r.n_extracted);
    CHECK(r.n_aug <= r.n_label);
  }
}

TEST_CASE("the learned ensemble beats chance on a separable stream") {
  const RunResult res = run_prequential(easy_config());
  double tail_acc = 0.0;
  std::size_t tail = 0;
  for (const auto& r : res.records)
    if (r.batch_index >= 5) {
      tail_acc += r.accuracy;
      ++tail;
    }
  tail_acc /= static_cast<double>(tail);
  CHECK(tail_acc > 0.7);
}

TEST_CASE("identical configs replay byte-identical traces") {
  const RunResult a = run_prequential(easy_config());
  const RunResult b = run_prequential(easy_config());
  CHECK(trace_csv(a.records) == trace_csv(b.records));
}

TEST_CASE("worker count is invisible in the results") {
  ExperimentConfig cfg = easy_config();
  cfg.worker_count = 1;
  const RunResult serial = run_prequential(cfg);
  cfg.worker_count = 8;
  const RunResult parallel = run_prequential(cfg);
  CHECK(trace_csv(serial.records) == trace_csv(parallel.records));
}

TEST_CASE("the single-node ablation forces one partition") {
  ExperimentConfig cfg = easy_config();
  cfg.ablation = Ablation::single_node;
  const RunResult res = run_prequential(cfg);
  CHECK(res.records.size() == 7);
  // One partition extracts exactly one model's rules per batch.
  for (const auto& r : res.records) CHECK(r.n_fused <= r.n_extracted);
}

TEST_CASE("the augmentation ablation produces no twins") {
  ExperimentConfig cfg = easy_config();
  cfg.ablation = Ablation::no_augmentation;
  const RunResult res = run_prequential(cfg);
  for (const auto& r : res.records) CHECK(r.n_aug == 0);
}

TEST_CASE("configuring both sources is an error") {
  ExperimentConfig cfg = easy_config();
  cfg.dataset_path = "also.csv";
  CHECK_THROWS(run_prequential(cfg));
}

TEST_CASE("csv sources require a batch size") {
  ExperimentConfig cfg;
  cfg.dataset_path = "whatever.csv";
  cfg.batch_size = 0;
  CHECK_THROWS(run_prequential(cfg));
}

// ==== outputs ====

TEST_CASE("write_outputs emits the run artifacts") {
  ExperimentConfig cfg = easy_config();
  cfg.save_model = true;
  const auto dir = std::filesystem::temp_directory_path() / "wsn_harness_out";
  std::filesystem::remove_all(dir);
  cfg.out_dir = dir.string();

  const RunResult res = run_prequential(cfg);
  write_outputs(cfg, res);

  CHECK(std::filesystem::exists(dir / "trace.csv"));
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(std::filesystem::exists(dir / "model.wsn"));

  const auto rows = read_trace_csv((dir / "trace.csv").string());
  CHECK(rows.size() == res.records.size());

  std::ifstream sj(dir / "summary.json");
  const nlohmann::json j = nlohmann::json::parse(sj);
  CHECK(j["batches"] == 8);
  CHECK(j["scored_batches"] == 7);
  CHECK(j["metrics"]["accuracy"].contains("mean"));
  CHECK(j["metrics"]["test_seconds"].contains("mean"));
  CHECK(j["final"]["n_models"] == res.ensemble.learners.size());

  const Ensemble loaded = deserialize_ensemble(read_file((dir / "model.wsn").string()));
  CHECK(loaded.learners.size() == res.ensemble.learners.size());
  CHECK(loaded.betas == res.ensemble.betas);
  std::filesystem::remove_all(dir);
}
