/**
 * Stream sources and the stages every source passes through before the
 * ensemble sees a batch: running min-max normalisation and seeded label
 * masking.  Two sources exist, CSV files (final column = integer class) and
 * synthetic Gaussian-mixture streams with a drift schedule.
 *
 * All randomness flows through explicit draw helpers on top of mt19937_64
 * instead of std distributions, whose output is implementation-defined; the
 * reproducibility guarantees require byte-equal streams for equal seeds.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wsn {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic draws with pinned bit-level behaviour.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); rejection keeps the draw unbiased.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = n * ((~0ull) / n);
    std::uint64_t r;
    do {
      r = eng_();
    } while (r >= limit);
    return r % n;
  }

  // Standard normal via Box-Muller; the paired draw is discarded so each
  // call consumes exactly two engine words.
  double gaussian() {
    double u1 = unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::mt19937_64 eng_;
};

struct StreamBatch {
  std::size_t index = 0;                      // 1-based position in the stream
  std::vector<std::vector<double>> features;  // raw on ingest, normalised by the harness
  std::vector<int> labels;                    // true class ids, kept for scoring
  std::vector<std::uint8_t> labelled;         // 1 = label visible to training
  std::size_t n_classes = 0;
};

// Running per-feature min-max scaler.  observe() folds a batch's raw rows
// into the trackers; apply() maps rows into [0,1] with a zero-range guard.
class Normalizer {
 public:
  void observe(const std::vector<std::vector<double>>& rows);
  void apply(std::vector<std::vector<double>>& rows) const;
  const std::vector<double>& feature_min() const { return min_; }
  const std::vector<double>& feature_max() const { return max_; }
  bool ready() const { return !min_.empty(); }

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

// Marks ceil(proportion * T) samples labelled via a partial Fisher-Yates
// pass seeded by (seed, batch.index).  The selection order is independent of
// the proportion, so smaller proportions select nested subsets of larger
// ones under the same seed.
void mask_labels(StreamBatch& batch, double proportion, std::uint64_t seed);

class CsvStream {
 public:
  // declared_classes = 0 discovers classes during batch 1 and locks the set;
  // a positive value fixes labels to {0 .. declared_classes-1} up front.
  CsvStream(const std::string& path, std::size_t batch_size, std::size_t declared_classes);

  std::optional<StreamBatch> next();

  std::size_t rejected_rows() const { return rejected_; }
  std::size_t n_classes() const { return class_values_.size(); }

 private:
  std::ifstream in_;
  std::size_t batch_size_ = 0;
  std::size_t declared_ = 0;
  std::size_t batch_counter_ = 0;
  std::size_t rejected_ = 0;
  bool checked_header_ = false;
  bool locked_ = false;
  std::vector<long long> class_values_;  // sorted distinct raw labels once locked
  std::vector<std::vector<double>> pending_features_;
  std::vector<long long> pending_labels_;
};

struct GaussianCluster {
  std::vector<double> mean;
  std::vector<double> stddev;
  double weight = 1.0;
  int label = 0;
};

struct Regime {
  std::vector<GaussianCluster> clusters;
};

struct SchedulePhase {
  std::size_t regime = 0;
  std::uint64_t samples = 0;
};

struct SyntheticSpec {
  std::size_t features = 0;
  std::size_t classes = 0;
  std::size_t batch_size = 0;
  std::vector<Regime> regimes;
  std::vector<SchedulePhase> schedule;  // change points may fall mid-batch

  std::uint64_t total_samples() const;
  static SyntheticSpec from_json_file(const std::string& path);
  static SyntheticSpec from_json_text(const std::string& text);
};

class SyntheticStream {
 public:
  SyntheticStream(SyntheticSpec spec, std::uint64_t seed);

  std::optional<StreamBatch> next();
  const SyntheticSpec& spec() const { return spec_; }

 private:
  SyntheticSpec spec_;
  Rng rng_;
  std::uint64_t emitted_ = 0;
  std::size_t batch_counter_ = 0;
};

// Monte-Carlo estimate of the best achievable accuracy within one regime
// (classify each draw by the maximum class-conditional mixture density).
double bayes_accuracy_estimate(const SyntheticSpec& spec, std::size_t regime_index,
                               std::size_t trials, std::uint64_t seed);

}  // namespace wsn
