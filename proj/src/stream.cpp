#include "wescatter/stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace wsn {

void Normalizer::observe(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return;
  if (min_.empty()) {
    min_.assign(rows.front().size(), std::numeric_limits<double>::infinity());
    max_.assign(rows.front().size(), -std::numeric_limits<double>::infinity());
  }
  for (const auto& row : rows)
    for (std::size_t j = 0; j < row.size(); ++j) {
      min_[j] = std::min(min_[j], row[j]);
      max_[j] = std::max(max_[j], row[j]);
    }
}

void Normalizer::apply(std::vector<std::vector<double>>& rows) const {
  for (auto& row : rows)
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double range = max_[j] - min_[j];
      row[j] = range > 0.0 ? (row[j] - min_[j]) / range : 0.0;
    }
}

void mask_labels(StreamBatch& batch, double proportion, std::uint64_t seed) {
  const std::size_t n = batch.features.size();
  batch.labelled.assign(n, 0);
  if (n == 0) return;
  const std::size_t keep =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(proportion * static_cast<double>(n))));
  Rng rng(mix_seed(seed, batch.index));
  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  // Only the first `keep` swaps run; the selection order they expose does not
  // depend on `keep`, which is what makes masks nest across proportions.
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
    std::swap(idx[i], idx[j]);
    batch.labelled[idx[i]] = 1;
  }
}

namespace {

bool parse_double(const std::string& field, double& out) {
  const char* begin = field.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0' && std::isfinite(out);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

CsvStream::CsvStream(const std::string& path, std::size_t batch_size, std::size_t declared_classes)
    : in_(path), batch_size_(batch_size), declared_(declared_classes) {
  if (!in_) throw std::runtime_error("cannot open dataset file: " + path);
  if (batch_size_ == 0) throw std::runtime_error("batch size must be positive");
  if (declared_ > 0)
    for (std::size_t c = 0; c < declared_; ++c) class_values_.push_back(static_cast<long long>(c));
}

std::optional<StreamBatch> CsvStream::next() {
  StreamBatch batch;
  batch.index = batch_counter_ + 1;

  std::string line;
  while (batch.features.size() < batch_size_ && std::getline(in_, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 2) {
      ++rejected_;
      continue;
    }
    std::vector<double> row(fields.size() - 1);
    bool ok = true;
    for (std::size_t j = 0; ok && j + 1 < fields.size(); ++j) ok = parse_double(fields[j], row[j]);
    double label_raw = 0.0;
    ok = ok && parse_double(fields.back(), label_raw);
    if (!checked_header_) {
      checked_header_ = true;
      if (!ok) continue;  // first non-numeric line is a header, not a bad row
    }
    if (!ok) {
      ++rejected_;
      continue;
    }
    const long long label = std::llround(label_raw);
    if (locked_ || declared_ > 0) {
      if (!std::binary_search(class_values_.begin(), class_values_.end(), label))
        throw std::runtime_error("class value outside the locked class set: " + std::to_string(label));
    } else {
      auto it = std::lower_bound(class_values_.begin(), class_values_.end(), label);
      if (it == class_values_.end() || *it != label) class_values_.insert(it, label);
    }
    batch.features.push_back(std::move(row));
    pending_labels_.push_back(label);
  }

  if (batch.features.empty()) return std::nullopt;
  ++batch_counter_;
  locked_ = true;  // one-hot width is fixed once the first batch is complete

  batch.n_classes = class_values_.size();
  batch.labels.resize(pending_labels_.size());
  for (std::size_t i = 0; i < pending_labels_.size(); ++i) {
    const auto it = std::lower_bound(class_values_.begin(), class_values_.end(), pending_labels_[i]);
    batch.labels[i] = static_cast<int>(it - class_values_.begin());
  }
  pending_labels_.clear();
  batch.labelled.assign(batch.features.size(), 1);
  return batch;
}

std::uint64_t SyntheticSpec::total_samples() const {
  std::uint64_t t = 0;
  for (const auto& phase : schedule) t += phase.samples;
  return t;
}

SyntheticSpec SyntheticSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open synthetic spec: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

SyntheticSpec SyntheticSpec::from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  SyntheticSpec spec;
  spec.features = j.at("features").get<std::size_t>();
  spec.classes = j.at("classes").get<std::size_t>();
  spec.batch_size = j.at("batch_size").get<std::size_t>();
  if (spec.features == 0 || spec.classes == 0 || spec.batch_size == 0)
    throw std::runtime_error("synthetic spec: features, classes and batch_size must be positive");

  for (const auto& jr : j.at("regimes")) {
    Regime regime;
    for (const auto& jc : jr.at("clusters")) {
      GaussianCluster cluster;
      cluster.mean = jc.at("mean").get<std::vector<double>>();
      cluster.stddev = jc.at("stddev").get<std::vector<double>>();
      cluster.weight = jc.value("weight", 1.0);
      cluster.label = jc.at("class").get<int>();
      if (cluster.mean.size() != spec.features || cluster.stddev.size() != spec.features)
        throw std::runtime_error("synthetic spec: cluster dimension mismatch");
      for (double s : cluster.stddev)
        if (!(s > 0.0)) throw std::runtime_error("synthetic spec: degenerate cluster spread");
      if (!(cluster.weight > 0.0)) throw std::runtime_error("synthetic spec: non-positive weight");
      if (cluster.label < 0 || static_cast<std::size_t>(cluster.label) >= spec.classes)
        throw std::runtime_error("synthetic spec: cluster class out of range");
      regime.clusters.push_back(std::move(cluster));
    }
    if (regime.clusters.empty()) throw std::runtime_error("synthetic spec: empty regime");
    spec.regimes.push_back(std::move(regime));
  }
  if (spec.regimes.empty()) throw std::runtime_error("synthetic spec: no regimes");

  for (const auto& jp : j.at("schedule")) {
    SchedulePhase phase;
    phase.regime = jp.at("regime").get<std::size_t>();
    phase.samples = jp.at("samples").get<std::uint64_t>();
    if (phase.regime >= spec.regimes.size())
      throw std::runtime_error("synthetic spec: schedule references unknown regime");
    if (phase.samples == 0) throw std::runtime_error("synthetic spec: empty schedule phase");
    spec.schedule.push_back(phase);
  }
  if (spec.schedule.empty()) throw std::runtime_error("synthetic spec: empty schedule");
  return spec;
}

SyntheticStream::SyntheticStream(SyntheticSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(mix_seed(seed, 0x53594e54ull)) {}

namespace {

const Regime& regime_at(const SyntheticSpec& spec, std::uint64_t sample_index) {
  std::uint64_t consumed = 0;
  for (const auto& phase : spec.schedule) {
    consumed += phase.samples;
    if (sample_index < consumed) return spec.regimes[phase.regime];
  }
  return spec.regimes[spec.schedule.back().regime];
}

const GaussianCluster& draw_cluster(const Regime& regime, Rng& rng) {
  double total = 0.0;
  for (const auto& c : regime.clusters) total += c.weight;
  double pick = rng.unit() * total;
  for (const auto& c : regime.clusters) {
    pick -= c.weight;
    if (pick < 0.0) return c;
  }
  return regime.clusters.back();
}

}  // namespace

std::optional<StreamBatch> SyntheticStream::next() {
  const std::uint64_t total = spec_.total_samples();
  if (emitted_ >= total) return std::nullopt;

  StreamBatch batch;
  batch.index = ++batch_counter_;
  batch.n_classes = spec_.classes;
  const std::uint64_t want = std::min<std::uint64_t>(spec_.batch_size, total - emitted_);
  batch.features.reserve(want);
  batch.labels.reserve(want);
  for (std::uint64_t k = 0; k < want; ++k) {
    const Regime& regime = regime_at(spec_, emitted_);
    const GaussianCluster& cluster = draw_cluster(regime, rng_);
    std::vector<double> row(spec_.features);
    for (std::size_t j = 0; j < spec_.features; ++j)
      row[j] = cluster.mean[j] + cluster.stddev[j] * rng_.gaussian();
    batch.features.push_back(std::move(row));
    batch.labels.push_back(cluster.label);
    ++emitted_;
  }
  batch.labelled.assign(batch.features.size(), 1);
  return batch;
}

double bayes_accuracy_estimate(const SyntheticSpec& spec, std::size_t regime_index,
                               std::size_t trials, std::uint64_t seed) {
  const Regime& regime = spec.regimes.at(regime_index);
  Rng rng(mix_seed(seed, 0xba7e5ull));
  double weight_total = 0.0;
  for (const auto& c : regime.clusters) weight_total += c.weight;

  std::size_t correct = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const GaussianCluster& cluster = draw_cluster(regime, rng);
    std::vector<double> x(spec.features);
    for (std::size_t j = 0; j < spec.features; ++j)
      x[j] = cluster.mean[j] + cluster.stddev[j] * rng.gaussian();

    std::vector<double> class_density(spec.classes, 0.0);
    for (const auto& c : regime.clusters) {
      double log_pdf = 0.0;
      for (std::size_t j = 0; j < spec.features; ++j) {
        const double z = (x[j] - c.mean[j]) / c.stddev[j];
        log_pdf += -0.5 * z * z - std::log(c.stddev[j]);
      }
      class_density[static_cast<std::size_t>(c.label)] += (c.weight / weight_total) * std::exp(log_pdf);
    }
    std::size_t best = 0;
    for (std::size_t o = 1; o < spec.classes; ++o)
      if (class_density[o] > class_density[best]) best = o;
    if (best == static_cast<std::size_t>(cluster.label)) ++correct;
  }
  return trials == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(trials);
}

}  // namespace wsn
