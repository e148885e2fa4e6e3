#include "wescatter/da3.hpp"

#include <algorithm>
#include <cmath>

#include "wescatter/fuzzy_core.hpp"

namespace wsn {

std::vector<TrainingSample> augment_labelled(const std::vector<TrainingSample>& originals,
                                             const Da3Config& cfg) {
  std::vector<TrainingSample> out;
  if (cfg.disable_augmentation) return out;
  out.reserve(originals.size());
  Rng rng(mix_seed(cfg.rng_seed, 0xda3ull));
  for (const auto& s : originals) {
    TrainingSample twin;
    twin.provenance = Provenance::augmented;
    twin.y = s.y;
    twin.x.resize(s.x.size());
    for (std::size_t j = 0; j < s.x.size(); ++j)
      twin.x[j] = std::clamp(s.x[j] + cfg.noise_std * rng.gaussian(), 0.0, 1.0);
    out.push_back(std::move(twin));
  }
  return out;
}

PseudoDecision pseudo_label(const std::vector<std::vector<double>>& per_learner_scores,
                            double confidence_threshold) {
  PseudoDecision decision;
  if (per_learner_scores.empty()) return decision;

  std::size_t agreed = 0;
  for (std::size_t m = 0; m < per_learner_scores.size(); ++m) {
    const std::vector<double>& scores = per_learner_scores[m];
    std::size_t best = 0;
    for (std::size_t o = 1; o < scores.size(); ++o)
      if (scores[o] > scores[best]) best = o;
    if (m == 0)
      agreed = best;
    else if (best != agreed)
      return decision;  // any disagreement vetoes the label
    if (confidence(scores) < confidence_threshold) return decision;
  }
  decision.accepted = true;
  decision.label = agreed;
  return decision;
}

AssembledBatch assemble_training_batch(
    const StreamBatch& batch,
    const std::vector<std::vector<std::vector<double>>>& per_sample_scores,
    const Da3Config& cfg) {
  AssembledBatch out;

  std::vector<TrainingSample> labelled;
  for (std::size_t i = 0; i < batch.features.size(); ++i) {
    if (!batch.labelled[i]) continue;
    TrainingSample s;
    s.x = batch.features[i];
    s.y.assign(batch.n_classes, 0.0);
    s.y[static_cast<std::size_t>(batch.labels[i])] = 1.0;
    labelled.push_back(std::move(s));
  }
  const std::vector<TrainingSample> twins = augment_labelled(labelled, cfg);

  out.n_label = labelled.size();
  out.n_aug = twins.size();
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    out.samples.push_back(std::move(labelled[i]));
    if (i < twins.size()) out.samples.push_back(twins[i]);
  }

  for (std::size_t i = 0; i < batch.features.size(); ++i) {
    if (batch.labelled[i]) continue;
    if (i >= per_sample_scores.size()) continue;  // batch 1 has no test pass
    const PseudoDecision d = pseudo_label(per_sample_scores[i], cfg.confidence_threshold);
    if (!d.accepted) continue;
    TrainingSample s;
    s.provenance = Provenance::pseudo;
    s.x = batch.features[i];
    s.y.assign(batch.n_classes, 0.0);
    s.y[d.label] = 1.0;
    out.samples.push_back(std::move(s));
    ++out.n_pseudo;
    if (static_cast<int>(d.label) != batch.labels[i]) ++out.n_pseudo_noisy;
  }
  return out;
}

}  // namespace wsn
