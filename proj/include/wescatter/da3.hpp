/**
 * Data augmentation and auto-annotation.  Every labelled sample gets one
 * noisy twin; unlabelled samples earn a pseudo label only when every learner
 * agrees on the class and none of them is lukewarm about it.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wescatter/stream.hpp"

namespace wsn {

enum class Provenance { original, augmented, pseudo };

struct TrainingSample {
  std::vector<double> x;
  std::vector<double> y;  // one-hot target (pseudo class for pseudo samples)
  Provenance provenance = Provenance::original;
};

struct Da3Config {
  double confidence_threshold = 0.55;
  double noise_std = 0.03162277660168379;  // sqrt of the 1e-3 injection variance
  std::uint64_t rng_seed = 0;
  bool disable_augmentation = false;
};

// One Gaussian-perturbed copy per original, clamped back into [0,1]; draw
// order is fixed (stream order, feature order), so a seed pins the output.
std::vector<TrainingSample> augment_labelled(const std::vector<TrainingSample>& originals,
                                             const Da3Config& cfg);

struct PseudoDecision {
  bool accepted = false;
  std::size_t label = 0;
};

// Unanimity + confidence gate over the per-learner score vectors of one
// unlabelled sample.
PseudoDecision pseudo_label(const std::vector<std::vector<double>>& per_learner_scores,
                            double confidence_threshold);

struct AssembledBatch {
  std::vector<TrainingSample> samples;  // original/augmented pairs, then pseudo block
  std::size_t n_label = 0;
  std::size_t n_aug = 0;
  std::size_t n_pseudo = 0;
  std::size_t n_pseudo_noisy = 0;  // accepted pseudo labels that contradict the true class
};

// Builds the training set for one batch: labelled originals interleaved with
// their augmented twins in stream order, then accepted pseudo samples in
// stream order.  per_sample_scores come from the test pass that preceded
// this batch's training, i.e. the previous ensemble state.
AssembledBatch assemble_training_batch(
    const StreamBatch& batch,
    const std::vector<std::vector<std::vector<double>>>& per_sample_scores,
    const Da3Config& cfg);

}  // namespace wsn
