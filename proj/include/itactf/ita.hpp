#pragma once

#include <random>
#include <vector>

#include "itactf/dtw.hpp"
#include "itactf/types.hpp"

namespace itactf {

struct ItaConfig {
  int batch_size = 6;  // S, mini-batch drawn with replacement per query
  DtwVariant variant{};
  std::uint64_t seed = 0;
  bool same_class_prototype = true;

  void validate() const;
};

/// One augmentation, aligned with its source sample.
struct AugmentedPair {
  int original_index = 0;
  int prototype_index = 0;  // dataset index of the prototype used as reference
  SampleMatrix augmented;
};

/// Difference of class-wise mean DTW distances for batch member s:
/// (mean distance to members of other classes) - (mean distance to members of
/// s's class, excluding s itself). Throws DegenerateBatchError when either
/// group is empty.
double centroid_gap(int s, const std::vector<SampleMatrix>& batch, const DtwVariant& variant);

/// Draws a size-S mini-batch from the dataset (with replacement, the query is
/// not inserted), redraws degenerate batches up to 32 times, then falls back
/// to a stratified draw. Returns the dataset index of the batch member with
/// maximal centroid gap; with same_class_prototype the argmax is restricted to
/// the query's class. Ties go to the first drawn member.
int soft_prototype(const SampleMatrix& query, const TensorDataset& dataset, const ItaConfig& cfg,
                   std::mt19937_64& rng);

/// One augmentation per sample: each query is warped onto its dynamically
/// selected prototype. Deterministic given cfg.seed; per-sample streams make
/// the result independent of scheduling.
std::vector<AugmentedPair> augment_dataset(const TensorDataset& dataset, const ItaConfig& cfg);

}  // namespace itactf
