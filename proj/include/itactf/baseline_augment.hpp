#pragma once

#include <random>
#include <vector>

#include "itactf/types.hpp"

namespace itactf {

enum class BaselineKind { jitter, permutation, timewarp, mixup };

struct BaselineAugConfig {
  BaselineKind kind = BaselineKind::jitter;
  double jitter_sigma = 0.03;
  int perm_max_segments = 5;
  int timewarp_knots = 4;
  double timewarp_sigma = 0.2;
  double mixup_theta = 2.0;
  bool mixup_same_class = true;  // draw the mixing partner from the same class
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adds iid Gaussian(0, jitter_sigma^2) noise to every entry.
SampleMatrix jitter(const SampleMatrix& sample, const BaselineAugConfig& cfg,
                    std::mt19937_64& rng);

/// Cuts the time axis into c <= perm_max_segments segments (c drawn uniformly,
/// boundaries distinct so no segment is empty) and shuffles them. All channels
/// are cut identically.
SampleMatrix permutation(const SampleMatrix& sample, const BaselineAugConfig& cfg,
                         std::mt19937_64& rng);

/// Smooth monotone distortion of the time axis: warp speeds come from a cubic
/// curve through timewarp_knots+2 anchors ~ Gaussian(1, timewarp_sigma^2)
/// floored at 0.1, their cumulative sum is rescaled to end at J-1, and columns
/// are linearly interpolated at the remapped positions.
SampleMatrix timewarp(const SampleMatrix& sample, const BaselineAugConfig& cfg,
                      std::mt19937_64& rng);

/// lambda*a + (1-lambda)*b with lambda ~ Beta(theta, theta); keeps a's label.
SampleMatrix mixup(const SampleMatrix& a, const SampleMatrix& b, const BaselineAugConfig& cfg,
                   std::mt19937_64& rng);

namespace detail {

/// Deterministic cores, exposed for direct tests.
SampleMatrix permutation_with(const SampleMatrix& sample, const std::vector<Index>& boundaries,
                              const std::vector<int>& order);
SampleMatrix mixup_with_lambda(const SampleMatrix& a, const SampleMatrix& b, double lambda);

/// Natural cubic spline through (positions, anchors), evaluated at t.
double cubic_spline_eval(const std::vector<double>& positions, const std::vector<double>& anchors,
                         double t);

}  // namespace detail

}  // namespace itactf
