#include "itactf/baseline_augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace itactf {

void BaselineAugConfig::validate() const {
  if (jitter_sigma <= 0.0) throw DomainError("jitter_sigma must be positive");
  if (perm_max_segments < 1) throw DomainError("perm_max_segments must be >= 1");
  if (timewarp_knots < 1) throw DomainError("timewarp_knots must be >= 1");
  if (timewarp_sigma <= 0.0) throw DomainError("timewarp_sigma must be positive");
  if (mixup_theta <= 0.0) throw DomainError("mixup_theta must be positive");
}

SampleMatrix jitter(const SampleMatrix& sample, const BaselineAugConfig& cfg,
                    std::mt19937_64& rng) {
  cfg.validate();
  std::normal_distribution<double> noise(0.0, cfg.jitter_sigma);
  SampleMatrix out = sample;
  for (Index i = 0; i < out.values.rows(); ++i) {
    for (Index j = 0; j < out.values.cols(); ++j) {
      out.values(i, j) += noise(rng);
    }
  }
  return out;
}

namespace detail {

SampleMatrix permutation_with(const SampleMatrix& sample, const std::vector<Index>& boundaries,
                              const std::vector<int>& order) {
  const Index j_dim = sample.timesteps();
  // Segment s spans [edges[s], edges[s+1]).
  std::vector<Index> edges;
  edges.push_back(0);
  edges.insert(edges.end(), boundaries.begin(), boundaries.end());
  edges.push_back(j_dim);
  const std::size_t segments = edges.size() - 1;
  if (order.size() != segments) {
    throw ContractError("permutation order does not match segment count");
  }
  SampleMatrix out = sample;
  Index write = 0;
  for (int s : order) {
    const Index begin = edges[static_cast<std::size_t>(s)];
    const Index len = edges[static_cast<std::size_t>(s) + 1] - begin;
    out.values.middleCols(write, len) = sample.values.middleCols(begin, len);
    write += len;
  }
  return out;
}

SampleMatrix mixup_with_lambda(const SampleMatrix& a, const SampleMatrix& b, double lambda) {
  if (a.channels() != b.channels() || a.timesteps() != b.timesteps()) {
    throw DimensionError("mixup: sample shapes differ");
  }
  SampleMatrix out;
  out.label = a.label;
  out.values = lambda * a.values + (1.0 - lambda) * b.values;
  return out;
}

double cubic_spline_eval(const std::vector<double>& positions, const std::vector<double>& anchors,
                         double t) {
  const std::size_t n = positions.size();
  if (n != anchors.size() || n < 2) {
    throw DomainError("cubic spline needs >= 2 anchors with matching positions");
  }

  // Second derivatives of the natural spline (M[0] = M[n-1] = 0), interior
  // unknowns solved with the Thomas algorithm.
  std::vector<double> m2(n, 0.0);
  if (n > 2) {
    const std::size_t m = n - 2;
    std::vector<double> cp(m, 0.0), dp(m, 0.0);
    auto h = [&](std::size_t k) { return positions[k + 1] - positions[k]; };
    auto rhs = [&](std::size_t j) {
      const std::size_t i = j + 1;
      return 6.0 * ((anchors[i + 1] - anchors[i]) / h(i) - (anchors[i] - anchors[i - 1]) / h(i - 1));
    };
    double diag = 2.0 * (h(0) + h(1));
    cp[0] = h(1) / diag;
    dp[0] = rhs(0) / diag;
    for (std::size_t j = 1; j < m; ++j) {
      const double sub = h(j);
      diag = 2.0 * (h(j) + h(j + 1)) - sub * cp[j - 1];
      cp[j] = h(j + 1) / diag;
      dp[j] = (rhs(j) - sub * dp[j - 1]) / diag;
    }
    m2[m] = dp[m - 1];
    for (std::size_t j = m - 1; j >= 1; --j) {
      m2[j] = dp[j - 1] - cp[j - 1] * m2[j + 1];
    }
  }

  const double x = std::clamp(t, positions.front(), positions.back());
  std::size_t seg = 0;
  while (seg + 2 < n && x > positions[seg + 1]) ++seg;
  const double h = positions[seg + 1] - positions[seg];
  const double dr = positions[seg + 1] - x;
  const double dl = x - positions[seg];
  return m2[seg] * dr * dr * dr / (6.0 * h) + m2[seg + 1] * dl * dl * dl / (6.0 * h) +
         (anchors[seg] / h - m2[seg] * h / 6.0) * dr +
         (anchors[seg + 1] / h - m2[seg + 1] * h / 6.0) * dl;
}

}  // namespace detail

SampleMatrix permutation(const SampleMatrix& sample, const BaselineAugConfig& cfg,
                         std::mt19937_64& rng) {
  cfg.validate();
  const Index j_dim = sample.timesteps();
  if (j_dim < cfg.perm_max_segments) {
    throw DomainError("permutation: series shorter than perm_max_segments");
  }
  std::uniform_int_distribution<int> seg_count(1, cfg.perm_max_segments);
  const int c = seg_count(rng);
  if (c == 1) return sample;

  // Distinct interior cut points, so every segment is non-empty.
  std::vector<Index> boundaries;
  std::uniform_int_distribution<Index> cut(1, j_dim - 1);
  while (static_cast<int>(boundaries.size()) < c - 1) {
    const Index b = cut(rng);
    if (std::find(boundaries.begin(), boundaries.end(), b) == boundaries.end()) {
      boundaries.push_back(b);
    }
  }
  std::sort(boundaries.begin(), boundaries.end());

  std::vector<int> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return detail::permutation_with(sample, boundaries, order);
}

SampleMatrix timewarp(const SampleMatrix& sample, const BaselineAugConfig& cfg,
                      std::mt19937_64& rng) {
  cfg.validate();
  const Index j_dim = sample.timesteps();
  if (j_dim < 4) throw DomainError("timewarp: series must have >= 4 time steps");

  const int anchor_count = cfg.timewarp_knots + 2;
  std::vector<double> positions(static_cast<std::size_t>(anchor_count));
  std::vector<double> anchors(static_cast<std::size_t>(anchor_count));
  std::normal_distribution<double> speed(1.0, cfg.timewarp_sigma);
  for (int k = 0; k < anchor_count; ++k) {
    positions[static_cast<std::size_t>(k)] =
        static_cast<double>(j_dim - 1) * k / (anchor_count - 1);
    anchors[static_cast<std::size_t>(k)] = std::max(0.1, speed(rng));
  }

  // Positive speeds -> strictly increasing remap; rescale to end at J-1.
  std::vector<double> remap(static_cast<std::size_t>(j_dim), 0.0);
  for (Index j = 1; j < j_dim; ++j) {
    const double s =
        std::max(0.1, detail::cubic_spline_eval(positions, anchors, static_cast<double>(j - 1)));
    remap[static_cast<std::size_t>(j)] = remap[static_cast<std::size_t>(j - 1)] + s;
  }
  const double scale = static_cast<double>(j_dim - 1) / remap.back();

  SampleMatrix out = sample;
  for (Index j = 0; j < j_dim; ++j) {
    const double pos = std::clamp(remap[static_cast<std::size_t>(j)] * scale, 0.0,
                                  static_cast<double>(j_dim - 1));
    const Index left = static_cast<Index>(pos);
    const Index right = std::min(left + 1, j_dim - 1);
    const double frac = pos - static_cast<double>(left);
    out.values.col(j) = (1.0 - frac) * sample.values.col(left) + frac * sample.values.col(right);
  }
  return out;
}

SampleMatrix mixup(const SampleMatrix& a, const SampleMatrix& b, const BaselineAugConfig& cfg,
                   std::mt19937_64& rng) {
  cfg.validate();
  std::gamma_distribution<double> gamma(cfg.mixup_theta, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  const double lambda = x / (x + y);
  return detail::mixup_with_lambda(a, b, lambda);
}

}  // namespace itactf
