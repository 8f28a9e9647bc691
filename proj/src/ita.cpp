#include "itactf/ita.hpp"

#include <algorithm>
#include <cmath>

#include "itactf/parallel.hpp"
#include "itactf/rng.hpp"

namespace itactf {

void ItaConfig::validate() const {
  if (batch_size < 2) throw DomainError("ITA batch size S must be >= 2");
  variant.validate();
}

double centroid_gap(int s, const std::vector<SampleMatrix>& batch, const DtwVariant& variant) {
  if (s < 0 || s >= static_cast<int>(batch.size())) {
    throw DomainError("centroid_gap: index outside batch");
  }
  const int label = batch[static_cast<std::size_t>(s)].label;
  double same_sum = 0.0, diff_sum = 0.0;
  int same_count = 0, diff_count = 0;
  for (int t = 0; t < static_cast<int>(batch.size()); ++t) {
    if (t == s) continue;
    const double d =
        dtw_distance(batch[static_cast<std::size_t>(t)], batch[static_cast<std::size_t>(s)], variant)
            .cost;
    if (batch[static_cast<std::size_t>(t)].label == label) {
      same_sum += d;
      ++same_count;
    } else {
      diff_sum += d;
      ++diff_count;
    }
  }
  if (same_count == 0 || diff_count == 0) {
    throw DegenerateBatchError("centroid_gap: batch lacks " +
                               std::string(same_count == 0 ? "same" : "different") +
                               "-class members for index " + std::to_string(s));
  }
  return diff_sum / diff_count - same_sum / same_count;
}

namespace {

struct BatchStats {
  int same = 0;  // members with the query's label
  int diff = 0;
};

BatchStats count_classes(const TensorDataset& dataset, const std::vector<int>& indices,
                         int query_label) {
  BatchStats st;
  for (int idx : indices) {
    if (dataset.samples[static_cast<std::size_t>(idx)].label == query_label) {
      ++st.same;
    } else {
      ++st.diff;
    }
  }
  return st;
}

// A batch is usable when at least one candidate has a well-defined gap. With
// the class restriction that requires two members of the query's class plus
// one outsider; without it any class with two members next to an outsider
// will do.
bool batch_usable(const TensorDataset& dataset, const std::vector<int>& indices, int query_label,
                  bool restricted) {
  if (restricted) {
    const BatchStats st = count_classes(dataset, indices, query_label);
    return st.same >= 2 && st.diff >= 1;
  }
  std::vector<int> counts(static_cast<std::size_t>(dataset.num_classes), 0);
  for (int idx : indices) ++counts[static_cast<std::size_t>(dataset.samples[idx].label)];
  const int total = static_cast<int>(indices.size());
  for (int c : counts) {
    if (c >= 2 && total - c >= 1) return true;
  }
  return false;
}

std::vector<int> stratified_fallback(const TensorDataset& dataset, int query_label, int s,
                                     std::mt19937_64& rng) {
  std::vector<int> same_pool, diff_pool;
  for (int n = 0; n < static_cast<int>(dataset.size()); ++n) {
    if (dataset.samples[static_cast<std::size_t>(n)].label == query_label) {
      same_pool.push_back(n);
    } else {
      diff_pool.push_back(n);
    }
  }
  if (same_pool.empty() || diff_pool.empty()) {
    throw DomainError("soft_prototype: dataset lacks a second class");
  }
  // ceil(S/2) from the query's class, floored so the gap is defined for at
  // least one same-class candidate (2 same + 1 different).
  const int n_same = std::max(2, (s + 1) / 2);
  const int n_diff = std::max(1, s - n_same);
  std::vector<int> indices;
  indices.reserve(static_cast<std::size_t>(n_same + n_diff));
  std::uniform_int_distribution<std::size_t> same_draw(0, same_pool.size() - 1);
  std::uniform_int_distribution<std::size_t> diff_draw(0, diff_pool.size() - 1);
  for (int k = 0; k < n_same; ++k) indices.push_back(same_pool[same_draw(rng)]);
  for (int k = 0; k < n_diff; ++k) indices.push_back(diff_pool[diff_draw(rng)]);
  return indices;
}

int prototype_from_batch(const SampleMatrix& query, const TensorDataset& dataset,
                         const std::vector<int>& indices, const ItaConfig& cfg) {
  std::vector<SampleMatrix> batch;
  batch.reserve(indices.size());
  for (int idx : indices) batch.push_back(dataset.samples[static_cast<std::size_t>(idx)]);

  // Pairwise DTW costs, computed once per unordered pair so the gap table is
  // exactly symmetric.
  const int s_len = static_cast<int>(batch.size());
  Matrix dist = Matrix::Zero(s_len, s_len);
  for (int a = 0; a < s_len; ++a) {
    for (int b = a + 1; b < s_len; ++b) {
      dist(a, b) = dist(b, a) =
          dtw_distance(batch[static_cast<std::size_t>(a)], batch[static_cast<std::size_t>(b)],
                       cfg.variant)
              .cost;
    }
  }

  double best_gap = -std::numeric_limits<double>::infinity();
  int best = -1;
  for (int s = 0; s < s_len; ++s) {
    if (cfg.same_class_prototype && batch[static_cast<std::size_t>(s)].label != query.label) {
      continue;
    }
    const int label = batch[static_cast<std::size_t>(s)].label;
    double same_sum = 0.0, diff_sum = 0.0;
    int same_count = 0, diff_count = 0;
    for (int t = 0; t < s_len; ++t) {
      if (t == s) continue;
      if (batch[static_cast<std::size_t>(t)].label == label) {
        same_sum += dist(s, t);
        ++same_count;
      } else {
        diff_sum += dist(s, t);
        ++diff_count;
      }
    }
    if (same_count == 0 || diff_count == 0) continue;  // gap undefined for this candidate
    const double gap = diff_sum / diff_count - same_sum / same_count;
    if (gap > best_gap) {
      best_gap = gap;
      best = s;
    }
  }
  if (best < 0) {
    throw DegenerateBatchError("soft_prototype: no batch candidate has a defined centroid gap");
  }
  return indices[static_cast<std::size_t>(best)];
}

}  // namespace

int soft_prototype(const SampleMatrix& query, const TensorDataset& dataset, const ItaConfig& cfg,
                   std::mt19937_64& rng) {
  cfg.validate();
  dataset.validate();
  if (dataset.num_classes < 2) {
    throw DomainError("soft_prototype: dataset must contain at least two classes");
  }
  {
    bool has_other = false;
    for (const auto& s : dataset.samples) {
      if (s.label != query.label) {
        has_other = true;
        break;
      }
    }
    if (!has_other) {
      throw DomainError("soft_prototype: no sample of a different class in the dataset");
    }
  }

  std::uniform_int_distribution<int> draw(0, static_cast<int>(dataset.size()) - 1);
  std::vector<int> indices(static_cast<std::size_t>(cfg.batch_size));
  constexpr int kMaxRedraws = 32;
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    for (auto& idx : indices) idx = draw(rng);
    if (batch_usable(dataset, indices, query.label, cfg.same_class_prototype)) {
      return prototype_from_batch(query, dataset, indices, cfg);
    }
  }
  indices = stratified_fallback(dataset, query.label, cfg.batch_size, rng);
  return prototype_from_batch(query, dataset, indices, cfg);
}

std::vector<AugmentedPair> augment_dataset(const TensorDataset& dataset, const ItaConfig& cfg) {
  cfg.validate();
  dataset.validate();
  if (dataset.num_classes < 2) {
    throw DomainError("augment_dataset: dataset must contain at least two classes");
  }
  if (static_cast<Index>(cfg.batch_size) > dataset.size() * 4) {
    throw DomainError("augment_dataset: S exceeds 4x the dataset size");
  }

  const std::size_t n_samples = dataset.samples.size();
  std::vector<AugmentedPair> out(n_samples);
  parallel_for(n_samples, [&](std::size_t n) {
    auto rng = make_stream(cfg.seed, n);
    const SampleMatrix& query = dataset.samples[n];
    const int proto_idx = soft_prototype(query, dataset, cfg, rng);
    const SampleMatrix& proto = dataset.samples[static_cast<std::size_t>(proto_idx)];
    const DtwResult aligned = dtw_distance(query, proto, cfg.variant);
    out[n] = AugmentedPair{static_cast<int>(n), proto_idx,
                           warp_to_reference(query, proto, aligned.path)};
  });
  return out;
}

}  // namespace itactf
