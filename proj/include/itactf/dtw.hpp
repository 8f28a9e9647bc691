#pragma once

#include <utility>
#include <vector>

#include "itactf/types.hpp"

namespace itactf {

enum class DtwKind { standard, shape };

/// `shape` computes pointwise distances on local subsequence descriptors of
/// `shape_window` frames (odd, edge-padded by replication); with window 1 it
/// degenerates to the standard variant.
struct DtwVariant {
  DtwKind kind = DtwKind::standard;
  int shape_window = 5;

  void validate() const;
};

/// Monotone alignment between a K-frame query and an L-frame reference.
/// Starts at (0,0), ends at (K-1,L-1), unit-slope step set.
struct WarpPath {
  std::vector<std::pair<int, int>> pairs;  // (query index k, reference index l)
};

struct DtwResult {
  double cost = 0.0;
  WarpPath path;
};

/// Throws ContractError unless the path is a valid warp path for a K x L pair.
void validate_warp_path(const WarpPath& path, Index query_len, Index reference_len);

/// Lowest-cost alignment under the step set {(1,0),(0,1),(1,1)}, pointwise
/// distance Euclidean over the channel vector (or over concatenated shape
/// descriptors). DP ties break diagonal > vertical > horizontal, so paths are
/// deterministic. Labels are ignored.
DtwResult dtw_distance(const SampleMatrix& query, const SampleMatrix& reference,
                       const DtwVariant& variant = {});

/// Warps the query onto the reference time axis: output column l is the mean
/// of all query columns matched to l by the path. Keeps the query's label.
SampleMatrix warp_to_reference(const SampleMatrix& query, const SampleMatrix& reference,
                               const WarpPath& path);

}  // namespace itactf
