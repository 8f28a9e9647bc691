#include "itactf/dtw.hpp"

#include <algorithm>
#include <limits>

namespace itactf {

namespace {

// Step codes for backtrace. Tie order: diagonal beats vertical beats horizontal.
enum Step : unsigned char { kStart = 0, kDiagonal = 1, kVertical = 2, kHorizontal = 3 };

// Stacks the shape_window frames centered at each time index (edges replicated)
// so a column is the flattened local descriptor.
Matrix shape_descriptors(const Matrix& values, int window) {
  const Index i_dim = values.rows();
  const Index j_dim = values.cols();
  const int half = window / 2;
  Matrix out(i_dim * window, j_dim);
  for (Index j = 0; j < j_dim; ++j) {
    for (int w = 0; w < window; ++w) {
      Index src = std::clamp<Index>(j + w - half, 0, j_dim - 1);
      out.col(j).segment(static_cast<Index>(w) * i_dim, i_dim) = values.col(src);
    }
  }
  return out;
}

}  // namespace

void DtwVariant::validate() const {
  if (kind == DtwKind::shape && (shape_window < 1 || shape_window % 2 == 0)) {
    throw DomainError("shape DTW window must be an odd positive integer");
  }
}

void validate_warp_path(const WarpPath& path, Index query_len, Index reference_len) {
  if (path.pairs.empty()) {
    throw ContractError("warp path is empty");
  }
  if (path.pairs.front() != std::pair<int, int>(0, 0)) {
    throw ContractError("warp path must start at (0,0)");
  }
  if (path.pairs.back() !=
      std::pair<int, int>(static_cast<int>(query_len) - 1, static_cast<int>(reference_len) - 1)) {
    throw ContractError("warp path must end at (K-1,L-1)");
  }
  for (std::size_t p = 1; p < path.pairs.size(); ++p) {
    const int dk = path.pairs[p].first - path.pairs[p - 1].first;
    const int dl = path.pairs[p].second - path.pairs[p - 1].second;
    const bool unit_step = (dk == 0 || dk == 1) && (dl == 0 || dl == 1) && (dk + dl >= 1);
    if (!unit_step) {
      throw ContractError("warp path step " + std::to_string(p) + " is not in the unit step set");
    }
  }
}

DtwResult dtw_distance(const SampleMatrix& query, const SampleMatrix& reference,
                       const DtwVariant& variant) {
  variant.validate();
  if (query.channels() != reference.channels()) {
    throw DimensionError("dtw_distance: channel counts differ (" +
                         std::to_string(query.channels()) + " vs " +
                         std::to_string(reference.channels()) + ")");
  }
  if (query.timesteps() < 1 || reference.timesteps() < 1) {
    throw DomainError("dtw_distance: empty series");
  }

  Matrix q = query.values;
  Matrix r = reference.values;
  if (variant.kind == DtwKind::shape && variant.shape_window > 1) {
    q = shape_descriptors(q, variant.shape_window);
    r = shape_descriptors(r, variant.shape_window);
  }

  const Index k_len = q.cols();
  const Index l_len = r.cols();
  Matrix acc(k_len, l_len);
  Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> step(k_len, l_len);

  for (Index k = 0; k < k_len; ++k) {
    for (Index l = 0; l < l_len; ++l) {
      const double d = (q.col(k) - r.col(l)).norm();
      if (k == 0 && l == 0) {
        acc(k, l) = d;
        step(k, l) = kStart;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      unsigned char how = kStart;
      if (k > 0 && l > 0 && acc(k - 1, l - 1) < best) {
        best = acc(k - 1, l - 1);
        how = kDiagonal;
      }
      if (k > 0 && acc(k - 1, l) < best) {
        best = acc(k - 1, l);
        how = kVertical;
      }
      if (l > 0 && acc(k, l - 1) < best) {
        best = acc(k, l - 1);
        how = kHorizontal;
      }
      acc(k, l) = d + best;
      step(k, l) = how;
    }
  }

  DtwResult result;
  result.cost = acc(k_len - 1, l_len - 1);
  Index k = k_len - 1;
  Index l = l_len - 1;
  std::vector<std::pair<int, int>> rev;
  rev.reserve(static_cast<std::size_t>(k_len + l_len));
  while (true) {
    rev.emplace_back(static_cast<int>(k), static_cast<int>(l));
    if (step(k, l) == kStart) break;
    switch (step(k, l)) {
      case kDiagonal:
        --k;
        --l;
        break;
      case kVertical:
        --k;
        break;
      default:
        --l;
        break;
    }
  }
  result.path.pairs.assign(rev.rbegin(), rev.rend());
  return result;
}

SampleMatrix warp_to_reference(const SampleMatrix& query, const SampleMatrix& reference,
                               const WarpPath& path) {
  if (query.channels() != reference.channels()) {
    throw DimensionError("warp_to_reference: channel counts differ");
  }
  validate_warp_path(path, query.timesteps(), reference.timesteps());

  const Index i_dim = query.channels();
  const Index l_len = reference.timesteps();
  Matrix sums = Matrix::Zero(i_dim, l_len);
  std::vector<int> counts(static_cast<std::size_t>(l_len), 0);
  for (const auto& [k, l] : path.pairs) {
    sums.col(l) += query.values.col(k);
    ++counts[static_cast<std::size_t>(l)];
  }
  SampleMatrix out;
  out.label = query.label;
  out.values.resize(i_dim, l_len);
  for (Index l = 0; l < l_len; ++l) {
    out.values.col(l) = sums.col(l) / counts[static_cast<std::size_t>(l)];
  }
  return out;
}

}  // namespace itactf
