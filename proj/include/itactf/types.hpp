#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "itactf/errors.hpp"

namespace itactf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// One multivariate time series: `values` is channels x time (I x J).
struct SampleMatrix {
  Matrix values;
  int label = 0;

  Index channels() const { return values.rows(); }
  Index timesteps() const { return values.cols(); }
};

/// Throws unless the sample has I,J >= 1 and only finite entries.
void validate_sample(const SampleMatrix& sample);

/// Ordered collection of N equal-shape samples with labels in {0..P-1}.
struct TensorDataset {
  std::vector<SampleMatrix> samples;
  int num_classes = 0;

  Index size() const { return static_cast<Index>(samples.size()); }
  Index channels() const { return samples.empty() ? 0 : samples.front().channels(); }
  Index timesteps() const { return samples.empty() ? 0 : samples.front().timesteps(); }

  std::vector<int> labels() const;

  /// Throws unless all samples share one shape, are finite and labeled < P.
  void validate() const;
};

/// CP factor matrices plus per-sample coefficient rows for originals (Z)
/// and augmentations (Z_aug). Row n corresponds to sample n.
struct FactorModel {
  Matrix A;      // I x R, sensor factors
  Matrix B;      // J x R, temporal factors
  Matrix Z;      // N x R, coefficients of original samples
  Matrix Z_aug;  // N x R, coefficients of augmented samples

  Index rank() const { return A.cols(); }
  void validate() const;
};

}  // namespace itactf
