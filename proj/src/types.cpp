#include "itactf/types.hpp"

#include <cstddef>

namespace itactf {

void validate_sample(const SampleMatrix& sample) {
  if (sample.values.rows() < 1 || sample.values.cols() < 1) {
    throw DomainError("sample must have at least one channel and one time step");
  }
  if (!sample.values.allFinite()) {
    throw DomainError("sample contains NaN or Inf entries");
  }
}

std::vector<int> TensorDataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

void TensorDataset::validate() const {
  if (samples.empty()) {
    throw DomainError("dataset is empty");
  }
  if (num_classes < 1) {
    throw DomainError("dataset must declare at least one class");
  }
  const Index i = samples.front().channels();
  const Index j = samples.front().timesteps();
  for (std::size_t n = 0; n < samples.size(); ++n) {
    validate_sample(samples[n]);
    if (samples[n].channels() != i || samples[n].timesteps() != j) {
      throw DimensionError("sample " + std::to_string(n) + " has shape " +
                           std::to_string(samples[n].channels()) + "x" +
                           std::to_string(samples[n].timesteps()) + ", expected " +
                           std::to_string(i) + "x" + std::to_string(j));
    }
    if (samples[n].label < 0 || samples[n].label >= num_classes) {
      throw DomainError("sample " + std::to_string(n) + " has label " +
                        std::to_string(samples[n].label) + " outside {0.." +
                        std::to_string(num_classes - 1) + "}");
    }
  }
}

void FactorModel::validate() const {
  const Index r = A.cols();
  if (B.cols() != r || Z.cols() != r || Z_aug.cols() != r) {
    throw DimensionError("factor model blocks disagree on rank");
  }
  if (!A.allFinite() || !B.allFinite() || !Z.allFinite() || !Z_aug.allFinite()) {
    throw DomainError("factor model contains non-finite entries");
  }
}

}  // namespace itactf
