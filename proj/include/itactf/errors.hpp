#pragma once

#include <stdexcept>
#include <string>

namespace itactf {

/// Base class for all library errors. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Incompatible matrix/tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (empty dataset, single class, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A value produced by one component is inconsistent with another's contract,
/// e.g. a warp path that does not fit the series it is applied to.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Normal matrix is numerically singular (only possible at alpha = 0).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A sampled mini-batch lacks same-class or different-class members.
class DegenerateBatchError : public Error {
 public:
  using Error::Error;
};

/// A coefficient row with zero norm where a cosine is required.
class DegenerateRowError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during optimization.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Metric is undefined for the given labels (e.g. class with zero support).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace itactf
