#include "itactf/linalg.hpp"

#include <Eigen/Cholesky>
#include <sstream>

namespace itactf {

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.cols()) + ")");
  }
  const Index i_dim = a.rows();
  const Index j_dim = b.rows();
  const Index r_dim = a.cols();
  Matrix out(i_dim * j_dim, r_dim);
  for (Index r = 0; r < r_dim; ++r) {
    for (Index i = 0; i < i_dim; ++i) {
      out.col(r).segment(i * j_dim, j_dim) = a(i, r) * b.col(r);
    }
  }
  return out;
}

RowVector mode1_unfold(const Matrix& values) {
  const Index i_dim = values.rows();
  const Index j_dim = values.cols();
  RowVector out(i_dim * j_dim);
  for (Index i = 0; i < i_dim; ++i) {
    for (Index j = 0; j < j_dim; ++j) {
      out(i * j_dim + j) = values(i, j);
    }
  }
  return out;
}

RowVector mode1_unfold(const SampleMatrix& sample) { return mode1_unfold(sample.values); }

Matrix reconstruct_slice(const RowVector& z, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols() || z.size() != a.cols()) {
    throw DimensionError("reconstruct_slice: rank mismatch between z, A, B");
  }
  return a * z.asDiagonal() * b.transpose();
}

double reconstruction_loss(const std::vector<SampleMatrix>& samples, const Matrix& z,
                           const Matrix& a, const Matrix& b) {
  if (z.rows() != static_cast<Index>(samples.size())) {
    throw DimensionError("reconstruction_loss: Z rows do not match sample count");
  }
  double loss = 0.0;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (samples[n].channels() != a.rows() || samples[n].timesteps() != b.rows()) {
      throw DimensionError("reconstruction_loss: sample " + std::to_string(n) +
                           " shape disagrees with factors");
    }
    loss += (samples[n].values - reconstruct_slice(z.row(n), a, b)).squaredNorm();
  }
  return loss;
}

double reconstruction_loss(const TensorDataset& dataset, const Matrix& z, const Matrix& a,
                           const Matrix& b) {
  return reconstruction_loss(dataset.samples, z, a, b);
}

Matrix ridge_solve(const Matrix& design, const Matrix& targets, double alpha) {
  if (design.rows() != targets.rows()) {
    throw DimensionError("ridge_solve: design and target row counts differ");
  }
  if (design.rows() < 1) {
    throw DomainError("ridge_solve: empty design matrix");
  }
  if (alpha < 0.0) {
    throw DomainError("ridge_solve: alpha must be nonnegative");
  }
  const Index r = design.cols();
  Matrix normal = design.transpose() * design;
  normal.diagonal().array() += alpha;
  Eigen::LDLT<Matrix> ldlt(normal);
  if (alpha == 0.0) {
    // rcond from the LDLT diagonal; alpha > 0 guarantees conditioning.
    const Vector d = ldlt.vectorD().cwiseAbs();
    const double dmax = d.maxCoeff();
    const double dmin = d.minCoeff();
    const double rcond = dmax > 0.0 ? dmin / dmax : 0.0;
    if (ldlt.info() != Eigen::Success || !(rcond > 1e-13)) {
      std::ostringstream msg;
      msg << "ridge_solve: singular normal matrix at alpha=0 (rcond estimate " << rcond << ")";
      throw SingularityError(msg.str());
    }
  }
  return ldlt.solve(design.transpose() * targets);
}

}  // namespace itactf
