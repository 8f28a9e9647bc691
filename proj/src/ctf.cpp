#include "itactf/ctf.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "itactf/rng.hpp"

namespace itactf {

namespace {

constexpr double kDegenerateRowNorm = 1e-12;

// Row-normalized copy (D(Z) * Z). Zero-norm rows stay zero when tolerate_zero,
// otherwise they throw.
Matrix normalized_rows(const Matrix& z, bool tolerate_zero) {
  Matrix out(z.rows(), z.cols());
  for (Index n = 0; n < z.rows(); ++n) {
    const double norm = z.row(n).norm();
    if (norm < kDegenerateRowNorm) {
      if (!tolerate_zero) {
        throw DegenerateRowError("contrastive loss: row " + std::to_string(n) +
                                 " has zero norm");
      }
      out.row(n).setZero();
    } else {
      out.row(n) = z.row(n) / norm;
    }
  }
  return out;
}

double contrastive_from_normalized(const Matrix& u, const Matrix& v, double gamma) {
  const Index n = u.rows();
  const Matrix g = contrastive_gram(n, gamma);
  return (u.cwiseProduct(g * v)).sum();
}

}  // namespace

void CtfConfig::validate() const {
  if (rank < 1) throw DomainError("rank must be >= 1");
  if (alpha < 0.0) throw DomainError("alpha must be nonnegative");
  if (beta < 0.0) throw DomainError("beta must be nonnegative");
  if (gamma.has_value() && !(*gamma > -1.0)) throw DomainError("gamma must exceed -1");
  if (max_epochs < 1) throw DomainError("max_epochs must be >= 1");
  if (plateau_patience < 1) throw DomainError("plateau_patience must be >= 1");
  if (batch_size < 1) throw DomainError("batch_size must be >= 1");
  if (beta > 0.0 && batch_size < 2) {
    throw DomainError("batch_size must be >= 2 when beta > 0");
  }
  if (inner_row_iters < 1) throw DomainError("inner_row_iters must be >= 1");
  if (inner_row_tol < 0.0) throw DomainError("inner_row_tol must be nonnegative");
}

double CtfConfig::gamma_for_batch(Index n_batch) const {
  return gamma.value_or(static_cast<double>(n_batch));
}

Matrix contrastive_gram(Index n_batch, double gamma) {
  if (n_batch < 1) throw DomainError("contrastive_gram: batch must be non-empty");
  const double n = static_cast<double>(n_batch);
  Matrix g;
  if (n_batch == 1) {
    g = Matrix::Constant(1, 1, -1.0);
  } else {
    g = Matrix::Constant(n_batch, n_batch, (gamma + 1.0) / (n * (n - 1.0)));
    g.diagonal().setConstant(-1.0 / n);
  }
  return g;
}

double contrastive_loss(const Matrix& z, const Matrix& z_aug, double gamma) {
  if (z.rows() != z_aug.rows() || z.cols() != z_aug.cols()) {
    throw DimensionError("contrastive_loss: Z and Z_aug shapes differ");
  }
  const Index n = z.rows();
  if (n < 2) throw DomainError("contrastive_loss: needs at least two rows");
  const Matrix u = normalized_rows(z, false);
  const Matrix v = normalized_rows(z_aug, false);

  double across = 0.0;
  double aligned = 0.0;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const double cos = u.row(a).dot(v.row(b));
      if (a == b) {
        aligned += cos;
      } else {
        across += cos;
      }
    }
  }
  const double nn = static_cast<double>(n);
  return (gamma + 1.0) / (nn * (nn - 1.0)) * across - aligned / nn;
}

double contrastive_loss_trace(const Matrix& z, const Matrix& z_aug, double gamma) {
  if (z.rows() != z_aug.rows() || z.cols() != z_aug.cols()) {
    throw DimensionError("contrastive_loss_trace: Z and Z_aug shapes differ");
  }
  if (z.rows() < 2) throw DomainError("contrastive_loss_trace: needs at least two rows");
  const Matrix u = normalized_rows(z, false);
  const Matrix v = normalized_rows(z_aug, false);
  return contrastive_from_normalized(u, v, gamma);
}

LossParts total_loss(std::span<const SampleMatrix> x_batch, std::span<const SampleMatrix> xaug_batch,
                     const Matrix& z, const Matrix& z_aug, const Matrix& a, const Matrix& b,
                     const CtfConfig& cfg) {
  if (x_batch.size() != xaug_batch.size()) {
    throw DimensionError("total_loss: originals and augmentations differ in count");
  }
  LossParts parts;
  std::vector<SampleMatrix> xs(x_batch.begin(), x_batch.end());
  std::vector<SampleMatrix> xas(xaug_batch.begin(), xaug_batch.end());
  parts.rec = reconstruction_loss(xs, z, a, b) + reconstruction_loss(xas, z_aug, a, b);
  parts.reg = cfg.alpha *
              (z.squaredNorm() + z_aug.squaredNorm() + a.squaredNorm() + b.squaredNorm());
  if (cfg.beta > 0.0 && z.rows() >= 2) {
    // Zero-norm rows contribute nothing here; training tolerates them.
    const Matrix u = normalized_rows(z, true);
    const Matrix v = normalized_rows(z_aug, true);
    parts.con = contrastive_from_normalized(u, v, cfg.gamma_for_batch(z.rows()));
  }
  parts.total = parts.rec + cfg.beta * parts.con + parts.reg;
  return parts;
}

RowUpdateWorkspace::RowUpdateWorkspace(const Matrix& a, const Matrix& b, double alpha) {
  if (a.cols() != b.cols()) throw DimensionError("row workspace: factor ranks differ");
  kr_ = khatri_rao(a, b);
  Matrix normal = (a.transpose() * a).cwiseProduct(b.transpose() * b);
  normal.diagonal().array() += alpha;
  ldlt_.compute(normal);
  const Vector d = ldlt_.vectorD().cwiseAbs();
  const double dmax = d.maxCoeff();
  const double rcond = dmax > 0.0 ? d.minCoeff() / dmax : 0.0;
  if (ldlt_.info() != Eigen::Success || !(rcond > 1e-14)) {
    throw SingularityError("row workspace: normal matrix A^T A * B^T B + alpha I is singular "
                           "(rcond estimate " +
                           std::to_string(rcond) + ")");
  }
}

RowVector RowUpdateWorkspace::w1(const SampleMatrix& x) const {
  if (x.values.size() != kr_.rows()) {
    throw DimensionError("row workspace: sample size disagrees with factors");
  }
  return mode1_unfold(x) * kr_;
}

RowVector RowUpdateWorkspace::ridge_row(const RowVector& w1) const { return apply_w3(w1); }

RowVector RowUpdateWorkspace::apply_w3(const RowVector& v) const {
  return ldlt_.solve(v.transpose()).transpose();
}

RowUpdateResult update_z_row(const SampleMatrix& x, const RowUpdateWorkspace& workspace,
                             const RowVector& w2, double beta, int inner_row_iters,
                             double inner_row_tol) {
  const RowVector w1 = workspace.w1(x);
  const RowVector ridge = workspace.ridge_row(w1);
  RowUpdateResult result{ridge, false, 0};
  if (beta == 0.0 || w2.isZero(0.0)) {
    return result;
  }
  if (w2.size() != ridge.size()) {
    throw DimensionError("update_z_row: w2 length disagrees with rank");
  }

  RowVector z = ridge;
  for (int it = 0; it < inner_row_iters; ++it) {
    const double norm = z.norm();
    if (norm < kDegenerateRowNorm) {
      result.z = z;
      result.degenerate = true;
      return result;
    }
    // w2 (I - z^T z / ||z||^2) projected through W3, scaled by beta/(2||z||).
    const RowVector w2_proj = w2 - (w2.dot(z) / (norm * norm)) * z;
    const RowVector next = ridge - (beta / (2.0 * norm)) * workspace.apply_w3(w2_proj);
    result.iterations = it + 1;
    const double change = (next - z).norm();
    const double scale = std::max(z.norm(), 1e-30);
    z = next;
    if (change / scale < inner_row_tol) break;
  }
  result.z = z;
  return result;
}

RowUpdateResult update_z_row(const SampleMatrix& x, const Matrix& a, const Matrix& b,
                             const RowVector& w2, const CtfConfig& cfg) {
  cfg.validate();
  const RowUpdateWorkspace workspace(a, b, cfg.alpha);
  return update_z_row(x, workspace, w2, cfg.beta, cfg.inner_row_iters, cfg.inner_row_tol);
}

Matrix update_factor(const std::vector<SampleMatrix>& samples,
                     const std::vector<SampleMatrix>& augmented, const Matrix& z,
                     const Matrix& z_aug, const Matrix& other, FactorBlock which, double alpha) {
  if (samples.size() != augmented.size()) {
    throw DimensionError("update_factor: originals and augmentations differ in count");
  }
  if (z.rows() != static_cast<Index>(samples.size()) || z_aug.rows() != z.rows() ||
      z.cols() != other.cols() || z_aug.cols() != other.cols()) {
    throw DimensionError("update_factor: coefficient shapes disagree");
  }
  const Index r = other.cols();
  const Matrix other_gram = other.transpose() * other;
  Matrix normal = (z.transpose() * z).cwiseProduct(other_gram) +
                  (z_aug.transpose() * z_aug).cwiseProduct(other_gram);
  normal.diagonal().array() += alpha;

  const Index rows = which == FactorBlock::A ? samples.front().channels()
                                             : samples.front().timesteps();
  Matrix rhs = Matrix::Zero(rows, r);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const Matrix& xo = samples[n].values;
    const Matrix& xa = augmented[n].values;
    if (which == FactorBlock::A) {
      rhs += (xo * other) * z.row(static_cast<Index>(n)).asDiagonal();
      rhs += (xa * other) * z_aug.row(static_cast<Index>(n)).asDiagonal();
    } else {
      rhs += (xo.transpose() * other) * z.row(static_cast<Index>(n)).asDiagonal();
      rhs += (xa.transpose() * other) * z_aug.row(static_cast<Index>(n)).asDiagonal();
    }
  }

  Eigen::LDLT<Matrix> ldlt(normal);
  const Vector d = ldlt.vectorD().cwiseAbs();
  const double dmax = d.maxCoeff();
  const double rcond = dmax > 0.0 ? d.minCoeff() / dmax : 0.0;
  if (alpha == 0.0 && (ldlt.info() != Eigen::Success || !(rcond > 1e-13))) {
    throw SingularityError("update_factor: singular normal matrix at alpha=0 (rcond estimate " +
                           std::to_string(rcond) + ")");
  }
  return ldlt.solve(rhs.transpose()).transpose();
}

bool PlateauDetector::update(double loss) {
  if (prev_.has_value()) {
    const double denom = std::max(std::abs(*prev_), 1e-30);
    if (std::abs(loss - *prev_) / denom < rel_tol_) {
      ++streak_;
    } else {
      streak_ = 0;
    }
  }
  prev_ = loss;
  return streak_ >= patience_;
}

namespace {

std::pair<Matrix, Matrix> init_factors(const TensorDataset& dataset, const CtfConfig& cfg) {
  const Index i_dim = dataset.channels();
  const Index j_dim = dataset.timesteps();
  const Index r = cfg.rank;
  auto rng = make_stream(cfg.seed, 0xfac70);
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(r)));
  Matrix a(i_dim, r), b(j_dim, r);
  for (Index c = 0; c < r; ++c) {
    for (Index i = 0; i < i_dim; ++i) a(i, c) = gauss(rng);
    for (Index j = 0; j < j_dim; ++j) b(j, c) = gauss(rng);
  }
  if (cfg.init == FactorInit::gaussian) {
    return {a, b};
  }

  // SVD warm start from the mode-concatenated unfoldings; Gaussian columns
  // fill in when R exceeds the available spectrum.
  Matrix cat_a(i_dim, j_dim * dataset.size());
  Matrix cat_b(j_dim, i_dim * dataset.size());
  for (Index n = 0; n < dataset.size(); ++n) {
    cat_a.middleCols(n * j_dim, j_dim) = dataset.samples[static_cast<std::size_t>(n)].values;
    cat_b.middleCols(n * i_dim, i_dim) =
        dataset.samples[static_cast<std::size_t>(n)].values.transpose();
  }
  Eigen::BDCSVD<Matrix> svd_a(cat_a, Eigen::ComputeThinU);
  Eigen::BDCSVD<Matrix> svd_b(cat_b, Eigen::ComputeThinU);
  const Index ka = std::min(r, svd_a.matrixU().cols());
  const Index kb = std::min(r, svd_b.matrixU().cols());
  a.leftCols(ka) = svd_a.matrixU().leftCols(ka);
  b.leftCols(kb) = svd_b.matrixU().leftCols(kb);
  return {a, b};
}

void check_finite(const Matrix& m, int epoch, const char* block) {
  if (!m.allFinite()) {
    throw DivergenceError(std::string("fit diverged: non-finite values in block ") + block +
                          " at epoch " + std::to_string(epoch));
  }
}

}  // namespace

FitResult fit(const TensorDataset& dataset, const std::vector<AugmentedPair>& augmentations,
              const CtfConfig& cfg) {
  cfg.validate();
  dataset.validate();
  if (augmentations.size() != dataset.samples.size()) {
    throw DimensionError("fit: need exactly one augmentation per sample");
  }
  for (std::size_t n = 0; n < augmentations.size(); ++n) {
    if (augmentations[n].original_index != static_cast<int>(n)) {
      throw ContractError("fit: augmentation " + std::to_string(n) +
                          " is not aligned with its sample");
    }
    if (augmentations[n].augmented.channels() != dataset.channels() ||
        augmentations[n].augmented.timesteps() != dataset.timesteps()) {
      throw DimensionError("fit: augmentation " + std::to_string(n) + " shape mismatch");
    }
  }

  const Index n_total = dataset.size();
  const Index r = cfg.rank;
  std::vector<SampleMatrix> aug_samples;
  aug_samples.reserve(augmentations.size());
  for (const auto& p : augmentations) aug_samples.push_back(p.augmented);

  auto [a, b] = init_factors(dataset, cfg);

  FitResult result;
  PlateauDetector plateau(cfg.plateau_rel_tol, cfg.plateau_patience);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    LossParts parts_sum;
    int batch_count = 0;

    for (Index start = 0; start < n_total; start += cfg.batch_size) {
      const Index nb = std::min<Index>(cfg.batch_size, n_total - start);
      const std::span<const SampleMatrix> xb(dataset.samples.data() + start,
                                             static_cast<std::size_t>(nb));
      const std::span<const SampleMatrix> xab(aug_samples.data() + start,
                                              static_cast<std::size_t>(nb));

      RowUpdateWorkspace workspace(a, b, cfg.alpha);

      // Ridge initialization of the batch coefficients.
      Matrix zb(nb, r), zab(nb, r);
      for (Index i = 0; i < nb; ++i) {
        zb.row(i) = workspace.ridge_row(workspace.w1(xb[static_cast<std::size_t>(i)]));
        zab.row(i) = workspace.ridge_row(workspace.w1(xab[static_cast<std::size_t>(i)]));
      }

      if (cfg.beta > 0.0 && nb >= 2) {
        const Matrix g = contrastive_gram(nb, cfg.gamma_for_batch(nb));
        // Improve Z rows against the current Zaug, then Zaug against the
        // updated Z.
        const Matrix v_aug = normalized_rows(zab, true);
        for (Index i = 0; i < nb; ++i) {
          const RowVector w2 = g.row(i) * v_aug;
          zb.row(i) = update_z_row(xb[static_cast<std::size_t>(i)], workspace, w2, cfg.beta,
                                   cfg.inner_row_iters, cfg.inner_row_tol)
                          .z;
        }
        const Matrix v_orig = normalized_rows(zb, true);
        for (Index i = 0; i < nb; ++i) {
          const RowVector w2 = g.row(i) * v_orig;
          zab.row(i) = update_z_row(xab[static_cast<std::size_t>(i)], workspace, w2, cfg.beta,
                                    cfg.inner_row_iters, cfg.inner_row_tol)
                           .z;
        }
      }
      check_finite(zb, epoch, "Z");
      check_finite(zab, epoch, "Z_aug");

      const std::vector<SampleMatrix> xs(xb.begin(), xb.end());
      const std::vector<SampleMatrix> xas(xab.begin(), xab.end());
      a = update_factor(xs, xas, zb, zab, b, FactorBlock::A, cfg.alpha);
      check_finite(a, epoch, "A");
      b = update_factor(xs, xas, zb, zab, a, FactorBlock::B, cfg.alpha);
      check_finite(b, epoch, "B");

      const LossParts batch_parts = total_loss(xb, xab, zb, zab, a, b, cfg);
      loss_sum += batch_parts.total;
      parts_sum.total += batch_parts.total;
      parts_sum.rec += batch_parts.rec;
      parts_sum.con += batch_parts.con;
      parts_sum.reg += batch_parts.reg;
      ++batch_count;
    }

    LossParts epoch_parts{parts_sum.total / batch_count, parts_sum.rec / batch_count,
                          parts_sum.con / batch_count, parts_sum.reg / batch_count};
    result.epoch_loss.push_back(epoch_parts);
    result.epochs_run = epoch;
    if (plateau.update(loss_sum / batch_count)) {
      result.plateaued = true;
      break;
    }
  }

  // Final coefficients over the whole dataset so downstream use does not
  // depend on batch boundaries.
  result.model.A = a;
  result.model.B = b;
  RowUpdateWorkspace workspace(a, b, cfg.alpha);
  result.model.Z.resize(n_total, r);
  result.model.Z_aug.resize(n_total, r);
  for (Index n = 0; n < n_total; ++n) {
    result.model.Z.row(n) =
        workspace.ridge_row(workspace.w1(dataset.samples[static_cast<std::size_t>(n)]));
    result.model.Z_aug.row(n) =
        workspace.ridge_row(workspace.w1(aug_samples[static_cast<std::size_t>(n)]));
  }
  result.model.validate();
  return result;
}

Matrix transform(const std::vector<SampleMatrix>& samples, const FactorModel& model,
                 double alpha) {
  const RowUpdateWorkspace workspace(model.A, model.B, alpha);
  Matrix z(static_cast<Index>(samples.size()), model.rank());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (samples[n].channels() != model.A.rows() || samples[n].timesteps() != model.B.rows()) {
      throw DimensionError("transform: sample " + std::to_string(n) +
                           " shape disagrees with the model");
    }
    z.row(static_cast<Index>(n)) = workspace.ridge_row(workspace.w1(samples[n]));
  }
  return z;
}

}  // namespace itactf
