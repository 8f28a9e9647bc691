#pragma once

#include <optional>
#include <span>
#include <vector>

#include "itactf/ita.hpp"
#include "itactf/linalg.hpp"
#include "itactf/types.hpp"

namespace itactf {

enum class FactorInit { gaussian, svd_warmstart };

struct CtfConfig {
  int rank = 16;                  // R
  double alpha = 1e-3;            // L2 regularization weight
  double beta = 0.4;              // contrastive loss weight
  std::optional<double> gamma;    // unset -> current batch size
  int max_epochs = 100;           // Q
  double plateau_rel_tol = 1e-3;  // "change in loss < 0.1%"
  int plateau_patience = 5;       // consecutive plateau epochs before stopping
  int batch_size = 32;            // N_b
  int inner_row_iters = 5;        // fixed-point iterations for the row update
  double inner_row_tol = 1e-6;    // relative-change early exit
  FactorInit init = FactorInit::gaussian;
  std::uint64_t seed = 0;

  void validate() const;
  double gamma_for_batch(Index n_batch) const;
};

/// G(gamma) for an N_b-row batch: diagonal -1/N_b, off-diagonal
/// (gamma+1)/(N_b(N_b-1)).
Matrix contrastive_gram(Index n_batch, double gamma);

/// Pairwise cosine form of the contrastive loss:
/// (gamma+1)/(N(N-1)) * sum_{n != m} cos(z_n, zaug_m) - (1/N) * sum_n cos(z_n, zaug_n).
/// Throws DegenerateRowError on zero-norm rows.
double contrastive_loss(const Matrix& z, const Matrix& z_aug, double gamma);

/// Trace form, Tr(Z^T D(Z) G(gamma) D(Zaug) Zaug); agrees with the pairwise
/// form to rounding.
double contrastive_loss_trace(const Matrix& z, const Matrix& z_aug, double gamma);

struct LossParts {
  double total = 0.0;
  double rec = 0.0;
  double con = 0.0;
  double reg = 0.0;
};

/// Full objective on a batch: reconstruction of originals and augmentations,
/// beta-weighted contrastive term (0 when beta = 0), and the alpha-weighted
/// squared norms of Z, Zaug, A, B.
LossParts total_loss(std::span<const SampleMatrix> x_batch, std::span<const SampleMatrix> xaug_batch,
                     const Matrix& z, const Matrix& z_aug, const Matrix& a, const Matrix& b,
                     const CtfConfig& cfg);

/// Shared precomputation for row solves against fixed (A, B, alpha):
/// the Khatri-Rao design and the factorized normal matrix
/// A^T A * B^T B + alpha I (Hadamard product).
class RowUpdateWorkspace {
 public:
  RowUpdateWorkspace(const Matrix& a, const Matrix& b, double alpha);

  /// w1 = mode1_unfold(x) * (A (.) B).
  RowVector w1(const SampleMatrix& x) const;
  /// Ridge solution w1 * W3 (the beta = 0 row solution).
  RowVector ridge_row(const RowVector& w1) const;
  /// v * W3 for an arbitrary row v.
  RowVector apply_w3(const RowVector& v) const;

  Index rank() const { return kr_.cols(); }

 private:
  Matrix kr_;                 // (I*J) x R
  Eigen::LDLT<Matrix> ldlt_;  // factorization of A^T A * B^T B + alpha I
};

struct RowUpdateResult {
  RowVector z;
  bool degenerate = false;  // ||z|| fell below 1e-12; correction skipped
  int iterations = 0;
};

/// Fixed-point row update: starts from the ridge solution and iterates
/// z <- w1 W3 - (beta / (2||z||)) w2 (I - z^T z / ||z||^2) W3
/// until inner_row_iters steps or relative change < inner_row_tol.
/// w2 is the caller-provided contrastive row g_n D(Zaug) Zaug.
RowUpdateResult update_z_row(const SampleMatrix& x, const RowUpdateWorkspace& workspace,
                             const RowVector& w2, double beta, int inner_row_iters,
                             double inner_row_tol);
/// Convenience overload building the workspace from (A, B, cfg).
RowUpdateResult update_z_row(const SampleMatrix& x, const Matrix& a, const Matrix& b,
                             const RowVector& w2, const CtfConfig& cfg);

enum class FactorBlock { A, B };

/// Closed-form ridge update of one factor matrix over originals plus
/// augmentations, holding everything else fixed. `other` is B when updating A
/// and A when updating B.
Matrix update_factor(const std::vector<SampleMatrix>& samples,
                     const std::vector<SampleMatrix>& augmented, const Matrix& z,
                     const Matrix& z_aug, const Matrix& other, FactorBlock which, double alpha);

/// Plateau-based early stopping: stop() turns true once the relative loss
/// change stayed below rel_tol for `patience` consecutive updates.
class PlateauDetector {
 public:
  PlateauDetector(double rel_tol, int patience) : rel_tol_(rel_tol), patience_(patience) {}

  bool update(double loss);
  int streak() const { return streak_; }

 private:
  double rel_tol_;
  int patience_;
  int streak_ = 0;
  std::optional<double> prev_;
};

struct FitResult {
  FactorModel model;
  std::vector<LossParts> epoch_loss;  // one entry per completed epoch
  int epochs_run = 0;
  bool plateaued = false;
};

/// Alternating least squares training loop over mini-batches; augmentations
/// must be aligned index-for-index with the dataset. Returns the factors plus
/// full-dataset coefficients recomputed with the final A, B.
FitResult fit(const TensorDataset& dataset, const std::vector<AugmentedPair>& augmentations,
              const CtfConfig& cfg);

/// Coefficients for unseen samples: the beta = 0 ridge row per sample, rows
/// ordered as the input.
Matrix transform(const std::vector<SampleMatrix>& samples, const FactorModel& model, double alpha);

}  // namespace itactf
