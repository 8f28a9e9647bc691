#pragma once

#include "itactf/types.hpp"

namespace itactf {

/// Column-wise Kronecker product: column r of the result is kron(a_r, b_r),
/// so row (i*J + j) holds A(i,r) * B(j,r). A and B must agree on columns.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// Flattens an I x J slice to a 1 x (I*J) row, entry (i*J + j) = values(i, j).
/// The ordering matches khatri_rao: mode1_unfold(reconstruct_slice(z, A, B))
/// equals z * khatri_rao(A, B)^T.
RowVector mode1_unfold(const Matrix& values);
RowVector mode1_unfold(const SampleMatrix& sample);

/// Rank-R slice reconstruction: sum_r z_r * outer(a_r, b_r) = A diag(z) B^T.
Matrix reconstruct_slice(const RowVector& z, const Matrix& a, const Matrix& b);

/// Sum over samples of the squared Frobenius residual against A diag(z_n) B^T.
double reconstruction_loss(const TensorDataset& dataset, const Matrix& z, const Matrix& a,
                           const Matrix& b);
double reconstruction_loss(const std::vector<SampleMatrix>& samples, const Matrix& z,
                           const Matrix& a, const Matrix& b);

/// argmin_W ||design * W - targets||_F^2 + alpha ||W||_F^2 through the R x R
/// normal equations. Throws SingularityError when alpha = 0 and the normal
/// matrix is numerically singular (the message carries the rcond estimate).
Matrix ridge_solve(const Matrix& design, const Matrix& targets, double alpha);

}  // namespace itactf
