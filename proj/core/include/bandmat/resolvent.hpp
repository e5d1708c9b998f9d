// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/LU>

#include "bandmat/ensemble.hpp"
#include "bandmat/types.hpp"

// Block Schur-complement chains for (X - lambda)^-1 of a block-tridiagonal
// Hermitian matrix, plus a dense direct-solve oracle for verification.
//
// Forward chain:   G_k = V_k - lambda I - T_{k-1}^+ G_{k-1}^{-1} T_{k-1},
// whose inverse is the trailing corner block of the resolvent of the
// top-left k-block truncation. The backward chain mirrors it from the other
// end; together they give any diagonal block, and the telescoping product
//   G_n(i,j) = (-1)^{j-i} G_i^{-1} T_i ... G_{j-1}^{-1} T_{j-1} G_n(j,j)
// gives the off-diagonal blocks. Every inverse application is a linear
// solve against a block factorized exactly once.

namespace bandmat {

struct GammaChain {
  enum class Direction { Forward, Backward };

  double lambda = 0.0;
  Direction direction = Direction::Forward;
  // gamma[k], 0-based. Forward: corner block of the top truncation ending at
  // block k. Backward: corner block of the bottom truncation starting at k.
  std::vector<Matrix> gamma;
  std::vector<Eigen::PartialPivLU<Matrix>> factor;
  std::vector<double> cond;  // 1-norm condition estimates

  double max_cond() const;
};

/// Condition estimate above which a chain block counts as singular.
inline constexpr double kSingularCondThreshold = 1e12;

GammaChain forward_gamma_chain(const BlockBandMatrix& m, double lambda);
GammaChain backward_ghat_chain(const BlockBandMatrix& m, double lambda);

/// W x W resolvent block (j, j), 1-based j. Overload with precomputed
/// chains for callers evaluating many blocks of one matrix.
Matrix diag_block(const BlockBandMatrix& m, double lambda, int j);
Matrix diag_block(const BlockBandMatrix& m, const GammaChain& fwd,
                  const GammaChain& bwd, int j);

/// W x W resolvent block (i, j), 1-based. For i > j returns the adjoint of
/// block (j, i).
Matrix offdiag_block(const BlockBandMatrix& m, double lambda, int i, int j);
Matrix offdiag_block(const BlockBandMatrix& m, const GammaChain& fwd,
                     const GammaChain& bwd, int i, int j);

struct ResolventEntry {
  Complex value{};
  int x = 0, y = 0;  // 1-based site indices
  double lambda = 0.0;
  double max_cond = 0.0;
};

/// Single resolvent entry <e_x, (X - lambda)^{-1} e_y>, 1-based sites.
ResolventEntry entry(const BlockBandMatrix& m, double lambda, int x, int y);
ResolventEntry entry(const BlockBandMatrix& m, const GammaChain& fwd,
                     const GammaChain& bwd, int x, int y);

/// Dense N x N inverse of (to_dense(m) - lambda I) by direct factorization.
/// Verification oracle; refuses N above `cap`.
Matrix dense_resolvent_oracle(const BlockBandMatrix& m, double lambda,
                              int cap = 2048);

}  // namespace bandmat
