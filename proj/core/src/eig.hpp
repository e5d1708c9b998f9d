// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
//
// Internal LAPACK-backed Hermitian eigensolvers. Block-tridiagonal input is
// handed to the banded routines (cost O(N^2 W) instead of O(N^3)); single
// blocks go through the dense driver.
#pragma once

#include "bandmat/ensemble.hpp"
#include "bandmat/types.hpp"

namespace bandmat::detail {

/// Eigenvalues (ascending) of a dense Hermitian matrix; vectors optional.
void eig_dense_hermitian(const Matrix& H, RealVector& w, Matrix* Z);

/// Eigenvalues (ascending) of a block-tridiagonal Hermitian matrix,
/// optionally shifted: eig(M - shift I). Vectors optional.
void eig_block_band(const BlockBandMatrix& M, double shift, RealVector& w,
                    Matrix* Z);

}  // namespace bandmat::detail
