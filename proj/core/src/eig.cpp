// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#include "eig.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#define LAPACK_COMPLEX_CUSTOM
#include <lapacke.h>

namespace bandmat::detail {

void eig_dense_hermitian(const Matrix& H, RealVector& w, Matrix* Z) {
  const lapack_int n = static_cast<lapack_int>(H.rows());
  Matrix a = H;  // overwritten by the driver
  w.resize(n);
  const char jobz = Z ? 'V' : 'N';
  const lapack_int info = LAPACKE_zheev(LAPACK_COL_MAJOR, jobz, 'L', n,
                                        a.data(), n, w.data());
  if (info != 0)
    throw std::runtime_error("zheev failed, info=" + std::to_string(info));
  if (Z) *Z = std::move(a);
}

void eig_block_band(const BlockBandMatrix& M, double shift, RealVector& w,
                    Matrix* Z) {
  const int W = M.block_width();
  const int n = M.blocks();
  const lapack_int N = M.dim();
  if (n == 1) {
    Matrix H = M.V[0];
    H.diagonal().array() -= shift;
    eig_dense_hermitian(H, w, Z);
    return;
  }

  // Lower band storage: ab(i - j, j) = A(i, j), 0 <= i - j <= kd.
  const lapack_int kd = std::min<lapack_int>(2 * W - 1, N - 1);
  const lapack_int ldab = kd + 1;
  std::vector<Complex> ab(static_cast<size_t>(ldab) * N, Complex(0, 0));
  auto put = [&](lapack_int i, lapack_int j, Complex v) {
    if (i >= j && i - j <= kd) ab[static_cast<size_t>(j) * ldab + (i - j)] = v;
  };
  for (int b = 0; b < n; ++b) {
    const int off = b * W;
    for (int c = 0; c < W; ++c)
      for (int r = c; r < W; ++r) {
        Complex v = M.V[b](r, c);
        if (r == c) v -= shift;
        put(off + r, off + c, v);
      }
    if (b + 1 < n) {
      // Lower coupler block is T_b^+; entry (r, c) = conj(T_b(c, r)).
      const int roff = (b + 1) * W;
      for (int c = 0; c < W; ++c)
        for (int r = 0; r < W; ++r)
          put(roff + r, off + c, std::conj(M.T[b](c, r)));
    }
  }

  w.resize(N);
  const char jobz = Z ? 'V' : 'N';
  if (Z) Z->resize(N, N);
  const lapack_int info =
      LAPACKE_zhbev(LAPACK_COL_MAJOR, jobz, 'L', N, kd, ab.data(), ldab,
                    w.data(), Z ? Z->data() : nullptr, N);
  if (info != 0)
    throw std::runtime_error("zhbev failed, info=" + std::to_string(info));
}

}  // namespace bandmat::detail
