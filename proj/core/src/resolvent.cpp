// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#include "bandmat/resolvent.hpp"

#include <cmath>
#include <stdexcept>

namespace bandmat {

namespace {

// Factorizes gamma[k], records its condition estimate, and rejects blocks
// that are numerically singular (lambda is then an eigenvalue of a
// truncation up to roundoff; callers resample).
void push_factor(GammaChain& chain, int block_1based) {
  const Matrix& g = chain.gamma.back();
  const double herm_defect = (g - g.adjoint()).cwiseAbs().maxCoeff();
  if (herm_defect > 1e-10 * std::max(1.0, g.cwiseAbs().maxCoeff()))
    throw std::runtime_error("gamma chain: block lost Hermiticity");
  chain.factor.emplace_back(g);
  const double rc = chain.factor.back().rcond();
  const double cond = rc > 0.0 ? 1.0 / rc : kSingularCondThreshold * 2;
  chain.cond.push_back(cond);
  if (!(cond < kSingularCondThreshold)) throw SingularBlockError(block_1based);
}

Matrix shifted_diag(const BlockBandMatrix& m, int k0, double lambda) {
  const int W = m.block_width();
  return m.V[k0] - lambda * Matrix::Identity(W, W);
}

}  // namespace

double GammaChain::max_cond() const {
  double c = 0.0;
  for (double v : cond) c = std::max(c, v);
  return c;
}

GammaChain forward_gamma_chain(const BlockBandMatrix& m, double lambda) {
  const int n = m.blocks();
  GammaChain chain;
  chain.lambda = lambda;
  chain.direction = GammaChain::Direction::Forward;
  chain.gamma.reserve(n);
  chain.factor.reserve(n);
  chain.cond.reserve(n);

  chain.gamma.push_back(shifted_diag(m, 0, lambda));
  push_factor(chain, 1);
  for (int k = 1; k < n; ++k) {
    const Matrix& t = m.T[k - 1];
    chain.gamma.push_back(shifted_diag(m, k, lambda) -
                          t.adjoint() * chain.factor.back().solve(t));
    push_factor(chain, k + 1);
  }
  return chain;
}

GammaChain backward_ghat_chain(const BlockBandMatrix& m, double lambda) {
  const int n = m.blocks();
  GammaChain chain;
  chain.lambda = lambda;
  chain.direction = GammaChain::Direction::Backward;
  chain.gamma.resize(n);
  chain.factor.reserve(n);
  chain.cond.resize(n);

  // Built from block n down to 1; factor list is filled in step order, so
  // factor[n-1-k] factorizes gamma[k].
  std::vector<Eigen::PartialPivLU<Matrix>> factors;
  factors.reserve(n);

  for (int k = n - 1; k >= 0; --k) {
    Matrix g = shifted_diag(m, k, lambda);
    if (k + 1 < n) {
      const Matrix& t = m.T[k];
      g -= t * factors.back().solve(t.adjoint());
    }
    const double herm_defect = (g - g.adjoint()).cwiseAbs().maxCoeff();
    if (herm_defect > 1e-10 * std::max(1.0, g.cwiseAbs().maxCoeff()))
      throw std::runtime_error("gamma chain: block lost Hermiticity");
    factors.emplace_back(g);
    const double rc = factors.back().rcond();
    const double cond = rc > 0.0 ? 1.0 / rc : kSingularCondThreshold * 2;
    chain.cond[k] = cond;
    if (!(cond < kSingularCondThreshold)) throw SingularBlockError(k + 1);
    chain.gamma[k] = std::move(g);
  }
  // reorder factors to align with gamma indexing
  chain.factor.resize(n);
  for (int k = 0; k < n; ++k) chain.factor[k] = std::move(factors[n - 1 - k]);
  return chain;
}

Matrix diag_block(const BlockBandMatrix& m, const GammaChain& fwd,
                  const GammaChain& bwd, int j) {
  const int n = m.blocks();
  const int W = m.block_width();
  if (j < 1 || j > n) throw std::out_of_range("diag_block: block index");
  const Matrix eye = Matrix::Identity(W, W);
  if (j == n) return fwd.factor[n - 1].solve(eye);
  const Matrix& t = m.T[j - 1];
  const Matrix d = fwd.gamma[j - 1] - t * bwd.factor[j].solve(t.adjoint());
  Eigen::PartialPivLU<Matrix> lu(d);
  const double rc = lu.rcond();
  if (!(rc > 0.0) || 1.0 / rc >= kSingularCondThreshold)
    throw SingularBlockError(j);
  return lu.solve(eye);
}

Matrix diag_block(const BlockBandMatrix& m, double lambda, int j) {
  const GammaChain fwd = forward_gamma_chain(m, lambda);
  const GammaChain bwd = backward_ghat_chain(m, lambda);
  return diag_block(m, fwd, bwd, j);
}

Matrix offdiag_block(const BlockBandMatrix& m, const GammaChain& fwd,
                     const GammaChain& bwd, int i, int j) {
  const int n = m.blocks();
  if (i < 1 || i > n || j < 1 || j > n)
    throw std::out_of_range("offdiag_block: block index");
  if (i > j) return offdiag_block(m, fwd, bwd, j, i).adjoint().eval();
  Matrix g = diag_block(m, fwd, bwd, j);
  if (i == j) return g;
  // left-to-right product of per-factor solves, sign applied once
  Matrix p = fwd.factor[i - 1].solve(m.T[i - 1]);
  for (int k = i + 1; k < j; ++k) p = p * fwd.factor[k - 1].solve(m.T[k - 1]);
  p = p * g;
  if ((j - i) % 2) p = -p;
  return p;
}

Matrix offdiag_block(const BlockBandMatrix& m, double lambda, int i, int j) {
  const GammaChain fwd = forward_gamma_chain(m, lambda);
  const GammaChain bwd = backward_ghat_chain(m, lambda);
  return offdiag_block(m, fwd, bwd, i, j);
}

ResolventEntry entry(const BlockBandMatrix& m, const GammaChain& fwd,
                     const GammaChain& bwd, int x, int y) {
  const int N = m.dim();
  const int W = m.block_width();
  if (x < 1 || x > N || y < 1 || y > N)
    throw std::out_of_range("entry: site index");
  const int bi = (x - 1) / W, oi = (x - 1) % W;
  const int bj = (y - 1) / W, oj = (y - 1) % W;
  const Matrix block = offdiag_block(m, fwd, bwd, bi + 1, bj + 1);
  ResolventEntry e;
  e.value = block(oi, oj);
  e.x = x;
  e.y = y;
  e.lambda = fwd.lambda;
  e.max_cond = std::max(fwd.max_cond(), bwd.max_cond());
  return e;
}

ResolventEntry entry(const BlockBandMatrix& m, double lambda, int x, int y) {
  const GammaChain fwd = forward_gamma_chain(m, lambda);
  const GammaChain bwd = backward_ghat_chain(m, lambda);
  return entry(m, fwd, bwd, x, y);
}

Matrix dense_resolvent_oracle(const BlockBandMatrix& m, double lambda,
                              int cap) {
  const int N = m.dim();
  if (N > cap)
    throw std::invalid_argument("dense_resolvent_oracle: dimension " +
                                std::to_string(N) + " exceeds cap " +
                                std::to_string(cap));
  Matrix a = to_dense(m);
  a.diagonal().array() -= lambda;
  Eigen::PartialPivLU<Matrix> lu(a);
  const double rc = lu.rcond();
  if (!(rc > 1e-14))
    throw std::runtime_error("dense_resolvent_oracle: shift is numerically singular");
  return lu.inverse();
}

}  // namespace bandmat
