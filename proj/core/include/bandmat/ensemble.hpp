// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bandmat/rng.hpp"
#include "bandmat/types.hpp"

namespace bandmat {

/// Law of the W x W Hermitian diagonal blocks. All Wigner-type laws draw
/// unscaled entries (diagonal d_i, off-diagonal a_ij) and scale the block
/// by 1/sqrt(W); scalar laws are for W = 1 runs only.
struct DiagonalBlockLaw {
  enum class Kind { GaussianWigner, HolderWigner, BoxWigner, ScalarDensity };
  enum class Scalar { Gaussian, Cauchy, Uniform };

  Kind kind = Kind::GaussianWigner;
  double alpha = 1.0;        // HolderWigner exponent, in (0, 1]
  double box_d = 1.0;        // BoxWigner diagonal half-width
  double box_a = 1.0;        // BoxWigner off-diagonal half-width
  Scalar scalar = Scalar::Gaussian;
  double uniform_a = -1.0, uniform_b = 1.0;

  static DiagonalBlockLaw gaussian_wigner() { return {}; }
  static DiagonalBlockLaw holder_wigner(double a) {
    DiagonalBlockLaw l;
    l.kind = Kind::HolderWigner;
    l.alpha = a;
    return l;
  }
  static DiagonalBlockLaw box_wigner(double d, double a) {
    DiagonalBlockLaw l;
    l.kind = Kind::BoxWigner;
    l.box_d = d;
    l.box_a = a;
    return l;
  }
  static DiagonalBlockLaw scalar_gaussian() {
    DiagonalBlockLaw l;
    l.kind = Kind::ScalarDensity;
    l.scalar = Scalar::Gaussian;
    return l;
  }
  static DiagonalBlockLaw scalar_cauchy() {
    DiagonalBlockLaw l;
    l.kind = Kind::ScalarDensity;
    l.scalar = Scalar::Cauchy;
    return l;
  }
  static DiagonalBlockLaw scalar_uniform(double a, double b) {
    DiagonalBlockLaw l;
    l.kind = Kind::ScalarDensity;
    l.scalar = Scalar::Uniform;
    l.uniform_a = a;
    l.uniform_b = b;
    return l;
  }

  void validate(std::vector<std::string>& issues, const std::string& path) const;

  /// Essential sup of the diagonal-entry density h (unscaled entries).
  double sup_diagonal_density() const;
  /// Second moment of an unscaled diagonal entry, E d^2.
  double diag_second_moment() const;
  /// Second moment of an unscaled off-diagonal entry, E|a|^2.
  double offdiag_second_moment(Symmetry sym) const;
};

/// Law of the W x W coupling blocks T_j. Triangular laws draw strictly
/// lower-triangular blocks with unscaled entries of unit-order variance,
/// scaled by 1/sqrt(W); Deterministic repeats a fixed payload.
struct OffDiagonalBlockLaw {
  enum class Kind { GaussianTriangular, UniformTriangular, Deterministic };

  Kind kind = Kind::GaussianTriangular;
  double half_width = 1.0;  // UniformTriangular entry half-width
  Matrix payload;           // Deterministic
  double payload_norm = 0.0;  // operator norm, recorded at construction

  static OffDiagonalBlockLaw gaussian_triangular() { return {}; }
  static OffDiagonalBlockLaw uniform_triangular(double hw) {
    OffDiagonalBlockLaw l;
    l.kind = Kind::UniformTriangular;
    l.half_width = hw;
    return l;
  }
  static OffDiagonalBlockLaw deterministic(Matrix m);
  static OffDiagonalBlockLaw deterministic_scalar(double t);

  void validate(std::vector<std::string>& issues, const std::string& path,
                int W) const;

  bool is_triangular() const { return kind != Kind::Deterministic; }
  /// Mean squared Frobenius norm of a sampled block, E ||T||_F^2.
  double frobenius_second_moment(Symmetry sym, int W) const;
};

/// Full description of one ensemble draw.
struct BandMatrixSpec {
  int W = 1;
  int n = 1;
  Symmetry symmetry = Symmetry::Complex;
  DiagonalBlockLaw diag_law;
  OffDiagonalBlockLaw offdiag_law;
  uint64_t seed = 0;

  int total_dim() const { return W * n; }

  /// Throws ValidationError listing every violated constraint.
  void validate() const;
};

/// A sampled matrix: n Hermitian diagonal blocks V and n-1 couplers T.
struct BlockBandMatrix {
  BandMatrixSpec spec;
  std::vector<Matrix> V;
  std::vector<Matrix> T;

  int block_width() const { return spec.W; }
  int blocks() const { return spec.n; }
  int dim() const { return spec.total_dim(); }
};

/// Samples the Gaussian band ensemble: within the band, entries are
/// 1/sqrt(W) times unit Gaussians (real on the diagonal, complex or real
/// off it, per the symmetry class); outside, exactly zero.
/// Requires diag_law GaussianWigner and offdiag_law GaussianTriangular.
BlockBandMatrix sample_gaussian_band(const BandMatrixSpec& spec,
                                     const DrawStream& stream);

/// Samples the general block ensemble: V_j i.i.d. from diag_law,
/// T_j i.i.d. from offdiag_law, all blocks mutually independent.
BlockBandMatrix sample_block_band(const BandMatrixSpec& spec,
                                  const DrawStream& stream);

/// Dense N x N expansion: block (i,i) = V_i, (i,i+1) = T_i, (i+1,i) = T_i^+.
Matrix to_dense(const BlockBandMatrix& m);

/// One W x W Hermitian block from the diagonal law on the given stream.
Matrix sample_diagonal_block(const DiagonalBlockLaw& law, Symmetry sym, int W,
                             RngStream stream);

/// Ratio rho_W(V1) / rho_W(V2) of the diagonal-block density. GaussianWigner
/// uses the closed form exp(-beta W tr(V1^2 - V2^2)); product laws multiply
/// entrywise ratios. Returns 0 when V1 is outside the support; throws
/// DegenerateDensityError when V2 is.
double density_ratio(const DiagonalBlockLaw& law, Symmetry sym,
                     const Matrix& V1, const Matrix& V2);

/// Summary of the operator norm ||V|| over sampled diagonal blocks.
struct NormStatistic {
  double mean = 0;
  double q05 = 0, q50 = 0, q95 = 0;
  double reference = 0;  // 2 sigma, sigma^2 the entry second moment
  long samples = 0;
};

NormStatistic operator_norm_statistic(const DiagonalBlockLaw& law,
                                      Symmetry sym, int W, long samples,
                                      const McStream& stream, int workers = 1);

/// Root-mean-square row weight of the dense matrix at an interior site;
/// the scale parameter of the semicircle law for this ensemble.
double effective_sigma(const BandMatrixSpec& spec);

}  // namespace bandmat
