// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "bandmat/ensemble.hpp"
#include "bandmat/moments.hpp"
#include "bandmat/rng.hpp"

// Full-spectrum diagnostics: density of states against the semicircle,
// nearest-neighbor spacing statistics with Poisson and Wigner-surmise
// references, pair rates in shrinking intervals, eigenvector correlators,
// and inverse-norm tails of shifted diagonal blocks.

namespace bandmat {

struct SpectrumSample {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // columns; 0x0 unless requested
  BandMatrixSpec spec_ref;
  uint64_t seed_index = 0;

  bool has_vectors() const { return eigenvectors.size() > 0; }
};

/// Full Hermitian eigendecomposition of a sampled matrix. Banded storage is
/// exploited, so eigenvalues-only calls scale as O(N^2 W).
SpectrumSample eigen_decompose(const BlockBandMatrix& m, bool want_vectors,
                               int cap = 8192);

/// Draws `samples` matrices and decomposes each.
std::vector<SpectrumSample> sample_spectra(const BandMatrixSpec& spec,
                                           long samples, bool want_vectors,
                                           const McStream& stream,
                                           int workers = 1);

struct DosHistogram {
  std::vector<double> bin_left, bin_right;  // in units of sigma
  std::vector<double> density, stderr_, reference;
  double sigma = 0.0;   // scale used for normalization
  double sup_dev = 0.0, l1_dev = 0.0;
  long total = 0;       // pooled eigenvalue count (mass normalization)
  long draws = 0;
};

/// Pooled sigma-normalized eigenvalue histogram with the unit semicircle
/// reference sqrt(4 - u^2) / 2 pi at bin midpoints. Bins must cover
/// [-2 - eps, 2 + eps] in sigma units.
DosHistogram dos_histogram(const BandMatrixSpec& spec, long samples, int bins,
                           const McStream& stream, double lo = -2.25,
                           double hi = 2.25, int workers = 1);

struct PointProcessWindow {
  double lambda0 = 0.0;
  double halfwidth = 0.0;            // in rescaled units
  std::vector<double> rescaled;      // N (lambda_j - lambda0), filtered
};

/// Re-centers and re-scales the spectrum near lambda0.
PointProcessWindow rescale_near(const SpectrumSample& sample, double lambda0,
                                double halfwidth);

enum class Unfolding { Empirical, Semicircle };

struct SpacingResult {
  std::vector<double> bin_left, bin_right, density;
  double ks_poisson = 0.0;  // KS distance to 1 - e^{-s}
  double ks_surmise = 0.0;  // KS distance to the Wigner surmise CDF
  double mean_spacing = 0.0;
  long count = 0;
};

/// Nearest-neighbor spacings of unfolded eigenvalues within
/// [lambda0 - window, lambda0 + window], pooled over the collection.
/// Empirical unfolding is the ensemble rank transform; semicircle unfolding
/// uses the integrated semicircle at the given sigma.
SpacingResult spacing_distribution(const std::vector<SpectrumSample>& spectra,
                                   double lambda0, double window,
                                   Unfolding unfolding, double sigma = 1.0,
                                   int bins = 40, long min_spacings = 1000);

/// CDF references for the spacing test.
double poisson_spacing_cdf(double s);
double wigner_surmise_cdf(double s);

struct MinamiRow {
  double interval = 0.0;
  long pair_events = 0;   // draws with >= 2 eigenvalues in I
  long single_events = 0; // draws with >= 1
  double prob = 0.0;      // pair probability
  double stderr_ = 0.0;
  double rate = 0.0;      // prob / N^2
};

struct MinamiTable {
  std::vector<MinamiRow> rows;
  double slope = 0.0;  // log-log slope over the resolved decade
  bool slope_defined = false;
  double decade_lo = 0.0, decade_hi = 0.0;
  long draws = 0;
  int dim = 0;
};

/// Pair-occupancy counting on given spectra; intervals are centered at
/// lambda0 and may include zero length.
MinamiTable minami_pair_count(const std::vector<SpectrumSample>& spectra,
                              const std::vector<double>& interval_lengths,
                              double lambda0);

/// Sampling wrapper: draws spectra and counts. Interval lengths must be
/// positive, increasing, and span at least one decade. Throws
/// InsufficientStatisticsError when the smallest interval sees no pair
/// events.
MinamiTable minami_pair_rate(const BandMatrixSpec& spec,
                             const std::vector<double>& interval_lengths,
                             double lambda0, long samples,
                             const McStream& stream, int workers = 1);

struct EigvecCorrelator {
  struct PairEstimate {
    int i = 0, j = 0;
    double value = 0.0, stderr_ = 0.0;
  };
  std::vector<PairEstimate> pairs;
  LineFit fit;          // ln value against |i - j|, distances beyond 3W
  bool fit_defined = false;
  long empty_window_draws = 0;
  long samples = 0;
};

/// E[ sup_{|lambda_k| <= r} |v_k(i) v_k(j)| ] per site pair. Draws with no
/// eigenvalue in [-r, r] contribute zero (the supremum over an empty set)
/// and are tallied.
EigvecCorrelator eigenvector_correlator(
    const BandMatrixSpec& spec, double r,
    const std::vector<std::pair<int, int>>& site_pairs, long samples,
    const McStream& stream, int workers = 1);

struct GapStatistics {
  std::vector<double> min_gaps;  // per draw
  long below_threshold = 0;
  double threshold = 0.0;
};

/// Minimal eigenvalue gap per draw; counts gaps below the threshold
/// (expected zero for ensembles with almost surely simple spectra).
GapStatistics simplicity_check(const std::vector<SpectrumSample>& spectra,
                               double threshold = 1e-10);

struct WegnerCurve {
  std::vector<double> t, prob, stderr_, reference;
  double kappa = 0.0;   // 2 pi sup h
  double exponent = 1.5;  // threshold scale W^{3/2}
  long samples = 0;
};

/// Tail of the inverse norm of a shifted diagonal block:
/// P(||(V - A)^{-1}|| > t W^{3/2}) against the reference kappa / t.
WegnerCurve wegner_block_tail(const DiagonalBlockLaw& law, Symmetry sym, int W,
                              const Matrix& shift_a,
                              const std::vector<double>& t_grid, long samples,
                              const McStream& stream, int workers = 1);

/// Two-block variant with coupling block C; reference 2 kappa / t.
WegnerCurve wegner_two_block_tail(const DiagonalBlockLaw& law, Symmetry sym,
                                  int W, const Matrix& shift_a,
                                  const Matrix& shift_b, const Matrix& coupling,
                                  const std::vector<double>& t_grid,
                                  long samples, const McStream& stream,
                                  int workers = 1);

}  // namespace bandmat
