// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "bandmat/ensemble.hpp"
#include "bandmat/rng.hpp"

// Monte Carlo estimators over ensemble draws: fractional moments of
// resolvent entries, tail curves, spatial decay profiles and localization
// lengths, plus the tilted-variance identity for the Holder gap and the
// stochastic-domination bound check.

namespace bandmat {

struct EstimatorOptions {
  int groups = 16;             // median-of-means group count
  int workers = 1;             // draw-level parallelism
  int max_attempts = 200;      // resampling budget per draw
  double max_reject_frac = 0.05;
};

/// Median-of-means estimate with a robust standard error. Rejected draws
/// (singular chain blocks) are resampled on fresh substreams and counted,
/// never imputed.
struct MomentEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  int groups = 0;
  long samples = 0;
  long rejected = 0;
  double s = 0.0;
  bool unreliable = false;
};

/// E |G(x, y)|^s over fresh draws, 1-based sites, s in (0, 0.9].
MomentEstimate fractional_moment(const BandMatrixSpec& spec, double lambda,
                                 int x, int y, double s, long samples,
                                 const McStream& stream,
                                 const EstimatorOptions& opts = {});

struct TailPoint {
  double t = 0.0;
  double prob = 0.0;     // empirical P(|G(x,y)| > t)
  double stderr_ = 0.0;  // binomial
  double reference = 0.0;  // kappa W^sigma / t
  long events = 0;
};

struct TailCurve {
  std::vector<TailPoint> points;
  double kappa = 0.0, sigma = 0.0;
  long samples = 0, rejected = 0;
};

/// Empirical survival function of |G(x, y)| on a positive increasing grid,
/// with the reference curve kappa W^sigma / t for user-supplied constants.
TailCurve tail_probability(const BandMatrixSpec& spec, double lambda, int x,
                           int y, const std::vector<double>& t_grid,
                           long samples, const McStream& stream, double kappa,
                           double sigma, const EstimatorOptions& opts = {});

struct LineFit {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double xi = 0.0;  // -1 / slope
};

struct DecayPoint {
  int dist = 0;
  MomentEstimate est;
};

struct DecayProfile {
  double lambda = 0.0, s = 0.0;
  int x0 = 0;
  std::vector<DecayPoint> points;
  LineFit fit;
  int fit_window = 0;  // minimum distance entering the fit; always 3W
};

/// Fractional moments along a row of sites, with a weighted log-linear fit
/// restricted to distances beyond 3W. Throws FitDegenerateError when fewer
/// than 3 usable points remain or the fitted slope is non-negative.
DecayProfile decay_profile(const BandMatrixSpec& spec, double lambda, double s,
                           int x0, const std::vector<int>& distances,
                           long samples, const McStream& stream,
                           const EstimatorOptions& opts = {});

struct ScanRow {
  int W = 0;
  double xi = 0.0;
  enum class Status { Ok, NoPropagation, Degenerate } status = Status::Ok;
  LineFit fit;
};

struct LocalizationScan {
  std::vector<ScanRow> rows;
  double loglog_slope = 0.0;  // of ln xi against ln W
  bool slope_defined = false;
};

/// Localization length xi(W) = -1/slope per family member, plus the log-log
/// trend of xi against W. A profile whose off-diagonal moments are all
/// exactly zero (no propagation path) is reported as xi = 0; other
/// degenerate fits carry Status::Degenerate.
LocalizationScan localization_length_scan(
    const std::vector<BandMatrixSpec>& family, double lambda, double s,
    long samples, const McStream& stream, const EstimatorOptions& opts = {});

/// Distances used by the scan for a given width: 13 points from 3W + 1,
/// clipped to the matrix size.
std::vector<int> scan_distances(int W, int N);

struct HolderGapReport {
  double r = 0.0, s = 0.0;
  double h_direct = 0.0;    // (r/s) ln E e^{sX} - ln E e^{rX}
  double h_integral = 0.0;  // tilted-variance quadrature
  double se_direct = 0.0;   // group-split standard error of h_direct
  std::vector<std::pair<double, double>> var_profile;  // (q, Var_q)
};

/// Both routes to the Holder gap h(r, s) of ln-moment interpolation:
/// directly from empirical exponential moments, and as the weighted
/// integral of tilted variances Var_q over a uniform q-grid on [0, s].
/// Throws OverflowError when e^{sX} overflows; rescale X and retry.
HolderGapReport holder_gap(std::span<const double> samples_of_x, double r,
                           double s, int q_points = 64, int groups = 16);

enum class DominationModel {
  IidBernoulli,   // U_j = delta * Bernoulli(p0), independent
  MarkovCoupled,  // U_j >= delta * Bernoulli(p0) with a Markov overlay
};

struct DominationReport {
  int n = 0;
  double delta = 0.0, p0 = 0.0;
  double empirical = 0.0;   // mean of e^{-sum U_j}
  double stderr_ = 0.0;
  double bound = 0.0;       // e^{-(1 - e^{-delta}) p0 n}
  double closed_form = 0.0; // exact value, i.i.d. model only
  bool has_closed_form = false;
  bool within_bound = false;
  long samples = 0;
};

/// Checks E e^{-sum U_j} <= e^{-(1-e^{-delta}) p0 n} on models that satisfy
/// the conditional hypothesis P(U_j >= delta | others) >= p0 by
/// construction.
DominationReport conditional_domination_check(int n, double delta, double p0,
                                              DominationModel model,
                                              long samples,
                                              const McStream& stream,
                                              const EstimatorOptions& opts = {});

namespace detail {

/// Weighted least squares of y against x; weights w are inverse variances.
LineFit weighted_line_fit(const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::vector<double>& w);

/// Median-of-means reduction over per-draw values in index order.
MomentEstimate median_of_means(const std::vector<double>& values, int groups,
                               long rejected, double s,
                               double max_reject_frac);

enum class ProfileStatus { Ok, NoPropagation, Degenerate };

struct ProfileResult {
  DecayProfile profile;
  ProfileStatus status = ProfileStatus::Ok;
  std::string message;
};

ProfileResult decay_profile_nothrow(const BandMatrixSpec& spec, double lambda,
                                    double s, int x0,
                                    const std::vector<int>& distances,
                                    long samples, const McStream& stream,
                                    const EstimatorOptions& opts);

}  // namespace detail

}  // namespace bandmat
