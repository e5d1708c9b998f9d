// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#include "bandmat/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bandmat/parallel.hpp"
#include "eig.hpp"

namespace bandmat {

namespace {

constexpr double kPi = std::numbers::pi;

double inverse_norm(const Matrix& h) {
  RealVector w;
  detail::eig_dense_hermitian(h, w, nullptr);
  double closest = std::abs(w(0));
  for (int i = 1; i < w.size(); ++i) closest = std::min(closest, std::abs(w(i)));
  return closest > 0.0 ? 1.0 / closest : std::numeric_limits<double>::infinity();
}

WegnerCurve tail_of(const std::vector<double>& inv_norms, int W,
                    const std::vector<double>& t_grid, double kappa,
                    double ref_scale) {
  WegnerCurve c;
  c.kappa = kappa;
  c.samples = static_cast<long>(inv_norms.size());
  const double thr_scale = std::pow(double(W), 1.5);
  for (double t : t_grid) {
    long events = 0;
    for (double v : inv_norms)
      if (v > t * thr_scale) ++events;
    const double p = double(events) / double(c.samples);
    c.t.push_back(t);
    c.prob.push_back(p);
    c.stderr_.push_back(std::sqrt(p * (1.0 - p) / double(c.samples)));
    c.reference.push_back(ref_scale * kappa / t);
  }
  return c;
}

}  // namespace

SpectrumSample eigen_decompose(const BlockBandMatrix& m, bool want_vectors,
                               int cap) {
  if (m.dim() > cap)
    throw std::invalid_argument("eigen_decompose: dimension exceeds cap");
  SpectrumSample out;
  out.spec_ref = m.spec;
  detail::eig_block_band(m, 0.0, out.eigenvalues,
                         want_vectors ? &out.eigenvectors : nullptr);
  return out;
}

std::vector<SpectrumSample> sample_spectra(const BandMatrixSpec& spec,
                                           long samples, bool want_vectors,
                                           const McStream& stream,
                                           int workers) {
  spec.validate();
  std::vector<SpectrumSample> out(samples);
  parallel_for(samples, workers, [&](long i) {
    const BlockBandMatrix m = sample_block_band(spec, stream.draw(uint64_t(i)));
    out[i] = eigen_decompose(m, want_vectors);
    out[i].seed_index = stream.first_draw + uint64_t(i);
  });
  return out;
}

DosHistogram dos_histogram(const BandMatrixSpec& spec, long samples, int bins,
                           const McStream& stream, double lo, double hi,
                           int workers) {
  spec.validate();
  if (bins < 1) throw ValidationError({"bins: must be >= 1"});
  if (!(lo <= -2.0 && hi >= 2.0))
    throw ValidationError({"bins: range must cover [-2, 2] in sigma units"});
  const double sigma = effective_sigma(spec);
  if (!std::isfinite(sigma) || sigma <= 0.0)
    throw ValidationError(
        {"ensemble: effective sigma is not finite; no semicircle reference"});

  const auto spectra = sample_spectra(spec, samples, false, stream, workers);

  DosHistogram h;
  h.sigma = sigma;
  h.draws = samples;
  const double width = (hi - lo) / bins;
  std::vector<long> counts(bins, 0);
  for (const auto& s : spectra) {
    h.total += s.eigenvalues.size();
    for (long k = 0; k < s.eigenvalues.size(); ++k) {
      const double u = s.eigenvalues(k) / sigma;
      if (u < lo || u >= hi) continue;
      ++counts[static_cast<int>((u - lo) / width)];
    }
  }
  h.sup_dev = 0.0;
  h.l1_dev = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double left = lo + b * width;
    const double mid = left + 0.5 * width;
    const double dens = double(counts[b]) / (double(h.total) * width);
    const double ref =
        std::abs(mid) < 2.0 ? std::sqrt(4.0 - mid * mid) / (2.0 * kPi) : 0.0;
    h.bin_left.push_back(left);
    h.bin_right.push_back(left + width);
    h.density.push_back(dens);
    h.stderr_.push_back(std::sqrt(double(counts[b])) / (double(h.total) * width));
    h.reference.push_back(ref);
    h.sup_dev = std::max(h.sup_dev, std::abs(dens - ref));
    h.l1_dev += std::abs(dens - ref) * width;
  }
  return h;
}

PointProcessWindow rescale_near(const SpectrumSample& sample, double lambda0,
                                double halfwidth) {
  PointProcessWindow w;
  w.lambda0 = lambda0;
  w.halfwidth = halfwidth;
  const double n = double(sample.eigenvalues.size());
  for (long k = 0; k < sample.eigenvalues.size(); ++k) {
    const double v = n * (sample.eigenvalues(k) - lambda0);
    if (std::abs(v) <= halfwidth) w.rescaled.push_back(v);
  }
  return w;
}

double poisson_spacing_cdf(double s) { return 1.0 - std::exp(-s); }

double wigner_surmise_cdf(double s) {
  // density (32/pi^2) s^2 e^{-4 s^2 / pi}
  const double a = 4.0 / kPi;
  return std::erf(2.0 * s / std::sqrt(kPi)) - a * s * std::exp(-a * s * s);
}

SpacingResult spacing_distribution(const std::vector<SpectrumSample>& spectra,
                                   double lambda0, double window,
                                   Unfolding unfolding, double sigma, int bins,
                                   long min_spacings) {
  if (spectra.empty()) throw ValidationError({"spectra: empty collection"});

  // Ensemble staircase for the rank transform.
  std::vector<double> pooled;
  if (unfolding == Unfolding::Empirical) {
    for (const auto& s : spectra)
      pooled.insert(pooled.end(), s.eigenvalues.begin(), s.eigenvalues.end());
    std::sort(pooled.begin(), pooled.end());
  }
  const double draws = double(spectra.size());

  auto unfold = [&](const SpectrumSample& s, double lam) {
    if (unfolding == Unfolding::Empirical) {
      const auto it = std::upper_bound(pooled.begin(), pooled.end(), lam);
      return double(it - pooled.begin()) / draws;
    }
    const double x = std::clamp(lam / sigma, -2.0, 2.0);
    const double f =
        0.5 + (x * std::sqrt(4.0 - x * x) / 2.0 + 2.0 * std::asin(x / 2.0)) /
                  (2.0 * kPi);
    return double(s.eigenvalues.size()) * f;
  };

  std::vector<double> spacings;
  for (const auto& s : spectra) {
    double prev = 0.0;
    bool have_prev = false;
    for (long k = 0; k < s.eigenvalues.size(); ++k) {
      const double lam = s.eigenvalues(k);
      if (std::abs(lam - lambda0) > window) continue;
      const double u = unfold(s, lam);
      if (have_prev) spacings.push_back(u - prev);
      prev = u;
      have_prev = true;
    }
  }
  if (static_cast<long>(spacings.size()) < min_spacings)
    throw InsufficientStatisticsError(
        "spacing_distribution: pooled spacings below the floor (" +
        std::to_string(spacings.size()) + ")");

  SpacingResult res;
  res.count = static_cast<long>(spacings.size());
  double mean = 0.0;
  for (double v : spacings) mean += v;
  res.mean_spacing = mean / double(res.count);

  std::sort(spacings.begin(), spacings.end());
  double ks_p = 0.0, ks_w = 0.0;
  for (long i = 0; i < res.count; ++i) {
    const double fp = poisson_spacing_cdf(spacings[i]);
    const double fw = wigner_surmise_cdf(spacings[i]);
    const double lo_ecdf = double(i) / double(res.count);
    const double hi_ecdf = double(i + 1) / double(res.count);
    ks_p = std::max({ks_p, std::abs(fp - lo_ecdf), std::abs(fp - hi_ecdf)});
    ks_w = std::max({ks_w, std::abs(fw - lo_ecdf), std::abs(fw - hi_ecdf)});
  }
  res.ks_poisson = ks_p;
  res.ks_surmise = ks_w;

  const double smax = 4.0;
  const double width = smax / bins;
  std::vector<long> counts(bins, 0);
  for (double v : spacings)
    if (v >= 0.0 && v < smax) ++counts[static_cast<int>(v / width)];
  for (int b = 0; b < bins; ++b) {
    res.bin_left.push_back(b * width);
    res.bin_right.push_back((b + 1) * width);
    res.density.push_back(double(counts[b]) / (double(res.count) * width));
  }
  return res;
}

MinamiTable minami_pair_count(const std::vector<SpectrumSample>& spectra,
                              const std::vector<double>& interval_lengths,
                              double lambda0) {
  if (spectra.empty()) throw ValidationError({"spectra: empty collection"});
  MinamiTable table;
  table.draws = static_cast<long>(spectra.size());
  table.dim = static_cast<int>(spectra.front().eigenvalues.size());
  const double n2 = double(table.dim) * double(table.dim);

  for (double len : interval_lengths) {
    MinamiRow row;
    row.interval = len;
    for (const auto& s : spectra) {
      long c = 0;
      for (long k = 0; k < s.eigenvalues.size(); ++k)
        if (std::abs(s.eigenvalues(k) - lambda0) <= 0.5 * len) ++c;
      if (c >= 1) ++row.single_events;
      if (c >= 2) ++row.pair_events;
    }
    row.prob = double(row.pair_events) / double(table.draws);
    row.stderr_ = std::sqrt(row.prob * (1.0 - row.prob) / double(table.draws));
    row.rate = row.prob / n2;
    table.rows.push_back(row);
  }

  // Event-weighted log-log fit over the resolved decade [I*, 10 I*], where
  // I* is the smallest interval with enough pair events to trust its log.
  constexpr long kResolved = 15;
  double decade_lo = 0.0;
  for (const auto& row : table.rows)
    if (row.pair_events >= kResolved && row.interval > 0.0) {
      decade_lo = row.interval;
      break;
    }
  if (decade_lo > 0.0) {
    std::vector<double> x, y, w;
    for (const auto& row : table.rows)
      if (row.interval >= decade_lo && row.interval <= 10.0 * decade_lo &&
          row.pair_events >= kResolved && row.prob < 1.0) {
        x.push_back(std::log(row.interval));
        y.push_back(std::log(row.prob));
        w.push_back(double(row.pair_events));
      }
    if (x.size() >= 3) {
      table.slope = detail::weighted_line_fit(x, y, w).slope;
      table.slope_defined = true;
      table.decade_lo = decade_lo;
      table.decade_hi = 10.0 * decade_lo;
    }
  }
  return table;
}

MinamiTable minami_pair_rate(const BandMatrixSpec& spec,
                             const std::vector<double>& interval_lengths,
                             double lambda0, long samples,
                             const McStream& stream, int workers) {
  {
    std::vector<std::string> issues;
    if (interval_lengths.empty() ||
        !std::is_sorted(interval_lengths.begin(), interval_lengths.end()) ||
        interval_lengths.front() <= 0.0)
      issues.push_back("interval_lengths: must be positive and increasing");
    else if (interval_lengths.back() < 10.0 * interval_lengths.front())
      issues.push_back("interval_lengths: must span at least one decade");
    if (!issues.empty()) throw ValidationError(std::move(issues));
  }
  const auto spectra = sample_spectra(spec, samples, false, stream, workers);
  MinamiTable table = minami_pair_count(spectra, interval_lengths, lambda0);
  if (table.rows.front().pair_events == 0)
    throw InsufficientStatisticsError(
        "minami_pair_rate: no pair events at the smallest interval");
  return table;
}

EigvecCorrelator eigenvector_correlator(
    const BandMatrixSpec& spec, double r,
    const std::vector<std::pair<int, int>>& site_pairs, long samples,
    const McStream& stream, int workers) {
  spec.validate();
  const int N = spec.total_dim();
  {
    std::vector<std::string> issues;
    if (!(r > 0.0)) issues.push_back("r: window radius must be positive");
    if (site_pairs.empty()) issues.push_back("site_pairs: empty");
    for (const auto& [i, j] : site_pairs)
      if (i < 1 || i > N || j < 1 || j > N) {
        issues.push_back("site_pairs: indices must lie in 1..N");
        break;
      }
    if (!issues.empty()) throw ValidationError(std::move(issues));
  }

  const size_t np = site_pairs.size();
  std::vector<double> sums(samples * np);
  std::vector<char> empty(samples, 0);
  parallel_for(samples, workers, [&](long d) {
    const BlockBandMatrix m = sample_block_band(spec, stream.draw(uint64_t(d)));
    const SpectrumSample s = eigen_decompose(m, true);
    bool any = false;
    for (size_t p = 0; p < np; ++p) {
      const auto [i, j] = site_pairs[p];
      double sup = 0.0;
      for (long k = 0; k < s.eigenvalues.size(); ++k) {
        if (std::abs(s.eigenvalues(k)) > r) continue;
        any = true;
        sup = std::max(sup, std::abs(s.eigenvectors(i - 1, k) *
                                     s.eigenvectors(j - 1, k)));
      }
      sums[d * np + p] = sup;  // empty window: sup over empty set = 0
    }
    empty[d] = any ? 0 : 1;
  });

  EigvecCorrelator out;
  out.samples = samples;
  for (char e : empty) out.empty_window_draws += e;
  for (size_t p = 0; p < np; ++p) {
    double mean = 0.0;
    for (long d = 0; d < samples; ++d) mean += sums[d * np + p];
    mean /= double(samples);
    double var = 0.0;
    for (long d = 0; d < samples; ++d) {
      const double dv = sums[d * np + p] - mean;
      var += dv * dv;
    }
    var /= double(std::max<long>(1, samples - 1));
    out.pairs.push_back({site_pairs[p].first, site_pairs[p].second, mean,
                         std::sqrt(var / double(samples))});
  }

  std::vector<double> fx, fy, fw;
  for (const auto& pe : out.pairs) {
    const int dist = std::abs(pe.i - pe.j);
    if (dist <= 3 * spec.W || pe.value <= 0.0) continue;
    fx.push_back(double(dist));
    fy.push_back(std::log(pe.value));
    const double rel = pe.stderr_ > 0 ? pe.stderr_ / pe.value : 1e-8;
    fw.push_back(1.0 / (rel * rel));
  }
  if (fx.size() >= 3) {
    out.fit = detail::weighted_line_fit(fx, fy, fw);
    out.fit_defined = out.fit.slope < 0.0;
  }
  return out;
}

GapStatistics simplicity_check(const std::vector<SpectrumSample>& spectra,
                               double threshold) {
  GapStatistics g;
  g.threshold = threshold;
  for (const auto& s : spectra) {
    const long n = s.eigenvalues.size();
    double mg = std::numeric_limits<double>::infinity();
    for (long k = 0; k + 1 < n; ++k)
      mg = std::min(mg, s.eigenvalues(k + 1) - s.eigenvalues(k));
    if (n < 2) mg = std::numeric_limits<double>::infinity();
    g.min_gaps.push_back(mg);
    if (mg < threshold) ++g.below_threshold;
  }
  return g;
}

WegnerCurve wegner_block_tail(const DiagonalBlockLaw& law, Symmetry sym, int W,
                              const Matrix& shift_a,
                              const std::vector<double>& t_grid, long samples,
                              const McStream& stream, int workers) {
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) ||
      t_grid.front() <= 0.0)
    throw ValidationError({"t_grid: must be positive and increasing"});
  if (shift_a.rows() != W || shift_a.cols() != W)
    throw ValidationError({"shift: must be W x W"});

  std::vector<double> inv_norms(samples);
  parallel_for(samples, workers, [&](long i) {
    const Matrix v =
        sample_diagonal_block(law, sym, W, stream.draw(uint64_t(i)).substream(0));
    inv_norms[i] = inverse_norm(v - shift_a);
  });
  return tail_of(inv_norms, W, t_grid,
                 2.0 * kPi * law.sup_diagonal_density(), 1.0);
}

WegnerCurve wegner_two_block_tail(const DiagonalBlockLaw& law, Symmetry sym,
                                  int W, const Matrix& shift_a,
                                  const Matrix& shift_b, const Matrix& coupling,
                                  const std::vector<double>& t_grid,
                                  long samples, const McStream& stream,
                                  int workers) {
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) ||
      t_grid.front() <= 0.0)
    throw ValidationError({"t_grid: must be positive and increasing"});

  std::vector<double> inv_norms(samples);
  parallel_for(samples, workers, [&](long i) {
    // Two independent diagonal blocks per draw on separate substreams.
    const DrawStream d = stream.draw(uint64_t(i));
    const Matrix v1 = sample_diagonal_block(law, sym, W, d.substream(0));
    const Matrix v2 = sample_diagonal_block(law, sym, W, d.substream(1));
    Matrix h(2 * W, 2 * W);
    h.topLeftCorner(W, W) = v1 - shift_a;
    h.topRightCorner(W, W) = coupling;
    h.bottomLeftCorner(W, W) = coupling.adjoint();
    h.bottomRightCorner(W, W) = v2 - shift_b;
    inv_norms[i] = inverse_norm(h);
  });
  return tail_of(inv_norms, W, t_grid,
                 2.0 * kPi * law.sup_diagonal_density(), 2.0);
}

}  // namespace bandmat
