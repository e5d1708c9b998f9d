// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#include "bandmat/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bandmat/parallel.hpp"
#include "bandmat/resolvent.hpp"

namespace bandmat {

namespace {

void require_exponent(double s) {
  if (!(s > 0.0) || s > 0.9)
    throw ValidationError({"s: fractional exponent must lie in (0, 0.9]"});
}

void require_sites(const BandMatrixSpec& spec, int x, int y) {
  const int N = spec.total_dim();
  if (x < 1 || x > N || y < 1 || y > N)
    throw ValidationError({"x, y: site indices must lie in 1.." +
                           std::to_string(N)});
}

double median_inplace(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// One |G(x,y)| evaluation per draw, resampling on singular chain blocks.
// Returns the absolute entry value and adds the retries to `rejected`.
double abs_entry_with_resample(const BandMatrixSpec& spec, double lambda,
                               int x, int y, const McStream& stream, long i,
                               int max_attempts, long& rejected) {
  for (int attempt = 0;; ++attempt) {
    if (attempt > max_attempts)
      throw InsufficientStatisticsError(
          "resampling budget exhausted at draw " + std::to_string(i));
    try {
      const BlockBandMatrix m =
          sample_block_band(spec, stream.draw(uint64_t(i), uint32_t(attempt)));
      const GammaChain fwd = forward_gamma_chain(m, lambda);
      const GammaChain bwd = backward_ghat_chain(m, lambda);
      return std::abs(entry(m, fwd, bwd, x, y).value);
    } catch (const SingularBlockError&) {
      ++rejected;
    }
  }
}

}  // namespace

namespace detail {

MomentEstimate median_of_means(const std::vector<double>& values, int groups,
                               long rejected, double s,
                               double max_reject_frac) {
  const long n = static_cast<long>(values.size());
  if (n == 0) {
    MomentEstimate est;
    est.s = s;
    est.rejected = rejected;
    est.unreliable = true;
    return est;
  }
  const int g = static_cast<int>(std::max<long>(1, std::min<long>(groups, n)));
  std::vector<double> sum(g, 0.0);
  std::vector<long> cnt(g, 0);
  for (long i = 0; i < n; ++i) {
    sum[i % g] += values[i];
    ++cnt[i % g];
  }
  std::vector<double> means(g);
  for (int k = 0; k < g; ++k) means[k] = cnt[k] ? sum[k] / double(cnt[k]) : 0.0;

  std::vector<double> tmp = means;
  const double med = median_inplace(tmp);
  for (double& v : tmp) v = 0.0;  // reuse for MAD
  for (int k = 0; k < g; ++k) tmp[k] = std::abs(means[k] - med);
  const double mad = median_inplace(tmp);

  MomentEstimate est;
  est.value = med;
  // 1.4826 MAD estimates the group-mean spread; 1.2533/sqrt(g) converts the
  // spread into a standard error of the median.
  est.stderr_ = 1.4826 * mad * 1.2533 / std::sqrt(double(g));
  est.groups = g;
  est.samples = n;
  est.rejected = rejected;
  est.s = s;
  est.unreliable = (n > 0 && double(rejected) >= max_reject_frac * double(n)) ||
                   (est.value != 0.0 && est.stderr_ > std::abs(est.value));
  return est;
}

LineFit weighted_line_fit(const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::vector<double>& w) {
  const size_t n = x.size();
  double sw = 0, swx = 0, swy = 0;
  for (size_t i = 0; i < n; ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
  }
  const double xm = swx / sw, ym = swy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - xm, dy = y[i] - ym;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * dy;
    syy += w[i] * dy * dy;
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  fit.slope_se = 1.0 / std::sqrt(sxx);
  double ssr = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += w[i] * r * r;
  }
  fit.r_squared = syy > 0 ? 1.0 - ssr / syy : 0.0;
  fit.xi = fit.slope < 0 ? -1.0 / fit.slope : 0.0;
  return fit;
}

ProfileResult decay_profile_nothrow(const BandMatrixSpec& spec, double lambda,
                                    double s, int x0,
                                    const std::vector<int>& distances,
                                    long samples, const McStream& stream,
                                    const EstimatorOptions& opts) {
  spec.validate();
  require_exponent(s);
  const int N = spec.total_dim();
  const int window = 3 * spec.W;
  {
    std::vector<std::string> issues;
    if (x0 < 1 || x0 > N) issues.push_back("x0: anchor site out of range");
    if (distances.empty() || !std::is_sorted(distances.begin(), distances.end()))
      issues.push_back("distances: must be non-empty and increasing");
    else {
      if (distances.front() < 1) issues.push_back("distances: must be >= 1");
      if (x0 + distances.back() > N)
        issues.push_back("distances: x0 + max distance exceeds N");
      if (distances.back() <= window)
        issues.push_back("distances: must include values beyond 3W");
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
  }

  ProfileResult out;
  DecayProfile& prof = out.profile;
  prof.lambda = lambda;
  prof.s = s;
  prof.x0 = x0;
  prof.fit_window = window;

  for (size_t p = 0; p < distances.size(); ++p) {
    const McStream sub = stream.offset(uint64_t(p) * uint64_t(samples));
    DecayPoint pt;
    pt.dist = distances[p];
    pt.est = fractional_moment(spec, lambda, x0, x0 + distances[p], s, samples,
                               sub, opts);
    prof.points.push_back(std::move(pt));
  }

  std::vector<double> fx, fy, fw;
  bool any_nonzero = false;
  for (const auto& pt : prof.points) {
    if (pt.est.value > 0.0) any_nonzero = true;
    if (pt.dist <= window || pt.est.value <= 0.0) continue;
    fx.push_back(double(pt.dist));
    fy.push_back(std::log(pt.est.value));
    const double rel = pt.est.stderr_ > 0
                           ? pt.est.stderr_ / pt.est.value
                           : 1e-8;  // deterministic point; near-exact weight
    fw.push_back(1.0 / (rel * rel));
  }

  if (fx.size() < 3) {
    out.status = any_nonzero ? detail::ProfileStatus::Degenerate
                             : detail::ProfileStatus::NoPropagation;
    out.message = any_nonzero ? "fewer than 3 usable points beyond 3W"
                              : "all off-diagonal moments are zero";
    return out;
  }
  prof.fit = weighted_line_fit(fx, fy, fw);
  if (prof.fit.slope >= 0.0) {
    out.status = detail::ProfileStatus::Degenerate;
    out.message = "non-negative fitted slope";
  }
  return out;
}

}  // namespace detail

MomentEstimate fractional_moment(const BandMatrixSpec& spec, double lambda,
                                 int x, int y, double s, long samples,
                                 const McStream& stream,
                                 const EstimatorOptions& opts) {
  spec.validate();
  require_exponent(s);
  require_sites(spec, x, y);

  std::vector<double> values(samples);
  std::vector<long> rejects(samples, 0);
  parallel_for(samples, opts.workers, [&](long i) {
    const double g = abs_entry_with_resample(spec, lambda, x, y, stream, i,
                                             opts.max_attempts, rejects[i]);
    values[i] = std::pow(g, s);
  });
  const long rejected = std::accumulate(rejects.begin(), rejects.end(), 0L);
  return detail::median_of_means(values, opts.groups, rejected, s,
                                 opts.max_reject_frac);
}

TailCurve tail_probability(const BandMatrixSpec& spec, double lambda, int x,
                           int y, const std::vector<double>& t_grid,
                           long samples, const McStream& stream, double kappa,
                           double sigma, const EstimatorOptions& opts) {
  spec.validate();
  require_sites(spec, x, y);
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) ||
      t_grid.front() <= 0.0)
    throw ValidationError({"t_grid: must be positive and increasing"});

  std::vector<double> values(samples);
  std::vector<long> rejects(samples, 0);
  parallel_for(samples, opts.workers, [&](long i) {
    values[i] = abs_entry_with_resample(spec, lambda, x, y, stream, i,
                                        opts.max_attempts, rejects[i]);
  });

  TailCurve curve;
  curve.kappa = kappa;
  curve.sigma = sigma;
  curve.samples = samples;
  curve.rejected = std::accumulate(rejects.begin(), rejects.end(), 0L);
  const double wpow = std::pow(double(spec.W), sigma);
  for (double t : t_grid) {
    TailPoint p;
    p.t = t;
    for (double v : values)
      if (v > t) ++p.events;
    p.prob = double(p.events) / double(samples);
    p.stderr_ = std::sqrt(p.prob * (1.0 - p.prob) / double(samples));
    p.reference = kappa * wpow / t;
    curve.points.push_back(p);
  }
  return curve;
}

DecayProfile decay_profile(const BandMatrixSpec& spec, double lambda, double s,
                           int x0, const std::vector<int>& distances,
                           long samples, const McStream& stream,
                           const EstimatorOptions& opts) {
  auto res = detail::decay_profile_nothrow(spec, lambda, s, x0, distances,
                                           samples, stream, opts);
  if (res.status != detail::ProfileStatus::Ok)
    throw FitDegenerateError("decay_profile: " + res.message);
  return std::move(res.profile);
}

std::vector<int> scan_distances(int W, int N) {
  const int start = 3 * W + 1;
  const int step = std::max(1, (3 * W + 1) / 2);
  std::vector<int> d;
  for (int k = 0; k < 13; ++k) {
    const int dist = start + k * step;
    if (1 + dist > N) break;
    d.push_back(dist);
  }
  return d;
}

LocalizationScan localization_length_scan(
    const std::vector<BandMatrixSpec>& family, double lambda, double s,
    long samples, const McStream& stream, const EstimatorOptions& opts) {
  if (family.empty())
    throw ValidationError({"family: at least one spec required"});
  for (const auto& spec : family) {
    spec.validate();
    if (spec.diag_law.kind != family.front().diag_law.kind ||
        spec.offdiag_law.kind != family.front().offdiag_law.kind ||
        spec.symmetry != family.front().symmetry)
      throw ValidationError({"family: all members must share the same laws"});
    if (spec.total_dim() < 30 * spec.W)
      throw ValidationError({"family: N must be at least 30 W"});
  }

  LocalizationScan scan;
  uint64_t base = 0;
  for (const auto& spec : family) {
    const auto dists = scan_distances(spec.W, spec.total_dim());
    const McStream sub = stream.offset(base);
    base += uint64_t(dists.size()) * uint64_t(samples);
    auto res = detail::decay_profile_nothrow(spec, lambda, s, 1, dists,
                                             samples, sub, opts);
    ScanRow row;
    row.W = spec.W;
    switch (res.status) {
      case detail::ProfileStatus::Ok:
        row.status = ScanRow::Status::Ok;
        row.fit = res.profile.fit;
        row.xi = res.profile.fit.xi;
        break;
      case detail::ProfileStatus::NoPropagation:
        row.status = ScanRow::Status::NoPropagation;
        row.xi = 0.0;  // no coupling path: zero localization length
        break;
      case detail::ProfileStatus::Degenerate:
        row.status = ScanRow::Status::Degenerate;
        row.xi = std::numeric_limits<double>::quiet_NaN();
        break;
    }
    scan.rows.push_back(row);
  }

  std::vector<double> lx, ly, lw;
  for (const auto& row : scan.rows)
    if (row.status == ScanRow::Status::Ok && row.xi > 0.0) {
      lx.push_back(std::log(double(row.W)));
      ly.push_back(std::log(row.xi));
      lw.push_back(1.0);
    }
  const bool distinct =
      lx.size() >= 2 && *std::max_element(lx.begin(), lx.end()) >
                            *std::min_element(lx.begin(), lx.end());
  if (distinct) {
    scan.loglog_slope = detail::weighted_line_fit(lx, ly, lw).slope;
    scan.slope_defined = true;
  }
  return scan;
}

HolderGapReport holder_gap(std::span<const double> samples_of_x, double r,
                           double s, int q_points, int groups) {
  if (!(r > 0.0) || !(r < s))
    throw ValidationError({"r, s: exponents must satisfy 0 < r < s"});
  if (samples_of_x.empty())
    throw ValidationError({"samples: empty sample set"});
  if (q_points < 2) throw ValidationError({"q_points: need at least 2"});

  const long n = static_cast<long>(samples_of_x.size());
  double xmax = -std::numeric_limits<double>::infinity();
  for (double x : samples_of_x) xmax = std::max(xmax, x);
  if (s * xmax > 700.0)
    throw OverflowError("holder_gap: e^{sX} overflows; rescale X");

  auto h_direct_of = [&](long lo, long hi) {
    double es = 0.0, er = 0.0;
    for (long i = lo; i < hi; ++i) {
      es += std::exp(s * samples_of_x[i]);
      er += std::exp(r * samples_of_x[i]);
    }
    const double cnt = double(hi - lo);
    return (r / s) * std::log(es / cnt) - std::log(er / cnt);
  };

  HolderGapReport rep;
  rep.r = r;
  rep.s = s;
  rep.h_direct = h_direct_of(0, n);

  // Group-split standard error of the direct route.
  const int g = static_cast<int>(std::min<long>(groups, n));
  if (g >= 2) {
    std::vector<double> hg;
    for (int k = 0; k < g; ++k) {
      const long lo = n * k / g, hi = n * (k + 1) / g;
      if (hi > lo) hg.push_back(h_direct_of(lo, hi));
    }
    double m = 0;
    for (double v : hg) m += v;
    m /= double(hg.size());
    double var = 0;
    for (double v : hg) var += (v - m) * (v - m);
    var /= double(hg.size() - 1);
    rep.se_direct = std::sqrt(var / double(hg.size()));
  }

  // Tilted variances on the uniform q-grid; incremental weights
  // e^{qX} = e^{(q - dq) X} e^{dq X}.
  const double dq = s / double(q_points - 1);
  std::vector<double> w(n), step(n);
  for (long i = 0; i < n; ++i) {
    w[i] = 1.0;
    step[i] = std::exp(dq * samples_of_x[i]);
  }
  rep.var_profile.reserve(q_points);
  double integral = 0.0;
  for (int k = 0; k < q_points; ++k) {
    const double q = dq * double(k);
    double sw = 0, swx = 0, swxx = 0;
    for (long i = 0; i < n; ++i) {
      const double x = samples_of_x[i];
      sw += w[i];
      swx += w[i] * x;
      swxx += w[i] * x * x;
    }
    const double mean = swx / sw;
    const double var = std::max(0.0, swxx / sw - mean * mean);
    rep.var_profile.emplace_back(q, var);
    const double kernel = std::min(r, q) * (s - std::max(r, q)) / s;
    const double trap = (k == 0 || k == q_points - 1) ? 0.5 : 1.0;
    integral += trap * kernel * var * dq;
    if (k + 1 < q_points)
      for (long i = 0; i < n; ++i) w[i] *= step[i];
  }
  rep.h_integral = integral;
  return rep;
}

DominationReport conditional_domination_check(int n, double delta, double p0,
                                              DominationModel model,
                                              long samples,
                                              const McStream& stream,
                                              const EstimatorOptions& opts) {
  {
    std::vector<std::string> issues;
    if (n < 1) issues.push_back("n: must be >= 1");
    if (!(delta > 0.0)) issues.push_back("delta: must be positive");
    if (!(p0 > 0.0) || p0 > 1.0) issues.push_back("p0: must lie in (0, 1]");
    if (!issues.empty()) throw ValidationError(std::move(issues));
  }

  // Markov overlay: U_j = delta Bern(p0) + (delta/2) [S_j = 1] with S a
  // symmetric two-state chain independent of the Bernoulli part. The
  // conditional hypothesis holds because U_j dominates an independent
  // delta Bern(p0) irrespective of the overlay.
  const double flip = 0.25;
  const double amp = 0.5 * delta;

  std::vector<double> vals(samples);
  parallel_for(samples, opts.workers, [&](long i) {
    RngStream g = stream.draw(uint64_t(i)).substream(0);
    double total = 0.0;
    bool state = false;
    for (int j = 0; j < n; ++j) {
      const bool eps = g.uniform01() < p0;
      if (model == DominationModel::MarkovCoupled) {
        if (j == 0)
          state = g.uniform01() < 0.5;
        else if (g.uniform01() < flip)
          state = !state;
        total += delta * (eps ? 1.0 : 0.0) + (state ? amp : 0.0);
      } else {
        total += delta * (eps ? 1.0 : 0.0);
      }
    }
    vals[i] = std::exp(-total);
  });

  DominationReport rep;
  rep.n = n;
  rep.delta = delta;
  rep.p0 = p0;
  rep.samples = samples;
  double mean = 0;
  for (double v : vals) mean += v;
  mean /= double(samples);
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= double(std::max<long>(1, samples - 1));
  rep.empirical = mean;
  rep.stderr_ = std::sqrt(var / double(samples));
  rep.bound = std::exp(-(1.0 - std::exp(-delta)) * p0 * double(n));
  if (model == DominationModel::IidBernoulli) {
    rep.closed_form = std::pow((1.0 - p0) + p0 * std::exp(-delta), n);
    rep.has_closed_form = true;
  }
  rep.within_bound = rep.empirical <= rep.bound * (1.0 + 3.0 * rep.stderr_);
  return rep;
}

}  // namespace bandmat
