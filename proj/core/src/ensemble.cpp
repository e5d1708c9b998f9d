// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#include "bandmat/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bandmat/parallel.hpp"
#include "eig.hpp"

namespace bandmat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Unscaled entry draws for the Wigner-type diagonal laws. Draw order is
// part of the reproducibility contract: diagonal entries first, then the
// upper triangle row by row.

double draw_diag_entry(const DiagonalBlockLaw& law, RngStream& g) {
  using K = DiagonalBlockLaw::Kind;
  using S = DiagonalBlockLaw::Scalar;
  switch (law.kind) {
    case K::GaussianWigner:
      return g.normal();
    case K::HolderWigner: {
      // |d| ~ density prop. to exp(-x^alpha) on (0,inf): x = Gamma(1/alpha)^(1/alpha)
      const double x = std::pow(g.gamma(1.0 / law.alpha), 1.0 / law.alpha);
      return g.uniform01() < 0.5 ? -x : x;
    }
    case K::BoxWigner:
      return g.uniform(-law.box_d, law.box_d);
    case K::ScalarDensity:
      switch (law.scalar) {
        case S::Gaussian:
          return g.normal();
        case S::Cauchy:
          return g.cauchy();
        case S::Uniform:
          return g.uniform(law.uniform_a, law.uniform_b);
      }
  }
  return 0.0;
}

Complex draw_offdiag_entry(const DiagonalBlockLaw& law, Symmetry sym,
                           RngStream& g) {
  using K = DiagonalBlockLaw::Kind;
  const bool cplx = sym == Symmetry::Complex;
  switch (law.kind) {
    case K::GaussianWigner:
      return cplx ? g.complex_normal() : Complex(g.normal(), 0);
    case K::HolderWigner: {
      if (!cplx) {
        const double x = std::pow(g.gamma(1.0 / law.alpha), 1.0 / law.alpha);
        return Complex(g.uniform01() < 0.5 ? -x : x, 0);
      }
      // planar density prop. to exp(-r^alpha): r = Gamma(2/alpha)^(1/alpha)
      const double r = std::pow(g.gamma(2.0 / law.alpha), 1.0 / law.alpha);
      const double th = 2.0 * std::numbers::pi * g.uniform01();
      return Complex(r * std::cos(th), r * std::sin(th));
    }
    case K::BoxWigner: {
      if (!cplx) return Complex(g.uniform(-law.box_a, law.box_a), 0);
      const double r = law.box_a * std::sqrt(g.uniform01());
      const double th = 2.0 * std::numbers::pi * g.uniform01();
      return Complex(r * std::cos(th), r * std::sin(th));
    }
    case K::ScalarDensity:
      break;  // W = 1 only; no off-diagonal entries
  }
  return Complex(0, 0);
}

Matrix sample_diag_block(const BandMatrixSpec& spec, RngStream g) {
  return sample_diagonal_block(spec.diag_law, spec.symmetry, spec.W,
                               std::move(g));
}

Complex draw_coupler_entry(const OffDiagonalBlockLaw& law, Symmetry sym,
                           RngStream& g) {
  using K = OffDiagonalBlockLaw::Kind;
  const bool cplx = sym == Symmetry::Complex;
  switch (law.kind) {
    case K::GaussianTriangular:
      return cplx ? g.complex_normal() : Complex(g.normal(), 0);
    case K::UniformTriangular: {
      if (!cplx) return Complex(g.uniform(-law.half_width, law.half_width), 0);
      const double r = law.half_width * std::sqrt(g.uniform01());
      const double th = 2.0 * std::numbers::pi * g.uniform01();
      return Complex(r * std::cos(th), r * std::sin(th));
    }
    case K::Deterministic:
      break;
  }
  return Complex(0, 0);
}

Matrix sample_coupler_block(const BandMatrixSpec& spec, RngStream g) {
  const int W = spec.W;
  const auto& law = spec.offdiag_law;
  if (law.kind == OffDiagonalBlockLaw::Kind::Deterministic) return law.payload;
  Matrix T = Matrix::Zero(W, W);
  const double inv_sqrt_w = 1.0 / std::sqrt(double(W));
  for (int i = 1; i < W; ++i)       // strictly lower triangle, row by row
    for (int j = 0; j < i; ++j)
      T(i, j) = draw_coupler_entry(law, spec.symmetry, g) * inv_sqrt_w;
  return T;
}

// Entrywise densities of the unscaled entries, for density_ratio. Only
// ratios are ever formed, so normalization constants may be dropped as long
// as support is handled explicitly: returns log h up to an additive
// constant, or -inf outside the support.

double log_h_unnorm(const DiagonalBlockLaw& law, double d) {
  using K = DiagonalBlockLaw::Kind;
  using S = DiagonalBlockLaw::Scalar;
  switch (law.kind) {
    case K::GaussianWigner:
      return -d * d;  // exp(-beta d^2) handled via the trace form instead
    case K::HolderWigner:
      return -std::pow(std::abs(d), law.alpha);
    case K::BoxWigner:
      return std::abs(d) < law.box_d ? 0.0 : -kInf;
    case K::ScalarDensity:
      switch (law.scalar) {
        case S::Gaussian:
          return -0.5 * d * d;
        case S::Cauchy:
          return -std::log1p(d * d);
        case S::Uniform:
          return (d >= law.uniform_a && d <= law.uniform_b) ? 0.0 : -kInf;
      }
  }
  return -kInf;
}

double log_g_unnorm(const DiagonalBlockLaw& law, Complex a) {
  using K = DiagonalBlockLaw::Kind;
  switch (law.kind) {
    case K::HolderWigner:
      return -std::pow(std::abs(a), law.alpha);
    case K::BoxWigner:
      return std::abs(a) < law.box_a ? 0.0 : -kInf;
    default:
      return 0.0;  // unreachable for the laws routed here
  }
}

}  // namespace

void DiagonalBlockLaw::validate(std::vector<std::string>& issues,
                                const std::string& path) const {
  if (kind == Kind::HolderWigner && (alpha <= 0.0 || alpha > 1.0))
    issues.push_back(path + ".alpha: must lie in (0, 1]");
  if (kind == Kind::BoxWigner && (box_d <= 0.0 || box_a <= 0.0))
    issues.push_back(path + ": box half-widths must be positive");
  if (kind == Kind::ScalarDensity && scalar == Scalar::Uniform &&
      !(uniform_a < uniform_b))
    issues.push_back(path + ": uniform law requires a < b");
}

double DiagonalBlockLaw::sup_diagonal_density() const {
  switch (kind) {
    case Kind::GaussianWigner:
      return 1.0 / std::sqrt(2.0 * std::numbers::pi);
    case Kind::HolderWigner: {
      // normalization of c_alpha exp(-|x|^alpha) by quadrature (Simpson)
      const double cut = std::pow(745.0, 1.0 / alpha);
      const int steps = 20000;
      const double h = cut / steps;
      double acc = 0.0;
      for (int i = 0; i <= steps; ++i) {
        const double x = i * h;
        const double f = std::exp(-std::pow(x, alpha));
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * f;
      }
      const double integral = 2.0 * acc * h / 3.0;  // both half-lines
      return 1.0 / integral;                        // max at x = 0
    }
    case Kind::BoxWigner:
      return 0.5 / box_d;
    case Kind::ScalarDensity:
      switch (scalar) {
        case Scalar::Gaussian:
          return 1.0 / std::sqrt(2.0 * std::numbers::pi);
        case Scalar::Cauchy:
          return 1.0 / std::numbers::pi;
        case Scalar::Uniform:
          return 1.0 / (uniform_b - uniform_a);
      }
  }
  return 0.0;
}

double DiagonalBlockLaw::diag_second_moment() const {
  switch (kind) {
    case Kind::GaussianWigner:
      return 1.0;
    case Kind::HolderWigner:
      return std::tgamma(3.0 / alpha) / std::tgamma(1.0 / alpha);
    case Kind::BoxWigner:
      return box_d * box_d / 3.0;
    case Kind::ScalarDensity:
      switch (scalar) {
        case Scalar::Gaussian:
          return 1.0;
        case Scalar::Cauchy:
          return kInf;
        case Scalar::Uniform: {
          const double a = uniform_a, b = uniform_b;
          return (a * a + a * b + b * b) / 3.0;
        }
      }
  }
  return 0.0;
}

double DiagonalBlockLaw::offdiag_second_moment(Symmetry sym) const {
  const bool cplx = sym == Symmetry::Complex;
  switch (kind) {
    case Kind::GaussianWigner:
      return 1.0;
    case Kind::HolderWigner:
      return cplx ? std::tgamma(4.0 / alpha) / std::tgamma(2.0 / alpha)
                  : std::tgamma(3.0 / alpha) / std::tgamma(1.0 / alpha);
    case Kind::BoxWigner:
      return cplx ? box_a * box_a / 2.0 : box_a * box_a / 3.0;
    case Kind::ScalarDensity:
      return 0.0;  // W = 1, no off-diagonal entries
  }
  return 0.0;
}

OffDiagonalBlockLaw OffDiagonalBlockLaw::deterministic(Matrix m) {
  OffDiagonalBlockLaw l;
  l.kind = Kind::Deterministic;
  l.payload = std::move(m);
  if (l.payload.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(l.payload.adjoint() * l.payload,
                                             Eigen::EigenvaluesOnly);
    l.payload_norm = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  return l;
}

OffDiagonalBlockLaw OffDiagonalBlockLaw::deterministic_scalar(double t) {
  Matrix m(1, 1);
  m(0, 0) = t;
  return deterministic(std::move(m));
}

void OffDiagonalBlockLaw::validate(std::vector<std::string>& issues,
                                   const std::string& path, int W) const {
  if (kind == Kind::UniformTriangular && half_width <= 0.0)
    issues.push_back(path + ".half_width: must be positive");
  if (kind == Kind::Deterministic) {
    if (payload.rows() != W || payload.cols() != W)
      issues.push_back(path + ".payload: must be " + std::to_string(W) + "x" +
                       std::to_string(W));
  }
}

double OffDiagonalBlockLaw::frobenius_second_moment(Symmetry sym,
                                                    int W) const {
  const bool cplx = sym == Symmetry::Complex;
  switch (kind) {
    case Kind::GaussianTriangular:
      return 0.5 * (W - 1);  // W(W-1)/2 entries of E|t|^2 = 1, scaled 1/W
    case Kind::UniformTriangular: {
      const double m2 =
          cplx ? half_width * half_width / 2.0 : half_width * half_width / 3.0;
      return 0.5 * (W - 1) * m2;
    }
    case Kind::Deterministic:
      return payload.squaredNorm();
  }
  return 0.0;
}

void BandMatrixSpec::validate() const {
  std::vector<std::string> issues;
  if (W < 1) issues.push_back("ensemble.W: must be >= 1");
  if (n < 1) issues.push_back("ensemble.n: must be >= 1");
  if (diag_law.kind == DiagonalBlockLaw::Kind::ScalarDensity && W != 1)
    issues.push_back("ensemble.diag_law: scalar laws require W = 1");
  diag_law.validate(issues, "ensemble.diag_law");
  offdiag_law.validate(issues, "ensemble.offdiag_law", W);
  if (symmetry == Symmetry::Real &&
      offdiag_law.kind == OffDiagonalBlockLaw::Kind::Deterministic &&
      offdiag_law.payload.imag().cwiseAbs().maxCoeff() != 0.0)
    issues.push_back(
        "ensemble.offdiag_law.payload: real symmetry requires a real payload");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

BlockBandMatrix sample_block_band(const BandMatrixSpec& spec,
                                  const DrawStream& stream) {
  spec.validate();
  BlockBandMatrix m;
  m.spec = spec;
  m.V.reserve(spec.n);
  m.T.reserve(spec.n - 1);
  // substreams: block V_j at j, block T_j at n + j
  for (int j = 0; j < spec.n; ++j)
    m.V.push_back(sample_diag_block(spec, stream.substream(j)));
  for (int j = 0; j + 1 < spec.n; ++j)
    m.T.push_back(sample_coupler_block(spec, stream.substream(spec.n + j)));
  return m;
}

BlockBandMatrix sample_gaussian_band(const BandMatrixSpec& spec,
                                     const DrawStream& stream) {
  std::vector<std::string> issues;
  if (spec.diag_law.kind != DiagonalBlockLaw::Kind::GaussianWigner)
    issues.push_back("ensemble.diag_law: Gaussian band requires GaussianWigner");
  if (spec.offdiag_law.kind != OffDiagonalBlockLaw::Kind::GaussianTriangular)
    issues.push_back(
        "ensemble.offdiag_law: Gaussian band requires GaussianTriangular");
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return sample_block_band(spec, stream);
}

Matrix sample_diagonal_block(const DiagonalBlockLaw& law, Symmetry sym, int W,
                             RngStream g) {
  Matrix V(W, W);
  const double inv_sqrt_w = 1.0 / std::sqrt(double(W));
  for (int i = 0; i < W; ++i)
    V(i, i) = Complex(draw_diag_entry(law, g) * inv_sqrt_w, 0);
  for (int i = 0; i < W; ++i)
    for (int j = i + 1; j < W; ++j) {
      const Complex a = draw_offdiag_entry(law, sym, g) * inv_sqrt_w;
      V(i, j) = a;
      V(j, i) = std::conj(a);
    }
  return V;
}

Matrix to_dense(const BlockBandMatrix& m) {
  const int W = m.block_width();
  const int N = m.dim();
  Matrix X = Matrix::Zero(N, N);
  for (int j = 0; j < m.blocks(); ++j) {
    X.block(j * W, j * W, W, W) = m.V[j];
    if (j + 1 < m.blocks()) {
      X.block(j * W, (j + 1) * W, W, W) = m.T[j];
      X.block((j + 1) * W, j * W, W, W) = m.T[j].adjoint();
    }
  }
  return X;
}

double density_ratio(const DiagonalBlockLaw& law, Symmetry sym,
                     const Matrix& V1, const Matrix& V2) {
  using K = DiagonalBlockLaw::Kind;
  const int W = static_cast<int>(V1.rows());

  if (law.kind == K::GaussianWigner) {
    // rho(V) prop. to exp(-beta W tr V^2): ratio in closed form.
    const double tr1 = V1.squaredNorm();  // tr V^2 for Hermitian V
    const double tr2 = V2.squaredNorm();
    return std::exp(-double(beta(sym)) * W * (tr1 - tr2));
  }

  // Product laws: accumulate log-ratios of the unscaled entries.
  const double sw = std::sqrt(double(W));
  double log1 = 0.0, log2 = 0.0;
  for (int i = 0; i < W; ++i) {
    log1 += log_h_unnorm(law, sw * V1(i, i).real());
    log2 += log_h_unnorm(law, sw * V2(i, i).real());
  }
  for (int i = 0; i < W; ++i)
    for (int j = i + 1; j < W; ++j) {
      log1 += log_g_unnorm(law, sw * V1(i, j));
      log2 += log_g_unnorm(law, sw * V2(i, j));
    }
  (void)sym;
  if (std::isinf(log2) && log2 < 0)
    throw DegenerateDensityError("density_ratio: denominator outside support");
  if (std::isinf(log1) && log1 < 0) return 0.0;
  return std::exp(log1 - log2);
}

NormStatistic operator_norm_statistic(const DiagonalBlockLaw& law,
                                      Symmetry sym, int W, long samples,
                                      const McStream& stream, int workers) {
  BandMatrixSpec spec;
  spec.W = W;
  spec.n = 1;
  spec.symmetry = sym;
  spec.diag_law = law;
  spec.seed = stream.seed;

  std::vector<double> norms(samples);
  parallel_for(samples, workers, [&](long i) {
    const Matrix V = sample_diag_block(spec, stream.draw(i).substream(0));
    RealVector w;
    detail::eig_dense_hermitian(V, w, nullptr);
    norms[i] = std::max(std::abs(w(0)), std::abs(w(w.size() - 1)));
  });

  NormStatistic out;
  out.samples = samples;
  double acc = 0.0;
  for (double v : norms) acc += v;
  out.mean = acc / double(samples);
  std::sort(norms.begin(), norms.end());
  auto q = [&](double p) {
    return norms[static_cast<size_t>(p * double(samples - 1))];
  };
  out.q05 = q(0.05);
  out.q50 = q(0.50);
  out.q95 = q(0.95);
  out.reference = 2.0 * std::sqrt(law.offdiag_second_moment(sym));
  return out;
}

double effective_sigma(const BandMatrixSpec& spec) {
  const int W = spec.W;
  const double trv2 = spec.diag_law.diag_second_moment() +
                      (W - 1) * spec.diag_law.offdiag_second_moment(spec.symmetry);
  const double tf2 =
      spec.n > 1 ? spec.offdiag_law.frobenius_second_moment(spec.symmetry, W)
                 : 0.0;
  return std::sqrt((trv2 + 2.0 * tf2) / double(W));
}

}  // namespace bandmat
