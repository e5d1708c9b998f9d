// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bandmat {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Symmetry class of the ensemble: real symmetric (beta = 1) or
/// complex Hermitian (beta = 2).
enum class Symmetry { Real = 1, Complex = 2 };

inline int beta(Symmetry s) { return static_cast<int>(s); }

inline const char* to_string(Symmetry s) {
  return s == Symmetry::Real ? "real" : "complex";
}

/// A Schur-complement block was numerically singular (condition estimate
/// above threshold). Monte Carlo callers resample and count the rejection.
struct SingularBlockError : std::runtime_error {
  int block;
  explicit SingularBlockError(int k)
      : std::runtime_error("singular block at index " + std::to_string(k)),
        block(k) {}
};

/// Aggregated configuration/input validation failure. `issues` lists one
/// message per offending field, each prefixed with the field path.
struct ValidationError : std::runtime_error {
  std::vector<std::string> issues;
  explicit ValidationError(std::vector<std::string> list)
      : std::runtime_error(join(list)), issues(std::move(list)) {}

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "validation failed:";
    for (const auto& e : v) s += "\n  - " + e;
    return s;
  }
};

struct InsufficientStatisticsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitDegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Denominator density vanished in a density ratio.
struct DegenerateDensityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bandmat
