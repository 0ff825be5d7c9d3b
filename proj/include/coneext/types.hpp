// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace coneext {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Tunable tolerances. Defaults assume O(1) coefficient scales.
struct Tolerances {
  double rank = 1e-8;         // relative SVD cutoff for kernel/range splits
  double cluster = 1e-7;      // root clustering, scaled by max(1, |sigma|)
  double edge = 1e-6;         // admissible distance to strip lines / contours
  double sym = 1e-10;         // entrywise coefficient comparisons
  double pos = 1e-10;         // eigenvalue nonnegativity slack
  double det = 1e-8;          // |det| threshold after row normalization
  double residual = 1e-9;     // germ reduction residual norm
  double subspace = 1e-8;     // principal-angle threshold for subspace equality
  // relative zero test for series valuations: must sit above clustering
  // centroid noise (~1e-13) and below honest symbol coefficients, which for
  // tight root clusters scale like products of the root gaps
  double series_zero = 1e-10;
  double shift_exact = 1e-12; // exact coincidence of shifted poles
  double cond_max = 1e10;     // refuse series block inversion beyond this
  int trunc_max = 64;         // hard cap for truncation-order doubling
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RootOnBoundary final : Error { using Error::Error; };
struct NotSpectral final : Error { using Error::Error; };
struct BlockNotInvertible final : Error { using Error::Error; };
struct TruncationTooShort final : Error { using Error::Error; };
struct NotInSpan final : Error { using Error::Error; };
struct NotRealPoint final : Error { using Error::Error; };
struct BasePointMismatch final : Error { using Error::Error; };
struct ContourTouchesSpectrum final : Error { using Error::Error; };
struct DegeneratePairing final : Error { using Error::Error; };
struct NotSymmetric final : Error { using Error::Error; };
struct NotPositive final : Error { using Error::Error; };
struct OddMultiplicity final : Error { using Error::Error; };
struct NotInvariant final : Error { using Error::Error; };
struct ShiftCollision final : Error { using Error::Error; };
struct Divergent final : Error { using Error::Error; };
struct NotScalar final : Error { using Error::Error; };
struct QuadratureFailure final : Error { using Error::Error; };
struct ParseError final : Error { using Error::Error; };

}  // namespace coneext
