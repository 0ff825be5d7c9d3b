// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "laurent.hpp"
#include "types.hpp"

namespace coneext {

// A matrix-valued polynomial P(sigma) = sum_k A_k sigma^k with d x d complex
// coefficients. Degree-m families with invertible A_m model conormal symbols
// of b-elliptic operators restricted to a finite mode space.
class MatrixPolynomial {
 public:
  MatrixPolynomial(int dim, std::vector<CMatrix> coeffs)
      : dim_(dim), coeffs_(std::move(coeffs)) {
    if (dim_ <= 0) throw Error("MatrixPolynomial: dimension must be positive");
    if (coeffs_.empty()) coeffs_.push_back(CMatrix::Zero(dim_, dim_));
    for (const auto& a : coeffs_)
      if (a.rows() != dim_ || a.cols() != dim_)
        throw Error("MatrixPolynomial: coefficient size mismatch");
  }

  static MatrixPolynomial zero(int dim) {
    return MatrixPolynomial(dim, {CMatrix::Zero(dim, dim)});
  }

  // Convenience for scalar (1x1) polynomials.
  static MatrixPolynomial scalar(std::vector<Complex> c) {
    std::vector<CMatrix> m;
    m.reserve(c.size());
    for (Complex x : c) {
      CMatrix a(1, 1);
      a(0, 0) = x;
      m.push_back(a);
    }
    return MatrixPolynomial(1, std::move(m));
  }

  int dim() const { return dim_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<CMatrix>& coeffs() const { return coeffs_; }
  const CMatrix& coeff(int k) const { return coeffs_[static_cast<size_t>(k)]; }

  CMatrix eval(Complex sigma) const {
    CMatrix acc = coeffs_.back();
    for (int k = degree() - 1; k >= 0; --k) acc = coeffs_[static_cast<size_t>(k)] + sigma * acc;
    return acc;
  }

  MatrixPolynomial derivative() const {
    if (degree() == 0) return zero(dim_);
    std::vector<CMatrix> c;
    for (int k = 1; k <= degree(); ++k) c.push_back(static_cast<double>(k) * coeffs_[static_cast<size_t>(k)]);
    return MatrixPolynomial(dim_, std::move(c));
  }

  // Exact Taylor expansion about `center`.
  MatrixSeries series_at(Complex center) const { return polynomial_series(coeffs_, center); }

  bool is_zero(double tol) const {
    for (const auto& a : coeffs_)
      if (a.norm() > tol) return false;
    return true;
  }

  double max_coeff_norm() const {
    double s = 0.0;
    for (const auto& a : coeffs_) s = std::max(s, a.norm());
    return s;
  }

 private:
  int dim_;
  std::vector<CMatrix> coeffs_;
};

inline bool approx_equal(const MatrixPolynomial& a, const MatrixPolynomial& b, double tol) {
  if (a.dim() != b.dim()) return false;
  int deg = std::max(a.degree(), b.degree());
  for (int k = 0; k <= deg; ++k) {
    CMatrix da = k <= a.degree() ? a.coeff(k) : CMatrix::Zero(a.dim(), a.dim());
    CMatrix db = k <= b.degree() ? b.coeff(k) : CMatrix::Zero(b.dim(), b.dim());
    if ((da - db).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

// One point of the boundary spectrum together with its multiplicities.
// partial_mults stays empty until the local chain analysis fills it.
struct SpectralPoint {
  Complex sigma0;
  int algebraic_mult = 1;
  std::vector<int> partial_mults;
};

// Weight nu plus the indicial family [P_0, ..., P_{N-1}], N = ceil(nu), in
// canonical right placement: the operator is x^{-nu} sum_k P_k(xD_x) x^k.
class ConeModel {
 public:
  ConeModel(double nu, int dim, std::vector<MatrixPolynomial> indicial,
            std::string label = "", double lead_tol = 1e-12)
      : nu_(nu), dim_(dim), indicial_(std::move(indicial)), label_(std::move(label)) {
    if (nu_ <= 0.0) throw Error("ConeModel: nu must be positive");
    if (indicial_.empty()) throw Error("ConeModel: indicial family is empty");
    int n = n_terms();
    if (static_cast<int>(indicial_.size()) > n)
      throw Error("ConeModel: indicial family longer than ceil(nu)");
    while (static_cast<int>(indicial_.size()) < n)
      indicial_.push_back(MatrixPolynomial::zero(dim_));
    for (const auto& p : indicial_)
      if (p.dim() != dim_) throw Error("ConeModel: indicial dimension mismatch");
    const MatrixPolynomial& p0 = indicial_.front();
    Eigen::JacobiSVD<CMatrix> svd(p0.coeff(p0.degree()));
    double smin = svd.singularValues().minCoeff();
    if (smin <= lead_tol * std::max(1.0, svd.singularValues().maxCoeff()))
      throw Error("ConeModel: leading coefficient of P_0 is singular");
  }

  double nu() const { return nu_; }
  int dim() const { return dim_; }
  int n_terms() const { return static_cast<int>(std::ceil(nu_ - 1e-12)); }
  const std::string& label() const { return label_; }
  const std::vector<MatrixPolynomial>& indicial() const { return indicial_; }
  const MatrixPolynomial& symbol(int k) const { return indicial_[static_cast<size_t>(k)]; }
  const MatrixPolynomial& principal_symbol() const { return indicial_.front(); }

 private:
  double nu_;
  int dim_;
  std::vector<MatrixPolynomial> indicial_;
  std::string label_;
};

struct Strip {
  double im_lo;
  double im_hi;
};

namespace detail {

inline std::vector<Complex> companion_roots(const MatrixPolynomial& p) {
  int d = p.dim();
  int m = p.degree();
  if (m == 0) return {};
  Eigen::PartialPivLU<CMatrix> lu(p.coeff(m));
  int n = d * m;
  CMatrix comp = CMatrix::Zero(n, n);
  for (int b = 0; b + 1 < m; ++b)
    comp.block(b * d, (b + 1) * d, d, d) = CMatrix::Identity(d, d);
  for (int b = 0; b < m; ++b)
    comp.block((m - 1) * d, b * d, d, d) = -lu.solve(p.coeff(b));
  Eigen::ComplexEigenSolver<CMatrix> es(comp, /*computeEigenvectors=*/false);
  std::vector<Complex> roots(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) roots[static_cast<size_t>(i)] = es.eigenvalues()(i);
  return roots;
}

}  // namespace detail

// Roots of det P_0 in the open strip im_lo < Im sigma < im_hi, clustered into
// spectral points with algebraic multiplicities. Cluster representatives are
// centroids, which are O(eps)-accurate even when the individual perturbed
// roots of a multiple eigenvalue spread like eps^{1/mu}. Output is ordered by
// (Im descending, Re ascending).
inline std::vector<SpectralPoint> boundary_spectrum(const MatrixPolynomial& p, Strip strip,
                                                    const Tolerances& tol = {}) {
  if (!std::isfinite(strip.im_lo) || !std::isfinite(strip.im_hi) || strip.im_lo >= strip.im_hi)
    throw Error("boundary_spectrum: invalid strip");
  std::vector<Complex> roots = detail::companion_roots(p);
  for (Complex r : roots) {
    if (std::abs(r.imag() - strip.im_lo) < tol.edge || std::abs(r.imag() - strip.im_hi) < tol.edge)
      throw RootOnBoundary("boundary_spectrum: root at Im sigma = " + std::to_string(r.imag()) +
                           " within tol_edge of a strip line");
  }
  std::vector<Complex> inside;
  for (Complex r : roots)
    if (r.imag() > strip.im_lo && r.imag() < strip.im_hi) inside.push_back(r);

  // greedy clustering after sorting; cluster radius scales with |sigma|
  std::sort(inside.begin(), inside.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::vector<std::vector<Complex>> clusters;
  for (Complex r : inside) {
    bool placed = false;
    for (auto& c : clusters) {
      Complex mean = std::accumulate(c.begin(), c.end(), Complex{}) / static_cast<double>(c.size());
      if (std::abs(r - mean) <= tol.cluster * std::max(1.0, std::abs(mean)) * 4.0 ||
          std::abs(r - c.back()) <= tol.cluster * std::max(1.0, std::abs(r))) {
        c.push_back(r);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({r});
  }
  std::vector<SpectralPoint> out;
  for (const auto& c : clusters) {
    SpectralPoint sp;
    sp.sigma0 = std::accumulate(c.begin(), c.end(), Complex{}) / static_cast<double>(c.size());
    sp.algebraic_mult = static_cast<int>(c.size());
    out.push_back(std::move(sp));
  }
  std::sort(out.begin(), out.end(), [](const SpectralPoint& a, const SpectralPoint& b) {
    if (a.sigma0.imag() != b.sigma0.imag()) return a.sigma0.imag() > b.sigma0.imag();
    return a.sigma0.real() < b.sigma0.real();
  });
  return out;
}

inline std::vector<SpectralPoint> boundary_spectrum(const ConeModel& model, Strip strip,
                                                    const Tolerances& tol = {}) {
  return boundary_spectrum(model.principal_symbol(), strip, tol);
}

// Adjoint of one symbol in canonical right placement: the k-th symbol of the
// formal adjoint is sigma -> (P_k(conj(sigma) - ik))^H, which absorbs the
// x^k-on-the-left bookkeeping of the adjoint expansion into the coefficients.
inline MatrixPolynomial adjoint_symbol(const MatrixPolynomial& p, int k) {
  // (P(conj(sigma) - ik))^H = sum_j A_j^H (sigma + ik)^j; the sigma-coefficients
  // are the Taylor coefficients of R(u) = sum_j A_j^H u^j at u = ik.
  std::vector<CMatrix> ah;
  ah.reserve(static_cast<size_t>(p.degree()) + 1);
  for (int j = 0; j <= p.degree(); ++j) ah.push_back(p.coeff(j).adjoint());
  MatrixSeries s = polynomial_series(ah, Complex{0.0, static_cast<double>(k)});
  std::vector<CMatrix> out;
  for (int m = 0; m <= p.degree(); ++m) out.push_back(s.at(m));
  return MatrixPolynomial(p.dim(), std::move(out));
}

inline ConeModel formal_adjoint(const ConeModel& model) {
  std::vector<MatrixPolynomial> adj;
  adj.reserve(model.indicial().size());
  for (int k = 0; k < static_cast<int>(model.indicial().size()); ++k)
    adj.push_back(adjoint_symbol(model.symbol(k), k));
  return ConeModel(model.nu(), model.dim(), std::move(adj), model.label() + "*");
}

inline bool symmetry_check(const ConeModel& model, const Tolerances& tol = {}) {
  ConeModel adj = formal_adjoint(model);
  for (size_t k = 0; k < model.indicial().size(); ++k)
    if (!approx_equal(model.indicial()[k], adj.indicial()[k], tol.sym)) return false;
  return true;
}

// Necessary-condition screen for semiboundedness: P_0(sigma) must be
// nonnegative for real sigma (up to tol.pos) on a sampled window.
inline bool positivity_check(const ConeModel& model, int n_samples = 201, double radius = 2.0,
                             const Tolerances& tol = {}) {
  if (!symmetry_check(model, tol)) throw NotSymmetric("positivity_check: model is not symmetric");
  for (int i = 0; i < n_samples; ++i) {
    double s = n_samples == 1 ? 0.0 : -radius + 2.0 * radius * i / (n_samples - 1);
    CMatrix h = model.principal_symbol().eval(Complex{s, 0.0});
    Eigen::SelfAdjointEigenSolver<CMatrix> es((h + h.adjoint()) / 2.0);
    if (es.eigenvalues().minCoeff() < -tol.pos) return false;
  }
  return true;
}

}  // namespace coneext
