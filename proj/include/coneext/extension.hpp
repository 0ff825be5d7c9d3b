// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chains.hpp"
#include "pairing.hpp"
#include "pencil.hpp"
#include "smith.hpp"
#include "types.hpp"

namespace coneext {

struct StripSpectrum {
  std::vector<SpectralPoint> sigma;  // Sigma(A), ordered Im desc / Re asc
  std::vector<Complex> sigma_prime;  // downward shifts inside the strip
  std::vector<int> n_shift;          // N(sigma0) per point of Sigma
};

// Largest integer t >= 0 with Im sigma0 - t > -nu/2.
inline int shift_count(Complex sigma0, double nu, double edge_tol) {
  double x = sigma0.imag() + nu / 2.0;
  int n = static_cast<int>(std::ceil(x - edge_tol)) - 1;
  return std::max(n, 0);
}

inline StripSpectrum strip_spectrum(const ConeModel& model, const Tolerances& tol = {}) {
  StripSpectrum out;
  out.sigma = boundary_spectrum(model, Strip{-model.nu() / 2.0, model.nu() / 2.0}, tol);
  for (const auto& p : out.sigma) {
    int n = shift_count(p.sigma0, model.nu(), tol.edge);
    out.n_shift.push_back(n);
    for (int t = 0; t <= n; ++t) {
      Complex s = p.sigma0 - Complex{0.0, static_cast<double>(t)};
      bool seen = false;
      for (Complex q : out.sigma_prime)
        if (std::abs(q - s) < tol.shift_exact) seen = true;
      if (!seen) out.sigma_prime.push_back(s);
    }
  }
  std::sort(out.sigma_prime.begin(), out.sigma_prime.end(), [](Complex a, Complex b) {
    if (a.imag() != b.imag()) return a.imag() > b.imag();
    return a.real() < b.real();
  });
  return out;
}

inline bool min_equals_max(const ConeModel& model, const Tolerances& tol = {}) {
  return strip_spectrum(model, tol).sigma.empty();
}

// One element Psi_{sigma0, j, l} of the global basis of E(A): parts[t] is the
// (pure principal) germ at sigma0 - it; identically zero parts mark shifts
// outside the strip or vanishing recursion terms.
struct ExtendedBasisElement {
  Complex sigma0;
  int j = 0;  // 0-based chain index
  int l = 0;
  std::vector<VectorSeries> parts;
};

struct PointBasis {
  SpectralPoint point;
  int n_shift = 0;
  SingularChainBasis chains;
  std::vector<ExtendedBasisElement> elements;  // (j, l) lexicographic, l fastest
};

struct ExtendedBasis {
  ConeModel model;
  StripSpectrum spectrum;
  std::vector<PointBasis> points;

  int dim() const {
    int d = 0;
    for (const auto& p : points) d += static_cast<int>(p.elements.size());
    return d;
  }
  int offset(int pi) const {
    int d = 0;
    for (int i = 0; i < pi; ++i)
      d += static_cast<int>(points[static_cast<size_t>(i)].elements.size());
    return d;
  }
  std::vector<BasisLabel> labels() const {
    std::vector<BasisLabel> out;
    for (const auto& p : points)
      for (const auto& e : p.elements) out.push_back(BasisLabel{e.sigma0, e.j + 1, e.l});
    return out;
  }
  int point_index(Complex sigma0, double tol = 1e-9) const {
    for (size_t i = 0; i < points.size(); ++i)
      if (std::abs(points[i].point.sigma0 - sigma0) < tol) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

// P_0^{-1} applied to a germ at a shifted point: plain Taylor inverse off the
// spectrum, Smith-factored Laurent inverse when the shift lands exactly on
// another spectral point (the enlarged-chain case).
inline VectorSeries inverse_symbol_apply(const MatrixPolynomial& p0, Complex at,
                                         const VectorSeries& s, bool spectral, int rel_order,
                                         const Tolerances& tol) {
  if (!spectral) {
    MatrixSeries inv = matrix_inverse(p0.series_at(at), rel_order, tol.series_zero, tol.cond_max);
    return inv * s;
  }
  SmithLocal sm = smith_local(p0.series_at(at), rel_order, tol);
  return smith_apply_inverse(sm, s);
}

}  // namespace detail

// Global basis of E(A) = D_max/D_min: singular chains at every point of
// Sigma(A), followed by the downward pole-shift recursion
//   psi_{j,0,t} = sing. part of -P_0^{-1}(s) sum_{z<t} P_{t-z}(s) psi_{j,0,z}(s + i(t-z))
// and psi_{j,l,t} = principal part of (s + it)^l psi_{j,0,t}.
inline ExtendedBasis extended_basis(const ConeModel& model, const Tolerances& tol = {}) {
  ExtendedBasis basis{model, strip_spectrum(model, tol), {}};
  const MatrixPolynomial& p0 = model.principal_symbol();
  int trunc_hint = 2 * model.n_terms() + 2;

  // a shifted pole must either coincide exactly with a spectral point or stay
  // clearly away from all of them; near-misses are ambiguous
  for (size_t pi = 0; pi < basis.spectrum.sigma.size(); ++pi) {
    Complex s0 = basis.spectrum.sigma[pi].sigma0;
    for (int t = 1; t <= basis.spectrum.n_shift[pi]; ++t) {
      Complex target = s0 - Complex{0.0, static_cast<double>(t)};
      for (const auto& q : basis.spectrum.sigma) {
        double dist = std::abs(target - q.sigma0);
        if (dist >= tol.shift_exact && dist < tol.cluster * std::max(1.0, std::abs(q.sigma0)))
          throw ShiftCollision("extended_basis: shifted pole nearly (not exactly) hits " +
                               label_string({q.sigma0, 0, 0}));
      }
    }
  }

  for (size_t pi = 0; pi < basis.spectrum.sigma.size(); ++pi) {
    const SpectralPoint& pt = basis.spectrum.sigma[pi];
    PointBasis pb{pt, basis.spectrum.n_shift[pi],
                  singular_chains(p0, pt.sigma0, tol, std::max(pt.algebraic_mult, trunc_hint)),
                  {}};
    pb.point.partial_mults = pb.chains.mults;
    pb.point.algebraic_mult = pb.chains.algebraic_mult();

    for (int j = 0; j < pb.chains.count(); ++j) {
      std::vector<VectorSeries> base_parts;  // level-0 germs, shared across l
      base_parts.push_back(pb.chains.chains[static_cast<size_t>(j)].principal_part());
      for (int t = 1; t <= pb.n_shift; ++t) {
        Complex at = pt.sigma0 - Complex{0.0, static_cast<double>(t)};
        bool spectral = false;
        for (const auto& q : basis.spectrum.sigma)
          if (std::abs(at - q.sigma0) < tol.shift_exact) {
            at = q.sigma0;
            spectral = true;
          }
        VectorSeries sum = VectorSeries::zero(at, CVector::Zero(model.dim()));
        for (int z = 0; z < t; ++z) {
          const MatrixPolynomial& pk = model.symbol(t - z);
          if (pk.is_zero(0.0)) continue;
          VectorSeries shifted = base_parts[static_cast<size_t>(z)].rebased(at);
          sum = sum + pk.series_at(at) * shifted;
        }
        if (sum.max_norm() == 0.0) {
          base_parts.push_back(VectorSeries::zero(at, CVector::Zero(model.dim())));
          continue;
        }
        int depth = sum.pole_order(1e-14);
        VectorSeries inv = detail::inverse_symbol_apply(
            p0, at, sum, spectral, std::max(depth + 2, trunc_hint), tol);
        base_parts.push_back((-inv).principal_part());
      }
      for (int l = 0; l < pb.chains.mults[static_cast<size_t>(j)]; ++l) {
        ExtendedBasisElement el{pt.sigma0, j, l, {}};
        for (int t = 0; t <= pb.n_shift; ++t)
          el.parts.push_back(
              multiply_affine_power(base_parts[static_cast<size_t>(t)], pt.sigma0, l)
                  .principal_part());
        pb.elements.push_back(std::move(el));
      }
    }
    basis.points.push_back(std::move(pb));
  }
  return basis;
}

// ---------------------------------------------------------------------------
// Expansion of admissible elements in the Psi basis

// A collection of principal-part germs keyed by their base points; supports
// accumulation and lookup within a clustering tolerance.
class GermPile {
 public:
  void add(const VectorSeries& g) {
    VectorSeries p = g.principal_part();
    if (p.max_norm() == 0.0 && entries_.empty()) return;
    for (auto& e : entries_) {
      if (std::abs(e.base() - p.base()) < 1e-9) {
        e = e + p.rebased(e.base());
        return;
      }
    }
    entries_.push_back(p);
  }
  VectorSeries germ_at(Complex base, int dim) const {
    for (const auto& e : entries_)
      if (std::abs(e.base() - base) < 1e-9) return e.rebased(base);
    return VectorSeries::zero(base, CVector::Zero(dim));
  }
  double residual_norm(const std::vector<Complex>& handled) const {
    double s = 0.0;
    for (const auto& e : entries_) {
      bool done = false;
      for (Complex h : handled)
        if (std::abs(e.base() - h) < 1e-9) done = true;
      if (!done) s = std::hypot(s, e.max_norm());
    }
    return s;
  }

 private:
  std::vector<VectorSeries> entries_;
};

// Coordinates of an admissible element (germ pile) in the Psi basis: peel
// points from the top of the strip down, reducing the local germ in the
// chain basis and converting polynomial coordinates from the (sigma-sigma0)^l
// basis to the (sigma0 + (sigma-sigma0))^l one used by the Psi elements.
inline CVector expand_in_basis(const ExtendedBasis& basis, GermPile pile,
                               const Tolerances& tol = {}, bool check = true) {
  CVector coords = CVector::Zero(basis.dim());
  std::vector<Complex> handled;
  for (size_t pi = 0; pi < basis.points.size(); ++pi) {
    const PointBasis& pb = basis.points[pi];
    Complex s0 = pb.point.sigma0;
    VectorSeries g = pile.germ_at(s0, basis.model.dim());
    handled.push_back(s0);
    if (g.max_norm() == 0.0) continue;
    GermReduction red = reduce_germ_in(g, pb.chains.chains, pb.chains.mults, tol, check);
    int off = basis.offset(static_cast<int>(pi));
    int eidx = off;
    for (int j = 0; j < pb.chains.count(); ++j) {
      int mu = pb.chains.mults[static_cast<size_t>(j)];
      // triangular binomial solve: delta-coords c_m -> affine-power coords b_l
      std::vector<Complex> b(static_cast<size_t>(mu), Complex{});
      for (int m = mu - 1; m >= 0; --m) {
        Complex acc = red.poly[static_cast<size_t>(j)][static_cast<size_t>(m)];
        for (int l = m + 1; l < mu; ++l) {
          double binom = 1.0;
          for (int i = 0; i < m; ++i)
            binom = binom * static_cast<double>(l - i) / static_cast<double>(i + 1);
          acc -= b[static_cast<size_t>(l)] * binom * std::pow(s0, l - m);
        }
        b[static_cast<size_t>(m)] = acc;
      }
      for (int l = 0; l < mu; ++l) {
        Complex c = b[static_cast<size_t>(l)];
        coords(eidx) = c;
        if (c != Complex{}) {
          const ExtendedBasisElement& el = pb.elements[static_cast<size_t>(eidx - off)];
          for (const auto& part : el.parts) pile.add(Complex{-1.0, 0.0} * c * part);
        }
        ++eidx;
      }
    }
  }
  double resid = pile.residual_norm(handled);
  if (check && resid > tol.residual * 10.0)
    throw NotInSpan("expand_in_basis: residual germ mass " + std::to_string(resid));
  return coords;
}

// Coordinates of sigma * (element combination) in the Psi basis. For models
// with x-dependent tails E(A) need not be sigma-invariant; the unexpandable
// germ mass is reported through `residual` instead of an exception.
inline CVector sigma_apply(const ExtendedBasis& basis, const CVector& coords,
                           double* residual = nullptr, const Tolerances& tol = {}) {
  GermPile pile;
  int idx = 0;
  for (const auto& pb : basis.points)
    for (const auto& el : pb.elements) {
      Complex c = coords(idx++);
      if (c != Complex{})
        for (const auto& part : el.parts)
          pile.add(c * multiply_affine_power(part, part.base(), 1));
    }
  CVector out = expand_in_basis(basis, pile, tol, false);
  // expansion residual: rebuild the pile minus the matched combination
  GermPile verify = pile;
  int k = 0;
  for (const auto& pb : basis.points)
    for (const auto& el : pb.elements) {
      Complex c = out(k++);
      if (c != Complex{})
        for (const auto& part : el.parts) verify.add((-c) * part);
    }
  std::vector<Complex> all;
  double res = verify.residual_norm(all);
  if (residual) *residual = res;
  return out;
}

// Matrix of multiplication by sigma on E(A); defined only when E(A) is
// sigma-invariant (x-independent tails, or tails that miss the chains).
inline CMatrix sigma_multiplication_matrix(const ExtendedBasis& basis,
                                           const Tolerances& tol = {}) {
  int n = basis.dim();
  CMatrix m = CMatrix::Zero(n, n);
  for (int col = 0; col < n; ++col) {
    CVector e = CVector::Zero(n);
    e(col) = 1.0;
    double res = 0.0;
    m.col(col) = sigma_apply(basis, e, &res, tol);
    if (res > tol.residual * 100.0)
      throw NotInSpan("sigma_multiplication_matrix: basis is not sigma-invariant (residual " +
                      std::to_string(res) + ")");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Gram assembly (the multi-pole adjoint pairing)

namespace detail {

// H_t(eta) = sum_{t'<=t} Q_{t-t'}(conj sigma) psi*_{t'}(conj sigma + i(t-t')),
// written in the shared local coordinate eta = conj(delta); all germs rebase
// to sigma0* - it.
inline VectorSeries dual_side_sum(const ConeModel& adj_model, const ExtendedBasisElement& v,
                                  int t, int dim) {
  Complex base = v.sigma0 - Complex{0.0, static_cast<double>(t)};
  VectorSeries h = VectorSeries::zero(base, CVector::Zero(dim));
  for (int tp = 0; tp <= t; ++tp) {
    if (tp >= static_cast<int>(v.parts.size())) break;
    const VectorSeries& part = v.parts[static_cast<size_t>(tp)];
    if (part.max_norm() == 0.0) continue;
    int k = t - tp;
    if (k > static_cast<int>(adj_model.indicial().size()) - 1) continue;
    const MatrixPolynomial& q = adj_model.symbol(k);
    if (q.is_zero(0.0)) continue;
    h = h + q.series_at(base) * part.rebased(base);
  }
  return h;
}

}  // namespace detail

// Gram entry [Psi_u, Psi*_v] for poles with sigma0 = conj(sigma0*) + i tau:
// i * sum_{t=0..tau} residue of iota(u-part_{tau-t}, H_t).
inline Complex gram_entry(const ConeModel& adj_model, const ExtendedBasisElement& u,
                          const ExtendedBasisElement& v, int tau, int dim) {
  Complex acc{};
  for (int t = 0; t <= tau; ++t) {
    int us = tau - t;
    if (us >= static_cast<int>(u.parts.size())) continue;
    const VectorSeries& upart = u.parts[static_cast<size_t>(us)];
    if (upart.max_norm() == 0.0) continue;
    VectorSeries h = detail::dual_side_sum(adj_model, v, t, dim);
    if (h.max_norm() == 0.0) continue;
    ScalarSeries prod = iota(upart, h);
    acc += prod.at(-1);
  }
  return kI * acc;
}

// Full Gram matrix between E(A) and E(A*). Blocks between pole pairs that are
// not nonnegative-integer i-shifts of conjugates are exactly zero.
inline PairingGram pairing_gram(const ExtendedBasis& basisE, const ExtendedBasis& basisEstar,
                                const Tolerances& tol = {}) {
  PairingGram gram;
  gram.rows = basisE.labels();
  gram.cols = basisEstar.labels();
  gram.g = CMatrix::Zero(basisE.dim(), basisEstar.dim());
  int dim = basisE.model.dim();

  int row0 = 0;
  for (const auto& pu : basisE.points) {
    int col0 = 0;
    for (const auto& pv : basisEstar.points) {
      Complex z = pu.point.sigma0 - std::conj(pv.point.sigma0);
      double tau_f = z.imag();
      int tau = static_cast<int>(std::lround(tau_f));
      double mt = point_match_tol(tol, pu.point.sigma0);
      bool conjugate_pair = std::abs(z.real()) < mt && tau >= 0 &&
                            std::abs(tau_f - static_cast<double>(tau)) < mt;
      if (conjugate_pair) {
        for (size_t a = 0; a < pu.elements.size(); ++a)
          for (size_t b = 0; b < pv.elements.size(); ++b)
            gram.g(row0 + static_cast<int>(a), col0 + static_cast<int>(b)) =
                gram_entry(basisEstar.model, pu.elements[a], pv.elements[b], tau, dim);
      }
      col0 += static_cast<int>(pv.elements.size());
    }
    row0 += static_cast<int>(pu.elements.size());
  }
  (void)tol;
  return gram;
}

// Contour radius policy: half the minimum gap between distinct poles of the
// two bases, capped at 1.0, so a circle centered at any pole stays clear of
// all others.
inline double default_contour_radius(const ExtendedBasis& a, const ExtendedBasis& b) {
  std::vector<Complex> poles;
  for (const ExtendedBasis* basis : {&a, &b}) {
    for (Complex p : basis->spectrum.sigma_prime) poles.push_back(p);
  }
  double gap = 2.0;
  for (size_t i = 0; i < poles.size(); ++i)
    for (size_t j = i + 1; j < poles.size(); ++j) {
      double d = std::abs(poles[i] - poles[j]);
      if (d > 1e-9) gap = std::min(gap, d);
    }
  return std::min(1.0, gap / 2.0);
}

// Quadrature cross-check of one Gram entry: the same tau-shifted circles, with
// the integrand evaluated pointwise instead of by residue extraction.
inline Complex gram_entry_contour(const ConeModel& adj_model, const ExtendedBasisElement& u,
                                  const ExtendedBasisElement& v, int tau, double radius,
                                  int n_nodes = 256) {
  Complex acc{};
  for (int t = 0; t <= tau; ++t) {
    int us = tau - t;
    if (us >= static_cast<int>(u.parts.size())) continue;
    const VectorSeries& upart = u.parts[static_cast<size_t>(us)];
    if (upart.max_norm() == 0.0) continue;
    Complex center = upart.base();
    for (int kq = 0; kq < n_nodes; ++kq) {
      double th = 2.0 * M_PI * kq / n_nodes;
      Complex sg = center + radius * Complex{std::cos(th), std::sin(th)};
      CVector second = CVector::Zero(upart.zero_proto().size());
      for (int tp = 0; tp <= t; ++tp) {
        if (tp >= static_cast<int>(v.parts.size())) continue;
        const VectorSeries& part = v.parts[static_cast<size_t>(tp)];
        if (part.max_norm() == 0.0) continue;
        int k = t - tp;
        if (k > static_cast<int>(adj_model.indicial().size()) - 1) continue;
        Complex w = std::conj(sg) + Complex{0.0, static_cast<double>(k)};
        second += adj_model.symbol(k).eval(std::conj(sg)) * part.eval(w);
      }
      Complex f = second.dot(upart.eval(sg));
      acc += f * (sg - center) / static_cast<double>(n_nodes);
    }
  }
  return kI * acc;
}

// Max |closed form - quadrature| over all conjugate-shift blocks.
inline double gram_contour_delta(const ExtendedBasis& basisE, const ExtendedBasis& basisEstar,
                                 const PairingGram& gram, int n_nodes = 256,
                                 const Tolerances& tol = {}) {
  double worst = 0.0;
  int row0 = 0;
  for (const auto& pu : basisE.points) {
    int col0 = 0;
    for (const auto& pv : basisEstar.points) {
      Complex z = pu.point.sigma0 - std::conj(pv.point.sigma0);
      int tau = static_cast<int>(std::lround(z.imag()));
      double mt = point_match_tol(tol, pu.point.sigma0);
      bool pair = std::abs(z.real()) < mt && tau >= 0 &&
                  std::abs(z.imag() - static_cast<double>(tau)) < mt;
      if (pair) {
        double radius = default_contour_radius(basisE, basisEstar);
        for (size_t a = 0; a < pu.elements.size(); ++a)
          for (size_t b = 0; b < pv.elements.size(); ++b) {
            Complex quad = gram_entry_contour(basisEstar.model, pu.elements[a], pv.elements[b],
                                              tau, radius, n_nodes);
            worst = std::max(worst,
                             std::abs(quad - gram.g(row0 + static_cast<int>(a),
                                                    col0 + static_cast<int>(b))));
          }
      }
      col0 += static_cast<int>(pv.elements.size());
    }
    row0 += static_cast<int>(pu.elements.size());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Domain subspaces

struct DomainSubspace {
  std::vector<BasisLabel> labels;
  CMatrix coords;  // dim(E) x k, orthonormal columns

  int dim() const { return static_cast<int>(coords.cols()); }
  int ambient() const { return static_cast<int>(coords.rows()); }
};

inline CMatrix orthonormalize(const CMatrix& a, double rank_tol = 1e-10) {
  if (a.cols() == 0) return a;
  Eigen::ColPivHouseholderQR<CMatrix> qr(a);
  qr.setThreshold(rank_tol);
  int r = static_cast<int>(qr.rank());
  CMatrix q = qr.householderQ() * CMatrix::Identity(a.rows(), r);
  return q;
}

inline DomainSubspace make_subspace(const ExtendedBasis& basis, const CMatrix& vectors) {
  return DomainSubspace{basis.labels(), orthonormalize(vectors)};
}

inline DomainSubspace domain_min(const ExtendedBasis& basis) {
  return DomainSubspace{basis.labels(), CMatrix::Zero(basis.dim(), 0)};
}

inline DomainSubspace domain_max(const ExtendedBasis& basis) {
  return DomainSubspace{basis.labels(), CMatrix::Identity(basis.dim(), basis.dim())};
}

// max principal angle gap between subspaces, as sin(theta)
inline double subspace_distance(const CMatrix& qa, const CMatrix& qb) {
  double s = 0.0;
  if (qb.cols() > 0 && qa.rows() > 0) {
    CMatrix r = qb - qa * (qa.adjoint() * qb);
    s = std::max(s, r.cols() ? r.colwise().norm().maxCoeff() : 0.0);
  }
  if (qa.cols() > 0 && qb.rows() > 0) {
    CMatrix r = qa - qb * (qb.adjoint() * qa);
    s = std::max(s, r.cols() ? r.colwise().norm().maxCoeff() : 0.0);
  }
  return s;
}

inline bool subspace_equal(const DomainSubspace& a, const DomainSubspace& b,
                           const Tolerances& tol = {}) {
  if (a.dim() != b.dim()) return false;
  return subspace_distance(a.coords, b.coords) < tol.subspace;
}

// D^perp = { v : [u, v] = 0 for all u in D } = conj(null(C^T G)), expressed in
// the adjoint-side basis.
inline DomainSubspace adjoint_domain(const DomainSubspace& d, const PairingGram& gram,
                                     const Tolerances& tol = {}) {
  int ne = static_cast<int>(gram.rows.size());
  int nes = static_cast<int>(gram.cols.size());
  if (d.ambient() != ne) throw Error("adjoint_domain: coordinate length mismatch");
  CMatrix m = d.coords.transpose() * gram.g;  // k x nes
  if (d.dim() == 0) return DomainSubspace{gram.cols, CMatrix::Identity(nes, nes)};
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol.sym * std::max(smax, 1e-300)) ++r;
  CMatrix null_basis = svd.matrixV().rightCols(nes - r);
  DomainSubspace out{gram.cols, null_basis.conjugate()};
  if (out.dim() != nes - d.dim())
    throw DegeneratePairing("adjoint_domain: dimension " + std::to_string(out.dim()) +
                            " instead of " + std::to_string(nes - d.dim()));
  return out;
}

// For symmetric models E(A*) identifies with E(A) and selfadjointness of the
// extension D is D = D^perp.
inline bool is_selfadjoint(const DomainSubspace& d, const PairingGram& gram_sym,
                           const Tolerances& tol = {}) {
  DomainSubspace perp = adjoint_domain(d, gram_sym, tol);
  if (perp.dim() != d.dim()) return false;
  return subspace_distance(d.coords, perp.coords) < tol.subspace;
}

inline bool saturation_check(const DomainSubspace& d, const CMatrix& sigma_mult,
                             const Tolerances& tol = {}) {
  if (d.dim() == 0) return true;
  CMatrix md = sigma_mult * d.coords;
  CMatrix resid = md - d.coords * (d.coords.adjoint() * md);
  double scale = std::max(1.0, md.norm());
  return resid.norm() < tol.subspace * scale;
}

// Variant that does not require E(A) itself to be sigma-invariant: applies the
// sigma action column by column and rejects on unexpandable germ mass.
inline bool saturation_check(const ExtendedBasis& basis, const DomainSubspace& d,
                             const Tolerances& tol = {}) {
  if (d.dim() == 0) return true;
  CMatrix md(d.ambient(), d.dim());
  for (int c = 0; c < d.dim(); ++c) {
    double res = 0.0;
    md.col(c) = sigma_apply(basis, d.coords.col(c), &res, tol);
    if (res > tol.subspace * 10.0) return false;
  }
  CMatrix resid = md - d.coords * (d.coords.adjoint() * md);
  return resid.norm() < tol.subspace * std::max(1.0, md.norm());
}

// Decomposition of a saturated subspace into its per-point components
// D = (+)_j (D cap E_{sigma_j}); the spectral projectors of the sigma-action
// are the coordinate projectors onto the label blocks.
inline std::vector<std::pair<Complex, DomainSubspace>> saturate_decompose(
    const ExtendedBasis& basis, const DomainSubspace& d, const CMatrix& sigma_mult,
    const Tolerances& tol = {}) {
  if (!saturation_check(d, sigma_mult, tol))
    throw NotInvariant("saturate_decompose: subspace is not sigma-invariant");
  std::vector<std::pair<Complex, DomainSubspace>> out;
  int total = 0;
  for (size_t pi = 0; pi < basis.points.size(); ++pi) {
    int off = basis.offset(static_cast<int>(pi));
    int len = static_cast<int>(basis.points[pi].elements.size());
    CMatrix comp = CMatrix::Zero(basis.dim(), d.dim());
    comp.block(off, 0, len, d.dim()) = d.coords.block(off, 0, len, d.dim());
    CMatrix q = orthonormalize(comp);
    // each component must itself lie inside D
    if (q.cols() > 0 && (q - d.coords * (d.coords.adjoint() * q)).norm() > tol.subspace * 10)
      throw NotInvariant("saturate_decompose: component escapes the subspace");
    total += static_cast<int>(q.cols());
    out.emplace_back(basis.points[pi].point.sigma0, DomainSubspace{basis.labels(), q});
  }
  if (total != d.dim())
    throw NotInvariant("saturate_decompose: component dimensions do not add up");
  return out;
}

// Span of the classes of (sigma - sigma0)^l psi_j for l = mu_j/2 .. mu_j-1 at
// a real spectral point with even partial multiplicities. The global elements
// carry (sigma0 + delta)^l instead of delta^l, so the half space is their
// binomial recombination delta^l = sum_m C(l,m) (-sigma0)^{l-m} (sigma0+delta)^m.
inline DomainSubspace half_domain(const ExtendedBasis& basis, Complex sigma0,
                                  const Tolerances& tol = {}) {
  int pi = basis.point_index(sigma0, 1e-7);
  if (pi < 0) throw NotSpectral("half_domain: point not in Sigma(A)");
  const PointBasis& pb = basis.points[static_cast<size_t>(pi)];
  if (std::abs(pb.point.sigma0.imag()) > tol.edge)
    throw NotRealPoint("half_domain: spectral point is not real");
  for (int mu : pb.chains.mults)
    if (mu % 2 != 0)
      throw OddMultiplicity("half_domain: odd partial multiplicity " + std::to_string(mu));
  Complex s0 = pb.point.sigma0;
  int off = basis.offset(pi);
  std::vector<CVector> cols;
  int jbase = off;
  for (int j = 0; j < pb.chains.count(); ++j) {
    int mu = pb.chains.mults[static_cast<size_t>(j)];
    for (int l = mu / 2; l < mu; ++l) {
      CVector col = CVector::Zero(basis.dim());
      double binom = 1.0;
      for (int m = l; m >= 0; --m) {
        if (m < l) binom = binom * static_cast<double>(m + 1) / static_cast<double>(l - m);
        col(jbase + m) = m == l ? Complex{binom, 0.0} : binom * std::pow(-s0, l - m);
      }
      cols.push_back(std::move(col));
    }
    jbase += mu;
  }
  CMatrix v(basis.dim(), static_cast<int>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) v.col(static_cast<int>(c)) = cols[c];
  return make_subspace(basis, v);
}

// Friedrichs domain: full blocks strictly below the real axis plus half
// blocks at real spectral points. Requires a symmetric, semibounded model.
inline DomainSubspace friedrichs_domain(const ExtendedBasis& basis, const Tolerances& tol = {}) {
  if (!symmetry_check(basis.model, tol))
    throw NotSymmetric("friedrichs_domain: model is not symmetric");
  if (!positivity_check(basis.model, 201, 2.0, tol))
    throw NotPositive("friedrichs_domain: conormal symbol is not nonnegative on the real axis");
  std::vector<int> picks;
  std::vector<CMatrix> half_blocks;
  int idx = 0;
  CMatrix acc = CMatrix::Zero(basis.dim(), 0);
  for (size_t pi = 0; pi < basis.points.size(); ++pi) {
    const PointBasis& pb = basis.points[pi];
    int len = static_cast<int>(pb.elements.size());
    if (pb.point.sigma0.imag() < -tol.edge) {
      for (int i = 0; i < len; ++i) picks.push_back(idx + i);
    } else if (std::abs(pb.point.sigma0.imag()) <= tol.edge) {
      DomainSubspace h = half_domain(basis, pb.point.sigma0, tol);
      CMatrix joined(basis.dim(), acc.cols() + h.coords.cols());
      joined.leftCols(acc.cols()) = acc;
      joined.rightCols(h.coords.cols()) = h.coords;
      acc = joined;
    }
    idx += len;
  }
  CMatrix v = CMatrix::Zero(basis.dim(), static_cast<int>(picks.size()));
  for (size_t c = 0; c < picks.size(); ++c) v(picks[c], static_cast<int>(c)) = 1.0;
  CMatrix joined(basis.dim(), v.cols() + acc.cols());
  joined.leftCols(v.cols()) = v;
  joined.rightCols(acc.cols()) = acc;
  return make_subspace(basis, joined);
}

inline int relative_index(const DomainSubspace& d1, const DomainSubspace& d2) {
  if (d1.ambient() != d2.ambient())
    throw Error("relative_index: subspaces over different bases");
  return d2.dim() - d1.dim();
}

// ---------------------------------------------------------------------------
// Domain stability under perturbation of the indicial family

struct StabilityReport {
  bool dmax_agree = false;        // indicial agreement to order ceil(nu-1)
  bool extended_match = false;    // extended bases span the same filtered spaces
  bool friedrichs_agree = false;  // Friedrichs domains coincide
};

namespace detail {

inline int ceil_nat(double s) {
  int c = static_cast<int>(std::ceil(s - 1e-12));
  return std::max(c, 0);
}

// Per-point comparison of extended bases by stacked principal coefficients
// (phase / chain-mixing invariant).
inline bool extended_bases_match(const ExtendedBasis& a, const ExtendedBasis& b, double tol) {
  if (a.points.size() != b.points.size()) return false;
  for (size_t pi = 0; pi < a.points.size(); ++pi) {
    const PointBasis& pa = a.points[pi];
    const PointBasis& pb = b.points[pi];
    if (std::abs(pa.point.sigma0 - pb.point.sigma0) > 1e-7) return false;
    if (pa.chains.mults != pb.chains.mults) return false;
    if (pa.elements.size() != pb.elements.size()) return false;
    // stack all part coefficients on a common (shift, exponent) grid and
    // compare column spans; phase and chain-mixing invariant
    int span = 1;
    int nparts = 1;
    for (const PointBasis* p : {&pa, &pb})
      for (const auto& e : p->elements) {
        nparts = std::max(nparts, static_cast<int>(e.parts.size()));
        for (const auto& part : e.parts) span = std::max(span, -part.lead());
      }
    int dim = static_cast<int>(pa.chains.chains[0].zero_proto().size());
    auto stack = [&](const PointBasis& p) {
      CMatrix m = CMatrix::Zero(nparts * span * dim, static_cast<int>(p.elements.size()));
      for (size_t c = 0; c < p.elements.size(); ++c) {
        for (size_t t = 0; t < p.elements[c].parts.size(); ++t) {
          const VectorSeries& part = p.elements[c].parts[t];
          for (int k = -span; k <= -1; ++k)
            m.block((static_cast<int>(t) * span + (k + span)) * dim, static_cast<int>(c), dim, 1) =
                part.at(k);
        }
      }
      return m;
    };
    if (subspace_distance(orthonormalize(stack(pa)), orthonormalize(stack(pb))) > tol)
      return false;
  }
  return true;
}

}  // namespace detail

inline StabilityReport domain_stability(const ConeModel& m0, const ConeModel& m1,
                                        const Tolerances& tol = {}) {
  if (m0.dim() != m1.dim() || std::abs(m0.nu() - m1.nu()) > 1e-12)
    throw Error("domain_stability: models must share nu and dimension");
  StabilityReport rep;
  int k_dmax = detail::ceil_nat(m0.nu() - 1.0);
  bool agree = true;
  for (int k = 0; k < k_dmax && k < m0.n_terms(); ++k)
    agree = agree && approx_equal(m0.symbol(k), m1.symbol(k), tol.sym);
  rep.dmax_agree = agree;

  if (agree) {
    ExtendedBasis b0 = extended_basis(m0, tol);
    ExtendedBasis b1 = extended_basis(m1, tol);
    rep.extended_match = detail::extended_bases_match(b0, b1, 1e-6);
  }

  // Friedrichs: either the coefficient route (agreement to order > nu/2) or
  // the symmetric-pair route (D_max-level agreement plus semiboundedness),
  // confirmed directly when both domains are computable.
  int k_fried = static_cast<int>(std::floor(m0.nu() / 2.0)) + 1;
  bool coeff_route = true;
  for (int k = 0; k < k_fried && k < m0.n_terms(); ++k)
    coeff_route = coeff_route && approx_equal(m0.symbol(k), m1.symbol(k), tol.sym);
  bool sym_route = false;
  bool direct_ok = true;
  try {
    if (symmetry_check(m0, tol) && symmetry_check(m1, tol) && positivity_check(m0, 201, 2.0, tol) &&
        positivity_check(m1, 201, 2.0, tol)) {
      sym_route = rep.dmax_agree;
      ExtendedBasis b0 = extended_basis(m0, tol);
      ExtendedBasis b1 = extended_basis(m1, tol);
      DomainSubspace f0 = friedrichs_domain(b0, tol);
      DomainSubspace f1 = friedrichs_domain(b1, tol);
      direct_ok = f0.ambient() == f1.ambient() && f0.dim() == f1.dim() &&
                  subspace_distance(f0.coords, f1.coords) < tol.subspace;
    }
  } catch (const Error&) {
    direct_ok = coeff_route;
  }
  rep.friedrichs_agree = (coeff_route || sym_route) && direct_ok;
  return rep;
}

// ---------------------------------------------------------------------------
// Dictionary between Psi coordinates and cutoff model functions

// One dictionary column: direction * omega(x) x^{i sigma0} (log x)^logpow,
// whose Mellin germ has the single principal coefficient logpow! * i at depth
// logpow+1 (profile independent).
struct DictEntry {
  Complex sigma0;
  CVector direction;
  int logpow = 0;
  std::string name;
};

// Columns are the Psi-coordinates of the dictionary functions; reduction is
// per-point (top germ only).
inline CMatrix dictionary_matrix(const ExtendedBasis& basis, const std::vector<DictEntry>& dict,
                                 const Tolerances& tol = {}) {
  CMatrix t = CMatrix::Zero(basis.dim(), static_cast<int>(dict.size()));
  for (size_t c = 0; c < dict.size(); ++c) {
    const DictEntry& e = dict[c];
    double fact = 1.0;
    for (int i = 2; i <= e.logpow; ++i) fact *= i;
    int pi = basis.point_index(e.sigma0, 1e-7);
    if (pi < 0) throw NotSpectral("dictionary_matrix: exponent is not a spectral point");
    const PointBasis& pb = basis.points[static_cast<size_t>(pi)];
    std::vector<CVector> coef(static_cast<size_t>(e.logpow + 1),
                              CVector::Zero(basis.model.dim()));
    coef[0] = fact * kI * e.direction;  // coefficient of (s-s0)^{-(logpow+1)}
    VectorSeries germ(pb.point.sigma0, -(e.logpow + 1), std::move(coef));
    GermReduction red = reduce_germ_in(germ, pb.chains.chains, pb.chains.mults, tol, true);
    int off = basis.offset(pi);
    int idx = off;
    for (int j = 0; j < pb.chains.count(); ++j) {
      int mu = pb.chains.mults[static_cast<size_t>(j)];
      std::vector<Complex> b(static_cast<size_t>(mu), Complex{});
      for (int m = mu - 1; m >= 0; --m) {
        Complex acc = red.poly[static_cast<size_t>(j)][static_cast<size_t>(m)];
        for (int l = m + 1; l < mu; ++l) {
          double binom = 1.0;
          for (int i = 0; i < m; ++i)
            binom = binom * static_cast<double>(l - i) / static_cast<double>(i + 1);
          acc -= b[static_cast<size_t>(l)] * binom * std::pow(pb.point.sigma0, l - m);
        }
        b[static_cast<size_t>(m)] = acc;
      }
      for (int l = 0; l < mu; ++l) {
        t(idx, static_cast<int>(c)) = b[static_cast<size_t>(l)];
        ++idx;
      }
    }
  }
  return t;
}

}  // namespace coneext
