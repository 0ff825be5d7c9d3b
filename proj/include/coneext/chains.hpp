// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "laurent.hpp"
#include "pencil.hpp"
#include "smith.hpp"
#include "types.hpp"

namespace coneext {

struct KernelRangeSplit {
  Complex sigma0;
  CMatrix kernel;       // d x d', orthonormal basis of ker P(sigma0)
  CMatrix kernel_perp;  // d x r
  CMatrix corange;      // d x d', orthonormal basis of (rg P(sigma0))^perp
  CMatrix range;        // d x r
  int dprime() const { return static_cast<int>(kernel.cols()); }
  int rank() const { return static_cast<int>(kernel_perp.cols()); }
};

inline KernelRangeSplit kernel_range_split(const MatrixPolynomial& p, Complex sigma0,
                                           const Tolerances& tol = {}) {
  CMatrix a = p.eval(sigma0);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  // floor the cutoff at the pencil's own scale near sigma0, so a symbol that
  // vanishes entirely at the point is seen as rank zero
  double scale = std::max(smax, p.max_coeff_norm() *
                                    std::pow(std::max(1.0, std::abs(sigma0)), p.degree()));
  int d = p.dim();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol.rank * std::max(scale, 1e-300)) ++r;
  if (r == d)
    throw NotSpectral("kernel_range_split: symbol is numerically invertible at the point");
  KernelRangeSplit out;
  out.sigma0 = sigma0;
  out.kernel = svd.matrixV().rightCols(d - r);
  out.kernel_perp = svd.matrixV().leftCols(r);
  out.corange = svd.matrixU().rightCols(d - r);
  out.range = svd.matrixU().leftCols(r);
  // null-direction phases are free; pin them (largest entry real positive)
  // for reproducible bases
  for (CMatrix* m : {&out.kernel, &out.corange})
    for (int c = 0; c < m->cols(); ++c) {
      int imax = 0;
      for (int i = 1; i < m->rows(); ++i)
        if (std::abs((*m)(i, c)) > std::abs((*m)(imax, c))) imax = i;
      Complex ph = (*m)(imax, c);
      if (std::abs(ph) > 0) m->col(c) *= std::conj(ph) / std::abs(ph);
    }
  return out;
}

namespace detail {

// Compressed block basis_left^H * T(sigma) * basis_right of a matrix series.
inline MatrixSeries block_series(const MatrixSeries& t, const CMatrix& left, const CMatrix& right) {
  std::vector<CMatrix> c;
  for (int k = t.lead(); k <= t.last(); ++k) c.push_back(left.adjoint() * t.at(k) * right);
  if (c.empty()) c.push_back(CMatrix::Zero(left.cols(), right.cols()));
  return MatrixSeries(t.base(), t.lead(), std::move(c), t.valid_to());
}

// Embed a coordinate germ through a (d x k) basis matrix.
inline VectorSeries embed(const CMatrix& basis, const VectorSeries& v) {
  std::vector<CVector> c;
  for (int k = v.lead(); k <= v.last(); ++k) c.push_back(basis * v.at(k));
  if (c.empty()) c.push_back(CVector::Zero(basis.rows()));
  return VectorSeries(v.base(), v.lead(), std::move(c), v.valid_to());
}

// Coefficientwise adjoint: series of (S(conj(sigma)))^H at the conjugate base.
inline MatrixSeries adjoint_series(const MatrixSeries& s) {
  std::vector<CMatrix> c;
  for (int k = s.lead(); k <= s.last(); ++k) c.push_back(s.at(k).adjoint());
  if (c.empty()) c.push_back(CMatrix::Zero(s.zero_proto().cols(), s.zero_proto().rows()));
  return MatrixSeries(std::conj(s.base()), s.lead(), std::move(c), s.valid_to());
}

inline MatrixSeries grid_to_series(const SeriesGrid& g, Complex base) {
  int n = static_cast<int>(g.size());
  int lead = 0, last = 0, valid = ScalarSeries::kExactOrder;
  bool first = true;
  for (const auto& row : g)
    for (const auto& s : row) {
      lead = first ? s.lead() : std::min(lead, s.lead());
      last = first ? s.last() : std::max(last, s.last());
      valid = std::min(valid, s.valid_to());
      first = false;
    }
  last = std::min(last, valid);
  std::vector<CMatrix> c;
  for (int k = lead; k <= std::max(lead, last); ++k) {
    CMatrix m = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = g[static_cast<size_t>(i)][static_cast<size_t>(j)].at(k);
    c.push_back(std::move(m));
  }
  return MatrixSeries(base, lead, std::move(c), valid);
}

}  // namespace detail

// Schur reduction of P about a spectral point: the holomorphic family
// calP = P11 - P12 P22^{-1} P21 : K -> R^perp, plus the blocks needed to map
// reduced germs back to the full space.
struct SchurData {
  KernelRangeSplit split;
  MatrixSeries calP;
  MatrixSeries p12, p21, p22, p22_inv;  // empty (0-dim) when rank == 0
};

inline SchurData schur_reduce(const MatrixPolynomial& p, Complex sigma0, int rel_order,
                              const Tolerances& tol = {}) {
  KernelRangeSplit split = kernel_range_split(p, sigma0, tol);
  MatrixSeries t = p.series_at(sigma0);
  int dp = split.dprime();
  int r = split.rank();
  MatrixSeries p11 = detail::block_series(t, split.corange, split.kernel);
  if (r == 0) {
    MatrixSeries empty(sigma0, 0, {CMatrix::Zero(0, 0)});
    return SchurData{split, p11, empty, empty, empty, empty};
  }
  MatrixSeries p12 = detail::block_series(t, split.corange, split.kernel_perp);
  MatrixSeries p21 = detail::block_series(t, split.range, split.kernel);
  MatrixSeries p22 = detail::block_series(t, split.range, split.kernel_perp);
  MatrixSeries p22_inv = matrix_inverse(p22, rel_order, tol.series_zero, tol.cond_max);
  MatrixSeries calP = (p11 - matmul(p12, matmul(p22_inv, p21))).truncated(rel_order);
  (void)dp;
  return SchurData{split, calP, p12, p21, p22, p22_inv};
}

// Taylor series of the Schur complement family calP(sigma): K -> R^perp.
inline MatrixSeries schur_family(const MatrixPolynomial& p, Complex sigma0, int order,
                                 const Tolerances& tol = {}) {
  return schur_reduce(p, sigma0, order, tol).calP;
}

// Canonical singular chains at one spectral point. Chains are ordered by
// nonincreasing pole order; leading coefficients are orthonormal and the
// deeper coefficients satisfy the partial orthogonality normalization
// (psi_{j,l} is orthogonal to psi_{k,0} whenever mu_k >= mu_j - l, l > 0).
struct SingularChainBasis {
  Complex sigma0;
  std::vector<int> mults;                // nonincreasing pole orders mu_j
  SchurData schur;
  std::vector<VectorSeries> chains_k;    // K-coordinate germs
  std::vector<VectorSeries> chains;      // full d-space germs
  std::vector<VectorSeries> betas;       // R^perp-coordinate germs calP psi_j

  int count() const { return static_cast<int>(mults.size()); }
  int algebraic_mult() const {
    int s = 0;
    for (int m : mults) s += m;
    return s;
  }
  int max_mult() const { return mults.empty() ? 0 : mults.front(); }
};

namespace detail {

inline VectorSeries grid_column(const SeriesGrid& g, int j, Complex base) {
  std::vector<ScalarSeries> comps;
  comps.reserve(g.size());
  for (const auto& row : g) comps.push_back(row[static_cast<size_t>(j)]);
  VectorSeries v = join_components(comps);
  return v.rebased(base);
}

inline SingularChainBasis build_chains(const MatrixPolynomial& p, Complex sigma0, int order,
                                       const Tolerances& tol) {
  SingularChainBasis out;
  out.sigma0 = sigma0;
  out.schur = schur_reduce(p, sigma0, order, tol);
  SmithLocal sm = smith_local(out.schur.calP, order, tol);
  int dp = out.schur.split.dprime();

  for (int idx = dp - 1; idx >= 0; --idx) {
    int mu = sm.kappa[static_cast<size_t>(idx)];
    if (mu <= 0) throw Error("singular_chains: Schur family does not vanish at the point");
    out.mults.push_back(mu);
    out.chains_k.push_back(grid_column(sm.finv, idx, sigma0).shifted(-mu));
  }

  // leading coefficients -> orthonormal (modified Gram-Schmidt across the
  // pole-order flag, subtracting (sigma-sigma0)^{mu_k-mu_j} psi_k)
  for (int j = 0; j < dp; ++j) {
    for (int k = 0; k < j; ++k) {
      CVector lead_k = out.chains_k[static_cast<size_t>(k)].at(-out.mults[static_cast<size_t>(k)]);
      CVector lead_j = out.chains_k[static_cast<size_t>(j)].at(-out.mults[static_cast<size_t>(j)]);
      Complex c = lead_k.dot(lead_j);
      int s = out.mults[static_cast<size_t>(k)] - out.mults[static_cast<size_t>(j)];
      out.chains_k[static_cast<size_t>(j)] =
          out.chains_k[static_cast<size_t>(j)] -
          c * out.chains_k[static_cast<size_t>(k)].shifted(s);
    }
    CVector lead = out.chains_k[static_cast<size_t>(j)].at(-out.mults[static_cast<size_t>(j)]);
    double nrm = lead.norm();
    if (nrm < 1e-12)
      throw TruncationTooShort("singular_chains: dependent leading coefficients");
    out.chains_k[static_cast<size_t>(j)] *= Complex{1.0 / nrm, 0.0};
  }

  // deeper-coefficient normalization, reverse induction on n = mu_j - l
  int mu_max = out.mults.front();
  for (int n = mu_max - 1; n >= 1; --n) {
    for (int j = 0; j < dp; ++j) {
      if (out.mults[static_cast<size_t>(j)] <= n) continue;
      CVector w = out.chains_k[static_cast<size_t>(j)].at(-n);
      for (int k = 0; k < dp; ++k) {
        if (out.mults[static_cast<size_t>(k)] < n) continue;
        CVector lead_k =
            out.chains_k[static_cast<size_t>(k)].at(-out.mults[static_cast<size_t>(k)]);
        Complex a = lead_k.dot(w);
        if (std::abs(a) == 0.0) continue;
        out.chains_k[static_cast<size_t>(j)] =
            out.chains_k[static_cast<size_t>(j)] -
            a * out.chains_k[static_cast<size_t>(k)].shifted(out.mults[static_cast<size_t>(k)] - n);
      }
    }
  }

  // map to the full space: singular part of psi - P22^{-1} P21 psi, tails kept
  for (int j = 0; j < dp; ++j) {
    const VectorSeries& pk = out.chains_k[static_cast<size_t>(j)];
    VectorSeries full = detail::embed(out.schur.split.kernel, pk);
    if (out.schur.split.rank() > 0) {
      VectorSeries corr = out.schur.p22_inv * (out.schur.p21 * pk);
      full = full - detail::embed(out.schur.split.kernel_perp, corr);
    }
    out.chains.push_back(std::move(full));
    out.betas.push_back(out.schur.calP * pk);
  }
  return out;
}

}  // namespace detail

// Truncation-order policy: start at max(known multiplicity bound, 2 ceil(nu) + 2)
// and double on TruncationTooShort up to tol.trunc_max.
inline SingularChainBasis singular_chains(const MatrixPolynomial& p, Complex sigma0,
                                          const Tolerances& tol = {}, int order_hint = 0) {
  int order = std::max(order_hint, 4);
  while (true) {
    try {
      SingularChainBasis b = detail::build_chains(p, sigma0, order, tol);
      int need = b.max_mult() + 2;
      bool deep_enough = true;
      for (const auto& c : b.chains_k)
        if (c.valid_to() < need) deep_enough = false;
      if (deep_enough) return b;
      throw TruncationTooShort("singular_chains: tails shorter than required");
    } catch (const TruncationTooShort&) {
      if (order >= tol.trunc_max) throw;
      order = std::min(2 * order, tol.trunc_max);
    }
  }
}

// Coordinates of a germ in the basis {(sigma-sigma0)^l psi_j}, obtained by
// matching principal parts from the deepest pole upward. poly[j][l] is the
// coefficient of (sigma-sigma0)^l psi_j.
struct GermReduction {
  std::vector<std::vector<Complex>> poly;
  double residual_norm = 0.0;
  std::vector<std::pair<int, CVector>> residual;  // (exponent, unmatched coefficient)
};

inline GermReduction reduce_germ_in(const VectorSeries& u, const std::vector<VectorSeries>& chains,
                                    const std::vector<int>& mults, const Tolerances& tol,
                                    bool check = true) {
  int nj = static_cast<int>(chains.size());
  GermReduction red;
  red.poly.resize(static_cast<size_t>(nj));
  for (int j = 0; j < nj; ++j)
    red.poly[static_cast<size_t>(j)].assign(static_cast<size_t>(mults[static_cast<size_t>(j)]),
                                            Complex{});
  int depth_u = u.pole_order(1e-13);
  int mu_max = nj ? mults.front() : 0;
  int depth = std::max(depth_u, mu_max);
  double scale = 0.0;
  for (int k = u.lead(); k <= std::min(-1, u.last()); ++k)
    scale = std::max(scale, coeff_norm(u.at(k)));

  for (int m = depth; m >= 1; --m) {
    CVector target = u.at(-m);
    // subtract contributions of already-determined coefficients
    for (int j = 0; j < nj; ++j)
      for (int l = 0; l < mults[static_cast<size_t>(j)] - m; ++l) {
        Complex c = red.poly[static_cast<size_t>(j)][static_cast<size_t>(l)];
        if (c == Complex{}) continue;
        target -= c * chains[static_cast<size_t>(j)].at(-m - l);
      }
    std::vector<int> active;
    for (int j = 0; j < nj; ++j)
      if (mults[static_cast<size_t>(j)] >= m) active.push_back(j);
    if (active.empty()) {
      double rn = target.norm();
      if (rn > 0.0) {
        red.residual.emplace_back(-m, target);
        red.residual_norm = std::hypot(red.residual_norm, rn);
      }
      continue;
    }
    CMatrix b(target.size(), static_cast<int>(active.size()));
    for (size_t a = 0; a < active.size(); ++a)
      b.col(static_cast<int>(a)) =
          chains[static_cast<size_t>(active[a])].at(-mults[static_cast<size_t>(active[a])]);
    CVector coef = b.colPivHouseholderQr().solve(target);
    for (size_t a = 0; a < active.size(); ++a)
      red.poly[static_cast<size_t>(active[a])]
              [static_cast<size_t>(mults[static_cast<size_t>(active[a])] - m)] =
          coef(static_cast<int>(a));
    CVector resid = target - b * coef;
    double rn = resid.norm();
    if (rn > 0.0) {
      red.residual.emplace_back(-m, resid);
      red.residual_norm = std::hypot(red.residual_norm, rn);
    }
  }
  if (check && red.residual_norm > tol.residual * std::max(1.0, scale))
    throw NotInSpan("reduce_germ: principal part leaves the chain span (residual " +
                    std::to_string(red.residual_norm) + ")");
  return red;
}

inline GermReduction reduce_germ(const VectorSeries& u, const SingularChainBasis& basis,
                                 const Tolerances& tol = {}, bool check = true) {
  detail::check_same_base(u.base(), basis.sigma0, "reduce_germ");
  return reduce_germ_in(u, basis.chains, basis.mults, tol, check);
}

// Gram-Schmidt refinement at a real point: rescale and mix chains so the
// normalized germs beta*_j = (sigma-sigma0)^{mu_j} psi_j satisfy
// iota(beta*_i, beta*_j) = delta_ij as truncated series.
inline SingularChainBasis holomorphic_gram_schmidt(const SingularChainBasis& basis,
                                                   const Tolerances& tol = {}) {
  if (std::abs(basis.sigma0.imag()) > tol.edge)
    throw NotRealPoint("holomorphic_gram_schmidt: base point is not real");
  SingularChainBasis b = basis;
  // treat the base as exactly real so conjugate-base checks hold
  Complex s0{basis.sigma0.real(), 0.0};
  int dp = b.count();
  for (int i = 0; i < dp; ++i) {
    b.chains_k[static_cast<size_t>(i)] = b.chains_k[static_cast<size_t>(i)].rebased(s0);
    b.chains[static_cast<size_t>(i)] = b.chains[static_cast<size_t>(i)].rebased(s0);
    b.betas[static_cast<size_t>(i)] = b.betas[static_cast<size_t>(i)].rebased(s0);
  }
  b.sigma0 = s0;
  for (int i = 0; i < dp; ++i) {
    int mu_i = b.mults[static_cast<size_t>(i)];
    VectorSeries bsi = b.chains_k[static_cast<size_t>(i)].shifted(mu_i);
    ScalarSeries h = iota(bsi, bsi);
    int rel = std::min(h.valid_to(), 2 * b.max_mult() + 4);
    ScalarSeries k = sqrt_real(h.truncated(rel), rel);
    ScalarSeries kinv = inverse(k, rel, 1e-13);
    b.chains_k[static_cast<size_t>(i)] = kinv * b.chains_k[static_cast<size_t>(i)];
    b.chains[static_cast<size_t>(i)] = kinv * b.chains[static_cast<size_t>(i)];
    b.betas[static_cast<size_t>(i)] = kinv * b.betas[static_cast<size_t>(i)];
    bsi = b.chains_k[static_cast<size_t>(i)].shifted(mu_i);
    ScalarSeries hi = iota(bsi, bsi);
    for (int j = i + 1; j < dp; ++j) {
      int mu_j = b.mults[static_cast<size_t>(j)];
      VectorSeries bsj = b.chains_k[static_cast<size_t>(j)].shifted(mu_j);
      ScalarSeries g = iota(bsj, bsi);
      if (g.max_norm() < 1e-14) continue;
      ScalarSeries f = (g * inverse(hi, rel, 1e-13)).shifted(mu_i - mu_j);
      b.chains_k[static_cast<size_t>(j)] =
          b.chains_k[static_cast<size_t>(j)] - f * b.chains_k[static_cast<size_t>(i)];
      b.chains[static_cast<size_t>(j)] =
          b.chains[static_cast<size_t>(j)] - f * b.chains[static_cast<size_t>(i)];
      b.betas[static_cast<size_t>(j)] =
          b.betas[static_cast<size_t>(j)] - f * b.betas[static_cast<size_t>(i)];
    }
  }
  return b;
}

// Dual chain system at the conjugate point: psi*_j = (sigma-conj(s0))^{-mu_j}
// beta~_j where iota(beta_i, beta~_j) = delta_ij. The chains of the adjoint
// family with the normalization that makes the residue pairing triangular.
struct DualChainBasis {
  Complex sigma0_star;
  std::vector<int> mults;
  std::vector<VectorSeries> psis_r;     // R^perp-coordinate germs
  std::vector<VectorSeries> psis_full;  // full d-space germs
};

inline DualChainBasis dual_chain_basis(const SingularChainBasis& basis,
                                       const Tolerances& tol = {}) {
  int dp = basis.count();
  Complex s0c = std::conj(basis.sigma0);
  DualChainBasis out;
  out.sigma0_star = s0c;
  out.mults = basis.mults;

  // B(sigma): columns beta_i; need C with C^T B = I, then beta~_j = theta(C e_j)
  int lead = 0, last = 0, valid = ScalarSeries::kExactOrder;
  for (const auto& bt : basis.betas) {
    lead = std::min(lead, bt.lead());
    last = std::max(last, bt.last());
    valid = std::min(valid, bt.valid_to());
  }
  last = std::min(last, valid);
  std::vector<CMatrix> bc;
  for (int k = lead; k <= std::max(lead, last); ++k) {
    CMatrix m(dp, dp);
    for (int j = 0; j < dp; ++j) m.col(j) = basis.betas[static_cast<size_t>(j)].at(k);
    bc.push_back(m.transpose());
  }
  MatrixSeries bt(basis.sigma0, lead, std::move(bc), valid);
  MatrixSeries c = matrix_inverse(bt, std::max(4, basis.max_mult() + 4), tol.series_zero,
                                  tol.cond_max);

  for (int j = 0; j < dp; ++j) {
    std::vector<CVector> col;
    for (int k = c.lead(); k <= c.last(); ++k) col.push_back(c.at(k).col(j));
    VectorSeries cj(basis.sigma0, c.lead(), std::move(col), c.valid_to());
    VectorSeries beta_t = theta(cj);  // holomorphic at conj(s0)
    VectorSeries psi_r = beta_t.shifted(-basis.mults[static_cast<size_t>(j)]);
    out.psis_r.push_back(psi_r);
    VectorSeries full = detail::embed(basis.schur.split.corange, psi_r);
    if (basis.schur.split.rank() > 0) {
      MatrixSeries p22s = detail::adjoint_series(basis.schur.p22);
      MatrixSeries p12s = detail::adjoint_series(basis.schur.p12);
      MatrixSeries p22s_inv =
          matrix_inverse(p22s, std::max(4, basis.max_mult() + 4), tol.series_zero, tol.cond_max);
      VectorSeries corr = p22s_inv * (p12s * psi_r);
      full = full - detail::embed(basis.schur.split.range, corr);
    }
    out.psis_full.push_back(std::move(full));
  }
  return out;
}

}  // namespace coneext
