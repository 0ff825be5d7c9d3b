// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "chains.hpp"
#include "laurent.hpp"
#include "pencil.hpp"
#include "types.hpp"

namespace coneext {

// Local residue pairing of germ classes at conjugate points,
// [u,v] = i sum_j sum_k u_{jk} conj(v_{j, mu_j-k-1}), where u reduces in the
// chain basis and v in the dual basis at the conjugate point.
inline Complex residue_pairing_local(const VectorSeries& u, const VectorSeries& v,
                                     const SingularChainBasis& basis, const DualChainBasis& dual,
                                     const Tolerances& tol = {}) {
  GermReduction ru = reduce_germ(u, basis, tol);
  detail::check_same_base(v.base(), dual.sigma0_star, "residue_pairing_local");
  GermReduction rv = reduce_germ_in(v, dual.psis_full, dual.mults, tol);
  Complex acc{};
  for (size_t j = 0; j < basis.mults.size(); ++j) {
    int mu = basis.mults[j];
    for (int k = 0; k < mu; ++k)
      acc += ru.poly[j][static_cast<size_t>(k)] *
             std::conj(rv.poly[j][static_cast<size_t>(mu - 1 - k)]);
  }
  return kI * acc;
}

struct Contour {
  Complex center;
  double radius;
};

// Trapezoidal quadrature of (1/2pi) oint <P(sigma) u(sigma), v(conj sigma)> dsigma
// on n equispaced nodes. Spectrally accurate for the (rational) germ data, so it
// serves as an independent check on the closed-form residue extraction.
inline Complex contour_pairing(const VectorSeries& u, const VectorSeries& v,
                               const MatrixPolynomial& p, Contour gamma, int n_nodes = 256,
                               const Tolerances& tol = {}) {
  for (Complex root : detail::companion_roots(p)) {
    if (std::abs(std::abs(root - gamma.center) - gamma.radius) < tol.edge)
      throw ContourTouchesSpectrum("contour_pairing: circle passes near a spectral point");
  }
  Complex acc{};
  for (int k = 0; k < n_nodes; ++k) {
    double th = 2.0 * M_PI * k / n_nodes;
    Complex z = gamma.center + gamma.radius * Complex{std::cos(th), std::sin(th)};
    CVector pu = p.eval(z) * u.eval(z);
    CVector vv = v.eval(std::conj(z));
    Complex f = vv.dot(pu);  // conjugates vv
    acc += f * (z - gamma.center);
  }
  return kI * acc / static_cast<double>(n_nodes);
}

inline Complex contour_pairing(const VectorSeries& u, const VectorSeries& v, const ConeModel& m,
                               Contour gamma, int n_nodes = 256, const Tolerances& tol = {}) {
  return contour_pairing(u, v, m.principal_symbol(), gamma, n_nodes, tol);
}

// Node-doubling wrapper: 256 nodes, doubled until two successive values agree
// to 1e-10, capped at 4096.
inline Complex contour_pairing_auto(const VectorSeries& u, const VectorSeries& v,
                                    const MatrixPolynomial& p, Contour gamma,
                                    const Tolerances& tol = {}) {
  int n = 256;
  Complex prev = contour_pairing(u, v, p, gamma, n, tol);
  while (n < 4096) {
    n *= 2;
    Complex next = contour_pairing(u, v, p, gamma, n, tol);
    if (std::abs(next - prev) <= 1e-10) return next;
    prev = next;
  }
  return prev;
}

struct BasisLabel {
  Complex sigma0;
  int j = 0;
  int l = 0;
};

inline std::string label_string(const BasisLabel& lb) {
  std::ostringstream os;
  os.precision(15);
  os << "(" << lb.sigma0.real() << "," << lb.sigma0.imag() << "," << lb.j << "," << lb.l << ")";
  return os.str();
}

// Gram matrix of the adjoint pairing between the extended bases of a model
// and of its formal adjoint: g(r, c) = [Psi_r, Psi*_c]. Entries between poles
// that are not nonnegative-integer i-shifts of conjugates are exactly zero.
struct PairingGram {
  std::vector<BasisLabel> rows;
  std::vector<BasisLabel> cols;
  CMatrix g;

  std::vector<int> rows_at(Complex sigma0, double tol = 1e-9) const {
    std::vector<int> out;
    for (size_t i = 0; i < rows.size(); ++i)
      if (std::abs(rows[i].sigma0 - sigma0) < tol) out.push_back(static_cast<int>(i));
    return out;
  }
  std::vector<int> cols_at(Complex sigma0, double tol = 1e-9) const {
    std::vector<int> out;
    for (size_t i = 0; i < cols.size(); ++i)
      if (std::abs(cols[i].sigma0 - sigma0) < tol) out.push_back(static_cast<int>(i));
    return out;
  }
  std::vector<Complex> row_points() const {
    std::vector<Complex> pts;
    for (const auto& lb : rows) {
      bool seen = false;
      for (Complex p : pts)
        if (std::abs(p - lb.sigma0) < 1e-9) seen = true;
      if (!seen) pts.push_back(lb.sigma0);
    }
    return pts;
  }
};

// Spectral points are only resolved up to the clustering tolerance, so all
// conjugate / integer-shift matching of base points uses the same scale.
inline double point_match_tol(const Tolerances& tol, Complex z) {
  return std::max(1e-9, tol.cluster * std::max(1.0, std::abs(z)));
}

// Each conjugate-pair diagonal block (sigma0 vs conj sigma0) must be
// nonsingular after row normalization; with per_point = false the full matrix
// is checked as well.
inline bool nondegeneracy_check(const PairingGram& gram, bool per_point = true,
                                const Tolerances& tol = {}, std::string* diag = nullptr) {
  auto check_block = [&](const CMatrix& b, const std::string& name) {
    if (b.rows() != b.cols()) {
      if (diag) *diag += name + ": block not square\n";
      return false;
    }
    if (b.rows() == 0) return true;
    CMatrix n = b;
    for (int i = 0; i < n.rows(); ++i) {
      double rn = n.row(i).norm();
      if (rn < 1e-300) {
        if (diag) *diag += name + ": zero row\n";
        return false;
      }
      n.row(i) /= rn;
    }
    double dv = std::abs(n.determinant());
    if (dv <= tol.det) {
      if (diag) *diag += name + ": |det| = " + std::to_string(dv) + "\n";
      return false;
    }
    return true;
  };

  bool ok = true;
  for (Complex p : gram.row_points()) {
    double mt = point_match_tol(tol, p);
    std::vector<int> ri = gram.rows_at(p, mt);
    std::vector<int> ci = gram.cols_at(std::conj(p), mt);
    if (ci.empty()) {
      if (diag) *diag += "no conjugate block for " + label_string({p, 0, 0}) + "\n";
      ok = false;
      continue;
    }
    CMatrix b(static_cast<int>(ri.size()), static_cast<int>(ci.size()));
    for (size_t a = 0; a < ri.size(); ++a)
      for (size_t c = 0; c < ci.size(); ++c)
        b(static_cast<int>(a), static_cast<int>(c)) = gram.g(ri[a], ci[c]);
    ok = check_block(b, "block at " + label_string({p, 0, 0})) && ok;
  }
  if (!per_point) ok = check_block(gram.g, "full gram") && ok;
  return ok;
}

inline std::string gram_to_csv(const PairingGram& gram) {
  std::ostringstream os;
  os.precision(15);
  os << "row_label/col_label";
  for (const auto& c : gram.cols) os << ";" << label_string(c);
  os << "\n";
  for (size_t i = 0; i < gram.rows.size(); ++i) {
    os << label_string(gram.rows[i]);
    for (size_t j = 0; j < gram.cols.size(); ++j) {
      Complex v = gram.g(static_cast<int>(i), static_cast<int>(j));
      os << ";" << v.real() << (v.imag() < 0 ? "" : "+") << v.imag() << "i";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace coneext
