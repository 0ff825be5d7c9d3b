// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pencil.hpp"
#include "types.hpp"

namespace coneext {

// splitmix64-based generator: deterministic across platforms, unlike the
// standard library distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }
  Complex complex_box() { return Complex{uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

  CMatrix matrix(int rows, int cols) {
    CMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = complex_box();
    return m;
  }

  // random matrix with unit-scale condition (QR of a random box matrix plus a
  // diagonal in [1/2, 2])
  CMatrix well_conditioned(int n) {
    CMatrix a = matrix(n, n);
    Eigen::HouseholderQR<CMatrix> qr(a);
    CMatrix q = qr.householderQ();
    CMatrix d = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = uniform(0.5, 2.0);
    return q * d;
  }

 private:
  uint64_t state_;
};

// ---------------------------------------------------------------------------
// bundled reference models

inline ConeModel model_cex1_a2() {
  return ConeModel(2.0, 1, {MatrixPolynomial::scalar({0.0, 0.0, 1.0})}, "cex1_a2");
}

// k = 0 and k = 1 modes of the a = 0.6 operator stacked: diag(s^2, s^2 + 0.36)
inline ConeModel model_cex1_a06() {
  std::vector<CMatrix> c(3, CMatrix::Zero(2, 2));
  c[0](1, 1) = 0.36;
  c[2](0, 0) = 1.0;
  c[2](1, 1) = 1.0;
  return ConeModel(2.0, 2, {MatrixPolynomial(2, c)}, "cex1_a06");
}

inline ConeModel model_beta_plus(double b = 0.5) {
  return ConeModel(2.0, 1, {MatrixPolynomial::scalar({b * b, 0.0, 1.0})}, "beta_plus");
}

inline ConeModel model_beta_minus_b05() {
  return ConeModel(2.0, 1, {MatrixPolynomial::scalar({-0.25, 0.0, 1.0})}, "beta_minus_b05");
}

// alpha(x)^2 = alpha0^2 + 2 alpha0 alpha1 x + O(x^2) on the k = 0, 1 modes
inline ConeModel model_alpha_perturbed(double alpha0 = 1.3, double alpha1 = 0.45) {
  std::vector<CMatrix> c0(3, CMatrix::Zero(2, 2));
  c0[0](1, 1) = alpha0 * alpha0;
  c0[2](0, 0) = 1.0;
  c0[2](1, 1) = 1.0;
  std::vector<CMatrix> c1(1, CMatrix::Zero(2, 2));
  c1[0](1, 1) = 2.0 * alpha0 * alpha1;
  return ConeModel(2.0, 2, {MatrixPolynomial(2, c0), MatrixPolynomial(2, c1)},
                   "alpha_perturbed");
}

inline ConeModel model_alpha_frozen(double alpha0 = 1.3) {
  std::vector<CMatrix> c0(3, CMatrix::Zero(2, 2));
  c0[0](1, 1) = alpha0 * alpha0;
  c0[2](0, 0) = 1.0;
  c0[2](1, 1) = 1.0;
  return ConeModel(2.0, 2, {MatrixPolynomial(2, c0)}, "alpha_frozen");
}

// spectrum-free strip: (sigma - 3.5i)^2 + 4, roots 5.5i and 1.5i
inline ConeModel model_shifted() {
  Complex s{0.0, 3.5};
  // (sigma - s)^2 + 4 = sigma^2 - 2 s sigma + s^2 + 4
  return ConeModel(2.0, 1, {MatrixPolynomial::scalar({s * s + 4.0, -2.0 * s, 1.0})}, "shifted");
}

// nontrivial Jordan structure: [[sigma, 1], [0, sigma]], mu = [2] at 0
inline ConeModel model_jordan2() {
  std::vector<CMatrix> c(2, CMatrix::Zero(2, 2));
  c[0](0, 1) = 1.0;
  c[1](0, 0) = 1.0;
  c[1](1, 1) = 1.0;
  return ConeModel(2.0, 2, {MatrixPolynomial(2, c)}, "jordan2");
}

// mu = [4] at the origin
inline ConeModel model_quartic() {
  return ConeModel(2.0, 1, {MatrixPolynomial::scalar({0.0, 0.0, 0.0, 0.0, 1.0})}, "quartic");
}

// symmetric model whose spectral points differ by exactly i, with an active
// x-tail: (xD_x)^2 + 1/4 + x ((0.3 + 0.1i) + 0.2 xD_x)
inline ConeModel model_tau_coupled() {
  return ConeModel(2.0, 1,
                   {MatrixPolynomial::scalar({0.25, 0.0, 1.0}),
                    MatrixPolynomial::scalar({Complex{0.3, 0.1}, 0.2})},
                   "tau_coupled");
}

// one-step shift recursion with nonspectral landing point: roots +-0.6i,
// constant x-tail
inline ConeModel model_recursion_tail(Complex c1 = Complex{0.7, 0.0}) {
  return ConeModel(2.0, 1,
                   {MatrixPolynomial::scalar({0.36, 0.0, 1.0}), MatrixPolynomial::scalar({c1})},
                   "recursion_tail");
}

inline std::vector<ConeModel> model_zoo() {
  return {model_cex1_a2(),     model_cex1_a06(), model_beta_plus(),    model_beta_minus_b05(),
          model_alpha_perturbed(), model_jordan2(),  model_quartic(),      model_tau_coupled(),
          model_recursion_tail()};
}

// ---------------------------------------------------------------------------
// random engineered pencils

struct EngineeredPencil {
  MatrixPolynomial p;
  Complex sigma0;
  std::vector<int> mults;  // nonincreasing
};

// E(sigma) diag((sigma-sigma0)^{mu_j}, 1, ...) F(sigma) with holomorphic
// invertible E, F (well-conditioned constant part plus a small linear one).
inline EngineeredPencil random_smith_pencil(Rng& rng, int d, int max_mult) {
  Complex sigma0 = rng.complex_box();
  int dp = rng.uniform_int(1, d);
  std::vector<int> mults(static_cast<size_t>(dp));
  for (auto& m : mults) m = rng.uniform_int(1, max_mult);
  std::sort(mults.begin(), mults.end(), std::greater<int>());
  int deg = mults.front();

  CMatrix e0 = rng.well_conditioned(d);
  CMatrix e1 = 0.1 * rng.matrix(d, d);
  CMatrix f0 = rng.well_conditioned(d);
  CMatrix f1 = 0.1 * rng.matrix(d, d);

  // P = (e0 + (sigma-sigma0) e1) D(sigma) (f0 + (sigma-sigma0) f1)
  int total_deg = deg + 2;
  std::vector<CMatrix> coeffs(static_cast<size_t>(total_deg) + 1, CMatrix::Zero(d, d));
  // assemble in the shifted variable w = sigma - sigma0 first
  std::vector<CMatrix> shifted(static_cast<size_t>(total_deg) + 1, CMatrix::Zero(d, d));
  for (int i = 0; i < d; ++i) {
    int mu = i < dp ? mults[static_cast<size_t>(i)] : 0;
    // contribution E(w) * w^mu e_i e_i^T * F(w)
    for (int a = 0; a <= 1; ++a)
      for (int b = 0; b <= 1; ++b) {
        const CMatrix& ea = a == 0 ? e0 : e1;
        const CMatrix& fb = b == 0 ? f0 : f1;
        int pw = mu + a + b;
        shifted[static_cast<size_t>(pw)] += ea.col(i) * fb.row(i);
      }
  }
  // re-expand about 0: P(sigma) = sum shifted_k (sigma - sigma0)^k
  for (int k = 0; k <= total_deg; ++k) {
    double binom = 1.0;
    Complex cp = 1.0;
    for (int j = k; j <= total_deg; ++j) {
      if (j > k) {
        binom = binom * static_cast<double>(j) / static_cast<double>(j - k);
        cp *= -sigma0;
      }
      coeffs[static_cast<size_t>(k)] += binom * cp * shifted[static_cast<size_t>(j)];
    }
  }
  return EngineeredPencil{MatrixPolynomial(d, std::move(coeffs)), sigma0, std::move(mults)};
}

// Q*(sigma) Q(sigma) for a pencil Q vanishing at a real point: selfadjoint,
// nonnegative on the real axis, so all partial multiplicities are even.
inline EngineeredPencil random_qq_pencil(Rng& rng, int d) {
  Complex sigma0{rng.uniform(-1.0, 1.0), 0.0};
  int defect = rng.uniform_int(1, std::max(1, d - 1));
  CMatrix q0 = rng.well_conditioned(d);
  // kill `defect` columns' contribution at sigma0: build q0 with rank d-defect
  Eigen::JacobiSVD<CMatrix> svd(q0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CVector s = svd.singularValues();
  CMatrix sd = CMatrix::Zero(d, d);
  for (int i = 0; i < d - defect; ++i) sd(i, i) = s(i);
  q0 = svd.matrixU() * sd * svd.matrixV().adjoint();
  CMatrix q1 = rng.well_conditioned(d);

  // Q(sigma) = q0 + (sigma - sigma0) q1, then P = Q~(sigma) Q(sigma) where
  // Q~(sigma) = (Q(conj sigma))^H has coefficients q0^H, q1^H in (sigma-sigma0)
  std::vector<CMatrix> shifted(3);
  shifted[0] = q0.adjoint() * q0;
  shifted[1] = q0.adjoint() * q1 + q1.adjoint() * q0;
  shifted[2] = q1.adjoint() * q1;
  std::vector<CMatrix> coeffs(3, CMatrix::Zero(d, d));
  for (int k = 0; k <= 2; ++k) {
    double binom = 1.0;
    Complex cp = 1.0;
    for (int j = k; j <= 2; ++j) {
      if (j > k) {
        binom = binom * static_cast<double>(j) / static_cast<double>(j - k);
        cp *= -sigma0;
      }
      coeffs[static_cast<size_t>(k)] += binom * cp * shifted[static_cast<size_t>(j)];
    }
  }
  return EngineeredPencil{MatrixPolynomial(d, std::move(coeffs)), sigma0, {}};
}

// Random b-elliptic models with spectrum scattered through the strip; the
// symmetric variant squares a pencil that drops rank at a real point, so it
// is nonnegative on the real axis with even multiplicities there.
inline ConeModel random_strip_model(Rng& rng, bool symmetric_positive) {
  int d = rng.uniform_int(1, 3);
  const double nu_choices[] = {1.0, 1.5, 2.0, 3.0};
  double nu = nu_choices[rng.uniform_int(0, 3)];
  if (symmetric_positive) {
    Complex s0{rng.uniform(-0.8, 0.8), 0.0};
    CMatrix q0 = rng.well_conditioned(d);
    Eigen::JacobiSVD<CMatrix> svd(q0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    CMatrix sd = CMatrix::Zero(d, d);
    for (int i = 0; i < d - 1; ++i) sd(i, i) = svd.singularValues()(i);
    q0 = svd.matrixU() * sd * svd.matrixV().adjoint();
    CMatrix q1 = rng.well_conditioned(d);
    std::vector<CMatrix> sh(3);
    sh[0] = q0.adjoint() * q0;
    sh[1] = q0.adjoint() * q1 + q1.adjoint() * q0;
    sh[2] = q1.adjoint() * q1;
    std::vector<CMatrix> c(3, CMatrix::Zero(d, d));
    for (int k = 0; k <= 2; ++k) {
      double binom = 1.0;
      Complex cp = 1.0;
      for (int j = k; j <= 2; ++j) {
        if (j > k) {
          binom = binom * static_cast<double>(j) / static_cast<double>(j - k);
          cp *= -s0;
        }
        c[static_cast<size_t>(k)] += binom * cp * sh[static_cast<size_t>(j)];
      }
    }
    return ConeModel(nu, d, {MatrixPolynomial(d, c)}, "random_sym");
  }
  // E diag(q_i(sigma)) F with scalar factors whose roots lie inside the strip
  std::vector<std::vector<Complex>> qs(static_cast<size_t>(d));
  int deg = 0;
  for (int i = 0; i < d; ++i) {
    int nroots = rng.uniform_int(1, 2);
    std::vector<Complex> poly = {Complex{1.0, 0.0}};
    for (int r = 0; r < nroots; ++r) {
      Complex root{rng.uniform(-1.0, 1.0), rng.uniform(-nu / 2 + 0.15, nu / 2 - 0.15)};
      std::vector<Complex> next(poly.size() + 1, Complex{});
      for (size_t a = 0; a < poly.size(); ++a) {
        next[a + 1] += poly[a];
        next[a] -= root * poly[a];
      }
      poly = next;  // coefficients stay in ascending powers
    }
    qs[static_cast<size_t>(i)] = poly;
    deg = std::max(deg, static_cast<int>(poly.size()) - 1);
  }
  CMatrix e = rng.well_conditioned(d);
  CMatrix f = rng.well_conditioned(d);
  std::vector<CMatrix> c(static_cast<size_t>(deg) + 1, CMatrix::Zero(d, d));
  for (int i = 0; i < d; ++i) {
    std::vector<Complex> q = qs[static_cast<size_t>(i)];
    while (static_cast<int>(q.size()) - 1 < deg) {
      // raise the degree with a factor rooted far outside the strip
      std::vector<Complex> next(q.size() + 1, Complex{});
      for (size_t a = 0; a < q.size(); ++a) {
        next[a + 1] += q[a];
        next[a] -= Complex{2.0, 3.0} * q[a];
      }
      q = next;
    }
    for (int k = 0; k <= deg; ++k)
      c[static_cast<size_t>(k)] += q[static_cast<size_t>(k)] * (e.col(i) * f.row(i));
  }
  std::vector<MatrixPolynomial> ind = {MatrixPolynomial(d, c)};
  int n_terms = static_cast<int>(std::ceil(nu - 1e-12));
  if (rng.uniform() < 0.5)
    for (int k = 1; k < n_terms; ++k)
      ind.push_back(MatrixPolynomial(d, {0.3 * rng.matrix(d, d), 0.2 * rng.matrix(d, d)}));
  return ConeModel(nu, d, ind, "random_strip");
}

// Winding-number count of det P around a circle: (1/2 pi i) oint tr(P^{-1} P') dsigma.
inline int det_winding_count(const MatrixPolynomial& p, Complex center, double radius,
                             int nodes = 512) {
  MatrixPolynomial dp = p.derivative();
  Complex acc{};
  for (int k = 0; k < nodes; ++k) {
    double th = 2.0 * M_PI * k / nodes;
    Complex z = center + radius * Complex{std::cos(th), std::sin(th)};
    Eigen::PartialPivLU<CMatrix> lu(p.eval(z));
    acc += (lu.solve(dp.eval(z))).trace() * (z - center);
  }
  return static_cast<int>(std::lround((acc / static_cast<double>(nodes)).real()));
}

}  // namespace coneext
