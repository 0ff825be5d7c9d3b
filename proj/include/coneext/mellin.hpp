// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "laurent.hpp"
#include "pencil.hpp"
#include "types.hpp"

namespace coneext {

namespace detail {

// e^{-1/t} and its derivatives: f^{(n)}(t) = e^{-1/t} Q_n(1/t) with the
// polynomial recursion Q_{n+1}(u) = u^2 (Q_n(u) - Q_n'(u)).
inline double bump_deriv(double t, int n) {
  if (t < 1.0 / 700.0) return 0.0;
  static thread_local std::vector<std::vector<double>> q_cache{{1.0}};
  while (static_cast<int>(q_cache.size()) <= n) {
    const std::vector<double>& q = q_cache.back();
    std::vector<double> next(q.size() + 2, 0.0);
    for (size_t i = 0; i < q.size(); ++i) {
      next[i + 2] += q[i];                                  // u^2 * Q_n
      if (i >= 1) next[i + 1] -= static_cast<double>(i) * q[i];  // -u^2 Q_n'
    }
    q_cache.push_back(std::move(next));
  }
  double u = 1.0 / t;
  double acc = 0.0;
  const std::vector<double>& q = q_cache[static_cast<size_t>(n)];
  for (size_t i = q.size(); i-- > 0;) acc = acc * u + q[i];
  return std::exp(-u) * acc;
}

}  // namespace detail

// Smooth cutoff built from e^{-1/t} mollification: identically 1 on (0, x_lo],
// identically 0 on [x_hi, infinity), with exact derivatives of any order.
struct CutoffProfile {
  double x_lo = 0.25;
  double x_hi = 0.75;

  double step(double t, int n) const {  // s = f(t)/(f(t)+f(1-t)) and derivatives
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return n == 0 ? 1.0 : 0.0;
    std::vector<double> fs(static_cast<size_t>(n) + 1), gs(static_cast<size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
      double fk = detail::bump_deriv(t, k);
      double fk1 = detail::bump_deriv(1.0 - t, k);
      fs[static_cast<size_t>(k)] = fk;
      gs[static_cast<size_t>(k)] = fk + (k % 2 == 0 ? fk1 : -fk1);
    }
    std::vector<double> s(static_cast<size_t>(n) + 1);
    for (int m = 0; m <= n; ++m) {
      double acc = fs[static_cast<size_t>(m)];
      for (int k = 0; k < m; ++k) {
        double b = 1.0;
        for (int i = 0; i < k; ++i) b = b * static_cast<double>(m - i) / static_cast<double>(i + 1);
        acc -= b * s[static_cast<size_t>(k)] * gs[static_cast<size_t>(m - k)];
      }
      s[static_cast<size_t>(m)] = acc / gs[0];
    }
    return s[static_cast<size_t>(n)];
  }

  // omega and its x-derivatives of any order
  double omega(double x, int n = 0) const {
    if (x <= x_lo) return n == 0 ? 1.0 : 0.0;
    if (x >= x_hi) return 0.0;
    double delta = x_hi - x_lo;
    double t = (x_hi - x) / delta;
    return step(t, n) * std::pow(-1.0 / delta, n);
  }
};

// ---------------------------------------------------------------------------
// adaptive Gauss quadrature (15-point Gauss-Legendre with 7-point embedded
// error estimate) for smooth complex-valued integrands

namespace detail {

struct GaussRule {
  std::array<double, 15> x15, w15;
  std::array<double, 7> x7, w7;
};

inline const GaussRule& gauss_rule() {
  static const GaussRule r = [] {
    GaussRule g;
    g.x15 = {-0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
             -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
             -0.2011940939974345, 0.0,                 0.2011940939974345,
             0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
             0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
    g.w15 = {0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
             0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
             0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
             0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
             0.1071592204671719, 0.0703660474881081, 0.0307532419961173};
    g.x7 = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972, 0.0,
            0.4058451513773972,  0.7415311855993945,  0.9491079123427585};
    g.w7 = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694,
            0.3818300505051189, 0.2797053914892767, 0.1294849661688697};
    return g;
  }();
  return r;
}

template <class F>
Complex gauss_pair(F&& f, double a, double b, double* err) {
  const GaussRule& g = gauss_rule();
  double h = (b - a) / 2.0, c = (a + b) / 2.0;
  Complex i15{}, i7{};
  for (int i = 0; i < 15; ++i) i15 += g.w15[static_cast<size_t>(i)] * f(c + h * g.x15[static_cast<size_t>(i)]);
  for (int i = 0; i < 7; ++i) i7 += g.w7[static_cast<size_t>(i)] * f(c + h * g.x7[static_cast<size_t>(i)]);
  i15 *= h;
  i7 *= h;
  *err = std::abs(i15 - i7);
  return i15;
}

template <class F>
Complex adapt(F&& f, double a, double b, double abs_tol, int depth) {
  double err = 0.0;
  Complex val = gauss_pair(f, a, b, &err);
  if (err <= abs_tol || b - a < 1e-14) return val;
  if (depth > 48)
    throw QuadratureFailure("adaptive quadrature: tolerance not met at max subdivision");
  double c = (a + b) / 2.0;
  return adapt(f, a, c, abs_tol / 2.0, depth + 1) + adapt(f, c, b, abs_tol / 2.0, depth + 1);
}

}  // namespace detail

template <class F>
Complex integrate(F&& f, double a, double b, double rel_tol = 1e-10) {
  double err = 0.0;
  Complex rough = detail::gauss_pair(f, a, b, &err);
  double scale = std::max(std::abs(rough), 1e-6);
  return detail::adapt(f, a, b, rel_tol * scale, 0);
}

// ---------------------------------------------------------------------------
// model functions c * x^{i sigma0} (log x)^k * omega^{(r)}(x)

struct ModelTerm {
  Complex c;
  Complex sigma0;
  int logpow = 0;
  int omega_drv = 0;
};

class ModelFunction {
 public:
  ModelFunction() = default;
  ModelFunction(CutoffProfile cut, std::vector<ModelTerm> terms)
      : cut_(cut), terms_(std::move(terms)) {}

  static ModelFunction omega_power(const CutoffProfile& cut, Complex sigma0, int logpow,
                                   Complex coef = Complex{1.0, 0.0}) {
    return ModelFunction(cut, {ModelTerm{coef, sigma0, logpow, 0}});
  }

  const CutoffProfile& cutoff() const { return cut_; }
  const std::vector<ModelTerm>& terms() const { return terms_; }

  Complex eval(double x) const {
    Complex acc{};
    for (const auto& t : terms_) {
      double w = cut_.omega(x, t.omega_drv);
      if (w == 0.0) continue;
      Complex v = std::exp(kI * t.sigma0 * std::log(x));
      acc += t.c * v * std::pow(std::log(x), t.logpow) * w;
    }
    return acc;
  }

  // xD_x with D_x = -i d/dx; exact on the term algebra:
  // xD_x [x^{is} log^k w_r] = s (same) - ik (log down) - i x^{i(s-i)} log^k w_{r+1}
  ModelFunction apply_xdx() const {
    std::vector<ModelTerm> out;
    for (const auto& t : terms_) {
      out.push_back(ModelTerm{t.c * t.sigma0, t.sigma0, t.logpow, t.omega_drv});
      if (t.logpow > 0)
        out.push_back(ModelTerm{t.c * Complex{0.0, -static_cast<double>(t.logpow)}, t.sigma0,
                                t.logpow - 1, t.omega_drv});
      out.push_back(
          ModelTerm{t.c * Complex{0.0, -1.0}, t.sigma0 - kI, t.logpow, t.omega_drv + 1});
    }
    return ModelFunction(cut_, collect(out));
  }

  // multiply by x^p (p may be negative or fractional): sigma0 -> sigma0 - ip
  ModelFunction times_x_power(double p) const {
    std::vector<ModelTerm> out = terms_;
    for (auto& t : out) t.sigma0 -= Complex{0.0, p};
    return ModelFunction(cut_, std::move(out));
  }

  ModelFunction scaled(Complex a) const {
    std::vector<ModelTerm> out = terms_;
    for (auto& t : out) t.c *= a;
    return ModelFunction(cut_, std::move(out));
  }

  ModelFunction plus(const ModelFunction& other) const {
    std::vector<ModelTerm> out = terms_;
    out.insert(out.end(), other.terms_.begin(), other.terms_.end());
    return ModelFunction(cut_, collect(out));
  }

  // p(xD_x) applied termwise through Horner on the operator
  ModelFunction apply_poly(const std::vector<Complex>& poly) const {
    ModelFunction acc(cut_, {});
    for (size_t j = poly.size(); j-- > 0;) {
      acc = acc.apply_xdx();
      acc = acc.plus(scaled(poly[j]));
    }
    return acc;
  }

 private:
  static std::vector<ModelTerm> collect(const std::vector<ModelTerm>& in) {
    std::vector<ModelTerm> out;
    for (const auto& t : in) {
      bool merged = false;
      for (auto& o : out)
        if (o.logpow == t.logpow && o.omega_drv == t.omega_drv &&
            std::abs(o.sigma0 - t.sigma0) < 1e-12) {
          o.c += t.c;
          merged = true;
          break;
        }
      if (!merged) out.push_back(t);
    }
    // trim relative to the function scale: cancelled combinations leave
    // roundoff residues proportional to the coefficient magnitudes
    double scale = 0.0;
    for (const auto& t : out) scale = std::max(scale, std::abs(t.c));
    double cut = std::max(1e-15, 1e-12 * scale);
    std::vector<ModelTerm> trimmed;
    for (const auto& t : out)
      if (std::abs(t.c) >= cut) trimmed.push_back(t);
    return trimmed;
  }

  CutoffProfile cut_;
  std::vector<ModelTerm> terms_;
};

// A = x^{-nu} sum_k P_k(xD_x) x^k applied to a model function (scalar models).
inline ModelFunction apply_cone_operator(const ConeModel& model, const ModelFunction& u) {
  if (model.dim() != 1) throw NotScalar("apply_cone_operator: model is not scalar");
  ModelFunction acc(u.cutoff(), {});
  for (int k = 0; k < static_cast<int>(model.indicial().size()); ++k) {
    const MatrixPolynomial& p = model.symbol(k);
    if (p.is_zero(0.0)) continue;
    std::vector<Complex> poly;
    for (int j = 0; j <= p.degree(); ++j) poly.push_back(p.coeff(j)(0, 0));
    ModelFunction term = u.times_x_power(static_cast<double>(k)).apply_poly(poly);
    acc = acc.plus(term);
  }
  return acc.times_x_power(-model.nu());
}

// ---------------------------------------------------------------------------
// weighted inner products and the Green-identity pairing

// (u, v) in the x^{-nu/2} L^2_b norm: int_0^1 u conj(v) x^{nu-1} dx, via
// adaptive Gauss-Legendre in t = log x.
inline Complex weighted_inner(const ModelFunction& u, const ModelFunction& v, double nu,
                              double rel_tol = 1e-10) {
  const CutoffProfile& cut = u.cutoff();
  Complex total{};
  for (const auto& tu : u.terms()) {
    for (const auto& tv : v.terms()) {
      Complex alpha = tu.sigma0 - std::conj(tv.sigma0);
      int kk = tu.logpow + tv.logpow;
      double eps = nu - alpha.imag();
      double t_hi = std::log(cut.x_hi);
      double t_lo;
      if (tu.omega_drv > 0 || tv.omega_drv > 0) {
        t_lo = std::log(cut.x_lo);
      } else {
        if (eps <= 1e-9)
          throw Divergent("weighted_inner: non-integrable exponent (nu - Im alpha = " +
                          std::to_string(eps) + ")");
        t_lo = std::min(-45.0, -38.0 / eps);
      }
      Complex coef = tu.c * std::conj(tv.c);
      auto f = [&](double t) -> Complex {
        double x = std::exp(t);
        double w = cut.omega(x, tu.omega_drv) * cut.omega(x, tv.omega_drv);
        if (w == 0.0) return Complex{};
        return std::exp((kI * alpha + nu) * t) * std::pow(t, kk) * w;
      };
      total += coef * integrate(f, t_lo, t_hi, rel_tol);
    }
  }
  return total;
}

// Phi(sigma) = int x^{-i sigma} D_x omega dx with D_x = -i d/dx.
inline Complex phi(const CutoffProfile& cut, Complex sigma, double rel_tol = 1e-10) {
  auto f = [&](double t) -> Complex {
    double x = std::exp(t);
    return std::exp(-kI * sigma * t) * cut.omega(x, 1) * x;
  };
  return Complex{0.0, -1.0} * integrate(f, std::log(cut.x_lo), std::log(cut.x_hi), rel_tol);
}

// Taylor coefficients of Phi at 0 by Cauchy integrals on a radius-1/2 circle.
inline std::vector<Complex> phi_taylor(const CutoffProfile& cut, int order, int nodes = 128,
                                       double radius = 0.5) {
  std::vector<Complex> vals(static_cast<size_t>(nodes));
  for (int k = 0; k < nodes; ++k) {
    double th = 2.0 * M_PI * k / nodes;
    vals[static_cast<size_t>(k)] = phi(cut, radius * Complex{std::cos(th), std::sin(th)});
  }
  std::vector<Complex> out(static_cast<size_t>(order) + 1);
  for (int m = 0; m <= order; ++m) {
    Complex acc{};
    for (int k = 0; k < nodes; ++k) {
      double th = 2.0 * M_PI * k / nodes;
      acc += vals[static_cast<size_t>(k)] * std::exp(-kI * static_cast<double>(m) * th);
    }
    out[static_cast<size_t>(m)] = acc / (static_cast<double>(nodes) * std::pow(radius, m));
  }
  return out;
}

// Mellin germ at sigma0 of the matching terms of u. With F(w) = Phi(w)/w, the
// transform of omega x^{i s0} (log x)^k is (-i d/ds0)^k F(sigma - s0) =
// (-i)^k (-1)^k F^{(k)}(sigma - s0); the principal part is the single
// coefficient (-i)^k k! Phi(0) at depth k+1, with zero intermediate entries.
inline VectorSeries mellin_germ(const ModelFunction& u, Complex sigma0, int tail_order = 8) {
  std::vector<Complex> ph = phi_taylor(u.cutoff(), tail_order + 12);
  int depth = 1;
  for (const auto& t : u.terms())
    if (t.omega_drv == 0 && std::abs(t.sigma0 - sigma0) < 1e-12)
      depth = std::max(depth, t.logpow + 1);
  int lead = -depth;
  std::vector<CVector> coef(static_cast<size_t>(tail_order + depth + 1), CVector::Zero(1));
  bool found = false;
  for (const auto& t : u.terms()) {
    if (t.omega_drv != 0 || std::abs(t.sigma0 - sigma0) >= 1e-12) continue;
    found = true;
    int k = t.logpow;
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    Complex twist = std::pow(Complex{0.0, -1.0}, k);
    coef[static_cast<size_t>(-(k + 1) - lead)](0) += t.c * twist * fact * ph[0];
    // tail order m >= 0: (-1)^k a_{m+k} (m+k)!/m!, a_j = Taylor coeff j+1 of Phi
    for (int m = 0; m <= tail_order; ++m) {
      double ratio = 1.0;
      for (int i = m + 1; i <= m + k; ++i) ratio *= i;
      double sgn = k % 2 == 0 ? 1.0 : -1.0;
      coef[static_cast<size_t>(m - lead)](0) +=
          t.c * twist * sgn * ratio * ph[static_cast<size_t>(m + k + 1)];
    }
  }
  if (!found)
    throw Error("mellin_germ: sigma0 does not appear among the exponents of u");
  return VectorSeries(sigma0, lead, std::move(coef), tail_order);
}

// x-space representative of a scalar pure-principal germ: the coefficient of
// (s - sigma0)^{-(k+1)} maps to omega x^{i sigma0} (log x)^k scaled by
// 1 / ((-i)^k k! Phi(0)). Inverse of mellin_germ on principal parts.
inline ModelFunction model_function_of_principal(const CutoffProfile& cut,
                                                 const VectorSeries& principal) {
  if (principal.zero_proto().size() != 1)
    throw NotScalar("model_function_of_principal: vector germs have no scalar representative");
  std::vector<ModelTerm> terms;
  for (int m = principal.lead(); m <= std::min(-1, principal.last()); ++m) {
    Complex c = principal.at(m)(0);
    if (std::abs(c) < 1e-15) continue;
    int k = -m - 1;
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    Complex scale = std::pow(Complex{0.0, -1.0}, k) * fact * kI;
    terms.push_back(ModelTerm{c / scale, principal.base(), k, 0});
  }
  return ModelFunction(cut, terms);
}

// [u, v]_A = (Au, v) - (u, A* v), evaluated directly in x-space; the fully
// independent oracle for the residue and contour routes (scalar models).
inline Complex green_pairing_direct(const ConeModel& model, const ModelFunction& u,
                                    const ModelFunction& v, double rel_tol = 1e-10) {
  if (model.dim() != 1) throw NotScalar("green_pairing_direct: model is not scalar");
  ModelFunction au = apply_cone_operator(model, u);
  ModelFunction asv = apply_cone_operator(formal_adjoint(model), v);
  return weighted_inner(au, v, model.nu(), rel_tol) -
         weighted_inner(u, asv, model.nu(), rel_tol);
}

}  // namespace coneext
