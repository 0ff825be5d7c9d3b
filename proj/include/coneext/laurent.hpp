// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "types.hpp"

namespace coneext {

inline double coeff_norm(const Complex& c) { return std::abs(c); }
inline double coeff_norm(const CVector& v) { return v.norm(); }
inline double coeff_norm(const CMatrix& m) { return m.norm(); }

inline Complex zero_like(const Complex&) { return Complex{0.0, 0.0}; }
inline CVector zero_like(const CVector& v) { return CVector::Zero(v.size()); }
inline CMatrix zero_like(const CMatrix& m) { return CMatrix::Zero(m.rows(), m.cols()); }

inline Complex conj_coeff(const Complex& c) { return std::conj(c); }
inline CVector conj_coeff(const CVector& v) { return v.conjugate(); }
inline CMatrix conj_coeff(const CMatrix& m) { return m.conjugate(); }

// Truncated Laurent expansion  sum_k c_k (sigma - base)^k.
// Coefficients are stored for k = lead .. lead+n-1; exponents above `valid`
// are unknown (lost to truncation).  kExactOrder marks exact data, e.g. a
// polynomial re-expanded about a point.
template <class T>
class Series {
 public:
  static constexpr int kExactOrder = std::numeric_limits<int>::max() / 4;

  Series() : base_(0.0), lead_(0), valid_(kExactOrder), coef_(1, T{}), zero_(T{}) {}

  Series(Complex base, int lead, std::vector<T> coef, int valid = kExactOrder)
      : base_(base), lead_(lead), valid_(valid), coef_(std::move(coef)) {
    if (coef_.empty()) throw Error("Series: empty coefficient list");
    zero_ = zero_like(coef_.front());
    if (valid_ < last()) {
      int keep = valid_ - lead_ + 1;
      if (keep < 1) {
        coef_.assign(1, zero_);
        lead_ = valid_;
      } else {
        coef_.resize(static_cast<size_t>(keep));
      }
    }
  }

  static Series zero(Complex base, const T& proto, int valid = kExactOrder) {
    return Series(base, 0, {zero_like(proto)}, valid);
  }

  const Complex& base() const { return base_; }
  int lead() const { return lead_; }
  int last() const { return lead_ + static_cast<int>(coef_.size()) - 1; }
  int valid_to() const { return valid_; }
  bool exact() const { return valid_ >= kExactOrder; }
  const std::vector<T>& coeffs() const { return coef_; }
  const T& zero_proto() const { return zero_; }

  // Coefficient of (sigma-base)^k; zero outside the stored window.
  const T& at(int k) const {
    if (k < lead_ || k > last()) return zero_;
    return coef_[static_cast<size_t>(k - lead_)];
  }

  void ensure_valid(int k, const char* what) const {
    if (k > valid_)
      throw TruncationTooShort(std::string(what) + ": series valid to order " +
                               std::to_string(valid_) + ", need " + std::to_string(k));
  }

  double max_norm() const {
    double s = 0.0;
    for (const auto& c : coef_) s = std::max(s, coeff_norm(c));
    return s;
  }

  // Smallest exponent whose coefficient is significant relative to the
  // largest stored one; nullopt when the series is zero to working precision.
  std::optional<int> valuation(double rel_tol) const {
    double scale = max_norm();
    if (scale == 0.0) return std::nullopt;
    for (size_t i = 0; i < coef_.size(); ++i)
      if (coeff_norm(coef_[i]) > rel_tol * scale) return lead_ + static_cast<int>(i);
    return std::nullopt;
  }

  int pole_order(double rel_tol) const {
    auto v = valuation(rel_tol);
    if (!v || *v >= 0) return 0;
    return -*v;
  }

  Series rebased(Complex new_base) const {
    Series s = *this;
    s.base_ = new_base;
    return s;
  }

  // Multiply by (sigma-base)^s.
  Series shifted(int s) const {
    Series r = *this;
    r.lead_ += s;
    if (!r.exact()) r.valid_ += s;
    return r;
  }

  Series truncated(int new_valid) const {
    return Series(base_, lead_, coef_, std::min(valid_, new_valid));
  }

  // Drop all coefficients below exponent k0 (used after rank decisions in the
  // factorization; the dropped entries must already be negligible).
  Series clipped_before(int k0) const {
    if (lead_ >= k0) return *this;
    int drop = k0 - lead_;
    std::vector<T> c;
    if (drop >= static_cast<int>(coef_.size()))
      c.assign(1, zero_);
    else
      c.assign(coef_.begin() + drop, coef_.end());
    return Series(base_, k0, std::move(c), valid_);
  }

  // Keep exponents <= -1. The result is exact data of the representative.
  Series principal_part() const {
    std::vector<T> c;
    for (int k = lead_; k <= std::min(last(), -1); ++k) c.push_back(at(k));
    if (c.empty()) return zero(base_, zero_);
    return Series(base_, lead_, std::move(c));
  }

  // Keep exponents >= 0.
  Series holomorphic_part() const {
    if (lead_ >= 0) return *this;
    std::vector<T> c;
    for (int k = 0; k <= last(); ++k) c.push_back(at(k));
    if (c.empty()) c.push_back(zero_);
    return Series(base_, 0, std::move(c), valid_);
  }

  bool has_principal(double rel_tol) const { return pole_order(rel_tol) > 0; }

  T eval(Complex sigma) const {
    Complex d = sigma - base_;
    T acc = coef_.back();
    for (int i = static_cast<int>(coef_.size()) - 2; i >= 0; --i)
      acc = coef_[static_cast<size_t>(i)] + d * acc;
    if (lead_ == 0) return acc;
    return std::pow(d, lead_) * acc;
  }

  Series& operator*=(Complex c) {
    for (auto& x : coef_) x = c * x;
    return *this;
  }

 private:
  Complex base_;
  int lead_;
  int valid_;
  std::vector<T> coef_;
  T zero_;
};

using ScalarSeries = Series<Complex>;
using VectorSeries = Series<CVector>;
using MatrixSeries = Series<CMatrix>;

namespace detail {

inline int sat_add(int a, int b) {
  if (a >= Series<Complex>::kExactOrder || b >= Series<Complex>::kExactOrder)
    return Series<Complex>::kExactOrder;
  return a + b;
}

inline void check_same_base(Complex a, Complex b, const char* what) {
  if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a)))
    throw BasePointMismatch(std::string(what) + ": base points differ");
}

}  // namespace detail

template <class T>
Series<T> operator+(const Series<T>& a, const Series<T>& b) {
  detail::check_same_base(a.base(), b.base(), "series add");
  int valid = std::min(a.valid_to(), b.valid_to());
  int lead = std::min(a.lead(), b.lead());
  int last = std::min(std::max(a.last(), b.last()), valid);
  std::vector<T> c;
  for (int k = lead; k <= std::max(lead, last); ++k) c.push_back(a.at(k) + b.at(k));
  return Series<T>(a.base(), lead, std::move(c), valid);
}

template <class T>
Series<T> operator-(const Series<T>& a) {
  std::vector<T> c = a.coeffs();
  for (auto& x : c) x = -x;
  return Series<T>(a.base(), a.lead(), std::move(c), a.valid_to());
}

template <class T>
Series<T> operator-(const Series<T>& a, const Series<T>& b) {
  return a + (-b);
}

template <class T>
Series<T> operator*(Complex c, const Series<T>& a) {
  std::vector<T> v = a.coeffs();
  for (auto& x : v) x = c * x;
  return Series<T>(a.base(), a.lead(), std::move(v), a.valid_to());
}

// Generic Cauchy product with a per-coefficient combiner.
template <class A, class B, class R, class F>
Series<R> convolve(const Series<A>& a, const Series<B>& b, F&& f, const R& proto) {
  detail::check_same_base(a.base(), b.base(), "series product");
  int lead = a.lead() + b.lead();
  int valid = std::min(detail::sat_add(a.valid_to(), b.lead()),
                       detail::sat_add(b.valid_to(), a.lead()));
  int last = std::min(a.last() + b.last(), valid);
  std::vector<R> c;
  for (int k = lead; k <= std::max(lead, last); ++k) {
    R acc = zero_like(proto);
    int m_lo = std::max(a.lead(), k - b.last());
    int m_hi = std::min(a.last(), k - b.lead());
    for (int m = m_lo; m <= m_hi; ++m) acc += f(a.at(m), b.at(k - m));
    c.push_back(acc);
  }
  return Series<R>(a.base(), lead, std::move(c), valid);
}

inline ScalarSeries operator*(const ScalarSeries& a, const ScalarSeries& b) {
  return convolve(a, b, [](const Complex& x, const Complex& y) { return x * y; },
                  Complex{});
}

inline VectorSeries operator*(const ScalarSeries& a, const VectorSeries& b) {
  return convolve(a, b, [](const Complex& x, const CVector& y) -> CVector { return x * y; },
                  b.zero_proto());
}

inline MatrixSeries operator*(const ScalarSeries& a, const MatrixSeries& b) {
  return convolve(a, b, [](const Complex& x, const CMatrix& y) -> CMatrix { return x * y; },
                  b.zero_proto());
}

inline VectorSeries operator*(const MatrixSeries& m, const VectorSeries& v) {
  CVector proto = CVector::Zero(m.zero_proto().rows());
  return convolve(m, v, [](const CMatrix& x, const CVector& y) -> CVector { return x * y; },
                  proto);
}

inline MatrixSeries matmul(const MatrixSeries& a, const MatrixSeries& b) {
  CMatrix proto = CMatrix::Zero(a.zero_proto().rows(), b.zero_proto().cols());
  return convolve(a, b, [](const CMatrix& x, const CMatrix& y) -> CMatrix { return x * y; },
                  proto);
}

// Theta(f)(sigma) = conj(f(conj(sigma))): germ at conj(base) with conjugated
// coefficients. An involution.
template <class T>
Series<T> theta(const Series<T>& s) {
  std::vector<T> c;
  c.reserve(s.coeffs().size());
  for (const auto& x : s.coeffs()) c.push_back(conj_coeff(x));
  return Series<T>(std::conj(s.base()), s.lead(), std::move(c), s.valid_to());
}

// iota(u, v)(sigma) = <u(sigma), v(conj(sigma))> as a scalar germ at u's base.
// v must be based at the conjugate point; the Hermitian pairing conjugates v's
// coefficients, so coefficient p of the result is sum_{m+n=p} v_n^H u_m.
inline ScalarSeries iota(const VectorSeries& u, const VectorSeries& v) {
  detail::check_same_base(u.base(), std::conj(v.base()), "iota");
  VectorSeries vc = theta(v);  // now based at u's base with conj coefficients
  return convolve(
      u, vc,
      [](const CVector& a, const CVector& bc) -> Complex { return a.cwiseProduct(bc).sum(); },
      Complex{});
}

// Reciprocal of a scalar series: f = d^v * u with u(0) != 0, 1/f = d^{-v} u^{-1}.
// rel_order bounds the number of computed coefficients of u^{-1}.
inline ScalarSeries inverse(const ScalarSeries& f, int rel_order, double zero_tol) {
  auto v = f.valuation(zero_tol);
  if (!v) throw BlockNotInvertible("inverse: series is zero to working precision");
  int val = *v;
  int avail = f.exact() ? rel_order : f.valid_to() - val;
  int n = std::min(rel_order, avail) + 1;
  if (n < 1)
    throw TruncationTooShort("inverse: no trustworthy coefficients past the valuation");
  std::vector<Complex> u(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) u[static_cast<size_t>(i)] = f.at(val + i);
  std::vector<Complex> b(static_cast<size_t>(n));
  b[0] = 1.0 / u[0];
  for (int k = 1; k < n; ++k) {
    Complex acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += u[static_cast<size_t>(j)] * b[static_cast<size_t>(k - j)];
    b[static_cast<size_t>(k)] = -acc / u[0];
  }
  int valid = f.exact() ? (n - 1 - val) : (f.valid_to() - 2 * val);
  return ScalarSeries(f.base(), -val, std::move(b), valid);
}

inline ScalarSeries operator/(const ScalarSeries& a, const ScalarSeries& b) {
  int rel = 2 * std::max(std::abs(a.last()) + std::abs(b.last()), 4);
  return a * inverse(b, rel, 1e-12);
}

// Inverse of a matrix Taylor series whose valuation coefficient is invertible.
// General singular families go through the local Smith factorization instead.
inline MatrixSeries matrix_inverse(const MatrixSeries& f, int rel_order, double zero_tol,
                                   double cond_max = 1e10) {
  auto v = f.valuation(zero_tol);
  if (!v) throw BlockNotInvertible("matrix_inverse: series is zero to working precision");
  int val = *v;
  const CMatrix& c0 = f.at(val);
  Eigen::JacobiSVD<CMatrix> svd(c0);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > cond_max)
    throw BlockNotInvertible("matrix_inverse: valuation coefficient is numerically singular");
  Eigen::PartialPivLU<CMatrix> lu(c0);
  int avail = f.exact() ? rel_order : f.valid_to() - val;
  int n = std::min(rel_order, avail) + 1;
  if (n < 1) throw TruncationTooShort("matrix_inverse: not enough trustworthy coefficients");
  std::vector<CMatrix> b(static_cast<size_t>(n));
  b[0] = lu.inverse();
  for (int k = 1; k < n; ++k) {
    CMatrix acc = CMatrix::Zero(c0.rows(), c0.cols());
    for (int j = 1; j <= k; ++j) acc += f.at(val + j) * b[static_cast<size_t>(k - j)];
    b[static_cast<size_t>(k)] = -lu.solve(acc);
  }
  int valid = f.exact() ? (n - 1 - val) : (f.valid_to() - 2 * val);
  return MatrixSeries(f.base(), -val, std::move(b), valid);
}

// Holomorphic square root of a scalar series with positive real constant term
// and (numerically) real coefficients; satisfies k*k = h with real k.
inline ScalarSeries sqrt_real(const ScalarSeries& h, int rel_order) {
  if (h.lead() > 0 || h.pole_order(1e-12) > 0)
    throw Error("sqrt_real: series must be holomorphic with nonzero constant term");
  double h0 = h.at(0).real();
  if (h0 <= 0.0 || std::abs(h.at(0).imag()) > 1e-8 * std::max(1.0, h0))
    throw Error("sqrt_real: constant term must be positive real");
  int avail = h.exact() ? rel_order : h.valid_to();
  int n = std::min(rel_order, avail) + 1;
  std::vector<Complex> k(static_cast<size_t>(n));
  k[0] = std::sqrt(h0);
  for (int p = 1; p < n; ++p) {
    Complex acc = h.at(p);
    for (int i = 1; i < p; ++i) acc -= k[static_cast<size_t>(i)] * k[static_cast<size_t>(p - i)];
    k[static_cast<size_t>(p)] = acc / (2.0 * k[0]);
  }
  return ScalarSeries(h.base(), 0, std::move(k), h.exact() ? ScalarSeries::kExactOrder : h.valid_to());
}

// Exact series of the polynomial sum_j coeffs[j] sigma^j re-expanded at `center`.
template <class T>
Series<T> polynomial_series(const std::vector<T>& coeffs, Complex center) {
  int m = static_cast<int>(coeffs.size()) - 1;
  std::vector<T> out(static_cast<size_t>(m + 1), zero_like(coeffs.front()));
  for (int k = 0; k <= m; ++k) {
    // binomial re-expansion: T_k = sum_{j>=k} C(j,k) center^{j-k} A_j
    double binom = 1.0;
    Complex cp = 1.0;
    for (int j = k; j <= m; ++j) {
      if (j > k) {
        binom = binom * static_cast<double>(j) / static_cast<double>(j - k);
        cp *= center;
      }
      out[static_cast<size_t>(k)] += binom * cp * coeffs[static_cast<size_t>(j)];
    }
  }
  return Series<T>(center, 0, std::move(out));
}

// Multiply by (c0 + (sigma-base))^p, the re-expansion at `base` of the global
// polynomial (sigma - (base - c0))^p.
template <class T>
Series<T> multiply_affine_power(const Series<T>& s, Complex c0, int p) {
  std::vector<Complex> lin = {c0, Complex{1.0, 0.0}};
  ScalarSeries aff(s.base(), 0, lin);
  Series<T> r = s;
  for (int i = 0; i < p; ++i) r = aff * r;
  return r;
}

}  // namespace coneext
