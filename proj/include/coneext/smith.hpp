// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "laurent.hpp"
#include "types.hpp"

namespace coneext {

// Matrix of scalar series, the working representation for row/column
// operations over the local ring of holomorphic germs.
using SeriesGrid = std::vector<std::vector<ScalarSeries>>;

inline SeriesGrid grid_from(const MatrixSeries& m) {
  int rows = static_cast<int>(m.zero_proto().rows());
  int cols = static_cast<int>(m.zero_proto().cols());
  SeriesGrid g;
  g.reserve(static_cast<size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    std::vector<ScalarSeries> row;
    row.reserve(static_cast<size_t>(cols));
    for (int j = 0; j < cols; ++j) {
      std::vector<Complex> c;
      for (int k = m.lead(); k <= m.last(); ++k) c.push_back(m.at(k)(i, j));
      if (c.empty()) c.push_back(Complex{});
      row.emplace_back(m.base(), m.lead(), std::move(c), m.valid_to());
    }
    g.push_back(std::move(row));
  }
  return g;
}

inline SeriesGrid identity_grid(int n, Complex base) {
  SeriesGrid g;
  for (int i = 0; i < n; ++i) {
    std::vector<ScalarSeries> row;
    for (int j = 0; j < n; ++j)
      row.emplace_back(base, 0, std::vector<Complex>{i == j ? Complex{1.0} : Complex{}});
    g.push_back(std::move(row));
  }
  return g;
}

inline std::vector<ScalarSeries> grid_apply(const SeriesGrid& g,
                                            const std::vector<ScalarSeries>& v) {
  std::vector<ScalarSeries> out;
  out.reserve(g.size());
  for (const auto& row : g) {
    ScalarSeries acc = row[0] * v[0];
    for (size_t j = 1; j < row.size(); ++j) acc = acc + row[j] * v[j];
    out.push_back(std::move(acc));
  }
  return out;
}

inline std::vector<ScalarSeries> split_components(const VectorSeries& v) {
  int d = static_cast<int>(v.zero_proto().size());
  std::vector<ScalarSeries> out;
  for (int i = 0; i < d; ++i) {
    std::vector<Complex> c;
    for (int k = v.lead(); k <= v.last(); ++k) c.push_back(v.at(k)(i));
    if (c.empty()) c.push_back(Complex{});
    out.emplace_back(v.base(), v.lead(), std::move(c), v.valid_to());
  }
  return out;
}

inline VectorSeries join_components(const std::vector<ScalarSeries>& comps) {
  int d = static_cast<int>(comps.size());
  int lead = comps[0].lead();
  int valid = comps[0].valid_to();
  int last = comps[0].last();
  for (const auto& c : comps) {
    lead = std::min(lead, c.lead());
    valid = std::min(valid, c.valid_to());
    last = std::max(last, c.last());
  }
  last = std::min(last, valid);
  std::vector<CVector> out;
  for (int k = lead; k <= std::max(lead, last); ++k) {
    CVector v = CVector::Zero(d);
    for (int i = 0; i < d; ++i) v(i) = comps[static_cast<size_t>(i)].at(k);
    out.push_back(std::move(v));
  }
  return VectorSeries(comps[0].base(), lead, std::move(out), valid);
}

// Local Smith-type factorization M = E diag((s-s0)^kappa_i) F of a matrix
// Taylor series with det not identically zero: einv = E^{-1}, finv = F^{-1},
// both holomorphic and invertible at the base point, kappa ascending.
struct SmithLocal {
  Complex base;
  std::vector<int> kappa;
  SeriesGrid einv;
  SeriesGrid finv;
};

namespace detail {

struct PivotPick {
  int row, col, val;
  double lead_mag;
};

inline std::optional<PivotPick> find_pivot(const SeriesGrid& w, int t, double abs_tol) {
  std::optional<PivotPick> best;
  int n = static_cast<int>(w.size());
  for (int i = t; i < n; ++i)
    for (int j = t; j < n; ++j) {
      const ScalarSeries& s = w[static_cast<size_t>(i)][static_cast<size_t>(j)];
      std::optional<int> v;
      for (int k = s.lead(); k <= s.last(); ++k)
        if (std::abs(s.at(k)) > abs_tol) {
          v = k;
          break;
        }
      if (!v) continue;
      double mag = std::abs(s.at(*v));
      if (!best || *v < best->val || (*v == best->val && mag > best->lead_mag))
        best = PivotPick{i, j, *v, mag};
    }
  return best;
}

}  // namespace detail

inline SmithLocal smith_local(const MatrixSeries& m, int rel_order, const Tolerances& tol = {}) {
  SeriesGrid w = grid_from(m);
  int n = static_cast<int>(w.size());
  SmithLocal out;
  out.base = m.base();
  out.einv = identity_grid(n, m.base());
  out.finv = identity_grid(n, m.base());

  double scale = m.max_norm();
  if (scale == 0.0) throw TruncationTooShort("smith_local: zero matrix series");
  double abs_tol = tol.series_zero * scale;

  for (int t = 0; t < n; ++t) {
    auto pv = detail::find_pivot(w, t, abs_tol);
    if (!pv)
      throw TruncationTooShort("smith_local: family singular to working order at step " +
                               std::to_string(t));
    // move pivot to (t, t)
    if (pv->row != t) {
      std::swap(w[static_cast<size_t>(pv->row)], w[static_cast<size_t>(t)]);
      std::swap(out.einv[static_cast<size_t>(pv->row)], out.einv[static_cast<size_t>(t)]);
    }
    if (pv->col != t) {
      for (int i = 0; i < n; ++i) {
        std::swap(w[static_cast<size_t>(i)][static_cast<size_t>(pv->col)],
                  w[static_cast<size_t>(i)][static_cast<size_t>(t)]);
        std::swap(out.finv[static_cast<size_t>(i)][static_cast<size_t>(pv->col)],
                  out.finv[static_cast<size_t>(i)][static_cast<size_t>(t)]);
      }
    }
    int kappa = pv->val;
    out.kappa.push_back(kappa);

    // normalize: divide row t by the unit part of the pivot
    ScalarSeries pivot = w[static_cast<size_t>(t)][static_cast<size_t>(t)].clipped_before(kappa);
    ScalarSeries unit = pivot.shifted(-kappa);
    int rel = unit.exact() ? rel_order : std::min(rel_order, unit.valid_to());
    ScalarSeries unit_inv = inverse(unit, std::max(rel, 1), tol.series_zero);
    for (int j = 0; j < n; ++j) {
      w[static_cast<size_t>(t)][static_cast<size_t>(j)] =
          unit_inv * w[static_cast<size_t>(t)][static_cast<size_t>(j)];
      out.einv[static_cast<size_t>(t)][static_cast<size_t>(j)] =
          unit_inv * out.einv[static_cast<size_t>(t)][static_cast<size_t>(j)];
    }
    // clear column t below/above using holomorphic quotients
    for (int i = 0; i < n; ++i) {
      if (i == t) continue;
      ScalarSeries q = w[static_cast<size_t>(i)][static_cast<size_t>(t)]
                           .clipped_before(kappa)
                           .shifted(-kappa);
      if (q.max_norm() <= abs_tol) continue;
      for (int j = 0; j < n; ++j) {
        w[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            w[static_cast<size_t>(i)][static_cast<size_t>(j)] -
            q * w[static_cast<size_t>(t)][static_cast<size_t>(j)];
        out.einv[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            out.einv[static_cast<size_t>(i)][static_cast<size_t>(j)] -
            q * out.einv[static_cast<size_t>(t)][static_cast<size_t>(j)];
      }
    }
    // clear row t
    for (int j = 0; j < n; ++j) {
      if (j == t) continue;
      ScalarSeries q = w[static_cast<size_t>(t)][static_cast<size_t>(j)]
                           .clipped_before(kappa)
                           .shifted(-kappa);
      if (q.max_norm() <= abs_tol) continue;
      for (int i = 0; i < n; ++i) {
        w[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            w[static_cast<size_t>(i)][static_cast<size_t>(j)] -
            q * w[static_cast<size_t>(i)][static_cast<size_t>(t)];
        out.finv[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            out.finv[static_cast<size_t>(i)][static_cast<size_t>(j)] -
            q * out.finv[static_cast<size_t>(i)][static_cast<size_t>(t)];
      }
    }
  }
  return out;
}

// g -> F^{-1} D^{-1} E^{-1} g, the Laurent inverse of the factored family
// applied to a vector germ at the same base point.
inline VectorSeries smith_apply_inverse(const SmithLocal& sm, const VectorSeries& g) {
  std::vector<ScalarSeries> comps = split_components(g);
  std::vector<ScalarSeries> eg = grid_apply(sm.einv, comps);
  for (size_t i = 0; i < eg.size(); ++i) eg[i] = eg[i].shifted(-sm.kappa[i]);
  std::vector<ScalarSeries> x = grid_apply(sm.finv, eg);
  return join_components(x);
}

// Sum of the diagonal exponents = order of vanishing of det at the base.
inline int smith_det_order(const SmithLocal& sm) {
  int s = 0;
  for (int k : sm.kappa) s += k;
  return s;
}

}  // namespace coneext
