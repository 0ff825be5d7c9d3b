// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "extension.hpp"
#include "pairing.hpp"
#include "pencil.hpp"
#include "types.hpp"

namespace coneext {

using Json = nlohmann::json;

namespace detail {

inline Complex complex_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError(where + ": expected a [re, im] pair");
  return Complex{j[0].get<double>(), j[1].get<double>()};
}

inline Json complex_to(Complex z) { return Json::array({z.real(), z.imag()}); }

}  // namespace detail

// Model schema:
// { "nu": real, "d": int,
//   "indicial": [ { "degree": int, "coeffs": [ matrix, ... ] }, ... ],
//   "label": string }
// where matrix = d rows of d [re, im] pairs and coeffs lists the sigma^0..sigma^degree
// coefficients of one symbol.
inline ConeModel model_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("model: expected a JSON object");
  if (!j.contains("nu") || !j["nu"].is_number()) throw ParseError("model.nu: expected a number");
  if (!j.contains("d") || !j["d"].is_number_integer())
    throw ParseError("model.d: expected an integer");
  double nu = j["nu"].get<double>();
  int d = j["d"].get<int>();
  if (!j.contains("indicial") || !j["indicial"].is_array())
    throw ParseError("model.indicial: expected an array");
  std::vector<MatrixPolynomial> ind;
  int ki = 0;
  for (const Json& pj : j["indicial"]) {
    std::string where = "model.indicial[" + std::to_string(ki) + "]";
    if (!pj.is_object() || !pj.contains("degree") || !pj.contains("coeffs"))
      throw ParseError(where + ": expected { degree, coeffs }");
    int deg = pj["degree"].get<int>();
    const Json& cj = pj["coeffs"];
    if (!cj.is_array() || static_cast<int>(cj.size()) != deg + 1)
      throw ParseError(where + ".coeffs: expected " + std::to_string(deg + 1) +
                       " matrices, got " + std::to_string(cj.size()));
    std::vector<CMatrix> coeffs;
    for (int k = 0; k <= deg; ++k) {
      const Json& mj = cj[static_cast<size_t>(k)];
      std::string mwhere = where + ".coeffs[" + std::to_string(k) + "]";
      if (!mj.is_array() || static_cast<int>(mj.size()) != d)
        throw ParseError(mwhere + ": expected " + std::to_string(d) + " rows");
      CMatrix m(d, d);
      for (int r = 0; r < d; ++r) {
        const Json& rj = mj[static_cast<size_t>(r)];
        if (!rj.is_array() || static_cast<int>(rj.size()) != d)
          throw ParseError(mwhere + "[" + std::to_string(r) + "]: expected " + std::to_string(d) +
                           " entries");
        for (int c = 0; c < d; ++c)
          m(r, c) = detail::complex_from(rj[static_cast<size_t>(c)],
                                         mwhere + "[" + std::to_string(r) + "][" +
                                             std::to_string(c) + "]");
      }
      coeffs.push_back(std::move(m));
    }
    ind.emplace_back(d, std::move(coeffs));
    ++ki;
  }
  std::string label = j.value("label", std::string{});
  try {
    return ConeModel(nu, d, std::move(ind), label);
  } catch (const Error& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

inline Json model_to_json(const ConeModel& m) {
  Json j;
  j["nu"] = m.nu();
  j["d"] = m.dim();
  j["label"] = m.label();
  Json ind = Json::array();
  for (const auto& p : m.indicial()) {
    Json pj;
    pj["degree"] = p.degree();
    Json coeffs = Json::array();
    for (int k = 0; k <= p.degree(); ++k) {
      Json mj = Json::array();
      for (int r = 0; r < m.dim(); ++r) {
        Json rj = Json::array();
        for (int c = 0; c < m.dim(); ++c) rj.push_back(detail::complex_to(p.coeff(k)(r, c)));
        mj.push_back(rj);
      }
      coeffs.push_back(mj);
    }
    pj["coeffs"] = coeffs;
    ind.push_back(pj);
  }
  j["indicial"] = ind;
  return j;
}

inline ConeModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return model_from_json(j);
}

inline Json label_to_json(const BasisLabel& lb) {
  Json j;
  j["sigma0"] = detail::complex_to(lb.sigma0);
  j["j"] = lb.j;
  j["l"] = lb.l;
  return j;
}

inline Json subspace_to_json(const DomainSubspace& d) {
  Json j;
  Json labels = Json::array();
  for (const auto& lb : d.labels) labels.push_back(label_to_json(lb));
  j["labels"] = labels;
  Json cols = Json::array();
  for (int c = 0; c < d.coords.cols(); ++c) {
    Json col = Json::array();
    for (int r = 0; r < d.coords.rows(); ++r) col.push_back(detail::complex_to(d.coords(r, c)));
    cols.push_back(col);
  }
  j["columns"] = cols;
  return j;
}

inline DomainSubspace subspace_from_json(const Json& j, const ExtendedBasis& basis) {
  if (!j.is_object() || !j.contains("columns"))
    throw ParseError("domain: expected { labels, columns }");
  const Json& cols = j["columns"];
  int n = basis.dim();
  CMatrix m(n, static_cast<int>(cols.size()));
  int c = 0;
  for (const Json& col : cols) {
    if (!col.is_array() || static_cast<int>(col.size()) != n)
      throw ParseError("domain.columns[" + std::to_string(c) + "]: expected " + std::to_string(n) +
                       " entries");
    for (int r = 0; r < n; ++r)
      m(r, c) = detail::complex_from(col[static_cast<size_t>(r)],
                                     "domain.columns[" + std::to_string(c) + "][" +
                                         std::to_string(r) + "]");
    ++c;
  }
  return make_subspace(basis, m);
}

inline DomainSubspace load_subspace(const std::string& path, const ExtendedBasis& basis) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open domain file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return subspace_from_json(j, basis);
}

inline Json gram_to_json(const PairingGram& g) {
  Json j;
  Json rows = Json::array();
  for (const auto& lb : g.rows) rows.push_back(label_to_json(lb));
  Json cols = Json::array();
  for (const auto& lb : g.cols) cols.push_back(label_to_json(lb));
  j["rows"] = rows;
  j["cols"] = cols;
  Json entries = Json::array();
  for (int r = 0; r < g.g.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < g.g.cols(); ++c) row.push_back(detail::complex_to(g.g(r, c)));
    entries.push_back(row);
  }
  j["entries"] = entries;
  return j;
}

// 15-significant-digit text formatting used by the deterministic reports.
inline std::string fmt15(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  return buf;
}

inline std::string fmt15(Complex z) {
  std::string s = fmt15(z.real());
  s += z.imag() < 0 ? " - " : " + ";
  s += fmt15(std::abs(z.imag()));
  s += "i";
  return s;
}

}  // namespace coneext
