// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: spectral analysis, pairing reports, domain algebra,
// and the bundled reproduction suite.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coneext/coneext.hpp"

namespace {

using namespace coneext;

int error_exit_code(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return 1;
  if (dynamic_cast<const RootOnBoundary*>(&e)) return 2;
  if (dynamic_cast<const NotSymmetric*>(&e)) return 3;
  if (dynamic_cast<const NotPositive*>(&e)) return 4;
  if (dynamic_cast<const OddMultiplicity*>(&e)) return 5;
  return 10;
}

Tolerances load_env_tolerances() {
  Tolerances tol;
  const char* path = std::getenv("CONE_EXT_CONFIG");
  if (!path) return tol;
  std::ifstream in(path);
  if (!in) return tol;
  try {
    Json j;
    in >> j;
    tol.rank = j.value("rank", tol.rank);
    tol.cluster = j.value("cluster", tol.cluster);
    tol.edge = j.value("edge", tol.edge);
    tol.sym = j.value("sym", tol.sym);
    tol.pos = j.value("pos", tol.pos);
    tol.det = j.value("det", tol.det);
    tol.residual = j.value("residual", tol.residual);
    tol.subspace = j.value("subspace", tol.subspace);
  } catch (const Json::exception&) {
    std::cerr << "warning: ignoring malformed CONE_EXT_CONFIG file\n";
  }
  return tol;
}

std::string version_string() { return "coneext 0.1.0"; }

struct OutputOpts {
  std::string format = "text";
  bool json() const { return format == "json"; }
};

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

Json spectrum_json(const std::vector<SpectralPoint>& pts) {
  Json arr = Json::array();
  for (const auto& p : pts) {
    Json e;
    e["sigma0"] = Json::array({p.sigma0.real(), p.sigma0.imag()});
    e["algebraic_mult"] = p.algebraic_mult;
    if (!p.partial_mults.empty()) e["partial_mults"] = p.partial_mults;
    arr.push_back(e);
  }
  return arr;
}

int cmd_spectrum(const std::string& file, double lo, double hi, bool have_strip,
                 const OutputOpts& out, const Tolerances& tol) {
  ConeModel model = load_model(file);
  Strip strip{have_strip ? lo : -model.nu() / 2.0, have_strip ? hi : model.nu() / 2.0};
  std::vector<SpectralPoint> pts = boundary_spectrum(model, strip, tol);
  for (auto& p : pts) {
    SingularChainBasis ch = singular_chains(model.principal_symbol(), p.sigma0, tol);
    p.partial_mults = ch.mults;
  }
  if (out.json()) {
    Json j;
    j["tool"] = version_string();
    j["model"] = model.label();
    j["strip"] = Json::array({strip.im_lo, strip.im_hi});
    j["spectrum"] = spectrum_json(pts);
    j["min_equals_max"] = pts.empty();
    print_json(j);
  } else {
    std::cout << "model " << model.label() << ", strip Im in (" << fmt15(strip.im_lo) << ", "
              << fmt15(strip.im_hi) << ")\n";
    if (pts.empty()) {
      std::cout << "no boundary spectrum in the strip: D_min = D_max\n";
    } else {
      std::cout << "sigma0                    alg  partial\n";
      for (const auto& p : pts) {
        std::cout << fmt15(p.sigma0) << "    " << p.algebraic_mult << "    [";
        for (size_t i = 0; i < p.partial_mults.size(); ++i)
          std::cout << (i ? "," : "") << p.partial_mults[i];
        std::cout << "]\n";
      }
    }
  }
  return 0;
}

int cmd_chains(const std::string& file, const OutputOpts& out, const Tolerances& tol) {
  ConeModel model = load_model(file);
  ExtendedBasis basis = extended_basis(model, tol);
  Json points = Json::array();
  for (const auto& pb : basis.points) {
    Json pj;
    pj["sigma0"] = Json::array({pb.point.sigma0.real(), pb.point.sigma0.imag()});
    pj["mults"] = pb.chains.mults;
    pj["n_shift"] = pb.n_shift;
    Json leads = Json::array();
    for (int j = 0; j < pb.chains.count(); ++j) {
      Json lead = Json::array();
      CVector v = pb.chains.chains[static_cast<size_t>(j)].at(-pb.chains.mults[static_cast<size_t>(j)]);
      for (int i = 0; i < v.size(); ++i) lead.push_back(Json::array({v(i).real(), v(i).imag()}));
      leads.push_back(lead);
    }
    pj["leading_coefficients"] = leads;
    points.push_back(pj);
  }
  if (out.json()) {
    Json j;
    j["tool"] = version_string();
    j["model"] = model.label();
    j["dim_E"] = basis.dim();
    j["points"] = points;
    print_json(j);
  } else {
    std::cout << "model " << model.label() << ": dim E(A) = " << basis.dim() << "\n";
    for (const auto& pb : basis.points) {
      std::cout << "point " << fmt15(pb.point.sigma0) << ": mults [";
      for (size_t i = 0; i < pb.chains.mults.size(); ++i)
        std::cout << (i ? "," : "") << pb.chains.mults[i];
      std::cout << "], shifts N = " << pb.n_shift << "\n";
    }
  }
  return 0;
}

bool x_independent(const ConeModel& m) {
  for (size_t k = 1; k < m.indicial().size(); ++k)
    if (!m.indicial()[k].is_zero(1e-14)) return false;
  return true;
}

// dictionary entries (one per chain power) for models with scalar kernels
std::vector<DictEntry> auto_dictionary(const ExtendedBasis& basis) {
  std::vector<DictEntry> dict;
  for (const auto& pb : basis.points) {
    for (int j = 0; j < pb.chains.count(); ++j) {
      CVector dir = pb.chains.chains[static_cast<size_t>(j)].at(
          -pb.chains.mults[static_cast<size_t>(j)]);
      for (int l = 0; l < pb.chains.mults[static_cast<size_t>(j)]; ++l) {
        std::ostringstream name;
        name << "omega*x^{i(" << fmt15(pb.point.sigma0) << ")}";
        if (l == 1) name << "*log x";
        if (l > 1) name << "*log^" << l << " x";
        dict.push_back(DictEntry{pb.point.sigma0, dir, l, name.str()});
      }
    }
  }
  return dict;
}

int cmd_pairing(const std::string& file, const OutputOpts& out, const std::string& csv_path,
                const Tolerances& tol) {
  ConeModel model = load_model(file);
  ExtendedBasis be = extended_basis(model, tol);
  ExtendedBasis bs = extended_basis(formal_adjoint(model), tol);
  PairingGram g = pairing_gram(be, bs, tol);
  double delta = be.dim() ? gram_contour_delta(be, bs, g) : 0.0;
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    f << gram_to_csv(g);
  }
  if (out.json()) {
    Json j;
    j["tool"] = version_string();
    j["model"] = model.label();
    j["gram"] = gram_to_json(g);
    j["verification"] = {{"route", "contour"}, {"max_delta", delta}};
    j["nondegenerate"] = be.dim() ? nondegeneracy_check(g, true, tol) : true;
    print_json(j);
  } else {
    std::cout << "model " << model.label() << ": dim E(A) = " << be.dim() << "\n";
    if (be.dim() == 0) {
      std::cout << "empty pairing (D_min = D_max)\n";
      return 0;
    }
    std::cout << "rows:";
    for (const auto& lb : g.rows) std::cout << " " << label_string(lb);
    std::cout << "\ngram (closed form; contour cross-check max delta " << fmt15(delta) << "):\n";
    for (int r = 0; r < g.g.rows(); ++r) {
      for (int c = 0; c < g.g.cols(); ++c) std::cout << (c ? "  " : "") << fmt15(g.g(r, c));
      std::cout << "\n";
    }
    std::cout << "nondegenerate conjugate blocks: "
              << (nondegeneracy_check(g, true, tol) ? "yes" : "NO") << "\n";
  }
  return 0;
}

int cmd_friedrichs(const std::string& file, const OutputOpts& out, const Tolerances& tol) {
  ConeModel model = load_model(file);
  ExtendedBasis be = extended_basis(model, tol);
  DomainSubspace fr = friedrichs_domain(be, tol);
  ExtendedBasis bs = extended_basis(formal_adjoint(model), tol);
  PairingGram g = pairing_gram(be, bs, tol);
  bool sa = be.dim() ? is_selfadjoint(fr, g, tol) : true;
  bool sat = be.dim() ? saturation_check(be, fr, tol) : true;
  Json j;
  j["tool"] = version_string();
  j["model"] = model.label();
  j["dim"] = fr.dim();
  j["selfadjoint"] = sa;
  j["saturated"] = sat;
  j["domain"] = subspace_to_json(fr);
  if (x_independent(model)) {
    std::vector<DictEntry> dict = auto_dictionary(be);
    CMatrix t = dictionary_matrix(be, dict, tol);
    CMatrix dict_coords = t.completeOrthogonalDecomposition().solve(fr.coords);
    Json dc = Json::array();
    for (int c = 0; c < dict_coords.cols(); ++c) {
      Json col = Json::array();
      for (int r = 0; r < dict_coords.rows(); ++r)
        col.push_back(Json::array({dict_coords(r, c).real(), dict_coords(r, c).imag()}));
      dc.push_back(col);
    }
    Json names = Json::array();
    for (const auto& e : dict) names.push_back(e.name);
    j["dictionary"] = names;
    j["dictionary_coordinates"] = dc;
  }
  if (out.json()) {
    print_json(j);
  } else {
    std::cout << "model " << model.label() << ": friedrichs domain dim " << fr.dim() << "/"
              << be.dim() << ", selfadjoint " << (sa ? "yes" : "NO") << ", saturated "
              << (sat ? "yes" : "NO") << "\n";
    std::cout << "columns over labels";
    for (const auto& lb : fr.labels) std::cout << " " << label_string(lb);
    std::cout << "\n";
    for (int c = 0; c < fr.coords.cols(); ++c) {
      for (int r = 0; r < fr.coords.rows(); ++r)
        std::cout << (r ? "  " : "") << fmt15(fr.coords(r, c));
      std::cout << "\n";
    }
  }
  return 0;
}

int cmd_adjoint(const std::string& model_file, const std::string& domain_file,
                const OutputOpts& out, const Tolerances& tol) {
  ConeModel model = load_model(model_file);
  ExtendedBasis be = extended_basis(model, tol);
  ExtendedBasis bs = extended_basis(formal_adjoint(model), tol);
  PairingGram g = pairing_gram(be, bs, tol);
  DomainSubspace d = load_subspace(domain_file, be);
  DomainSubspace dp = adjoint_domain(d, g, tol);
  Json j;
  j["tool"] = version_string();
  j["model"] = model.label();
  j["input_dim"] = d.dim();
  j["adjoint_dim"] = dp.dim();
  j["adjoint_domain"] = subspace_to_json(dp);
  if (out.json())
    print_json(j);
  else
    std::cout << "adjoint domain: dim " << dp.dim() << " of " << bs.dim() << " (input dim "
              << d.dim() << ")\n"
              << subspace_to_json(dp).dump(2) << "\n";
  return 0;
}

int cmd_selfadjoint(const std::string& model_file, const std::string& domain_file,
                    const OutputOpts& out, const Tolerances& tol) {
  ConeModel model = load_model(model_file);
  if (!symmetry_check(model, tol))
    throw NotSymmetric("selfadjoint-check: model is not symmetric");
  ExtendedBasis be = extended_basis(model, tol);
  ExtendedBasis bs = extended_basis(formal_adjoint(model), tol);
  PairingGram g = pairing_gram(be, bs, tol);
  DomainSubspace d = load_subspace(domain_file, be);
  bool sa = is_selfadjoint(d, g, tol);
  if (out.json()) {
    Json j;
    j["tool"] = version_string();
    j["selfadjoint"] = sa;
    print_json(j);
  } else {
    std::cout << (sa ? "selfadjoint" : "not selfadjoint") << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& file, const OutputOpts& out, const Tolerances& tol) {
  ConeModel model = load_model(file);
  if (model.dim() != 1)
    throw NotScalar("verify: the three-route table needs a scalar model");
  ExtendedBasis be = extended_basis(model, tol);
  ExtendedBasis bs = extended_basis(formal_adjoint(model), tol);
  PairingGram g = pairing_gram(be, bs, tol);
  CutoffProfile cut;
  struct Row {
    std::string u, v;
    Complex closed, contour, green;
    bool has_green;
  };
  std::vector<Row> rows;

  // pair the basis elements themselves: closed form from the gram, the same
  // shifted-circle sum by quadrature, and the x-space Green identity on the
  // cutoff-function representatives of the elements
  auto fn_of = [&](const ExtendedBasisElement& el) {
    ModelFunction f(cut, {});
    for (const auto& part : el.parts)
      if (part.max_norm() > 0.0) f = f.plus(model_function_of_principal(cut, part));
    return f;
  };
  double radius = default_contour_radius(be, bs);
  int row0 = 0;
  for (const auto& pu : be.points) {
    for (size_t a = 0; a < pu.elements.size(); ++a) {
      int col0 = 0;
      for (const auto& pv : bs.points) {
        Complex z = pu.point.sigma0 - std::conj(pv.point.sigma0);
        int tau = static_cast<int>(std::lround(z.imag()));
        double mt = point_match_tol(tol, pu.point.sigma0);
        bool pair = std::abs(z.real()) < mt && tau >= 0 &&
                    std::abs(z.imag() - static_cast<double>(tau)) < mt;
        for (size_t b = 0; b < pv.elements.size(); ++b) {
          Row row;
          row.u = label_string(be.labels()[static_cast<size_t>(row0) + a]);
          row.v = label_string(bs.labels()[static_cast<size_t>(col0) + b]);
          row.closed = g.g(row0 + static_cast<int>(a), col0 + static_cast<int>(b));
          row.contour = pair ? gram_entry_contour(bs.model, pu.elements[a], pv.elements[b], tau,
                                                  radius, 256)
                             : Complex{};
          row.has_green = true;
          try {
            row.green = green_pairing_direct(model, fn_of(pu.elements[a]), fn_of(pv.elements[b]));
          } catch (const Error&) {
            row.has_green = false;
          }
          rows.push_back(row);
        }
        col0 += static_cast<int>(pv.elements.size());
      }
    }
    row0 += static_cast<int>(pu.elements.size());
  }
  if (out.json()) {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json e;
      e["u"] = r.u;
      e["v"] = r.v;
      e["closed_form"] = Json::array({r.closed.real(), r.closed.imag()});
      e["contour"] = Json::array({r.contour.real(), r.contour.imag()});
      if (r.has_green) e["x_space"] = Json::array({r.green.real(), r.green.imag()});
      e["delta_contour"] = std::abs(r.closed - r.contour);
      if (r.has_green) e["delta_x_space"] = std::abs(r.closed - r.green);
      arr.push_back(e);
    }
    Json j;
    j["tool"] = version_string();
    j["model"] = model.label();
    j["table"] = arr;
    print_json(j);
  } else {
    std::cout << "verification table (closed | contour | x-space):\n";
    for (const auto& r : rows) {
      std::cout << "[" << r.u << ", " << r.v << "] = " << fmt15(r.closed) << " | "
                << fmt15(r.contour);
      if (r.has_green) std::cout << " | " << fmt15(r.green);
      std::cout << "   (d_contour " << fmt15(std::abs(r.closed - r.contour));
      if (r.has_green) std::cout << ", d_x " << fmt15(std::abs(r.closed - r.green));
      std::cout << ")\n";
    }
  }
  return 0;
}

int cmd_reproduce(bool as_json, uint64_t seed, bool inject, const std::vector<int>& only,
                  const Tolerances& tol) {
  SuiteOptions opts;
  opts.seed = seed;
  opts.inject_sign_error = inject;
  std::vector<CriterionResult> results = run_acceptance_suite(opts, tol, only);
  bool all = true;
  if (as_json) {
    Json arr = Json::array();
    for (const auto& r : results) {
      Json e;
      e["id"] = r.id;
      e["name"] = r.name;
      e["pass"] = r.pass;
      e["detail"] = r.detail;
      e["seconds"] = r.seconds;
      arr.push_back(e);
      all = all && r.pass;
    }
    Json j;
    j["tool"] = version_string();
    j["seed"] = seed;
    j["results"] = arr;
    j["all_pass"] = all;
    print_json(j);
  } else {
    for (const auto& r : results) {
      std::printf("%-4s %2d  %-55s %s (%.2fs)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.detail.c_str(), r.seconds);
      all = all && r.pass;
    }
    std::printf("%s\n", all ? "all criteria passed" : "FAILURES present");
  }
  return all ? 0 : 6;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extension calculus for elliptic cone operators at finite cross-section "
               "dimension"};
  app.set_version_flag("--version", version_string());
  app.fallthrough();

  Tolerances tol = load_env_tolerances();
  OutputOpts out;
  app.add_option("--output", out.format, "output format: text|json")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--tol-rank", tol.rank, "relative SVD rank cutoff");
  app.add_option("--tol-cluster", tol.cluster, "root clustering tolerance");
  app.add_option("--tol-edge", tol.edge, "strip-line distance tolerance");
  app.add_option("--tol-sym", tol.sym, "symmetry comparison tolerance");
  app.add_option("--tol-pos", tol.pos, "positivity slack");
  app.add_option("--tol-det", tol.det, "nondegeneracy |det| threshold");
  app.add_option("--tol-res", tol.residual, "germ reduction residual tolerance");

  std::string model_file, domain_file, csv_path;
  double strip_lo = 0.0, strip_hi = 0.0;
  bool have_strip = false;
  uint64_t seed = 20260809ull;
  bool inject = false;
  std::vector<int> only;

  auto* sp = app.add_subcommand("spectrum", "boundary spectrum in a horizontal strip");
  sp->add_option("model", model_file, "model JSON file")->required();
  auto* strip_opt = sp->add_option("--strip", [&](const CLI::results_t& v) {
    strip_lo = std::stod(v.at(0));
    strip_hi = std::stod(v.at(1));
    have_strip = true;
    return true;
  }, "strip bounds: lo hi");
  strip_opt->expected(2);

  auto* ch = app.add_subcommand("chains", "singular chains and multiplicities");
  ch->add_option("model", model_file, "model JSON file")->required();

  auto* pg = app.add_subcommand("pairing", "gram matrix of the adjoint pairing");
  pg->add_option("model", model_file, "model JSON file")->required();
  pg->add_option("--csv", csv_path, "also write the gram matrix as CSV");

  auto* ad = app.add_subcommand("adjoint", "annihilator of a domain under the pairing");
  ad->add_option("model", model_file, "model JSON file")->required();
  ad->add_option("domain", domain_file, "domain JSON file")->required();

  auto* sa = app.add_subcommand("selfadjoint-check", "test a domain for selfadjointness");
  sa->add_option("model", model_file, "model JSON file")->required();
  sa->add_option("domain", domain_file, "domain JSON file")->required();

  auto* fr = app.add_subcommand("friedrichs", "domain of the Friedrichs extension");
  fr->add_option("model", model_file, "model JSON file")->required();

  auto* ve = app.add_subcommand("verify", "three-route verification table (scalar models)");
  ve->add_option("model", model_file, "model JSON file")->required();

  auto* rp = app.add_subcommand("reproduce-paper", "run the bundled reference suite");
  rp->add_flag("--json", "machine-readable results");
  rp->add_option("--seed", seed, "seed for the randomized criteria");
  rp->add_option("--criterion", only, "run only the listed criteria");
  rp->add_flag("--inject-sign-error", inject, "mutation fixture: flip the residue sign")
      ->group("");  // hidden

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
    if (sp->parsed()) return cmd_spectrum(model_file, strip_lo, strip_hi, have_strip, out, tol);
    if (ch->parsed()) return cmd_chains(model_file, out, tol);
    if (pg->parsed()) return cmd_pairing(model_file, out, csv_path, tol);
    if (ad->parsed()) return cmd_adjoint(model_file, domain_file, out, tol);
    if (sa->parsed()) return cmd_selfadjoint(model_file, domain_file, out, tol);
    if (fr->parsed()) return cmd_friedrichs(model_file, out, tol);
    if (ve->parsed()) return cmd_verify(model_file, out, tol);
    if (rp->parsed()) return cmd_reproduce(rp->count("--json") > 0, seed, inject, only, tol);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return error_exit_code(e);
  }
  return 0;
}
