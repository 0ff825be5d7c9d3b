// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "coneext/extension.hpp"
#include "coneext/pairing.hpp"
#include "coneext/zoo.hpp"

using namespace coneext;

namespace {

VectorSeries chain_combination(const SingularChainBasis& basis,
                               const std::vector<std::vector<Complex>>& poly) {
  VectorSeries acc =
      VectorSeries::zero(basis.sigma0, CVector::Zero(basis.chains[0].zero_proto().size()));
  for (size_t j = 0; j < poly.size(); ++j)
    for (size_t l = 0; l < poly[j].size(); ++l)
      if (poly[j][l] != Complex{})
        acc = acc + poly[j][l] * basis.chains[j].shifted(static_cast<int>(l));
  return acc;
}

}  // namespace

TEST_CASE("local residue pairing on the double-root model") {
  Tolerances tol;
  MatrixPolynomial p = MatrixPolynomial::scalar({0.0, 0.0, 1.0});
  SingularChainBasis ch = singular_chains(p, 0.0, tol);
  DualChainBasis dual = dual_chain_basis(ch, tol);

  // principal parts [u1, u0] and [v1, v0]: value i (u0 conj v1 + u1 conj v0)
  Complex u1{0.3, -0.2}, u0{1.1, 0.4}, v1{-0.5, 0.8}, v0{0.2, 0.1};
  VectorSeries u(0.0, -2, {u1 * CVector::Ones(1), u0 * CVector::Ones(1)});
  VectorSeries v(0.0, -2, {v1 * CVector::Ones(1), v0 * CVector::Ones(1)});
  Complex got = residue_pairing_local(u, v, ch, dual, tol);
  Complex want = kI * (u0 * std::conj(v1) + u1 * std::conj(v0));
  CHECK(std::abs(got - want) < 1e-12);

  // holomorphic second argument annihilates
  VectorSeries hol(0.0, 0, {CVector::Ones(1)});
  CHECK(std::abs(residue_pairing_local(u, hol, ch, dual, tol)) < 1e-14);
}

TEST_CASE("local residue pairing splits the two simple real roots") {
  Tolerances tol;
  double b = 0.5;
  MatrixPolynomial p = MatrixPolynomial::scalar({-b * b, 0.0, 1.0});
  Complex up{0.4, 0.3}, um{-0.7, 0.1}, vp{0.9, -0.2}, vm{0.6, 0.5};
  Complex total{};
  for (double s : {b, -b}) {
    SingularChainBasis ch = singular_chains(p, Complex{s, 0.0}, tol);
    DualChainBasis dual = dual_chain_basis(ch, tol);
    Complex uc = s > 0 ? up : um;
    Complex vc = s > 0 ? vp : vm;
    VectorSeries u(Complex{s, 0.0}, -1, {uc * CVector::Ones(1)});
    VectorSeries v(Complex{s, 0.0}, -1, {vc * CVector::Ones(1)});
    total += residue_pairing_local(u, v, ch, dual, tol);
  }
  Complex want = 2.0 * b * kI * (up * std::conj(vp) - um * std::conj(vm));
  CHECK(std::abs(total - want) < 1e-12);
}

TEST_CASE("contour quadrature reproduces the residue route") {
  Tolerances tol;
  Rng rng(8301);
  // 100 random germ pairs on each of two example pencils
  struct Case {
    MatrixPolynomial p;
    Complex sigma0;
  };
  std::vector<CMatrix> jc(2, CMatrix::Zero(2, 2));
  jc[0](0, 1) = 1.0;
  jc[1] = CMatrix::Identity(2, 2);
  std::vector<Case> cases = {{MatrixPolynomial::scalar({0.0, 0.0, 1.0}), Complex{}},
                             {MatrixPolynomial(2, jc), Complex{}}};
  for (const Case& c : cases) {
    SingularChainBasis ch = singular_chains(c.p, c.sigma0, tol);
    SingularChainBasis chs = singular_chains(adjoint_symbol(c.p, 0), std::conj(c.sigma0), tol);
    DualChainBasis dual = dual_chain_basis(ch, tol);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::vector<Complex>> pu(static_cast<size_t>(ch.count()));
      std::vector<std::vector<Complex>> pv(static_cast<size_t>(chs.count()));
      for (int j = 0; j < ch.count(); ++j)
        for (int l = 0; l < ch.mults[static_cast<size_t>(j)]; ++l)
          pu[static_cast<size_t>(j)].push_back(rng.complex_box());
      for (int j = 0; j < chs.count(); ++j)
        for (int l = 0; l < chs.mults[static_cast<size_t>(j)]; ++l)
          pv[static_cast<size_t>(j)].push_back(rng.complex_box());
      VectorSeries u = chain_combination(ch, pu);
      VectorSeries v = chain_combination(chs, pv);
      Complex closed = residue_pairing_local(u, v, ch, dual, tol);
      Complex quad = contour_pairing(u, v, c.p, Contour{c.sigma0, 0.5}, 256, tol);
      worst = std::max(worst, std::abs(closed - quad));
    }
    CHECK(worst < 1e-8);
  }

  // no pole inside the circle: Cauchy gives zero
  MatrixPolynomial p = MatrixPolynomial::scalar({0.0, 0.0, 1.0});
  VectorSeries c1(0.0, 0, {CVector::Ones(1)});
  CHECK(std::abs(contour_pairing(c1, c1, p, Contour{0.0, 0.5}, 256, tol)) < 1e-12);
}

TEST_CASE("single-residue split of the two-root pairing") {
  Tolerances tol;
  double b = 0.5;
  MatrixPolynomial p = MatrixPolynomial::scalar({-b * b, 0.0, 1.0});
  Complex up{0.8, -0.1};
  SingularChainBasis ch = singular_chains(p, Complex{b, 0.0}, tol);
  VectorSeries u = chain_combination(ch, {{up}});
  Complex quad = contour_pairing(u, u, p, Contour{Complex{b, 0.0}, 0.5}, 256, tol);
  Complex want = 2.0 * b * kI * up * std::conj(up);
  CHECK(std::abs(quad - want) < 1e-8);

  // a circle that runs through the other root is rejected
  CHECK_THROWS_AS(contour_pairing(u, u, p, Contour{Complex{b, 0.0}, 2.0 * b}, 64, tol),
                  ContourTouchesSpectrum);
}

TEST_CASE("node doubling settles to the settled value") {
  Tolerances tol;
  MatrixPolynomial p = MatrixPolynomial::scalar({0.0, 0.0, 1.0});
  SingularChainBasis ch = singular_chains(p, 0.0, tol);
  VectorSeries u = chain_combination(ch, {{Complex{0.5, 0.5}, Complex{1.0, 0.0}}});
  Complex a = contour_pairing_auto(u, u, p, Contour{0.0, 0.5}, tol);
  Complex bq = contour_pairing(u, u, p, Contour{0.0, 0.5}, 4096, tol);
  CHECK(std::abs(a - bq) < 1e-10);
}

TEST_CASE("gram blocks between non-shift pole pairs vanish identically") {
  Tolerances tol;
  // points at +-0.6i differ by 1.2i: not an integer shift of the conjugate
  ConeModel m(2.0, 1, {MatrixPolynomial::scalar({0.36, 0.0, 1.0})}, "pm06");
  ExtendedBasis be = extended_basis(m, tol);
  ExtendedBasis bs = extended_basis(formal_adjoint(m), tol);
  PairingGram g = pairing_gram(be, bs, tol);
  // rows ordered [0.6i, -0.6i]; the (0.6i, -0.6i*) block is the conjugate
  // pair; the (0.6i, 0.6i*) block must be exactly zero (set, not computed)
  CHECK(g.g(0, 0) == Complex{});
  CHECK(g.g(1, 1) == Complex{});
  CHECK(std::abs(g.g(0, 1)) > 0.1);
  CHECK(std::abs(g.g(1, 0)) > 0.1);
}

TEST_CASE("nondegeneracy checks") {
  Tolerances tol;
  // the identity pencil gives G = i I_d
  ConeModel m(2.0, 3,
              {MatrixPolynomial(3, {CMatrix::Zero(3, 3), CMatrix::Identity(3, 3)})},
              "ident3");
  ExtendedBasis be = extended_basis(m, tol);
  ExtendedBasis bs = extended_basis(formal_adjoint(m), tol);
  PairingGram g = pairing_gram(be, bs, tol);
  CHECK((g.g - kI * CMatrix::Identity(3, 3)).norm() < 1e-10);
  CHECK(nondegeneracy_check(g, true, tol));
  CHECK(nondegeneracy_check(g, false, tol));

  PairingGram broken = g;
  broken.g.row(1).setZero();
  CHECK_FALSE(nondegeneracy_check(broken, true, tol));
}

TEST_CASE("closed form matches quadrature across a model with a Jordan block") {
  Tolerances tol;
  ConeModel m = model_jordan2();
  ExtendedBasis be = extended_basis(m, tol);
  ExtendedBasis bs = extended_basis(formal_adjoint(m), tol);
  PairingGram g = pairing_gram(be, bs, tol);
  CHECK(gram_contour_delta(be, bs, g) < 1e-8);
  CHECK(nondegeneracy_check(g, true, tol));
}

TEST_CASE("csv export carries the labels") {
  Tolerances tol;
  ConeModel m = model_cex1_a2();
  ExtendedBasis be = extended_basis(m, tol);
  ExtendedBasis bs = extended_basis(formal_adjoint(m), tol);
  PairingGram g = pairing_gram(be, bs, tol);
  std::string csv = gram_to_csv(g);
  CHECK(csv.find("(0,0,1,0)") != std::string::npos);
  CHECK(csv.find("(0,0,1,1)") != std::string::npos);
}
