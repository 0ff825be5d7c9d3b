// Copyright (c) 2026 The coneext authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "coneext/chains.hpp"
#include "coneext/zoo.hpp"

using namespace coneext;

namespace {

MatrixPolynomial jordan_pencil() {
  std::vector<CMatrix> c(2, CMatrix::Zero(2, 2));
  c[0](0, 1) = 1.0;
  c[1] = CMatrix::Identity(2, 2);
  return MatrixPolynomial(2, c);  // [[sigma, 1], [0, sigma]]
}

MatrixPolynomial identity_pencil(int d) {
  std::vector<CMatrix> c = {CMatrix::Zero(d, d), CMatrix::Identity(d, d)};
  return MatrixPolynomial(d, c);
}

// u = sum_j p_j(sigma) psi_j from prescribed polynomial coordinates
VectorSeries chain_combination(const SingularChainBasis& basis,
                               const std::vector<std::vector<Complex>>& poly) {
  VectorSeries acc = VectorSeries::zero(
      basis.sigma0, CVector::Zero(basis.chains[0].zero_proto().size()));
  for (size_t j = 0; j < poly.size(); ++j)
    for (size_t l = 0; l < poly[j].size(); ++l)
      if (poly[j][l] != Complex{})
        acc = acc + poly[j][l] * basis.chains[j].shifted(static_cast<int>(l));
  return acc;
}

}  // namespace

TEST_CASE("kernel and corange splits") {
  Tolerances tol;
  // whole space at the origin of the identity pencil
  KernelRangeSplit full = kernel_range_split(identity_pencil(2), 0.0, tol);
  CHECK(full.dprime() == 2);
  CHECK(full.rank() == 0);

  // scalar sigma^2 at 0
  KernelRangeSplit sc = kernel_range_split(MatrixPolynomial::scalar({0.0, 0.0, 1.0}), 0.0, tol);
  CHECK(sc.dprime() == 1);

  // [[sigma, 1], [0, sigma]] at 0: K = span e_1, R_perp = span e_2
  KernelRangeSplit jd = kernel_range_split(jordan_pencil(), 0.0, tol);
  REQUIRE(jd.dprime() == 1);
  CHECK(std::abs(jd.kernel(0, 0)) == Catch::Approx(1.0).margin(1e-12));
  CHECK(std::abs(jd.kernel(1, 0)) < 1e-12);
  CHECK(std::abs(jd.corange(1, 0)) == Catch::Approx(1.0).margin(1e-12));
  CHECK(std::abs(jd.corange(0, 0)) < 1e-12);

  // regular point
  CHECK_THROWS_AS(kernel_range_split(MatrixPolynomial::scalar({0.0, 0.0, 1.0}), 1.0, tol),
                  NotSpectral);
}

TEST_CASE("schur complement families") {
  Tolerances tol;
  // d = 1: the family itself
  MatrixSeries s1 = schur_family(MatrixPolynomial::scalar({0.0, 0.0, 1.0}), 0.0, 6, tol);
  CHECK(std::abs(s1.at(2)(0, 0)) == Catch::Approx(1.0).margin(1e-12));
  CHECK(s1.at(0).norm() < 1e-14);
  CHECK(s1.at(1).norm() < 1e-14);

  // empty P22 block: sigma I_2 reduces to itself up to unitary factors
  MatrixSeries s2 = schur_family(identity_pencil(2), 0.0, 6, tol);
  CHECK(s2.at(0).norm() < 1e-14);
  Eigen::JacobiSVD<CMatrix> svd(s2.at(1));
  CHECK(svd.singularValues().minCoeff() == Catch::Approx(1.0).margin(1e-12));
  CHECK(svd.singularValues().maxCoeff() == Catch::Approx(1.0).margin(1e-12));

  // the 2x2 Jordan pencil reduces to -sigma^2 (1x1), up to the SVD phases
  MatrixSeries s3 = schur_family(jordan_pencil(), 0.0, 6, tol);
  CHECK(s3.at(0).norm() < 1e-14);
  CHECK(s3.at(1).norm() < 1e-14);
  CHECK(std::abs(s3.at(2)(0, 0)) == Catch::Approx(1.0).margin(1e-12));
  CHECK(s3.at(2)(0, 0).real() == Catch::Approx(-1.0).margin(1e-9));
}

TEST_CASE("singular chains of the model pencils") {
  Tolerances tol;

  // scalar sigma^2: one chain, mu = 2, psi = 1/s^2 exactly
  SingularChainBasis sc = singular_chains(MatrixPolynomial::scalar({0.0, 0.0, 1.0}), 0.0, tol);
  REQUIRE(sc.mults == std::vector<int>{2});
  CHECK(std::abs(sc.chains[0].at(-2)(0) - Complex{1, 0}) < 1e-12);
  CHECK(sc.chains[0].at(-1).norm() < 1e-12);

  // identity pencil: d simple chains with orthonormal leading coefficients
  SingularChainBasis id3 = singular_chains(identity_pencil(3), 0.0, tol);
  REQUIRE(id3.mults == std::vector<int>({1, 1, 1}));
  CMatrix leads(3, 3);
  for (int j = 0; j < 3; ++j) leads.col(j) = id3.chains[static_cast<size_t>(j)].at(-1);
  CHECK((leads.adjoint() * leads - CMatrix::Identity(3, 3)).norm() < 1e-10);

  // Jordan pencil: single chain of order 2
  SingularChainBasis jd = singular_chains(jordan_pencil(), 0.0, tol);
  CHECK(jd.mults == std::vector<int>{2});
  CHECK(jd.algebraic_mult() == 2);
}

TEST_CASE("engineered diag(s^3, s, 1) pencil gives multiplicities [3, 1]") {
  Rng rng(8201);
  CMatrix e = rng.well_conditioned(3);
  CMatrix f = rng.well_conditioned(3);
  // P = E diag(s^3, s, 1) F as an explicit polynomial
  std::vector<CMatrix> c(4, CMatrix::Zero(3, 3));
  c[0] += e.col(2) * f.row(2);
  c[1] += e.col(1) * f.row(1);
  c[3] += e.col(0) * f.row(0);
  SingularChainBasis ch = singular_chains(MatrixPolynomial(3, c), 0.0);
  CHECK(ch.mults == std::vector<int>({3, 1}));
  CHECK(ch.algebraic_mult() == 4);
}

TEST_CASE("chain normalization satisfies the partial orthogonality rule") {
  Rng rng(8202);
  for (int trial = 0; trial < 25; ++trial) {
    int d = rng.uniform_int(2, 4);
    EngineeredPencil ep = random_smith_pencil(rng, d, 3);
    SingularChainBasis ch = singular_chains(ep.p, ep.sigma0);
    REQUIRE(ch.mults == ep.mults);
    int dp = ch.count();
    // leading coefficients orthonormal
    for (int a = 0; a < dp; ++a)
      for (int b = 0; b < dp; ++b) {
        Complex ip = ch.chains_k[static_cast<size_t>(b)]
                         .at(-ch.mults[static_cast<size_t>(b)])
                         .dot(ch.chains_k[static_cast<size_t>(a)].at(-ch.mults[static_cast<size_t>(a)]));
        CHECK(std::abs(ip - (a == b ? Complex{1, 0} : Complex{})) < 1e-9);
      }
    // psi_{j,l} orthogonal to psi_{k,0} whenever mu_k >= mu_j - l, l > 0
    for (int j = 0; j < dp; ++j)
      for (int l = 1; l < ch.mults[static_cast<size_t>(j)]; ++l)
        for (int k = 0; k < dp; ++k) {
          if (ch.mults[static_cast<size_t>(k)] < ch.mults[static_cast<size_t>(j)] - l) continue;
          Complex ip = ch.chains_k[static_cast<size_t>(k)]
                           .at(-ch.mults[static_cast<size_t>(k)])
                           .dot(ch.chains_k[static_cast<size_t>(j)]
                                    .at(-(ch.mults[static_cast<size_t>(j)] - l)));
          CHECK(std::abs(ip) < 1e-8);
        }
  }
}

TEST_CASE("winding count matches the sum of multiplicities") {
  Rng rng(8203);
  for (int trial = 0; trial < 25; ++trial) {
    int d = rng.uniform_int(1, 4);
    EngineeredPencil ep = random_smith_pencil(rng, d, 3);
    SingularChainBasis ch = singular_chains(ep.p, ep.sigma0);
    CHECK(det_winding_count(ep.p, ep.sigma0, 0.35) == ch.algebraic_mult());
  }
}

TEST_CASE("adjoint multiplicities agree at the conjugate point") {
  Rng rng(8204);
  for (int trial = 0; trial < 25; ++trial) {
    EngineeredPencil ep = random_smith_pencil(rng, rng.uniform_int(1, 4), 3);
    SingularChainBasis a = singular_chains(ep.p, ep.sigma0);
    SingularChainBasis b = singular_chains(adjoint_symbol(ep.p, 0), std::conj(ep.sigma0));
    CHECK(a.mults == b.mults);
  }
}

TEST_CASE("nonnegative selfadjoint families have even multiplicities") {
  Rng rng(8205);
  for (int trial = 0; trial < 10; ++trial) {
    EngineeredPencil ep = random_qq_pencil(rng, rng.uniform_int(1, 3));
    SingularChainBasis ch = singular_chains(ep.p, ep.sigma0);
    for (int mu : ch.mults) CHECK(mu % 2 == 0);
  }
}

TEST_CASE("germ reduction recovers coordinates") {
  Tolerances tol;
  SingularChainBasis sc = singular_chains(MatrixPolynomial::scalar({0.0, 0.0, 1.0}), 0.0, tol);

  // a basis element reduces to the unit coordinate
  GermReduction r1 = reduce_germ(sc.chains[0], sc, tol);
  CHECK(std::abs(r1.poly[0][0] - Complex{1, 0}) < 1e-12);
  CHECK(std::abs(r1.poly[0][1]) < 1e-12);
  CHECK(r1.residual_norm < 1e-12);

  // principal part [u1, u0] reduces to p(sigma) = u1 + u0 sigma
  Complex u1{0.3, 0.7}, u0{-1.1, 0.2};
  CVector c2 = u1 * CVector::Ones(1), c1 = u0 * CVector::Ones(1);
  VectorSeries u(0.0, -2, {c2, c1});
  GermReduction r2 = reduce_germ(u, sc, tol);
  CHECK(std::abs(r2.poly[0][0] - u1) < 1e-12);
  CHECK(std::abs(r2.poly[0][1] - u0) < 1e-12);

  // a germ orthogonal to every leading coefficient at the deepest order
  SingularChainBasis jd = singular_chains(jordan_pencil(), 0.0, tol);
  CVector off = CVector::Zero(2);
  off(1) = 1.0;  // kernel is span e_1; e_2 at depth 2 cannot be matched
  VectorSeries bad(0.0, -2, {off});
  CHECK_THROWS_AS(reduce_germ(bad, jd, tol), NotInSpan);
}

TEST_CASE("reduction inverts chain combinations") {
  Rng rng(8206);
  for (int trial = 0; trial < 20; ++trial) {
    EngineeredPencil ep = random_smith_pencil(rng, rng.uniform_int(1, 3), 3);
    SingularChainBasis ch = singular_chains(ep.p, ep.sigma0);
    std::vector<std::vector<Complex>> poly(static_cast<size_t>(ch.count()));
    for (int j = 0; j < ch.count(); ++j)
      for (int l = 0; l < ch.mults[static_cast<size_t>(j)]; ++l)
        poly[static_cast<size_t>(j)].push_back(rng.complex_box());
    VectorSeries u = chain_combination(ch, poly);
    GermReduction red = reduce_germ(u, ch);
    for (size_t j = 0; j < poly.size(); ++j)
      for (size_t l = 0; l < poly[j].size(); ++l)
        CHECK(std::abs(red.poly[j][l] - poly[j][l]) < 1e-10);
  }
}

TEST_CASE("holomorphic normalization at a real point") {
  Tolerances tol;

  // 1x1: a positive multiple of 1/s^2 rescales to iota = 1
  SingularChainBasis sc = singular_chains(MatrixPolynomial::scalar({0.0, 0.0, 1.0}), 0.0, tol);
  SingularChainBasis gs = holomorphic_gram_schmidt(sc, tol);
  VectorSeries bstar = gs.chains_k[0].shifted(2);
  ScalarSeries h = iota(bstar, bstar);
  CHECK(std::abs(h.at(0) - Complex{1, 0}) < 1e-10);
  for (int k = 1; k <= std::min(h.valid_to(), 4); ++k) CHECK(std::abs(h.at(k)) < 1e-10);

  // already-orthonormal input comes back unchanged
  for (int j = 0; j < gs.count(); ++j) {
    SingularChainBasis gs2 = holomorphic_gram_schmidt(gs, tol);
    VectorSeries diff = gs2.chains_k[static_cast<size_t>(j)] + (-gs.chains_k[static_cast<size_t>(j)]);
    CHECK(diff.max_norm() < 1e-9);
  }

  // chains of sigma I_2 mixed by a constant invertible matrix renormalize
  Rng rng(8207);
  SingularChainBasis id2 = singular_chains(identity_pencil(2), 0.0, tol);
  CMatrix mix = rng.well_conditioned(2);
  SingularChainBasis mixed = id2;
  for (int j = 0; j < 2; ++j) {
    VectorSeries acc = mix(0, j) * id2.chains_k[0] + mix(1, j) * id2.chains_k[1];
    mixed.chains_k[static_cast<size_t>(j)] = acc;
    VectorSeries accf = mix(0, j) * id2.chains[0] + mix(1, j) * id2.chains[1];
    mixed.chains[static_cast<size_t>(j)] = accf;
    VectorSeries accb = mix(0, j) * id2.betas[0] + mix(1, j) * id2.betas[1];
    mixed.betas[static_cast<size_t>(j)] = accb;
  }
  SingularChainBasis fixed = holomorphic_gram_schmidt(mixed, tol);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      VectorSeries ba = fixed.chains_k[static_cast<size_t>(a)].shifted(1);
      VectorSeries bb = fixed.chains_k[static_cast<size_t>(b)].shifted(1);
      ScalarSeries p = iota(ba, bb);
      Complex want = a == b ? Complex{1, 0} : Complex{};
      CHECK(std::abs(p.at(0) - want) < 1e-10);
      for (int k = 1; k <= std::min(p.valid_to(), 4); ++k) CHECK(std::abs(p.at(k)) < 1e-10);
    }

  // non-real base points are rejected
  SingularChainBasis offaxis =
      singular_chains(MatrixPolynomial::scalar({0.36, 0.0, 1.0}), Complex{0, 0.6}, tol);
  CHECK_THROWS_AS(holomorphic_gram_schmidt(offaxis, tol), NotRealPoint);
}

TEST_CASE("dual chains pair triangularly with the primal betas") {
  Rng rng(8208);
  for (int trial = 0; trial < 10; ++trial) {
    EngineeredPencil ep = random_smith_pencil(rng, rng.uniform_int(1, 3), 2);
    SingularChainBasis ch = singular_chains(ep.p, ep.sigma0);
    DualChainBasis dual = dual_chain_basis(ch);
    // iota(beta_i, theta-dual beta~_j) = delta_ij through the stored germs:
    // beta~_j = (s - conj s0)^{mu_j} psi*_j
    for (int i = 0; i < ch.count(); ++i)
      for (int j = 0; j < ch.count(); ++j) {
        VectorSeries bt = dual.psis_r[static_cast<size_t>(j)].shifted(ch.mults[static_cast<size_t>(j)]);
        ScalarSeries p = iota(ch.betas[static_cast<size_t>(i)], bt);
        Complex want = i == j ? Complex{1, 0} : Complex{};
        CHECK(std::abs(p.at(0) - want) < 1e-9);
        if (p.valid_to() >= 1) CHECK(std::abs(p.at(1) - Complex{}) < 1e-8);
      }
  }
}
