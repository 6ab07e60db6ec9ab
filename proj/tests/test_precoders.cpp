#include "doctest.h"

#include <Eigen/SVD>
#include <algorithm>

#include "cia/metrics.hpp"
#include "cia/power.hpp"
#include "cia/precoders.hpp"
#include "cia/rng.hpp"
#include "cia/signal_model.hpp"
#include "oracles.hpp"

using namespace cia;

namespace {

OfdmConfig make_cfg(int n, int cp, int order) {
  OfdmConfig cfg;
  cfg.n_subcarriers = n;
  cfg.cp_len = cp;
  cfg.channel_order = order;
  cfg.noise_variance = 0.25;
  return cfg;
}

ChannelRealization from_taps(std::vector<Complex> taps) {
  ChannelRealization ch;
  ch.taps = std::move(taps);
  return ch;
}

}  // namespace

TEST_CASE("kernel basis") {
  SUBCASE("single-tap channel: kernel is the CP coordinate span") {
    const auto cfg = make_cfg(4, 2, 0);
    const auto hr = reduced_channel(from_taps({Complex(1, 0)}), cfg);
    const auto v = kernel_basis(hr);
    REQUIRE(v.basis.cols() == 2);
    CHECK((v.basis.adjoint() * v.basis - MatrixXcd::Identity(2, 2)).norm() < 1e-10);
    MatrixXcd proj = MatrixXcd::Zero(6, 6);
    proj(0, 0) = proj(1, 1) = 1.0;  // span{e_1, e_2}
    CHECK((v.basis * v.basis.adjoint() - proj).norm() < 1e-10);
    CHECK((hr.matrix * v.basis).norm() < 1e-10 * hr.matrix.norm());
  }

  SUBCASE("projector matches an independent full-SVD oracle") {
    const auto cfg = make_cfg(16, 4, 4);
    for (int t = 0; t < 8; ++t) {
      const auto ch = generate_channel(cfg, {PdpModel::Kind::Exponential, 0.75},
                                       derive_seed(3, t, 0));
      const auto hr = reduced_channel(ch, cfg);
      const auto v = kernel_basis(hr);
      CHECK((hr.matrix * v.basis).norm() < 1e-10 * hr.matrix.norm());
      const MatrixXcd proj = oracle::kernel_projector(hr.matrix);
      CHECK((v.basis * v.basis.adjoint() - proj).norm() < 1e-9);
    }
  }

  SUBCASE("rank-deficient input is rejected") {
    ReducedChannel hr;
    hr.matrix = MatrixXcd::Zero(4, 6);
    hr.matrix.row(0).setOnes();
    CHECK_THROWS_AS(kernel_basis(hr), DegenerateChannel);
  }
}

TEST_CASE("rate-optimal precoder") {
  const auto cfg = make_cfg(16, 4, 4);
  const auto h_sp = generate_channel(cfg, {PdpModel::Kind::Uniform, 1.0}, 101);
  const auto h_ss = generate_channel(cfg, {PdpModel::Kind::Uniform, 1.0}, 102);
  const auto hr_sp = reduced_channel(h_sp, cfg);
  const auto hr_ss = reduced_channel(h_ss, cfg);
  const auto v = kernel_basis(hr_sp);
  const MatrixXcd s_eta = cfg.noise_variance * MatrixXcd::Identity(16, 16);

  SUBCASE("semi-unitary output, aligned, eigenvalues sorted and oracle-matched") {
    const auto [p, lam] = cia_precoder(v, hr_ss, s_eta);
    CHECK((p.matrix.adjoint() * p.matrix - MatrixXcd::Identity(4, 4)).norm() < 1e-10);
    CHECK((hr_sp.matrix * p.matrix).norm() < 1e-10 * hr_sp.matrix.norm());
    for (int i = 0; i + 1 < lam.size(); ++i) CHECK(lam[i] >= lam[i + 1]);
    // eigendecomposition oracle on G G^H
    const MatrixXcd g = whiten(s_eta) * hr_ss.matrix * v.basis;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g * g.adjoint());
    VectorXd nonzero = es.eigenvalues().tail(4).reverse();
    for (int i = 0; i < 4; ++i)
      CHECK(lam[i] == doctest::Approx(nonzero[i]).epsilon(1e-9));
    // all singular values of E equal one
    Eigen::BDCSVD<MatrixXcd> esvd(p.matrix);
    for (int i = 0; i < 4; ++i)
      CHECK(esvd.singularValues()[i] == doctest::Approx(1.0).epsilon(1e-8));
  }

  SUBCASE("L = 1: single kernel vector up to phase, eigenvalue is its gain") {
    const auto cfg1 = make_cfg(4, 1, 1);
    const auto sp1 = generate_channel(cfg1, {PdpModel::Kind::Uniform, 1.0}, 7);
    const auto ss1 = generate_channel(cfg1, {PdpModel::Kind::Uniform, 1.0}, 8);
    const auto hr_sp1 = reduced_channel(sp1, cfg1);
    const auto hr_ss1 = reduced_channel(ss1, cfg1);
    const auto v1 = kernel_basis(hr_sp1);
    const MatrixXcd s1 = 0.25 * MatrixXcd::Identity(4, 4);
    const auto [p1, lam1] = cia_precoder(v1, hr_ss1, s1);
    REQUIRE(lam1.size() == 1);
    // same column up to a unit-modulus scalar
    const Complex phase = v1.basis.col(0).dot(p1.matrix.col(0));
    CHECK(std::abs(std::abs(phase) - 1.0) < 1e-10);
    CHECK((p1.matrix.col(0) - phase * v1.basis.col(0)).norm() < 1e-9);
    const double want = (whiten(s1) * hr_ss1.matrix * v1.basis.col(0)).squaredNorm();
    CHECK(lam1[0] == doctest::Approx(want).epsilon(1e-10));
  }

  SUBCASE("spectral efficiency depends on the basis only through its span") {
    Rng rng(55);
    const double budget = cfg.power_budget();
    const MatrixXcd w = whiten(s_eta);
    const double se0 = waterfilled_rate(hr_ss, v.basis, w, budget, cfg.block_len()).se.value;
    for (int t = 0; t < 5; ++t) {
      const MatrixXcd q = oracle::haar_unitary(4, rng);
      const double se1 =
          waterfilled_rate(hr_ss, v.basis * q, w, budget, cfg.block_len()).se.value;
      CHECK(se1 == doctest::Approx(se0).epsilon(1e-9));
    }
  }
}

TEST_CASE("root-based precoder") {
  SUBCASE("roots of a factored polynomial") {
    // p(z) = (z - 0.5)(z + 0.25) = z^2 - 0.25 z - 0.125
    const auto ch = from_taps({Complex(1, 0), Complex(-0.25, 0), Complex(-0.125, 0)});
    auto roots = channel_polynomial_roots(ch);
    std::sort(roots.begin(), roots.end(),
              [](const Complex& a, const Complex& b) { return a.real() < b.real(); });
    CHECK(std::abs(roots[0] - Complex(-0.25, 0)) < 1e-10);
    CHECK(std::abs(roots[1] - Complex(0.5, 0)) < 1e-10);
  }

  SUBCASE("each raw Vandermonde column annihilates the reduced channel") {
    const auto cfg = make_cfg(16, 4, 4);
    const auto h_sp = generate_channel(cfg, {PdpModel::Kind::Uniform, 1.0}, 33);
    const auto hr = reduced_channel(h_sp, cfg);
    const int m = cfg.block_len();
    for (const Complex a : channel_polynomial_roots(h_sp)) {
      VectorXcd col(m);
      Complex pw = 1.0;
      for (int j = 0; j < m; ++j) {
        col[j] = pw;
        pw *= a;
      }
      CHECK((hr.matrix * col).norm() < 1e-8 * hr.matrix.norm() * col.norm());
    }
  }

  SUBCASE("orthonormal and aligned on generic channels") {
    const auto cfg = make_cfg(16, 4, 4);
    for (int t = 0; t < 10; ++t) {
      const auto h_sp = generate_channel(cfg, {PdpModel::Kind::Uniform, 1.0},
                                         derive_seed(44, t, 0));
      const auto hr = reduced_channel(h_sp, cfg);
      const auto p = vfdm_root_precoder(h_sp, cfg, hr);
      CHECK((p.matrix.adjoint() * p.matrix - MatrixXcd::Identity(4, 4)).norm() < 1e-8);
      CHECK((hr.matrix * p.matrix).norm() < 1e-10 * hr.matrix.norm());
      Eigen::BDCSVD<MatrixXcd> svd(p.matrix);
      for (int i = 0; i < 4; ++i)
        CHECK(svd.singularValues()[i] == doctest::Approx(1.0).epsilon(1e-8));
    }
  }

  SUBCASE("repeated roots fall back to confluent columns") {
    // (z - 0.3)^2: taps (1, -0.6, 0.09); the construction must still deliver
    // an aligned orthonormal pair whichever branch handles the collision.
    const auto cfg = make_cfg(8, 2, 2);
    const auto ch = from_taps({Complex(1, 0), Complex(-0.6, 0), Complex(0.09, 0)});
    const auto hr = reduced_channel(ch, cfg);
    const auto p = vfdm_root_precoder(ch, cfg, hr);
    CHECK((p.matrix.adjoint() * p.matrix - MatrixXcd::Identity(2, 2)).norm() < 1e-8);
    CHECK((hr.matrix * p.matrix).norm() < 1e-8 * hr.matrix.norm());
  }

  SUBCASE("preconditions and degenerate inputs") {
    const auto cfg = make_cfg(16, 4, 3);  // l != L
    const auto ch = generate_channel(cfg, {PdpModel::Kind::Uniform, 1.0}, 5);
    CHECK_THROWS_AS(vfdm_root_precoder(ch, cfg), std::invalid_argument);
    // vanishing leading tap deflates the polynomial
    const auto cfg2 = make_cfg(8, 2, 2);
    const auto bad = from_taps({Complex(0, 0), Complex(1, 0), Complex(0.5, 0)});
    CHECK_THROWS_AS(vfdm_root_precoder(bad, cfg2), VfdmDegenerate);
  }
}

TEST_CASE("non-unitary baseline") {
  const auto cfg = make_cfg(16, 4, 4);
  const auto h_sp = generate_channel(cfg, {PdpModel::Kind::Uniform, 1.0}, 61);
  const auto h_ss = generate_channel(cfg, {PdpModel::Kind::Uniform, 1.0}, 62);
  const auto hr_sp = reduced_channel(h_sp, cfg);
  const auto hr_ss = reduced_channel(h_ss, cfg);
  const auto v = kernel_basis(hr_sp);

  SUBCASE("aligned but visibly non-orthogonal") {
    const auto p = nonunitary_baseline(v, 99);
    CHECK((hr_sp.matrix * p.matrix).norm() < 1e-10 * hr_sp.matrix.norm());
    const MatrixXcd gram = p.matrix.adjoint() * p.matrix;
    double max_off = 0.0;
    for (int i = 0; i < gram.rows(); ++i)
      for (int j = 0; j < gram.cols(); ++j)
        if (i != j) max_off = std::max(max_off, std::abs(gram(i, j)));
    CHECK(max_off > 1e-3);
    // columns stay unit-norm so the budget accounting is exact
    for (int i = 0; i < gram.cols(); ++i)
      CHECK(std::abs(gram(i, i).real() - 1.0) < 1e-12);
  }

  SUBCASE("deterministic in the seed") {
    const auto a = nonunitary_baseline(v, 7);
    const auto b = nonunitary_baseline(v, 7);
    CHECK((a.matrix - b.matrix).norm() == 0.0);
    const auto c = nonunitary_baseline(v, 8);
    CHECK((a.matrix - c.matrix).norm() > 1e-6);
  }

  SUBCASE("never beats the rate-optimal precoder") {
    const MatrixXcd w = (1.0 / std::sqrt(cfg.noise_variance)) *
                        MatrixXcd::Identity(16, 16);
    const double budget = cfg.power_budget();
    const double se_cia =
        waterfilled_rate(hr_ss, v.basis, w, budget, cfg.block_len()).se.value;
    for (int t = 0; t < 50; ++t) {
      const auto p = nonunitary_baseline(v, derive_seed(62, t, 4));
      const double se =
          waterfilled_rate(hr_ss, p.matrix, w, budget, cfg.block_len()).se.value;
      CHECK(se <= se_cia + 1e-9);
      CHECK(se < se_cia);  // strict in practice
    }
  }
}
