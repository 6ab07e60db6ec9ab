#include "doctest.h"

#include "cia/metrics.hpp"
#include "cia/power.hpp"
#include "cia/precoders.hpp"
#include "cia/rng.hpp"
#include "cia/signal_model.hpp"
#include "oracles.hpp"

using namespace cia;

namespace {

struct Instance {
  OfdmConfig cfg;
  ChannelRealization h_sp, h_ss;
  ReducedChannel hr_sp, hr_ss;
  KernelBasis v;
  MatrixXcd s_eta;
};

Instance make_instance(std::uint64_t seed, int n = 16, int cp = 4, double sigma2 = 0.25) {
  Instance in;
  in.cfg.n_subcarriers = n;
  in.cfg.cp_len = cp;
  in.cfg.channel_order = cp;
  in.cfg.noise_variance = sigma2;
  const PdpModel pdp{PdpModel::Kind::Uniform, 1.0};
  in.h_sp = generate_channel(in.cfg, pdp, derive_seed(seed, 0, 0));
  in.h_ss = generate_channel(in.cfg, pdp, derive_seed(seed, 0, 1));
  in.hr_sp = reduced_channel(in.h_sp, in.cfg);
  in.hr_ss = reduced_channel(in.h_ss, in.cfg);
  in.v = kernel_basis(in.hr_sp);
  in.s_eta = sigma2 * MatrixXcd::Identity(n, n);
  return in;
}

}  // namespace

TEST_CASE("secondary spectral efficiency") {
  auto in = make_instance(11);

  SUBCASE("zero power gives exactly zero") {
    PowerAllocation none;
    none.powers = VectorXd::Zero(4);
    const auto se = secondary_spectral_efficiency(in.hr_ss, in.v.basis, none, in.s_eta);
    CHECK(se.value == 0.0);
  }

  SUBCASE("L = 1 reduces to the scalar log") {
    Instance i1 = make_instance(12, 4, 1);
    i1.cfg.channel_order = 1;
    const auto [p, lam] = cia_precoder(i1.v, i1.hr_ss, i1.s_eta);
    PowerAllocation alloc;
    alloc.powers = VectorXd::Constant(1, 2.5);
    const auto se = secondary_spectral_efficiency(i1.hr_ss, p.matrix, alloc, i1.s_eta);
    const double gain = (i1.hr_ss.matrix * p.matrix.col(0)).squaredNorm() / 0.25;
    const double want = std::log2(1.0 + 2.5 * gain) / i1.cfg.block_len();
    CHECK(se.value == doctest::Approx(want).epsilon(1e-10));
  }

  SUBCASE("determinant form equals the diagonalized sum for the optimal precoder") {
    for (int t = 0; t < 10; ++t) {
      auto inst = make_instance(100 + t);
      const auto [p, lam] = cia_precoder(inst.v, inst.hr_ss, inst.s_eta);
      const auto alloc = waterfill(lam, inst.cfg.power_budget());
      const auto se = secondary_spectral_efficiency(inst.hr_ss, p.matrix, alloc, inst.s_eta);
      double want = 0.0;
      for (int i = 0; i < lam.size(); ++i) want += std::log2(1.0 + alloc.powers[i] * lam[i]);
      want /= inst.cfg.block_len();
      CHECK(se.value == doctest::Approx(want).epsilon(1e-9));
    }
  }

  SUBCASE("dimension mismatches are rejected") {
    PowerAllocation bad;
    bad.powers = VectorXd::Ones(3);
    CHECK_THROWS_AS(secondary_spectral_efficiency(in.hr_ss, in.v.basis, bad, in.s_eta),
                    DimensionMismatch);
  }
}

TEST_CASE("primary leakage") {
  auto in = make_instance(21);
  const MatrixXcd conv = conv_matrix(in.h_sp, in.cfg);

  SUBCASE("aligned precoders leak nothing past the OFDM front end") {
    for (const MatrixXcd& e :
         {in.v.basis, nonunitary_baseline(in.v, 5).matrix,
          vfdm_root_precoder(in.h_sp, in.cfg, in.hr_sp).matrix}) {
      const auto [pre, post] = primary_leakage(conv, e, in.cfg);
      CHECK(post < 1e-10 * conv.norm());
      CHECK(pre < 1e-9 * conv.norm());
    }
  }

  SUBCASE("the K block is generically nonzero while the bottom rows vanish") {
    const MatrixXcd he = conv * in.v.basis;
    const double top = he.topRows(in.cfg.cp_len).norm();
    const double bottom = he.bottomRows(in.cfg.n_subcarriers).norm();
    CHECK(top > 1e-3);          // interference is aligned, not nulled
    CHECK(bottom / top < 1e-8); // but confined to the CP rows
  }

  SUBCASE("a non-aligned precoder leaks") {
    MatrixXcd e = MatrixXcd::Zero(in.cfg.block_len(), in.cfg.cp_len);
    for (int i = 0; i < in.cfg.cp_len; ++i) e(i, i) = 1.0;  // first L identity columns
    const auto [pre, post] = primary_leakage(conv, e, in.cfg);
    CHECK(post > 1e-3);
  }

  SUBCASE("leakage does not depend on the power loading") {
    // property of E alone: scaling columns by any powers keeps post ~ 0
    const MatrixXcd e = in.v.basis;
    VectorXd p(4);
    p << 4.0, 0.0, 2.5, 0.1;
    const auto [pre0, post0] = primary_leakage(conv, e, in.cfg);
    const auto [pre1, post1] =
        primary_leakage(conv, MatrixXcd(e * p.cwiseSqrt().asDiagonal()), in.cfg);
    CHECK(post1 <= post0 * p.cwiseSqrt().maxCoeff() + 1e-14);
    CHECK(post1 < 1e-10 * conv.norm());
  }
}

TEST_CASE("primary spectral efficiency") {
  auto in = make_instance(31);
  const auto h_pp = generate_channel(in.cfg, {PdpModel::Kind::Uniform, 1.0}, 777);
  const auto hr_pp = reduced_channel(h_pp, in.cfg);
  const auto [p, lam] = cia_precoder(in.v, in.hr_ss, in.s_eta);
  const auto alloc = waterfill(lam, in.cfg.power_budget());

  SUBCASE("secondary transmission does not change the value, bit for bit") {
    const auto off = primary_spectral_efficiency(hr_pp, in.cfg, false, in.hr_sp, p.matrix, alloc);
    const auto on = primary_spectral_efficiency(hr_pp, in.cfg, true, in.hr_sp, p.matrix, alloc);
    CHECK(off.value == on.value);
  }

  SUBCASE("flat primary channel: N parallel AWGN subcarriers") {
    ChannelRealization flat;
    flat.taps = {Complex(1, 0)};
    OfdmConfig cfg = in.cfg;
    cfg.channel_order = 0;
    const auto hr_flat = reduced_channel(flat, cfg);
    const auto se = primary_spectral_efficiency(hr_flat, cfg, false, in.hr_sp, p.matrix, alloc);
    const double want = cfg.n_subcarriers *
                        std::log2(1.0 + cfg.primary_power / cfg.noise_variance) /
                        cfg.block_len();
    CHECK(se.value == doctest::Approx(want).epsilon(1e-12));
  }

  SUBCASE("vanishing SNR kills the rate") {
    OfdmConfig cfg = in.cfg;
    cfg.noise_variance = 1e4;  // -40 dB
    const auto hr = reduced_channel(h_pp, cfg);
    const auto se = primary_spectral_efficiency(hr, cfg, false, in.hr_sp, p.matrix, alloc);
    CHECK(se.value < 1e-3);
  }
}
