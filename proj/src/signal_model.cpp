#include "cia/signal_model.hpp"

#include <cmath>

#include "cia/rng.hpp"

namespace cia {

std::vector<double> PdpModel::tap_variances(int channel_order) const {
  validate();
  const int taps = channel_order + 1;
  std::vector<double> v(taps);
  if (kind == Kind::Uniform) {
    for (int i = 0; i < taps; ++i) v[i] = 1.0 / taps;
    return v;
  }
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    v[i] = std::exp(-decay_ratio * i);
    sum += v[i];
  }
  for (int i = 0; i < taps; ++i) v[i] /= sum;
  return v;
}

ChannelRealization generate_channel(const OfdmConfig& cfg, const PdpModel& pdp,
                                    std::uint64_t rng_seed) {
  cfg.validate();
  const auto var = pdp.tap_variances(cfg.channel_order);
  Rng rng(rng_seed);
  ChannelRealization ch;
  ch.pdp = pdp;
  ch.taps.resize(var.size());
  for (std::size_t i = 0; i < var.size(); ++i)
    ch.taps[i] = std::sqrt(var[i]) * rng.complex_normal();
  return ch;
}

MatrixXd cp_insertion_matrix(const OfdmConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_subcarriers, cp = cfg.cp_len;
  MatrixXd a = MatrixXd::Zero(n + cp, n);
  for (int i = 0; i < cp; ++i) a(i, n - cp + i) = 1.0;
  for (int i = 0; i < n; ++i) a(cp + i, i) = 1.0;
  return a;
}

MatrixXd cp_removal_matrix(const OfdmConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_subcarriers, cp = cfg.cp_len;
  MatrixXd b = MatrixXd::Zero(n, n + cp);
  for (int i = 0; i < n; ++i) b(i, cp + i) = 1.0;
  return b;
}

MatrixXcd dft_matrix(int n) {
  if (n < 1) throw std::invalid_argument("dft_matrix: N must be >= 1");
  MatrixXcd f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      // indices reduced mod N keep the phase argument small for large j*k
      const long long m = (static_cast<long long>(j) * k) % n;
      const double arg = -2.0 * M_PI * static_cast<double>(m) / n;
      f(j, k) = scale * Complex(std::cos(arg), std::sin(arg));
    }
  }
  return f;
}

MatrixXcd conv_matrix(const ChannelRealization& ch, const OfdmConfig& cfg) {
  cfg.validate();
  const int l = ch.order();
  if (l != cfg.channel_order)
    throw DimensionMismatch("conv_matrix: tap count does not match cfg.channel_order");
  if (l > cfg.cp_len) throw std::invalid_argument("conv_matrix: channel order exceeds CP length");
  const int m = cfg.block_len();
  MatrixXcd h = MatrixXcd::Zero(m, m);
  for (int c = 0; c < m; ++c)
    for (int k = 0; k <= l; ++k) h((c + k) % m, c) = ch.taps[k];
  return h;
}

ReducedChannel reduced_channel(const ChannelRealization& ch, const OfdmConfig& cfg) {
  cfg.validate();
  const int l = ch.order();
  if (l != cfg.channel_order)
    throw DimensionMismatch("reduced_channel: tap count does not match cfg.channel_order");
  const int n = cfg.n_subcarriers, cp = cfg.cp_len, m = cfg.block_len();
  // Row r of B*H is row cp+r of the circulant: h_k sits at column cp+r-k.
  MatrixXcd t = MatrixXcd::Zero(n, m);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k <= l; ++k) t(r, cp + r - k) = ch.taps[k];
  ReducedChannel out;
  out.matrix = dft_matrix(n) * t;
  return out;
}

}  // namespace cia
