#include "cia/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "cia/power.hpp"
#include "cia/signal_model.hpp"

namespace cia {

double logdet_spectral_efficiency(const MatrixXcd& whitened_effective, int block_len) {
  // det(I_N + M M^H) = det(I_L + M^H M); the L x L Gram form is cheaper and
  // its Hermitian eigenvalues give a numerically clean log2.
  const int l = static_cast<int>(whitened_effective.cols());
  MatrixXcd gram = whitened_effective.adjoint() * whitened_effective;
  gram = 0.5 * (gram + gram.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  double bits = 0.0;
  for (int i = 0; i < l; ++i) bits += std::log2(1.0 + std::max(0.0, es.eigenvalues()[i]));
  return bits / block_len;
}

SpectralEfficiency secondary_spectral_efficiency(const ReducedChannel& h_ss_reduced,
                                                 const MatrixXcd& precoder,
                                                 const PowerAllocation& alloc,
                                                 const MatrixXcd& s_eta) {
  if (precoder.rows() != h_ss_reduced.cols())
    throw DimensionMismatch("secondary_spectral_efficiency: precoder/channel shape");
  if (alloc.powers.size() != precoder.cols())
    throw DimensionMismatch("secondary_spectral_efficiency: allocation length");
  if (s_eta.rows() != h_ss_reduced.rows())
    throw DimensionMismatch("secondary_spectral_efficiency: covariance shape");
  const MatrixXcd w = whiten(s_eta);
  const VectorXd sqrt_p = alloc.powers.array().max(0.0).sqrt();
  const MatrixXcd m = w * h_ss_reduced.matrix * precoder * sqrt_p.asDiagonal();
  const int block = static_cast<int>(precoder.rows());
  return SpectralEfficiency{logdet_spectral_efficiency(m, block)};
}

LoadedRate waterfilled_rate(const ReducedChannel& h_ss_reduced, const MatrixXcd& precoder,
                            const MatrixXcd& whitener, double budget, int block_len) {
  const MatrixXcd g = whitener * h_ss_reduced.matrix * precoder;
  Eigen::BDCSVD<MatrixXcd> svd(g, Eigen::ComputeThinV);
  const VectorXd sv = svd.singularValues();
  const int l = static_cast<int>(sv.size());

  LoadedRate out;
  out.chain = precoder * svd.matrixV();
  // Per-mode transmit cost: power radiated when mode i carries unit power.
  // Exactly 1 for a semi-unitary precoder.
  VectorXd cost(l), gains(l);
  for (int i = 0; i < l; ++i) {
    cost[i] = out.chain.col(i).squaredNorm();
    gains[i] = cost[i] > 0.0 ? sv[i] * sv[i] / cost[i] : 0.0;
  }
  out.mode_gains = gains;
  out.mode_powers = waterfill(gains, budget);
  double bits = 0.0;
  for (int i = 0; i < l; ++i) bits += std::log2(1.0 + out.mode_powers.powers[i] * gains[i]);
  out.se.value = bits / block_len;
  return out;
}

std::pair<double, double> primary_leakage(const MatrixXcd& h_sp_conv, const MatrixXcd& precoder,
                                          const OfdmConfig& cfg) {
  cfg.validate();
  const int m = cfg.block_len();
  if (h_sp_conv.rows() != m || h_sp_conv.cols() != m || precoder.rows() != m)
    throw DimensionMismatch("primary_leakage: shape mismatch");
  const MatrixXcd he = h_sp_conv * precoder;
  const double pre = he.bottomRows(cfg.n_subcarriers).norm();
  const MatrixXcd post = dft_matrix(cfg.n_subcarriers) *
                         (cp_removal_matrix(cfg).cast<Complex>() * he);
  return {pre, post.norm()};
}

SpectralEfficiency primary_spectral_efficiency(const ReducedChannel& h_pp_reduced,
                                               const OfdmConfig& cfg, bool with_secondary,
                                               const ReducedChannel& h_sp_reduced,
                                               const MatrixXcd& precoder,
                                               const PowerAllocation& alloc) {
  cfg.validate();
  const int n = cfg.n_subcarriers;
  if (h_pp_reduced.rows() != n) throw DimensionMismatch("primary_spectral_efficiency: shape");
  // Equivalent diagonalized OFDM channel: F B H_pp A F^-1 = diag(lambda_k).
  const MatrixXcd eq = h_pp_reduced.matrix * cp_insertion_matrix(cfg) *
                       dft_matrix(n).adjoint();
  VectorXd interference = VectorXd::Zero(n);
  if (with_secondary) {
    if (precoder.rows() != cfg.block_len())
      throw DimensionMismatch("primary_spectral_efficiency: precoder shape");
    const MatrixXcd he = h_sp_reduced.matrix * precoder;  // post-DFT interference mixing
    const VectorXd p = alloc.powers.array().max(0.0);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 0; j < he.cols(); ++j) acc += p[j] * std::norm(he(k, j));
      interference[k] = acc;
    }
  }
  double bits = 0.0;
  for (int k = 0; k < n; ++k) {
    const double gain = std::norm(eq(k, k));
    bits += std::log2(1.0 + cfg.primary_power * gain / (cfg.noise_variance + interference[k]));
  }
  return SpectralEfficiency{bits / cfg.block_len()};
}

}  // namespace cia
