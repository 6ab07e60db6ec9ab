#include "cia/power.hpp"

#include <algorithm>
#include <numeric>

#include "cia/signal_model.hpp"

namespace cia {

MatrixXcd interference_covariance(const NoiseModel& noise, const ReducedChannel& h_ps_reduced,
                                  const OfdmConfig& cfg) {
  cfg.validate();
  if (!(noise.sigma2 > 0)) throw std::invalid_argument("interference_covariance: sigma2 <= 0");
  const int n = cfg.n_subcarriers;
  MatrixXcd s = noise.sigma2 * MatrixXcd::Identity(n, n);
  if (!noise.include_primary_interference || noise.primary_power == 0.0) return s;
  if (h_ps_reduced.rows() != n || h_ps_reduced.cols() != cfg.block_len())
    throw DimensionMismatch("interference_covariance: reduced channel has wrong shape");
  // Covariance of Htilde_ps * A * F^{-1} * s_p with E[s_p s_p^H] = P_p I; the
  // inner unitary F cancels, leaving P_p * (Htilde_ps A)(Htilde_ps A)^H.
  const MatrixXcd ha = h_ps_reduced.matrix * cp_insertion_matrix(cfg);
  s.noalias() += noise.primary_power * ha * ha.adjoint();
  // enforce exact Hermitian symmetry against roundoff drift
  s = 0.5 * (s + s.adjoint()).eval();
  return s;
}

MatrixXcd whiten(const MatrixXcd& s_eta) {
  if (s_eta.rows() != s_eta.cols()) throw DimensionMismatch("whiten: matrix not square");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(s_eta);
  if (es.info() != Eigen::Success) throw NotPositiveDefinite("whiten: eigendecomposition failed");
  const VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0)
    throw NotPositiveDefinite("whiten: matrix has a non-positive eigenvalue");
  const VectorXd inv_sqrt = ev.array().rsqrt();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

PowerAllocation waterfill(const VectorXd& eigenvalues, double budget) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n == 0) throw std::invalid_argument("waterfill: empty eigenvalue vector");
  if (budget < 0) throw std::invalid_argument("waterfill: negative budget");
  for (int i = 0; i < n; ++i)
    if (eigenvalues[i] < -1e-12 * std::abs(eigenvalues.maxCoeff()))
      throw std::invalid_argument("waterfill: negative eigenvalue");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return eigenvalues[a] > eigenvalues[b]; });

  int active = 0;
  while (active < n && eigenvalues[order[active]] > 0.0) ++active;
  if (active == 0) {
    if (budget > 0) throw AllZeroEigenvalues("waterfill: all eigenvalues are zero");
    PowerAllocation out;
    out.powers = VectorXd::Zero(n);
    out.water_level = 0.0;
    out.budget = budget;
    return out;
  }

  // Shrink the active set until the weakest active stream gets p >= 0. The
  // 1/lambda sum is recomputed per candidate set: eigenvalue spreads of many
  // orders of magnitude make an incrementally downdated sum cancel away.
  double mu = 0.0;
  while (active > 0) {
    double inv_sum = 0.0;
    for (int i = active - 1; i >= 0; --i) inv_sum += 1.0 / eigenvalues[order[i]];
    mu = (budget + inv_sum) / active;
    if (mu - 1.0 / eigenvalues[order[active - 1]] >= 0.0) break;
    --active;
  }

  PowerAllocation out;
  out.powers = VectorXd::Zero(n);
  for (int i = 0; i < active; ++i) {
    const int idx = order[i];
    out.powers[idx] = std::max(0.0, mu - 1.0 / eigenvalues[idx]);
  }
  out.water_level = mu;
  out.budget = budget;
  return out;
}

}  // namespace cia
