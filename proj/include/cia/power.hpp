#pragma once

#include "cia/types.hpp"

namespace cia {

/// How the interference-plus-noise covariance at the secondary receiver is
/// built. With `include_primary_interference` the licensed downlink is
/// treated as colored Gaussian interference; otherwise only thermal noise
/// remains (the headline-experiment regime).
struct NoiseModel {
  double sigma2 = 1.0;
  bool include_primary_interference = false;
  double primary_power = 1.0;
};

/// S_eta = P_p * (Htilde_ps * A)(Htilde_ps * A)^H + sigma2 * I_N, or
/// sigma2 * I_N when primary interference is neglected.
MatrixXcd interference_covariance(const NoiseModel& noise, const ReducedChannel& h_ps_reduced,
                                  const OfdmConfig& cfg);

/// Hermitian inverse square root via eigendecomposition. W * S * W = I.
MatrixXcd whiten(const MatrixXcd& s_eta);

/// Closed-form water-filling: p_i = max(0, mu - 1/lambda_i) with the water
/// level chosen by active-set shrinking so that sum(p) == budget whenever any
/// stream is active. Zero eigenvalues get zero power and never enter the
/// active set.
PowerAllocation waterfill(const VectorXd& eigenvalues, double budget);

}  // namespace cia
