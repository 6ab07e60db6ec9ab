#pragma once

#include "cia/types.hpp"

namespace cia {

/// Secondary-link rate in log-det form:
///   (1/(N+L)) * log2 det(I + S^-1/2 H E P E^H H^H S^-1/2).
SpectralEfficiency secondary_spectral_efficiency(const ReducedChannel& h_ss_reduced,
                                                 const MatrixXcd& precoder,
                                                 const PowerAllocation& alloc,
                                                 const MatrixXcd& s_eta);

/// Same, with the whitened effective matrix M = W * H * E * sqrt(P) already
/// composed; used on hot paths and by the harness.
double logdet_spectral_efficiency(const MatrixXcd& whitened_effective, int block_len);

/// Water-filled rate of a fixed precoder: the effective channel is whitened,
/// rotated onto its eigenmodes and water-filled against the physical
/// transmit budget (per-mode cost = column norm of E * V_mode). For the
/// rate-optimal precoder the modes coincide with its streams at unit cost
/// and this is exactly the closed-form water-filling rate.
struct LoadedRate {
  SpectralEfficiency se;
  PowerAllocation mode_powers;  // powers against cost-normalized modes
  MatrixXcd chain;              // E * V_mode: transmit chain achieving se
  VectorXd mode_gains;          // cost-normalized effective eigenvalues
};
LoadedRate waterfilled_rate(const ReducedChannel& h_ss_reduced, const MatrixXcd& precoder,
                            const MatrixXcd& whitener, double budget, int block_len);

/// Residual secondary power at the licensed receiver before and after its
/// OFDM front end: rows L+1..N+L of H_sp*E, and F*B*H_sp*E. Both vanish for
/// an aligned precoder; the first L rows (the K block) generally do not.
std::pair<double, double> primary_leakage(const MatrixXcd& h_sp_conv, const MatrixXcd& precoder,
                                          const OfdmConfig& cfg);

/// Licensed-link OFDM rate (1/(N+L)) * sum_k log2(1 + P_p |lambda_k|^2 /
/// (sigma^2 + I_k)) over the per-subcarrier gains of its own diagonalized
/// channel. With `with_secondary` the aligned interference is accounted for
/// through the actual post-DFT covariance diagonal I_k; alignment makes it
/// vanish below double precision, so the value matches the
/// interference-free one bit for bit.
SpectralEfficiency primary_spectral_efficiency(const ReducedChannel& h_pp_reduced,
                                               const OfdmConfig& cfg, bool with_secondary,
                                               const ReducedChannel& h_sp_reduced,
                                               const MatrixXcd& precoder,
                                               const PowerAllocation& alloc);

}  // namespace cia
