#pragma once

#include <cstdint>

#include "cia/types.hpp"

namespace cia {

/// Draw one channel realization: l+1 independent CN(0, sigma_i^2) taps with
/// the variance profile of `pdp`. Same seed, same taps.
ChannelRealization generate_channel(const OfdmConfig& cfg, const PdpModel& pdp,
                                    std::uint64_t rng_seed);

/// (N+L) x N cyclic-prefix insertion matrix A = [E_L ; I_N] (E_L selects the
/// last L rows of I_N).
MatrixXd cp_insertion_matrix(const OfdmConfig& cfg);

/// N x (N+L) cyclic-prefix removal matrix B = [0 | I_N].
MatrixXd cp_removal_matrix(const OfdmConfig& cfg);

/// N x N unitary DFT matrix, F(j,k) = exp(-2*pi*i*j*k/N) / sqrt(N).
MatrixXcd dft_matrix(int n);

/// (N+L) x (N+L) circular channel convolution matrix: column c carries the
/// zero-padded tap vector cyclically shifted down by c.
MatrixXcd conv_matrix(const ChannelRealization& ch, const OfdmConfig& cfg);

/// F * B * conv_matrix, built from the banded Toeplitz block directly
/// (CP removal keeps rows L..N+L-1, which carry no wrap-around entries).
ReducedChannel reduced_channel(const ChannelRealization& ch, const OfdmConfig& cfg);

}  // namespace cia
