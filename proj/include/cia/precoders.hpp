#pragma once

#include <cstdint>
#include <utility>

#include "cia/types.hpp"

namespace cia {

/// Orthonormal basis of the L-dimensional null space of the interference
/// reduced channel, from its full SVD. Throws DegenerateChannel when the
/// matrix does not have full numerical row rank.
KernelBasis kernel_basis(const ReducedChannel& h_sp_reduced);

/// Rate-optimal precoder for the secondary link: whitens the useful channel
/// restricted to the kernel, rotates onto its right-singular basis and
/// returns the effective eigenvalues (descending) for water-filling.
std::pair<Precoder, VectorXd> cia_precoder(const KernelBasis& v,
                                           const ReducedChannel& h_ss_reduced,
                                           const MatrixXcd& s_eta);

/// Root-based construction: Vandermonde columns on the roots of the
/// interference channel polynomial, orthonormalized by modified
/// Gram-Schmidt with one re-orthogonalization pass. Requires l == L.
/// Throws VfdmDegenerate when a realization cannot deliver a full-rank
/// aligned basis; callers treat that per-trial.
Precoder vfdm_root_precoder(const ChannelRealization& h_sp, const OfdmConfig& cfg);

/// Overload reusing a precomputed reduced interference channel (the
/// construction validates alignment against it).
Precoder vfdm_root_precoder(const ChannelRealization& h_sp, const OfdmConfig& cfg,
                            const ReducedChannel& h_sp_reduced);

/// Suboptimal comparator: E = V * Gamma with Gamma a column-normalized
/// perturbed unitary (seeded). Deliberately non-unitary, still perfectly
/// aligned because span(E) is contained in span(V).
Precoder nonunitary_baseline(const KernelBasis& v, std::uint64_t rng_seed);

/// Roots of p(z) = sum_k h_k z^(l-k) via companion-matrix eigenvalues,
/// in a deterministic tap-seeded order (see vfdm_root_precoder).
std::vector<Complex> channel_polynomial_roots(const ChannelRealization& ch);

}  // namespace cia
