#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cia {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;

/// Block dimensions and per-system power parameters of the OFDM link.
///
/// N subcarriers, cyclic prefix of L samples, channel order l (l+1 taps).
/// P_p / P_s are the per-symbol transmit powers of the licensed and the
/// opportunistic system, sigma2 the per-sample complex noise variance.
struct OfdmConfig {
  int n_subcarriers = 128;  // N
  int cp_len = 32;          // L
  int channel_order = 32;   // l, taps = l + 1
  double primary_power = 1.0;
  double secondary_power = 1.0;
  double noise_variance = 1.0;

  int block_len() const { return n_subcarriers + cp_len; }
  double power_budget() const { return block_len() * secondary_power; }

  void validate() const {
    if (n_subcarriers < 1) throw std::invalid_argument("OfdmConfig: N must be >= 1");
    if (cp_len < 1) throw std::invalid_argument("OfdmConfig: L must be >= 1");
    if (channel_order < 0) throw std::invalid_argument("OfdmConfig: l must be >= 0");
    if (cp_len < channel_order)
      throw std::invalid_argument("OfdmConfig: cyclic prefix must cover the channel order (L >= l)");
    if (n_subcarriers < cp_len)
      throw std::invalid_argument("OfdmConfig: N >= L required");
    if (primary_power < 0 || secondary_power < 0)
      throw std::invalid_argument("OfdmConfig: powers must be >= 0");
    if (!(noise_variance > 0))
      throw std::invalid_argument("OfdmConfig: noise variance must be > 0");
  }
};

/// Per-tap variance profile. Variances always sum to one so that channels
/// drawn under different profiles carry the same mean power.
struct PdpModel {
  enum class Kind { Uniform, Exponential };

  Kind kind = Kind::Uniform;
  double decay_ratio = 1.0;  // T_s / tau, ignored for Uniform

  void validate() const {
    if (kind == Kind::Exponential && !(decay_ratio > 0))
      throw std::invalid_argument("PdpModel: decay ratio must be > 0");
  }

  /// Tap variances sigma_0^2 .. sigma_l^2, normalized to unit total power.
  std::vector<double> tap_variances(int channel_order) const;
};

/// One realization of a frequency-selective link: the l+1 complex taps.
struct ChannelRealization {
  std::vector<Complex> taps;
  PdpModel pdp;

  int order() const { return static_cast<int>(taps.size()) - 1; }
};

/// The N x (N+L) matrix seen after CP removal and DFT at a receiver.
struct ReducedChannel {
  MatrixXcd matrix;  // F * B * H

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
};

/// Orthonormal basis of the null space of the interference reduced channel.
struct KernelBasis {
  MatrixXcd basis;  // (N+L) x L, orthonormal columns
};

enum class PrecoderKind { CiaOptimal, VfdmRoot, NonUnitary };

/// A linear precoder for the secondary transmitter. `rotation` is the L x L
/// combination matrix applied on top of the kernel basis where the
/// construction has one (identity for the root-based precoder, whose basis
/// is transmitted as built).
struct Precoder {
  MatrixXcd matrix;  // (N+L) x L
  PrecoderKind kind = PrecoderKind::CiaOptimal;
  MatrixXcd rotation;

  int streams() const { return static_cast<int>(matrix.cols()); }
};

inline const char* to_string(PrecoderKind k) {
  switch (k) {
    case PrecoderKind::CiaOptimal: return "cia";
    case PrecoderKind::VfdmRoot: return "vfdm";
    case PrecoderKind::NonUnitary: return "nonunitary";
  }
  return "?";
}

/// Water-filling result: per-stream powers, the water level and the budget
/// they were filled against.
struct PowerAllocation {
  VectorXd powers;
  double water_level = 0.0;
  double budget = 0.0;

  double total() const { return powers.sum(); }
};

/// Secondary-link rate in bits/s/Hz, normalized per channel use (1/(N+L)).
struct SpectralEfficiency {
  double value = 0.0;
};

// ---- error types ----------------------------------------------------------

struct DegenerateChannel : std::runtime_error {
  explicit DegenerateChannel(const std::string& what) : std::runtime_error(what) {}
};

struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct AllZeroEigenvalues : std::runtime_error {
  explicit AllZeroEigenvalues(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when the root-based construction cannot deliver a full-rank,
/// aligned basis for a realization. The simulation driver counts these per
/// trial instead of aborting.
struct VfdmDegenerate : std::runtime_error {
  enum class Reason { PivotUnderflow, AlignmentGate, NonFiniteColumn, ConfluentDegenerate };

  VfdmDegenerate(Reason r, const std::string& what) : std::runtime_error(what), reason(r) {}
  Reason reason;
};

}  // namespace cia
