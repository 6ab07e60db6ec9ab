#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cia/types.hpp"

namespace cia {

/// One Monte-Carlo sweep: PDP model, precoder set, SNR grid and seeding.
/// Channels are drawn once per trial and reused across the SNR sweep
/// (common random numbers), which keeps precoder ratios low-variance.
struct ExperimentConfig {
  OfdmConfig cfg;
  PdpModel pdp;
  std::vector<PrecoderKind> precoders{PrecoderKind::CiaOptimal, PrecoderKind::VfdmRoot,
                                      PrecoderKind::NonUnitary};
  double snr_start_db = 0.0;
  double snr_stop_db = 30.0;
  double snr_step_db = 5.0;
  int trials = 500;
  std::uint64_t master_seed = 1;
  bool include_primary_interference = false;
  std::string output_path;
  int workers = 0;  // 0: CIA_SIM_WORKERS env or hardware concurrency

  std::vector<double> snr_points() const;
  void validate() const;
};

struct ResultRow {
  double snr_db = 0.0;
  PrecoderKind precoder = PrecoderKind::CiaOptimal;
  double mean_se = 0.0;    // bits/s/Hz
  double stderr_se = 0.0;  // standard error of the mean
  int trials = 0;          // trials contributing to the mean
  double failure_rate = 0.0;
};

struct SimResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;  // SNR-major, precoders in config order

  const ResultRow& at(double snr_db, PrecoderKind kind) const;
};

/// Runs the sweep on a worker pool. Per-trial channel seeds derive from
/// (master_seed, trial, link), so the result is identical for any worker
/// count. A trial whose root-based construction degenerates is excluded
/// from that precoder's statistics and counted in its failure rate.
SimResult run_experiment(const ExperimentConfig& ec);

enum class OutputFormat { Csv, Json };

/// CSV columns: snr_db, precoder, mean_se_bps_hz, stderr_se, trials,
/// failure_rate (a leading '#' comment records the SNR convention). JSON
/// mirrors the rows and embeds the full config.
void emit_results(const SimResult& r, OutputFormat format, const std::string& path);

/// Re-parse a JSON result file (round-trip of emit_results).
SimResult parse_results_json(const std::string& path);

std::string serialize_results_json(const SimResult& r);
std::string serialize_results_csv(const SimResult& r);

bool parse_precoder_kind(const std::string& name, PrecoderKind* out);

/// Seed roles for the per-trial derived streams.
enum class LinkId : std::uint64_t {
  SecondaryToPrimary = 0,
  SecondaryToSecondary = 1,
  PrimaryToSecondary = 2,
  PrimaryToPrimary = 3,
  BaselineRotation = 4,
};

}  // namespace cia
