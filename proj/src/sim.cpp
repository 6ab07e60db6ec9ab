#include "cia/sim.hpp"

#include <Eigen/SVD>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "cia/metrics.hpp"
#include "cia/power.hpp"
#include "cia/precoders.hpp"
#include "cia/rng.hpp"
#include "cia/signal_model.hpp"

namespace cia {

namespace {

constexpr const char* kSnrNote =
    "snr_db = 10*log10(P_s/sigma2); transmit SNR with P_s fixed and the noise variance swept; "
    "spectral efficiency normalized by 1/(N+L); channels reused across the SNR sweep per trial";

/// Neumaier compensated sum, applied in trial-index order so aggregation is
/// independent of the worker count.
double compensated_sum(const std::vector<double>& xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

struct TrialOutput {
  // per snr index, per precoder index; NaN marks a skipped (failed) cell
  std::vector<std::vector<double>> se;
  bool vfdm_failed = false;
};

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CIA_SIM_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

/// Rate curve of one precoder over the sweep without primary interference:
/// the whitener is sigma^-1 * I, so one SVD of H_ss * E serves every SNR
/// point (singular vectors do not depend on sigma).
std::vector<double> noise_only_curve(const MatrixXcd& h_ss_e, const MatrixXcd& precoder,
                                     const std::vector<double>& sigma2s, double budget,
                                     int block_len) {
  Eigen::BDCSVD<MatrixXcd> svd(h_ss_e, Eigen::ComputeThinV);
  const VectorXd sv = svd.singularValues();
  const MatrixXcd chain = precoder * svd.matrixV();
  const int l = static_cast<int>(sv.size());
  VectorXd cost(l);
  for (int i = 0; i < l; ++i) cost[i] = chain.col(i).squaredNorm();

  std::vector<double> out;
  out.reserve(sigma2s.size());
  VectorXd gains(l);
  for (double s2 : sigma2s) {
    for (int i = 0; i < l; ++i)
      gains[i] = cost[i] > 0.0 ? sv[i] * sv[i] / (s2 * cost[i]) : 0.0;
    const PowerAllocation alloc = waterfill(gains, budget);
    double bits = 0.0;
    for (int i = 0; i < l; ++i) bits += std::log2(1.0 + alloc.powers[i] * gains[i]);
    out.push_back(bits / block_len);
  }
  return out;
}

TrialOutput run_trial(const ExperimentConfig& ec, int trial, const std::vector<double>& snrs) {
  const OfdmConfig& cfg = ec.cfg;
  const int block = cfg.block_len();
  const double budget = cfg.power_budget();

  const auto h_sp = generate_channel(
      cfg, ec.pdp, derive_seed(ec.master_seed, trial, static_cast<std::uint64_t>(LinkId::SecondaryToPrimary)));
  const auto h_ss = generate_channel(
      cfg, ec.pdp, derive_seed(ec.master_seed, trial, static_cast<std::uint64_t>(LinkId::SecondaryToSecondary)));

  const ReducedChannel hr_sp = reduced_channel(h_sp, cfg);
  const ReducedChannel hr_ss = reduced_channel(h_ss, cfg);
  const KernelBasis v = kernel_basis(hr_sp);

  std::vector<double> sigma2s;
  sigma2s.reserve(snrs.size());
  for (double snr : snrs)
    sigma2s.push_back(cfg.secondary_power * std::pow(10.0, -snr / 10.0));

  TrialOutput out;
  out.se.assign(snrs.size(), std::vector<double>(ec.precoders.size(),
                                                 std::numeric_limits<double>::quiet_NaN()));

  ReducedChannel hr_ps;
  if (ec.include_primary_interference)
    hr_ps = reduced_channel(
        generate_channel(cfg, ec.pdp,
                         derive_seed(ec.master_seed, trial,
                                     static_cast<std::uint64_t>(LinkId::PrimaryToSecondary))),
        cfg);

  for (std::size_t pi = 0; pi < ec.precoders.size(); ++pi) {
    Precoder p;
    switch (ec.precoders[pi]) {
      case PrecoderKind::CiaOptimal:
        // The optimal rotation is recomputed per SNR point through the
        // whitened channel; with noise-only whitening it is SNR-invariant
        // and the shared noise_only_curve path below covers it exactly.
        p.kind = PrecoderKind::CiaOptimal;
        p.matrix = v.basis;
        break;
      case PrecoderKind::VfdmRoot:
        try {
          p = vfdm_root_precoder(h_sp, cfg, hr_sp);
        } catch (const VfdmDegenerate&) {
          out.vfdm_failed = true;
          continue;
        }
        break;
      case PrecoderKind::NonUnitary:
        p = nonunitary_baseline(
            v, derive_seed(ec.master_seed, trial,
                           static_cast<std::uint64_t>(LinkId::BaselineRotation)));
        break;
    }

    if (!ec.include_primary_interference) {
      const MatrixXcd h_ss_e = hr_ss.matrix * p.matrix;
      const auto curve = noise_only_curve(h_ss_e, p.matrix, sigma2s, budget, block);
      for (std::size_t si = 0; si < snrs.size(); ++si) out.se[si][pi] = curve[si];
    } else {
      for (std::size_t si = 0; si < snrs.size(); ++si) {
        NoiseModel noise{sigma2s[si], true, cfg.primary_power};
        const MatrixXcd s_eta = interference_covariance(noise, hr_ps, cfg);
        const MatrixXcd w = whiten(s_eta);
        out.se[si][pi] = waterfilled_rate(hr_ss, p.matrix, w, budget, block).se.value;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> ExperimentConfig::snr_points() const {
  std::vector<double> pts;
  const int count = static_cast<int>(std::floor((snr_stop_db - snr_start_db) / snr_step_db + 1e-9)) + 1;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) pts.push_back(snr_start_db + i * snr_step_db);
  return pts;
}

void ExperimentConfig::validate() const {
  cfg.validate();
  pdp.validate();
  if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
  if (!(snr_step_db > 0)) throw std::invalid_argument("ExperimentConfig: snr step must be > 0");
  if (snr_start_db > snr_stop_db)
    throw std::invalid_argument("ExperimentConfig: snr start must be <= stop");
  if (precoders.empty()) throw std::invalid_argument("ExperimentConfig: no precoders selected");
}

const ResultRow& SimResult::at(double snr_db, PrecoderKind kind) const {
  for (const auto& r : rows)
    if (r.precoder == kind && std::abs(r.snr_db - snr_db) < 1e-9) return r;
  throw std::out_of_range("SimResult::at: no such row");
}

SimResult run_experiment(const ExperimentConfig& ec) {
  ec.validate();
  const auto snrs = ec.snr_points();
  const int workers = std::min(resolve_workers(ec.workers), ec.trials);

  std::vector<TrialOutput> trials(ec.trials);
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;

  auto work = [&]() {
    while (true) {
      const int t = next.fetch_add(1);
      if (t >= ec.trials) return;
      try {
        trials[t] = run_trial(ec, t, snrs);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SimResult result;
  result.config = ec;
  int vfdm_failures = 0;
  for (const auto& t : trials) vfdm_failures += t.vfdm_failed ? 1 : 0;

  for (std::size_t si = 0; si < snrs.size(); ++si) {
    for (std::size_t pi = 0; pi < ec.precoders.size(); ++pi) {
      std::vector<double> values;
      values.reserve(ec.trials);
      for (int t = 0; t < ec.trials; ++t) {
        const double x = trials[t].se[si][pi];
        if (!std::isnan(x)) values.push_back(x);
      }
      ResultRow row;
      row.snr_db = snrs[si];
      row.precoder = ec.precoders[pi];
      row.trials = static_cast<int>(values.size());
      row.failure_rate =
          ec.precoders[pi] == PrecoderKind::VfdmRoot
              ? static_cast<double>(vfdm_failures) / static_cast<double>(ec.trials)
              : 0.0;
      if (!values.empty()) {
        row.mean_se = compensated_sum(values) / values.size();
        if (values.size() > 1) {
          std::vector<double> sq(values.size());
          for (std::size_t i = 0; i < values.size(); ++i) {
            const double d = values[i] - row.mean_se;
            sq[i] = d * d;
          }
          const double var = compensated_sum(sq) / (values.size() - 1);
          row.stderr_se = std::sqrt(var / values.size());
        }
      }
      result.rows.push_back(row);
    }
  }
  return result;
}

bool parse_precoder_kind(const std::string& name, PrecoderKind* out) {
  if (name == "cia") *out = PrecoderKind::CiaOptimal;
  else if (name == "vfdm") *out = PrecoderKind::VfdmRoot;
  else if (name == "nonunitary") *out = PrecoderKind::NonUnitary;
  else return false;
  return true;
}

namespace {

nlohmann::json config_to_json(const ExperimentConfig& ec) {
  nlohmann::json j;
  j["n"] = ec.cfg.n_subcarriers;
  j["cp"] = ec.cfg.cp_len;
  j["taps"] = ec.cfg.channel_order;
  j["primary_power"] = ec.cfg.primary_power;
  j["secondary_power"] = ec.cfg.secondary_power;
  j["pdp"] = ec.pdp.kind == PdpModel::Kind::Uniform ? "uniform" : "exponential";
  j["decay_ratio"] = ec.pdp.decay_ratio;
  std::vector<std::string> kinds;
  for (auto k : ec.precoders) kinds.emplace_back(to_string(k));
  j["precoders"] = kinds;
  j["snr_start_db"] = ec.snr_start_db;
  j["snr_stop_db"] = ec.snr_stop_db;
  j["snr_step_db"] = ec.snr_step_db;
  j["trials"] = ec.trials;
  j["master_seed"] = ec.master_seed;
  j["include_primary_interference"] = ec.include_primary_interference;
  j["output_path"] = ec.output_path;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig ec;
  ec.cfg.n_subcarriers = j.at("n").get<int>();
  ec.cfg.cp_len = j.at("cp").get<int>();
  ec.cfg.channel_order = j.at("taps").get<int>();
  ec.cfg.primary_power = j.at("primary_power").get<double>();
  ec.cfg.secondary_power = j.at("secondary_power").get<double>();
  ec.pdp.kind = j.at("pdp").get<std::string>() == "uniform" ? PdpModel::Kind::Uniform
                                                            : PdpModel::Kind::Exponential;
  ec.pdp.decay_ratio = j.at("decay_ratio").get<double>();
  ec.precoders.clear();
  for (const auto& name : j.at("precoders")) {
    PrecoderKind k;
    if (!parse_precoder_kind(name.get<std::string>(), &k))
      throw IoError("unknown precoder kind in result file");
    ec.precoders.push_back(k);
  }
  ec.snr_start_db = j.at("snr_start_db").get<double>();
  ec.snr_stop_db = j.at("snr_stop_db").get<double>();
  ec.snr_step_db = j.at("snr_step_db").get<double>();
  ec.trials = j.at("trials").get<int>();
  ec.master_seed = j.at("master_seed").get<std::uint64_t>();
  ec.include_primary_interference = j.at("include_primary_interference").get<bool>();
  ec.output_path = j.value("output_path", std::string{});
  return ec;
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string serialize_results_csv(const SimResult& r) {
  std::ostringstream os;
  os << "# " << kSnrNote << "\n";
  os << "snr_db,precoder,mean_se_bps_hz,stderr_se,trials,failure_rate\n";
  for (const auto& row : r.rows) {
    os << format_double(row.snr_db) << ',' << to_string(row.precoder) << ','
       << format_double(row.mean_se) << ',' << format_double(row.stderr_se) << ','
       << row.trials << ',' << format_double(row.failure_rate) << "\n";
  }
  return os.str();
}

std::string serialize_results_json(const SimResult& r) {
  nlohmann::json j;
  j["note"] = kSnrNote;
  j["config"] = config_to_json(r.config);
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json rj;
    rj["snr_db"] = row.snr_db;
    rj["precoder"] = to_string(row.precoder);
    rj["mean_se_bps_hz"] = row.mean_se;
    rj["stderr_se"] = row.stderr_se;
    rj["trials"] = row.trials;
    rj["failure_rate"] = row.failure_rate;
    j["rows"].push_back(rj);
  }
  return j.dump(2);
}

void emit_results(const SimResult& r, OutputFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("emit_results: cannot open " + path);
  out << (format == OutputFormat::Csv ? serialize_results_csv(r) : serialize_results_json(r));
  if (!out) throw IoError("emit_results: write failed for " + path);
}

SimResult parse_results_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("parse_results_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  SimResult r;
  r.config = config_from_json(j.at("config"));
  for (const auto& rj : j.at("rows")) {
    ResultRow row;
    row.snr_db = rj.at("snr_db").get<double>();
    PrecoderKind k;
    if (!parse_precoder_kind(rj.at("precoder").get<std::string>(), &k))
      throw IoError("unknown precoder kind in result file");
    row.precoder = k;
    row.mean_se = rj.at("mean_se_bps_hz").get<double>();
    row.stderr_se = rj.at("stderr_se").get<double>();
    row.trials = rj.at("trials").get<int>();
    row.failure_rate = rj.at("failure_rate").get<double>();
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace cia
