// cia-sim: Monte-Carlo driver for the secondary-link spectral-efficiency
// experiments (SNR sweeps over PDP models and precoder variants), plus a
// self-contained invariant checker on small instances.

#include <cstdint>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cia/metrics.hpp"
#include "cia/power.hpp"
#include "cia/precoders.hpp"
#include "cia/rng.hpp"
#include "cia/signal_model.hpp"
#include "cia/sim.hpp"

namespace {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

bool parse_snr_range(const std::string& s, cia::ExperimentConfig& ec) {
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) return false;
  try {
    ec.snr_start_db = std::stod(s.substr(0, c1));
    ec.snr_stop_db = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
    ec.snr_step_db = std::stod(s.substr(c2 + 1));
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

bool parse_pdp(const std::string& s, cia::PdpModel& pdp) {
  if (s == "uniform") {
    pdp.kind = cia::PdpModel::Kind::Uniform;
  } else if (s == "exp-fast") {
    pdp.kind = cia::PdpModel::Kind::Exponential;
    pdp.decay_ratio = 2.0;
  } else if (s == "exp-slow") {
    pdp.kind = cia::PdpModel::Kind::Exponential;
    pdp.decay_ratio = 0.75;
  } else {
    return false;
  }
  return true;
}

std::vector<Check> run_validation() {
  using namespace cia;
  std::vector<Check> checks;
  OfdmConfig cfg;
  cfg.n_subcarriers = 16;
  cfg.cp_len = 4;
  cfg.channel_order = 4;
  cfg.noise_variance = 0.1;

  const std::vector<PdpModel> pdps = {
      {PdpModel::Kind::Uniform, 1.0}, {PdpModel::Kind::Exponential, 0.75},
      {PdpModel::Kind::Exponential, 2.0}};

  // kernel dimension across PDP models
  {
    Check c{"kernel_dimension", true, ""};
    int bad = 0;
    for (std::size_t pi = 0; pi < pdps.size(); ++pi) {
      for (int t = 0; t < 1000; ++t) {
        const auto ch = generate_channel(cfg, pdps[pi], derive_seed(99, t, pi));
        const auto hr = reduced_channel(ch, cfg);
        Eigen::BDCSVD<MatrixXcd> svd(hr.matrix);
        const auto& sv = svd.singularValues();
        if (sv[cfg.n_subcarriers - 1] <= 1e-9 * sv[0]) ++bad;
      }
    }
    c.pass = bad == 0;
    c.detail = "rank-deficient realizations: " + std::to_string(bad) + "/3000";
    checks.push_back(c);
  }

  // CP transparency: B * A == I_N
  {
    Check c{"cp_transparency", true, ""};
    const MatrixXd ba = cp_removal_matrix(cfg) * cp_insertion_matrix(cfg);
    const double err = (ba - MatrixXd::Identity(cfg.n_subcarriers, cfg.n_subcarriers)).norm();
    c.pass = err == 0.0;
    c.detail = "||B*A - I|| = " + std::to_string(err);
    checks.push_back(c);
  }

  // alignment of all three precoder kinds
  {
    Check c{"alignment_leakage", true, ""};
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const auto h_sp = generate_channel(cfg, pdps[t % 3], derive_seed(7, t, 0));
      const auto hr_sp = reduced_channel(h_sp, cfg);
      const auto conv = conv_matrix(h_sp, cfg);
      const KernelBasis v = kernel_basis(hr_sp);
      std::vector<MatrixXcd> es;
      es.push_back(v.basis);
      es.push_back(nonunitary_baseline(v, derive_seed(7, t, 4)).matrix);
      try {
        es.push_back(vfdm_root_precoder(h_sp, cfg, hr_sp).matrix);
      } catch (const VfdmDegenerate&) {
      }
      for (const auto& e : es) {
        const auto leak = primary_leakage(conv, e, cfg);
        worst = std::max(worst, leak.second / conv.norm());
      }
    }
    c.pass = worst < 1e-10;
    c.detail = "worst post-DFT leakage / ||H_sp|| = " + std::to_string(worst);
    checks.push_back(c);
  }

  // water-filling KKT on random instances
  {
    Check c{"waterfill_kkt", true, ""};
    Rng rng(123);
    int bad = 0;
    for (int t = 0; t < 500; ++t) {
      const int n = 1 + static_cast<int>(rng.raw() % 8);
      VectorXd lam(n);
      for (int i = 0; i < n; ++i) lam[i] = -std::log(rng.uniform01());
      const double budget = 10.0 * rng.uniform01();
      const auto alloc = waterfill(lam, budget);
      if (std::abs(alloc.total() - budget) > 1e-9 * std::max(budget, 1.0) &&
          alloc.total() > budget) {
        ++bad;
        continue;
      }
      for (int i = 0; i < n; ++i) {
        if (alloc.powers[i] > 0 &&
            std::abs(alloc.water_level - 1.0 / lam[i] - alloc.powers[i]) > 1e-9)
          ++bad;
        if (alloc.powers[i] == 0 && alloc.water_level > 1.0 / lam[i] + 1e-9) ++bad;
      }
    }
    c.pass = bad == 0;
    c.detail = "KKT violations: " + std::to_string(bad);
    checks.push_back(c);
  }

  // per-trial determinism and worker-count independence
  {
    Check c{"determinism", true, ""};
    ExperimentConfig ec;
    ec.cfg = cfg;
    ec.pdp = pdps[1];
    ec.trials = 24;
    ec.snr_start_db = 0;
    ec.snr_stop_db = 10;
    ec.snr_step_db = 5;
    ec.master_seed = 5;
    ec.workers = 1;
    const auto a = serialize_results_csv(run_experiment(ec));
    ec.workers = 4;
    const auto b = serialize_results_csv(run_experiment(ec));
    c.pass = a == b;
    c.detail = c.pass ? "serial == 4 workers" : "worker count changed the result";
    checks.push_back(c);
  }

  // per-instance optimality of the rate-optimal precoder
  {
    Check c{"cia_dominance", true, ""};
    Rng rng(2024);
    int viol = 0;
    for (int t = 0; t < 50; ++t) {
      const auto h_sp = generate_channel(cfg, pdps[t % 3], derive_seed(11, t, 0));
      const auto h_ss = generate_channel(cfg, pdps[t % 3], derive_seed(11, t, 1));
      const auto hr_sp = reduced_channel(h_sp, cfg);
      const auto hr_ss = reduced_channel(h_ss, cfg);
      const KernelBasis v = kernel_basis(hr_sp);
      const MatrixXcd w =
          (1.0 / std::sqrt(cfg.noise_variance)) *
          MatrixXcd::Identity(cfg.n_subcarriers, cfg.n_subcarriers);
      const double se_cia =
          waterfilled_rate(hr_ss, v.basis, w, cfg.power_budget(), cfg.block_len()).se.value;
      const auto base = nonunitary_baseline(v, derive_seed(11, t, 4));
      const double se_nu =
          waterfilled_rate(hr_ss, base.matrix, w, cfg.power_budget(), cfg.block_len()).se.value;
      if (se_nu > se_cia + 1e-9) ++viol;
    }
    c.pass = viol == 0;
    c.detail = "dominance violations: " + std::to_string(viol);
    checks.push_back(c);
  }

  return checks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cognitive interference-alignment link simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an SNR sweep and write results");
  cia::ExperimentConfig ec;
  std::string pdp_name = "uniform";
  std::string precoder_list = "cia,vfdm,nonunitary";
  std::string snr_range = "0:30:5";
  std::string format_name = "csv";
  std::string out_path = "results.csv";
  bool with_primary = false;

  run->add_option("--n", ec.cfg.n_subcarriers, "subcarriers N")->capture_default_str();
  run->add_option("--cp", ec.cfg.cp_len, "cyclic prefix length L")->capture_default_str();
  run->add_option("--taps", ec.cfg.channel_order, "channel order l (l+1 taps)")
      ->capture_default_str();
  run->add_option("--pdp", pdp_name, "uniform | exp-fast | exp-slow")->capture_default_str();
  run->add_option("--precoders", precoder_list, "comma list of cia,vfdm,nonunitary")
      ->capture_default_str();
  run->add_option("--snr", snr_range, "start:stop:step in dB")->capture_default_str();
  run->add_option("--trials", ec.trials, "Monte-Carlo trials")->capture_default_str();
  run->add_option("--seed", ec.master_seed, "master seed")->capture_default_str();
  run->add_option("--with-primary-interference", with_primary,
                  "model the licensed downlink as interference at the secondary receiver")
      ->capture_default_str();
  run->add_option("--pp", ec.cfg.primary_power, "primary per-symbol power P_p")
      ->capture_default_str();
  run->add_option("--ps", ec.cfg.secondary_power, "secondary per-symbol power P_s")
      ->capture_default_str();
  run->add_option("--format", format_name, "csv | json")->capture_default_str();
  run->add_option("--out", out_path, "output path")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "run the invariant suite on small instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!parse_pdp(pdp_name, ec.pdp)) {
        std::cerr << "unknown pdp: " << pdp_name << "\n";
        return 2;
      }
      if (!parse_snr_range(snr_range, ec)) {
        std::cerr << "bad --snr range, expected start:stop:step\n";
        return 2;
      }
      ec.precoders.clear();
      std::stringstream ss(precoder_list);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        cia::PrecoderKind k;
        if (!cia::parse_precoder_kind(tok, &k)) {
          std::cerr << "unknown precoder: " << tok << "\n";
          return 2;
        }
        ec.precoders.push_back(k);
      }
      ec.include_primary_interference = with_primary;
      ec.output_path = out_path;
      cia::OutputFormat fmt;
      if (format_name == "csv") {
        fmt = cia::OutputFormat::Csv;
      } else if (format_name == "json") {
        fmt = cia::OutputFormat::Json;
      } else {
        std::cerr << "unknown format: " << format_name << "\n";
        return 2;
      }
      const auto result = cia::run_experiment(ec);
      cia::emit_results(result, fmt, out_path);
      std::cerr << "wrote " << result.rows.size() << " rows to " << out_path << "\n";
      return 0;
    }

    if (validate->parsed()) {
      const auto checks = run_validation();
      nlohmann::json report;
      bool all = true;
      report["checks"] = nlohmann::json::array();
      for (const auto& c : checks) {
        all = all && c.pass;
        report["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
      }
      report["status"] = all ? "ok" : "fail";
      std::cout << report.dump(2) << "\n";
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    nlohmann::json err{{"status", "error"}, {"what", e.what()}};
    std::cerr << err.dump() << "\n";
    return 3;
  }
  return 0;
}
