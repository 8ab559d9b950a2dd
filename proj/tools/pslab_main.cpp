#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pslab/analysis.hpp"
#include "pslab/constellation.hpp"
#include "pslab/harness.hpp"
#include "pslab/version.hpp"

namespace {

using nlohmann::json;

struct LoadedConfig {
  pslab::ExperimentConfig cfg;
  std::string output;
};

LoadedConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j = json::parse(in);

  pslab::ExperimentConfig cfg;
  cfg.scenario = pslab::scenario_from_string(j.at("scenario").get<std::string>());

  if (j.contains("modulation")) {
    const json& m = j.at("modulation");
    cfg.modulation.family = m.value("family", std::string("square"));
    cfg.modulation.order = m.value("order", cfg.modulation.family == "cross32" ? 32 : 64);
  }

  if (j.contains("lambda")) {
    const json& l = j.at("lambda");
    if (l.is_string()) {
      const std::string s = l.get<std::string>();
      if (s != "optimum" && s != "opt")
        throw std::runtime_error("config: lambda must be an array or \"optimum\"");
      cfg.lambda_optimum = true;
    } else {
      cfg.lambda = l.get<std::vector<double>>();
    }
  }
  if (j.contains("snr_db")) cfg.snr_db = j.at("snr_db").get<std::vector<double>>();
  if (j.contains("window_n")) cfg.window_n = j.at("window_n").get<std::vector<int>>();
  if (j.contains("linewidth_hz"))
    cfg.linewidth_hz = j.at("linewidth_hz").get<std::vector<double>>();

  cfg.symbol_count = j.value("symbol_count", std::uint64_t{0});
  cfg.test_phases = j.value("test_phases", 0);
  cfg.symbol_rate_baud = j.value("symbol_rate_baud", 50e9);
  cfg.constant_phase = j.value("constant_phase", pslab::kPi / 6.0);
  if (j.contains("sector_offset")) cfg.sector_offset = j.at("sector_offset").get<double>();
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.threads = j.value("threads", 0);

  return {cfg, j.value("output", std::string{})};
}

int cmd_run(const std::string& config_path, bool fast, const std::string& out_flag,
            std::optional<std::uint64_t> seed_flag, std::optional<int> threads_flag) {
  auto [cfg, config_output] = parse_config(config_path);
  cfg.fast = cfg.fast || fast;

  // Seed precedence: --seed, then PSLAB_SEED, then the config file.
  if (seed_flag) {
    cfg.seed = *seed_flag;
  } else if (const char* env = std::getenv("PSLAB_SEED")) {
    cfg.seed = std::strtoull(env, nullptr, 10);
  }
  if (threads_flag) cfg.threads = *threads_flag;

  std::string out = out_flag.empty() ? config_output : out_flag;
  if (out.empty()) out = pslab::to_string(cfg.scenario) + ".csv";

  const pslab::ExperimentResult result = pslab::run_experiment(cfg);
  pslab::emit_csv(result, std::filesystem::path(out));

  std::ofstream meta(out + ".meta.json");
  meta << pslab::provenance_json(result);

  std::cout << pslab::to_string(cfg.scenario) << ": " << result.rows.size() << " grid points -> "
            << out << " (seed " << cfg.seed << ", " << result.provenance.symbol_count
            << " symbols/point)\n";
  return 0;
}

int cmd_list_scenarios() {
  for (const auto& [name, description] : pslab::scenario_catalog())
    std::cout << name << "\n    " << description << "\n";
  return 0;
}

int cmd_analytic_tables(const std::string& kind, const std::string& family, int order,
                        double snr_db, std::vector<double> snr_list, double large_n,
                        double lambda_hi, double lambda_step, const std::string& out) {
  pslab::Constellation base = family == "cross32" ? pslab::Constellation::cross_qam_32()
                                                  : pslab::Constellation::square_qam(order);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw std::runtime_error("cannot open '" + out + "' for writing");
    os = &file;
  }

  if (kind == "mse") {
    std::vector<double> lambdas;
    for (double l = 0.0; l <= lambda_hi + 0.5 * lambda_step; l += lambda_step)
      lambdas.push_back(l);
    pslab::emit_analytic_mse_table(base, pslab::db_to_linear(snr_db), large_n, lambdas, *os);
  } else {
    if (snr_list.empty()) snr_list = {snr_db};
    pslab::emit_capacity_table(base, snr_list, *os);
  }
  return 0;
}

int cmd_dump_constellation(const std::string& family, int order, double lambda,
                           const std::string& out) {
  pslab::Constellation base = family == "cross32" ? pslab::Constellation::cross_qam_32()
                                                  : pslab::Constellation::square_qam(order);
  const pslab::Constellation shaped = base.shaped(lambda);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw std::runtime_error("cannot open '" + out + "' for writing");
    os = &file;
  }
  *os << "re,im,prior\n";
  char line[96];
  for (int m = 0; m < shaped.order(); ++m) {
    std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g\n", shaped.points()[m].real(),
                  shaped.points()[m].imag(), shaped.priors()[m]);
    *os << line;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pslab: probabilistically shaped QAM phase-recovery simulations"};
  app.set_version_flag("--version", pslab::kVersion);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a sweep described by a JSON config file");
  std::string config_path;
  run->add_option("config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  bool fast = false;
  run->add_flag("--fast", fast, "divide symbol counts by 16 (CI mode; ~4x wider stderr)");
  std::string out;
  run->add_option("--out", out, "output CSV path (default: config 'output' or <scenario>.csv)");
  std::optional<std::uint64_t> seed;
  run->add_option("--seed", seed, "master seed (overrides PSLAB_SEED and the config)");
  std::optional<int> threads;
  run->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* list = app.add_subcommand("list-scenarios", "List scenarios and what they sweep");

  auto* dump = app.add_subcommand("dump-constellation", "Emit point/prior table as CSV");
  std::string family = "square";
  dump->add_option("--family", family, "square or cross32")
      ->check(CLI::IsMember({"square", "cross32"}));
  int order = 64;
  dump->add_option("--order", order, "constellation order (square: 16/64/256)");
  double lambda = 0.0;
  dump->add_option("--lambda", lambda, "shaping parameter (>= 0)");
  std::string dump_out;
  dump->add_option("--out", dump_out, "output path (default: stdout)");

  auto* tables = app.add_subcommand("analytic-tables", "Emit closed-form tables as CSV");
  std::string kind = "mse";
  tables->add_option("kind", kind, "mse (lambda sweep) or capacity (SNR sweep)")
      ->check(CLI::IsMember({"mse", "capacity"}));
  std::string t_family = "square";
  tables->add_option("--family", t_family, "square or cross32")
      ->check(CLI::IsMember({"square", "cross32"}));
  int t_order = 64;
  tables->add_option("--order", t_order, "constellation order (square: 16/64/256)");
  double t_snr = 20.0;
  tables->add_option("--snr-db", t_snr, "SNR for the mse table");
  std::vector<double> t_snr_list;
  tables->add_option("--snr-list", t_snr_list, "SNR grid for the capacity table");
  double t_large_n = 100.0;
  tables->add_option("--window-n", t_large_n, "window for the large-N column");
  double t_lambda_hi = 0.1, t_lambda_step = 0.005;
  tables->add_option("--lambda-max", t_lambda_hi, "top of the lambda grid");
  tables->add_option("--lambda-step", t_lambda_step, "lambda grid step");
  std::string t_out;
  tables->add_option("--out", t_out, "output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, fast, out, seed, threads);
    if (*list) return cmd_list_scenarios();
    if (*dump) return cmd_dump_constellation(family, order, lambda, dump_out);
    if (*tables)
      return cmd_analytic_tables(kind, t_family, t_order, t_snr, t_snr_list, t_large_n,
                                 t_lambda_hi, t_lambda_step, t_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
