#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pslab/common.hpp"

namespace pslab {

enum class Scenario {
  sps_mse,
  bps_mse,
  lambda_max_scan,
  mi_vs_lambda,
  mi_vs_snr,
  mi_vs_window,
  validate_awgn,
};

std::string to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);

/// Scenario names with one-line descriptions, for `list-scenarios`.
std::vector<std::pair<std::string, std::string>> scenario_catalog();

struct ConstellationSpec {
  std::string family = "square";  // square | cross32
  int order = 64;                 // 16/64/256 for square; fixed 32 for cross32
};

/// Sweep description. Empty axes fall back to scenario defaults; see
/// `effective()` for the resolved values.
struct ExperimentConfig {
  Scenario scenario = Scenario::sps_mse;
  ConstellationSpec modulation;

  bool lambda_optimum = false;      // use the per-SNR capacity-maximizing lambda
  std::vector<double> lambda;       // explicit lambda axis
  std::vector<double> snr_db;       // required
  std::vector<int> window_n;
  std::vector<double> linewidth_hz;

  std::size_t symbol_count = 0;     // 0 -> 2^19 (MSE) or 2^17 (MI) symbols
  int test_phases = 0;              // 0 -> 900 (MSE) or 60 (MI)
  double symbol_rate_baud = 50e9;
  double constant_phase = kPi / 6.0;      // rotation for the MSE scenarios
  std::optional<double> sector_offset;    // default pi/4 (MSE) / 0 (MI)

  std::uint64_t seed = 1;
  int threads = 1;
  bool fast = false;                // divide symbol_count by 16 (CI mode)
};

/// One swept grid point. `value` is an MSE in rad^2 or an MI in bits/symbol
/// depending on the scenario; `ref_a`/`ref_b` carry the analytic references
/// (single-symbol and large-window MSE, or quadrature MI and lambda_opt).
struct MetricRow {
  double lambda = 0.0;
  double snr_db = 0.0;
  int window_n = 0;
  double linewidth_hz = 0.0;
  int test_phases = 0;
  double value = 0.0;
  double std_error = 0.0;
  double ref_a = 0.0;
  double ref_b = 0.0;
};

struct Provenance {
  std::string version;
  std::uint64_t master_seed = 0;
  std::uint64_t config_hash = 0;
  std::string scenario;
  std::string modulation;
  std::size_t symbol_count = 0;
};

struct ExperimentResult {
  Scenario scenario = Scenario::sps_mse;
  std::string modulation;
  std::vector<std::string> columns;
  std::vector<MetricRow> rows;
  Provenance provenance;
};

/// Run a full sweep: constellation -> channel -> recovery -> metric for every
/// grid point. Deterministic for a fixed (config, seed) across runs and
/// thread counts.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Header row plus one data row per grid point; identical configs produce
/// byte-identical files.
void emit_csv(const ExperimentResult& result, std::ostream& os);
void emit_csv(const ExperimentResult& result, const std::filesystem::path& path);

/// Deterministic provenance sidecar (JSON-formatted text).
std::string provenance_json(const ExperimentResult& result);

}  // namespace pslab
