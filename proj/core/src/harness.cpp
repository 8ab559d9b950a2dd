#include "pslab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pslab/analysis.hpp"
#include "pslab/channel.hpp"
#include "pslab/parallel.hpp"
#include "pslab/phase_recovery.hpp"
#include "pslab/rng.hpp"
#include "pslab/version.hpp"

namespace pslab {
namespace {

constexpr std::size_t kDefaultMseSymbols = std::size_t{1} << 19;
constexpr std::size_t kDefaultMiSymbols = std::size_t{1} << 17;
constexpr int kDefaultMseTestPhases = 900;
constexpr int kDefaultMiTestPhases = 60;
constexpr double kDefaultLinewidthHz = 200e3;

bool uses_wiener(Scenario s) {
  return s == Scenario::mi_vs_lambda || s == Scenario::mi_vs_snr || s == Scenario::mi_vs_window;
}

bool is_mi_scenario(Scenario s) { return uses_wiener(s) || s == Scenario::validate_awgn; }

Constellation build_constellation(const ConstellationSpec& spec) {
  if (spec.family == "square") return Constellation::square_qam(spec.order);
  if (spec.family == "cross32") return Constellation::cross_qam_32();
  throw std::invalid_argument("unknown constellation family '" + spec.family +
                              "' (expected square or cross32)");
}

std::string modulation_label(const ConstellationSpec& spec) {
  if (spec.family == "cross32") return "qam32cross";
  return "qam" + std::to_string(spec.order);
}

std::vector<double> default_lambda_grid(const ConstellationSpec& spec) {
  const bool dense = spec.family == "square" && spec.order == 256;
  const double step = dense ? 0.0025 : 0.005;
  const double hi = dense ? 0.03 : 0.1;
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = i * step;
    if (v > hi + 0.5 * step) break;
    grid.push_back(v);
  }
  return grid;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct GridPoint {
  double lambda = 0.0;
  double snr_db = 0.0;
  int window = 0;
  double linewidth_hz = 0.0;
};

}  // namespace

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::sps_mse: return "sps-mse";
    case Scenario::bps_mse: return "bps-mse";
    case Scenario::lambda_max_scan: return "lambda-max-scan";
    case Scenario::mi_vs_lambda: return "mi-vs-lambda";
    case Scenario::mi_vs_snr: return "mi-vs-snr";
    case Scenario::mi_vs_window: return "mi-vs-window";
    case Scenario::validate_awgn: return "validate-awgn";
  }
  throw std::logic_error("unknown scenario");
}

Scenario scenario_from_string(const std::string& name) {
  for (auto s : {Scenario::sps_mse, Scenario::bps_mse, Scenario::lambda_max_scan,
                 Scenario::mi_vs_lambda, Scenario::mi_vs_snr, Scenario::mi_vs_window,
                 Scenario::validate_awgn})
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown scenario '" + name +
                              "' (see `pslab list-scenarios` for the catalog)");
}

std::vector<std::pair<std::string, std::string>> scenario_catalog() {
  return {
      {"sps-mse",
       "Supervised phase-search MSE over block windows under a constant rotation; "
       "columns carry the single-symbol and large-window analytic references."},
      {"bps-mse",
       "Blind phase-search MSE over block windows under a constant rotation."},
      {"lambda-max-scan",
       "Per-SNR argmax-lambda of the blind phase-search MSE (block windows), reported "
       "next to the capacity-optimal lambda."},
      {"mi-vs-lambda",
       "Mutual information after sliding-window blind recovery and supervised cycle-slip "
       "removal, swept over the shaping parameter (Wiener phase noise)."},
      {"mi-vs-snr",
       "Mutual information versus SNR at fixed or capacity-optimal shaping "
       "(Wiener phase noise, sliding windows)."},
      {"mi-vs-window",
       "Mutual information versus noise-rejection window length "
       "(Wiener phase noise, sliding windows)."},
      {"validate-awgn",
       "Sampled-MI estimator against the quadrature MI on the bare AWGN channel "
       "(no phase noise, no recovery)."},
  };
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Scenario sc = config.scenario;
  const bool mi = is_mi_scenario(sc);
  const bool wiener = uses_wiener(sc);

  if (config.snr_db.empty())
    throw std::invalid_argument("run_experiment: snr_db axis must not be empty");
  if (config.threads < 0) throw std::invalid_argument("run_experiment: threads must be >= 0");

  const Constellation base = build_constellation(config.modulation);

  std::size_t count = config.symbol_count ? config.symbol_count
                                          : (mi ? kDefaultMiSymbols : kDefaultMseSymbols);
  if (config.fast) count = std::max<std::size_t>(1024, count / 16);
  const int test_phases =
      config.test_phases ? config.test_phases : (mi ? kDefaultMiTestPhases : kDefaultMseTestPhases);
  const double sector_offset = config.sector_offset.value_or(mi ? 0.0 : kPi / 4.0);

  std::vector<int> windows = config.window_n;
  if (sc == Scenario::validate_awgn) {
    windows = {0};
  } else if (windows.empty()) {
    if (sc == Scenario::lambda_max_scan)
      windows = {10};
    else
      throw std::invalid_argument("run_experiment: window_n axis must not be empty for " +
                                  to_string(sc));
  }
  for (int n : windows) {
    if (sc != Scenario::validate_awgn && n < 1)
      throw std::invalid_argument("run_experiment: window_n entries must be >= 1");
    if (!mi && static_cast<std::size_t>(n) > count)
      throw std::invalid_argument("run_experiment: block window exceeds symbol_count");
  }

  std::vector<double> linewidths = wiener ? config.linewidth_hz : std::vector<double>{0.0};
  if (wiener && linewidths.empty()) linewidths = {kDefaultLinewidthHz};

  std::vector<double> lambdas = config.lambda;
  if (!config.lambda_optimum && lambdas.empty()) lambdas = default_lambda_grid(config.modulation);
  for (double l : lambdas)
    if (l < 0.0) throw std::invalid_argument("run_experiment: lambda must be >= 0");

  // Capacity-optimal lambda per unique SNR, when the axis or a report column
  // needs it.
  std::map<double, double> lambda_opt_by_snr;
  if (config.lambda_optimum || sc == Scenario::lambda_max_scan) {
    std::vector<double> unique_snrs(config.snr_db.begin(), config.snr_db.end());
    std::sort(unique_snrs.begin(), unique_snrs.end());
    unique_snrs.erase(std::unique(unique_snrs.begin(), unique_snrs.end()), unique_snrs.end());
    std::vector<double> opts(unique_snrs.size());
    parallel_for(unique_snrs.size(), config.threads, [&](std::size_t i) {
      opts[i] = solve_lambda_optimum(base, db_to_linear(unique_snrs[i]));
    });
    for (std::size_t i = 0; i < unique_snrs.size(); ++i)
      lambda_opt_by_snr[unique_snrs[i]] = opts[i];
  }

  std::vector<GridPoint> grid;
  for (double snr : config.snr_db) {
    const std::vector<double> point_lambdas =
        config.lambda_optimum ? std::vector<double>{lambda_opt_by_snr.at(snr)} : lambdas;
    for (double lambda : point_lambdas)
      for (int n : windows)
        for (double lw : linewidths) grid.push_back({lambda, snr, n, lw});
  }
  if (grid.empty()) throw std::invalid_argument("run_experiment: empty sweep grid");

  const int outer_threads = grid.size() == 1 ? 1 : config.threads;
  const int inner_threads = grid.size() == 1 ? config.threads : 1;

  // Quadrature MI reference, memoized across grid points that share
  // (lambda, snr). Duplicated computation on a race is harmless; the value is
  // deterministic.
  std::map<std::pair<double, double>, double> mi_ref_cache;
  std::mutex mi_ref_mutex;
  auto mi_ref_for = [&](double lambda, double snr_linear) {
    const std::pair<double, double> key{lambda, snr_linear};
    {
      std::lock_guard lock(mi_ref_mutex);
      const auto it = mi_ref_cache.find(key);
      if (it != mi_ref_cache.end()) return it->second;
    }
    const double value = mi_awgn(base.shaped(lambda), snr_linear);
    std::lock_guard lock(mi_ref_mutex);
    mi_ref_cache.emplace(key, value);
    return value;
  };

  const Rng master(config.seed);
  std::vector<MetricRow> rows(grid.size());
  parallel_for(grid.size(), outer_threads, [&](std::size_t gi) {
    const GridPoint& pt = grid[gi];
    const Rng point_rng = master.stream(gi);
    const Constellation cons = base.shaped(pt.lambda);
    const double snr_linear = db_to_linear(pt.snr_db);

    const auto symbols = cons.sample(count, point_rng.stream(0));
    PhaseTrajectory trajectory;
    if (sc == Scenario::validate_awgn)
      trajectory = constant_trajectory(0.0, count);
    else if (wiener)
      trajectory = wiener_trajectory(count, pt.linewidth_hz, config.symbol_rate_baud,
                                     point_rng.stream(1));
    else
      trajectory = constant_trajectory(config.constant_phase, count);
    const auto received =
        transmit(symbols, trajectory, cons, ChannelParams{pt.snr_db}, point_rng.stream(2));

    MetricRow row;
    row.lambda = pt.lambda;
    row.snr_db = pt.snr_db;
    row.window_n = pt.window;
    row.linewidth_hz = pt.linewidth_hz;
    row.test_phases = sc == Scenario::validate_awgn ? 0 : test_phases;

    if (sc == Scenario::validate_awgn) {
      const MiEstimate est = estimate_mi_from_samples(symbols, received, cons);
      row.value = est.bits;
      row.std_error = est.std_error;
      row.ref_a = mi_ref_for(pt.lambda, snr_linear);
    } else if (mi) {
      RecoveryConfig rc;
      rc.mode = Mode::bps;
      rc.window = pt.window;
      rc.test_phases = test_phases;
      rc.windowing = Windowing::sliding_centered;
      rc.unwrap = Unwrap::supervised_cycle_slip;
      rc.sector_offset = sector_offset;
      rc.threads = inner_threads;
      const RecoveryResult rec = run_recovery(received, symbols, cons, rc);
      const auto unslipped = supervised_cycle_slip_correct(rec.corrected, symbols);
      const MiEstimate est = estimate_mi_from_samples(symbols, unslipped, cons);
      row.value = est.bits;
      row.std_error = est.std_error;
      row.ref_a = mi_ref_for(pt.lambda, snr_linear);
    } else {
      RecoveryConfig rc;
      rc.mode = sc == Scenario::sps_mse ? Mode::sps : Mode::bps;
      rc.window = pt.window;
      rc.test_phases = test_phases;
      rc.windowing = Windowing::block;
      rc.unwrap = Unwrap::none;
      rc.sector_offset = sector_offset;
      rc.threads = inner_threads;
      const RecoveryResult rec = run_recovery(received, symbols, cons, rc);
      const MseEstimate est = estimate_mse(rec.estimates, config.constant_phase);
      row.value = est.mse;
      row.std_error = est.std_error;
      row.ref_a = mse_sps_n1(cons, snr_linear);
      row.ref_b = mse_sps_large_n(pt.window, snr_linear);
    }
    rows[gi] = row;
  });

  ExperimentResult result;
  result.scenario = sc;
  result.modulation = modulation_label(config.modulation);

  if (sc == Scenario::lambda_max_scan) {
    // Reduce each SNR's lambda sweep to the argmax row.
    std::size_t gi = 0;
    for (double snr : config.snr_db) {
      const std::size_t lambdas_here =
          config.lambda_optimum ? 1 : lambdas.size();
      const std::size_t span = lambdas_here * windows.size() * linewidths.size();
      std::size_t best = gi;
      for (std::size_t k = gi; k < gi + span; ++k)
        if (rows[k].value > rows[best].value) best = k;
      MetricRow row = rows[best];
      row.ref_a = lambda_opt_by_snr.at(snr);
      result.rows.push_back(row);
      gi += span;
    }
    result.columns = {"scenario", "modulation", "snr_db",  "window_n",  "test_phases",
                      "lambda_max_sim", "mse_max", "stderr", "lambda_opt"};
  } else if (mi) {
    result.rows = std::move(rows);
    result.columns = {"scenario", "modulation", "lambda", "snr_db",      "window_n",
                      "linewidth_hz", "mi_bits", "stderr", "mi_awgn_ref"};
  } else {
    result.rows = std::move(rows);
    result.columns = {"scenario", "modulation", "lambda",       "snr_db",      "window_n",
                      "test_phases", "mse",     "stderr", "analytic_eq8", "analytic_eq12"};
  }

  // Provenance over the resolved configuration; byte-stable across runs.
  std::ostringstream canon;
  canon << to_string(sc) << '|' << result.modulation << '|' << count << '|' << test_phases << '|'
        << fmt_num(sector_offset) << '|' << fmt_num(config.symbol_rate_baud) << '|'
        << fmt_num(config.constant_phase) << '|' << config.lambda_optimum << "|l:";
  for (double l : lambdas) canon << fmt_num(l) << ',';
  canon << "|s:";
  for (double s : config.snr_db) canon << fmt_num(s) << ',';
  canon << "|n:";
  for (int n : windows) canon << n << ',';
  canon << "|w:";
  for (double w : linewidths) canon << fmt_num(w) << ',';

  result.provenance.version = kVersion;
  result.provenance.master_seed = config.seed;
  result.provenance.config_hash = fnv1a(canon.str());
  result.provenance.scenario = to_string(sc);
  result.provenance.modulation = result.modulation;
  result.provenance.symbol_count = count;
  return result;
}

void emit_csv(const ExperimentResult& result, std::ostream& os) {
  if (result.rows.empty()) throw std::invalid_argument("emit_csv: empty result");

  for (std::size_t i = 0; i < result.columns.size(); ++i)
    os << (i ? "," : "") << result.columns[i];
  os << '\n';

  const std::string scenario = to_string(result.scenario);
  for (const MetricRow& row : result.rows) {
    os << scenario << ',' << result.modulation << ',';
    if (result.scenario == Scenario::lambda_max_scan) {
      os << fmt_num(row.snr_db) << ',' << row.window_n << ',' << row.test_phases << ','
         << fmt_num(row.lambda) << ',' << fmt_num(row.value) << ',' << fmt_num(row.std_error)
         << ',' << fmt_num(row.ref_a);
    } else if (is_mi_scenario(result.scenario)) {
      os << fmt_num(row.lambda) << ',' << fmt_num(row.snr_db) << ',' << row.window_n << ','
         << fmt_num(row.linewidth_hz) << ',' << fmt_num(row.value) << ','
         << fmt_num(row.std_error) << ',' << fmt_num(row.ref_a);
    } else {
      os << fmt_num(row.lambda) << ',' << fmt_num(row.snr_db) << ',' << row.window_n << ','
         << row.test_phases << ',' << fmt_num(row.value) << ',' << fmt_num(row.std_error) << ','
         << fmt_num(row.ref_a) << ',' << fmt_num(row.ref_b);
    }
    os << '\n';
  }
}

void emit_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path.string() + "' for writing");
  emit_csv(result, out);
  out.flush();
  if (!out) throw std::runtime_error("emit_csv: write to '" + path.string() + "' failed");
}

std::string provenance_json(const ExperimentResult& result) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(result.provenance.config_hash));
  std::ostringstream os;
  os << "{\n"
     << "  \"version\": \"" << result.provenance.version << "\",\n"
     << "  \"scenario\": \"" << result.provenance.scenario << "\",\n"
     << "  \"modulation\": \"" << result.provenance.modulation << "\",\n"
     << "  \"master_seed\": " << result.provenance.master_seed << ",\n"
     << "  \"config_hash\": \"" << hash << "\",\n"
     << "  \"symbol_count\": " << result.provenance.symbol_count << ",\n"
     << "  \"rows\": " << result.rows.size() << "\n"
     << "}\n";
  return os.str();
}

}  // namespace pslab
