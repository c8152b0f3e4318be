#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <risd2d/risd2d.hpp>

#include "config.hpp"

namespace risd2d::runner {

/// Construction parameters for one deployment. Powers in dBm unless noted.
struct ScenarioConfig {
  int pairs = 6;
  int n_h = 8;
  int n_v = 4;
  double wavelength = 0.125;    // 2.4 GHz carrier
  double spacing = 0.25;        // element spacing in wavelengths
  Vec3 ris_position = Vec3(30.0, 0.0, 8.0);
  Vec3 area_min = Vec3(0.0, 0.0, 1.6);
  Vec3 area_max = Vec3(60.0, 25.0, 1.6);
  std::uint64_t placement_seed = 1;
  std::uint64_t angle_seed = 2;
  std::vector<Vec3> tx;  // explicit placement; empty means uniform in the area
  std::vector<Vec3> rx;

  double rician_db = 10.0;
  double direct_rician_db = 10.0;
  double exponent_direct = 3.8;
  double exponent_reflect = 2.2;
  double rx_noise_dbm = -80.0;
  bool direct_links = true;

  double total_power_dbm = 30.0;
  double split = 0.5;                  // share of the post-circuit budget for transmitters
  std::optional<double> p_max_w;       // defaults to the transmit budget

  int bits = 3;
  double kappa_pn = 4.0;
  double noise_floor_dbm = -70.0;
  double p_dc_dbm = -5.0;
  double p_sw_dbm = -10.0;
  double amp_eff = 0.8;
};

/// Materialized scenario: statistics plus the RIS hardware (theta empty).
struct Scenario {
  StatisticalCsi csi;
  RisState ris;
  double total_power_w = 0.0;
};

Scenario build_scenario(const ScenarioConfig& config);

enum class Strategy { random_phase, pso, pcpso, no_phase_noise };

/// One curve: RIS mode x phase/power strategy, with an optional phase-noise
/// override written as `mode/strategy@kappa_pn`.
struct ModeSpec {
  RisMode mode = RisMode::active;
  Strategy strategy = Strategy::pcpso;
  std::optional<double> kappa_pn;

  std::string label() const;
  static ModeSpec parse(const std::string& text);
};

enum class SweepVariable { total_power_dbm, rician_db, n_elements, kappa_pn };

std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& text);

struct ExperimentSpec {
  std::string name = "default";
  SweepVariable sweep = SweepVariable::total_power_dbm;
  std::vector<double> values{30.0};
  std::vector<ModeSpec> modes;
  ScenarioConfig scenario;
  std::uint64_t trials = 20000;  // 0 skips the Monte-Carlo column
  GaParams ga;
  int ga_restarts = 1;           // independent GA runs per cell; the best one is kept
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool timing = false;           // add elapsed_ms to the CSV (breaks byte-reproducibility)
  std::string output_path;
  bool write_metadata = true;
  std::vector<std::string> notes;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

struct ResultRow {
  double sweep_value = 0.0;
  std::string mode;
  double sum_rate_closed_form = 0.0;
  double sum_rate_mc = 0.0;          // NaN when not simulated
  double mc_std_err = 0.0;           // NaN when not simulated
  double sum_rate_asymptotic = 0.0;  // Rician-limit closed form; NaN without an RIS
  std::vector<double> per_user;
  double elapsed_ms = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ResultRow&) const = default;
};

/// All builtin values at their defaults: K = 6, N = 32 (8 x 4), P = 30 dBm,
/// B = 3, kappa_pn = 4, sigma_F^2 = -70 dBm, sigma^2 = -80 dBm,
/// P_DC = -5 dBm, P_SW = -10 dBm, efficiency 0.8, Rician factors 10 dB.
ExperimentSpec default_scenario();

std::vector<std::string> builtin_names();
/// Throws ConfigError for unknown names.
ExperimentSpec builtin_spec(const std::string& name);

/// Applies dotted-key settings on top of `spec`.
void apply_config(ExperimentSpec& spec, const KeyValues& kv);

/// Resolves `source` as a builtin name or a config file path. A config file
/// may name a builtin base with `base = fig2`.
ExperimentSpec load_spec(const std::string& source);

/// Every key understood by apply_config, with its resolved value.
KeyValues resolved_config(const ExperimentSpec& spec);

/// Factorization used when sweeping N: n_h is the smallest divisor >= sqrt(N).
std::pair<int, int> grid_for_elements(int elements);

/// Scenario with the sweep variable set to `value`.
ScenarioConfig scenario_at(const ExperimentSpec& spec, double value);

/// Runs every (sweep value x mode) combination. Rows are ordered by sweep value
/// then by mode order. If `stop` becomes true, points not yet started are
/// skipped and only completed points are returned.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      const std::atomic<bool>* stop = nullptr);

/// Evaluates a single curve at a prepared scenario.
ResultRow evaluate_mode(const ExperimentSpec& spec, const Scenario& scenario,
                        const ModeSpec& mode, double sweep_value, std::uint64_t seed);

/// Derives the seed of one (point, mode) cell from the run seed.
std::uint64_t cell_seed(std::uint64_t run_seed, std::size_t point, std::size_t mode);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows,
               SweepVariable sweep, bool timing);
void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows,
                    SweepVariable sweep, bool timing);
std::vector<ResultRow> read_csv(std::istream& in);

/// JSON companion with the resolved configuration and notes.
void write_metadata_file(const std::string& path, const ExperimentSpec& spec,
                         std::size_t rows_written, bool complete);

}  // namespace risd2d::runner
