#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace risd2d::runner {

namespace {

constexpr std::uint64_t kRandomPhaseStream = 0x5048415345ull;  // "PHASE"
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string format_g(double v, int digits) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string format_exact(double v) { return format_g(v, 17); }

std::string format_vec3(const Vec3& v) {
  return format_exact(v.x()) + ", " + format_exact(v.y()) + ", " + format_exact(v.z());
}

Vec3 parse_vec3(const std::string& key, const std::string& value) {
  const auto xs = parse_double_list(key, value);
  if (xs.size() != 3) throw ConfigError(key, "expected 'x, y, z', got '" + value + "'");
  return Vec3(xs[0], xs[1], xs[2]);
}

std::vector<Vec3> parse_points(const std::string& key, const std::string& value) {
  std::vector<Vec3> out;
  std::size_t start = 0;
  while (start < value.size()) {
    auto semi = value.find(';', start);
    if (semi == std::string::npos) semi = value.size();
    const std::string piece = trim(std::string_view(value).substr(start, semi - start));
    if (!piece.empty()) out.push_back(parse_vec3(key, piece));
    start = semi + 1;
  }
  return out;
}

std::string format_points(const std::vector<Vec3>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += "; ";
    out += format_vec3(pts[i]);
  }
  return out;
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  const long long v = parse_int(key, value);
  if (v < 0) throw ConfigError(key, "seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

int parse_positive_int(const std::string& key, const std::string& value) {
  const long long v = parse_int(key, value);
  if (v < 1 || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "expected a positive integer, got '" + value + "'");
  }
  return static_cast<int>(v);
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::random_phase: return "random_phase";
    case Strategy::pso: return "pso";
    case Strategy::pcpso: return "pcpso";
    case Strategy::no_phase_noise: return "no_phase_noise";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& text) {
  if (text == "random_phase" || text == "random") return Strategy::random_phase;
  if (text == "pso") return Strategy::pso;
  if (text == "pcpso") return Strategy::pcpso;
  if (text == "no_phase_noise") return Strategy::no_phase_noise;
  throw std::invalid_argument("unknown strategy '" + text + "'");
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& c) {
  SystemGeometry g;
  g.n_h = c.n_h;
  g.n_v = c.n_v;
  g.wavelength = c.wavelength;
  g.d_h = c.spacing * c.wavelength;
  g.d_v = c.spacing * c.wavelength;
  g.ris_position = c.ris_position;
  if (!c.tx.empty() || !c.rx.empty()) {
    if (static_cast<int>(c.tx.size()) != c.pairs || static_cast<int>(c.rx.size()) != c.pairs) {
      throw ConfigError("scenario.tx", "explicit placement must list exactly scenario.pairs "
                                       "transmitters and receivers");
    }
    g.tx_positions = c.tx;
    g.rx_positions = c.rx;
  } else {
    place_pairs_uniform(g, c.pairs, c.area_min, c.area_max, c.placement_seed);
  }

  CsiOptions opt;
  opt.rician.reflect_db = c.rician_db;
  opt.rician.direct_db = c.direct_rician_db;
  opt.exponents.direct = c.exponent_direct;
  opt.exponents.reflect = c.exponent_reflect;
  opt.angles.seed = c.angle_seed;
  opt.rx_noise_w = dbm_to_watt(c.rx_noise_dbm);
  opt.direct_links = c.direct_links;

  Scenario s;
  s.csi = build_statistical_csi(g, opt);
  s.ris.bits = c.bits;
  s.ris.kappa_pn = c.kappa_pn;
  s.ris.noise_floor = dbm_to_watt(c.noise_floor_dbm);
  s.ris.p_dc = dbm_to_watt(c.p_dc_dbm);
  s.ris.p_sw = dbm_to_watt(c.p_sw_dbm);
  s.ris.amp_eff = c.amp_eff;
  s.total_power_w = dbm_to_watt(c.total_power_dbm);
  return s;
}

std::string ModeSpec::label() const {
  std::string out = std::string(risd2d::to_string(mode)) + "/" +
                    std::string(strategy_name(strategy));
  if (kappa_pn) out += "@" + format_g(*kappa_pn, 9);
  return out;
}

ModeSpec ModeSpec::parse(const std::string& text) {
  ModeSpec m;
  std::string body = trim(text);
  const auto at = body.find('@');
  if (at != std::string::npos) {
    m.kappa_pn = parse_double("modes", body.substr(at + 1));
    if (*m.kappa_pn < 0.0) throw ConfigError("modes", "kappa override must be >= 0");
    body.resize(at);
  }
  const auto slash = body.find('/');
  try {
    m.mode = parse_ris_mode(trim(body.substr(0, slash)));
    if (slash != std::string::npos) m.strategy = parse_strategy(trim(body.substr(slash + 1)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("modes", e.what());
  }
  return m;
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::total_power_dbm: return "total_power_dbm";
    case SweepVariable::rician_db: return "rician_db";
    case SweepVariable::n_elements: return "n_elements";
    case SweepVariable::kappa_pn: return "kappa_pn";
  }
  return "unknown";
}

SweepVariable parse_sweep_variable(const std::string& text) {
  for (auto v : {SweepVariable::total_power_dbm, SweepVariable::rician_db,
                 SweepVariable::n_elements, SweepVariable::kappa_pn}) {
    if (to_string(v) == text) return v;
  }
  throw ConfigError("sweep.variable", "unknown sweep variable '" + text + "'");
}

void ExperimentSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep.values", "at least one value is required");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw ConfigError("sweep.values", "values must be strictly increasing");
    }
  }
  if (sweep == SweepVariable::n_elements) {
    for (double v : values) {
      if (!(v >= 1.0) || v != std::floor(v) || std::isinf(v)) {
        throw ConfigError("sweep.values", "n_elements values must be positive integers");
      }
    }
  }
  if (sweep == SweepVariable::kappa_pn && values.front() < 0.0) {
    throw ConfigError("sweep.values", "kappa_pn values must be >= 0");
  }
  if (modes.empty()) throw ConfigError("modes", "at least one mode is required");
  const auto& s = scenario;
  if (s.pairs < 1) throw ConfigError("scenario.pairs", "must be >= 1");
  if (s.n_h < 1) throw ConfigError("ris.n_h", "must be >= 1");
  if (s.n_v < 1) throw ConfigError("ris.n_v", "must be >= 1");
  if (!(s.wavelength > 0.0)) throw ConfigError("channel.wavelength", "must be positive");
  if (!(s.spacing > 0.0)) throw ConfigError("channel.spacing", "must be positive");
  if (!(s.split > 0.0 && s.split < 1.0)) throw ConfigError("power.split", "must lie in (0, 1)");
  if (s.p_max_w && !(*s.p_max_w > 0.0)) throw ConfigError("power.p_max_w", "must be positive");
  if (s.bits < 0 || s.bits > 16) throw ConfigError("ris.bits", "must lie in [0, 16]");
  if (!(s.kappa_pn >= 0.0)) throw ConfigError("ris.kappa_pn", "must be >= 0");
  if (!(s.amp_eff > 0.0 && s.amp_eff <= 1.0)) throw ConfigError("ris.amp_eff", "must lie in (0, 1]");
  for (int a = 0; a < 3; ++a) {
    if (s.area_min[a] > s.area_max[a]) throw ConfigError("scenario.area_min", "exceeds area_max");
  }
  if (ga_restarts < 1) throw ConfigError("ga.restarts", "must be >= 1");
  try {
    ga.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("ga", e.what());
  }
}

ExperimentSpec default_scenario() {
  ExperimentSpec spec;
  spec.name = "default";
  spec.sweep = SweepVariable::total_power_dbm;
  spec.values = {30.0};
  spec.modes = {ModeSpec::parse("active/pcpso"), ModeSpec::parse("passive/pcpso"),
                ModeSpec::parse("absent/pcpso")};
  spec.trials = 20000;
  spec.output_path = "default.csv";
  return spec;
}

std::vector<std::string> builtin_names() { return {"default", "fig2", "fig3", "fig4"}; }

ExperimentSpec builtin_spec(const std::string& name) {
  ExperimentSpec spec = default_scenario();
  auto modes = [](std::initializer_list<const char*> labels) {
    std::vector<ModeSpec> out;
    for (const char* l : labels) out.push_back(ModeSpec::parse(l));
    return out;
  };
  if (name == "default") return spec;
  if (name == "fig2") {
    spec.name = "fig2";
    spec.sweep = SweepVariable::total_power_dbm;
    spec.values = {10, 15, 20, 25, 30, 35, 40, 45, 50};
    spec.modes = modes({"active/pcpso", "active/pso", "active/random_phase",
                        "active/no_phase_noise", "passive/pcpso", "passive/pso",
                        "passive/random_phase", "passive/no_phase_noise", "absent/pcpso",
                        "absent/pso"});
    spec.trials = 2000;
    spec.ga.max_iters = 3000;
    spec.ga_restarts = 2;
    spec.output_path = "fig2.csv";
    spec.notes.push_back(
        "the 10-50 dBm power range is an assumed choice, not a measured reference");
    return spec;
  }
  if (name == "fig3") {
    spec.name = "fig3";
    spec.sweep = SweepVariable::rician_db;
    spec.values = {-10, -5, 0, 5, 10, 15, 20, 25, 30, 35, 40};
    spec.modes = modes({"active/pcpso", "active/random_phase", "passive/pcpso",
                        "passive/random_phase"});
    spec.trials = 2000;
    spec.ga.max_iters = 3000;
    spec.ga_restarts = 2;
    spec.output_path = "fig3.csv";
    spec.notes.push_back("sum_rate_asymptotic holds the infinite-Rician-factor closed form");
    return spec;
  }
  if (name == "fig4") {
    spec.name = "fig4";
    spec.sweep = SweepVariable::n_elements;
    spec.values = {4, 8, 16, 32, 64};
    spec.modes = modes({"active/no_phase_noise", "active/pcpso", "active/pso",
                        "active/pcpso@1"});
    spec.trials = 2000;
    spec.ga.max_iters = 3000;
    spec.ga_restarts = 2;
    spec.output_path = "fig4.csv";
    spec.notes.push_back("the @1 curve overrides kappa_pn to 1; no_phase_noise uses ideal phase shifters");
    return spec;
  }
  throw ConfigError("builtin", "unknown builtin '" + name + "'");
}

namespace {

using Setter = std::function<void(ExperimentSpec&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [](double ScenarioConfig::*member) {
      return Setter([member](ExperimentSpec& s, const std::string& k, const std::string& v) {
        s.scenario.*member = parse_double(k, v);
      });
    };
    t["name"] = [](ExperimentSpec& s, const std::string&, const std::string& v) { s.name = v; };
    t["sweep.variable"] = [](ExperimentSpec& s, const std::string&, const std::string& v) {
      s.sweep = parse_sweep_variable(v);
    };
    t["sweep.values"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.values = parse_double_list(k, v);
    };
    t["modes"] = [](ExperimentSpec& s, const std::string&, const std::string& v) {
      s.modes.clear();
      for (const auto& m : parse_string_list(v)) s.modes.push_back(ModeSpec::parse(m));
    };
    t["scenario.pairs"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.pairs = parse_positive_int(k, v);
    };
    t["scenario.placement_seed"] = [](ExperimentSpec& s, const std::string& k,
                                      const std::string& v) {
      s.scenario.placement_seed = parse_seed(k, v);
    };
    t["scenario.angle_seed"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.angle_seed = parse_seed(k, v);
    };
    t["scenario.area_min"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.area_min = parse_vec3(k, v);
    };
    t["scenario.area_max"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.area_max = parse_vec3(k, v);
    };
    t["scenario.tx"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.tx = parse_points(k, v);
    };
    t["scenario.rx"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.rx = parse_points(k, v);
    };
    t["ris.n_h"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.n_h = parse_positive_int(k, v);
    };
    t["ris.n_v"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.n_v = parse_positive_int(k, v);
    };
    t["ris.position"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.ris_position = parse_vec3(k, v);
    };
    t["ris.bits"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.bits = static_cast<int>(parse_int(k, v));
    };
    t["ris.kappa_pn"] = dbl(&ScenarioConfig::kappa_pn);
    t["ris.noise_floor_dbm"] = dbl(&ScenarioConfig::noise_floor_dbm);
    t["ris.p_dc_dbm"] = dbl(&ScenarioConfig::p_dc_dbm);
    t["ris.p_sw_dbm"] = dbl(&ScenarioConfig::p_sw_dbm);
    t["ris.amp_eff"] = dbl(&ScenarioConfig::amp_eff);
    t["channel.wavelength"] = dbl(&ScenarioConfig::wavelength);
    t["channel.spacing"] = dbl(&ScenarioConfig::spacing);
    t["channel.rician_db"] = dbl(&ScenarioConfig::rician_db);
    t["channel.direct_rician_db"] = dbl(&ScenarioConfig::direct_rician_db);
    t["channel.exponent_direct"] = dbl(&ScenarioConfig::exponent_direct);
    t["channel.exponent_reflect"] = dbl(&ScenarioConfig::exponent_reflect);
    t["channel.rx_noise_dbm"] = dbl(&ScenarioConfig::rx_noise_dbm);
    t["channel.direct_links"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.scenario.direct_links = parse_bool(k, v);
    };
    t["power.total_dbm"] = dbl(&ScenarioConfig::total_power_dbm);
    t["power.split"] = dbl(&ScenarioConfig::split);
    t["power.p_max_w"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      if (v.empty() || v == "auto") {
        s.scenario.p_max_w.reset();
      } else {
        s.scenario.p_max_w = parse_double(k, v);
      }
    };
    t["mc.trials"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      const long long n = parse_int(k, v);
      if (n < 0) throw ConfigError(k, "must be >= 0");
      s.trials = static_cast<std::uint64_t>(n);
    };
    t["ga.population"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.ga.population = static_cast<int>(parse_int(k, v));
    };
    t["ga.parents"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.ga.parents = static_cast<int>(parse_int(k, v));
    };
    t["ga.mutants"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.ga.mutants = static_cast<int>(parse_int(k, v));
    };
    t["ga.max_iters"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.ga.max_iters = static_cast<int>(parse_int(k, v));
    };
    t["ga.restarts"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.ga_restarts = static_cast<int>(parse_int(k, v));
    };
    t["ga.target_fitness"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.ga.target_fitness = parse_double(k, v);
    };
    t["run.seed"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.seed = parse_seed(k, v);
    };
    t["run.workers"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.workers = static_cast<unsigned>(parse_positive_int(k, v));
    };
    t["run.timing"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.timing = parse_bool(k, v);
    };
    t["output.path"] = [](ExperimentSpec& s, const std::string&, const std::string& v) {
      s.output_path = v;
    };
    t["output.metadata"] = [](ExperimentSpec& s, const std::string& k, const std::string& v) {
      s.write_metadata = parse_bool(k, v);
    };
    return t;
  }();
  return table;
}

}  // namespace

void apply_config(ExperimentSpec& spec, const KeyValues& kv) {
  const auto& table = setters();
  for (const auto& [key, value] : kv.entries) {
    if (key == "base") continue;
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown key");
    it->second(spec, key, value);
  }
}

ExperimentSpec load_spec(const std::string& source) {
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), source) != names.end()) {
    return builtin_spec(source);
  }
  std::ifstream in(source);
  if (!in) {
    throw ConfigError({}, "'" + source + "' is neither a builtin nor a readable file");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const KeyValues kv = parse_key_values(buf.str());
  ExperimentSpec spec = default_scenario();
  for (const auto& [key, value] : kv.entries) {
    if (key == "base") spec = builtin_spec(value);
  }
  apply_config(spec, kv);
  return spec;
}

KeyValues resolved_config(const ExperimentSpec& spec) {
  const auto& s = spec.scenario;
  KeyValues kv;
  auto d = [&](const char* key, double v) { kv.set(key, format_exact(v)); };
  auto i = [&](const char* key, long long v) { kv.set(key, std::to_string(v)); };
  kv.set("name", spec.name);
  kv.set("sweep.variable", to_string(spec.sweep));
  std::string values;
  for (std::size_t n = 0; n < spec.values.size(); ++n) {
    if (n) values += ", ";
    values += format_exact(spec.values[n]);
  }
  kv.set("sweep.values", values);
  std::string modes;
  for (std::size_t n = 0; n < spec.modes.size(); ++n) {
    if (n) modes += ", ";
    modes += spec.modes[n].label();
  }
  kv.set("modes", modes);
  i("scenario.pairs", s.pairs);
  kv.set("scenario.placement_seed", std::to_string(s.placement_seed));
  kv.set("scenario.angle_seed", std::to_string(s.angle_seed));
  kv.set("scenario.area_min", format_vec3(s.area_min));
  kv.set("scenario.area_max", format_vec3(s.area_max));
  kv.set("scenario.tx", format_points(s.tx));
  kv.set("scenario.rx", format_points(s.rx));
  i("ris.n_h", s.n_h);
  i("ris.n_v", s.n_v);
  kv.set("ris.position", format_vec3(s.ris_position));
  i("ris.bits", s.bits);
  d("ris.kappa_pn", s.kappa_pn);
  d("ris.noise_floor_dbm", s.noise_floor_dbm);
  d("ris.p_dc_dbm", s.p_dc_dbm);
  d("ris.p_sw_dbm", s.p_sw_dbm);
  d("ris.amp_eff", s.amp_eff);
  d("channel.wavelength", s.wavelength);
  d("channel.spacing", s.spacing);
  d("channel.rician_db", s.rician_db);
  d("channel.direct_rician_db", s.direct_rician_db);
  d("channel.exponent_direct", s.exponent_direct);
  d("channel.exponent_reflect", s.exponent_reflect);
  d("channel.rx_noise_dbm", s.rx_noise_dbm);
  kv.set("channel.direct_links", s.direct_links ? "true" : "false");
  d("power.total_dbm", s.total_power_dbm);
  d("power.split", s.split);
  kv.set("power.p_max_w", s.p_max_w ? format_exact(*s.p_max_w) : "auto");
  kv.set("mc.trials", std::to_string(spec.trials));
  i("ga.population", spec.ga.population);
  i("ga.parents", spec.ga.parents);
  i("ga.mutants", spec.ga.mutants);
  i("ga.max_iters", spec.ga.max_iters);
  i("ga.restarts", spec.ga_restarts);
  d("ga.target_fitness", spec.ga.target_fitness);
  kv.set("run.seed", std::to_string(spec.seed));
  i("run.workers", spec.workers);
  kv.set("run.timing", spec.timing ? "true" : "false");
  kv.set("output.path", spec.output_path);
  kv.set("output.metadata", spec.write_metadata ? "true" : "false");
  return kv;
}

std::pair<int, int> grid_for_elements(int elements) {
  if (elements < 1) throw std::invalid_argument("grid_for_elements: N must be >= 1");
  const double root = std::sqrt(static_cast<double>(elements));
  for (int n_h = 1; n_h <= elements; ++n_h) {
    if (elements % n_h == 0 && n_h >= root - 1e-9) return {n_h, elements / n_h};
  }
  return {elements, 1};
}

ScenarioConfig scenario_at(const ExperimentSpec& spec, double value) {
  ScenarioConfig s = spec.scenario;
  switch (spec.sweep) {
    case SweepVariable::total_power_dbm: s.total_power_dbm = value; break;
    case SweepVariable::rician_db:
      s.rician_db = value;
      s.direct_rician_db = value;
      break;
    case SweepVariable::n_elements: {
      const auto [n_h, n_v] = grid_for_elements(static_cast<int>(value));
      s.n_h = n_h;
      s.n_v = n_v;
      break;
    }
    case SweepVariable::kappa_pn: s.kappa_pn = value; break;
  }
  return s;
}

std::uint64_t cell_seed(std::uint64_t run_seed, std::size_t point, std::size_t mode) {
  return mix64(mix64(run_seed) ^ mix64((static_cast<std::uint64_t>(point) << 32) ^ mode));
}

namespace {

Chromosome best_of_restarts(const GaProblem& problem, const ExperimentSpec& spec,
                            std::uint64_t seed, bool optimize_power) {
  GaParams params = spec.ga;
  params.optimize_power = optimize_power;
  params.workers = spec.workers;
  Chromosome best;
  double best_fitness = std::numeric_limits<double>::infinity();
  for (int r = 0; r < spec.ga_restarts; ++r) {
    params.seed = r == 0 ? seed : mix64(seed ^ mix64(static_cast<std::uint64_t>(r)));
    GaResult result = evolve(problem, params);
    if (r == 0 || result.best_fitness < best_fitness) {
      best_fitness = result.best_fitness;
      best = std::move(result.best);
    }
  }
  return best;
}

}  // namespace

ResultRow evaluate_mode(const ExperimentSpec& spec, const Scenario& scenario,
                        const ModeSpec& mode, double sweep_value, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const StatisticalCsi& csi = scenario.csi;
  const int n = csi.elements();
  const int k = csi.pairs_count();

  RisState ris = scenario.ris;
  ris.mode = mode.mode;
  if (mode.strategy == Strategy::no_phase_noise) {
    ris.kappa_pn = std::numeric_limits<double>::infinity();
  }
  if (mode.kappa_pn) ris.kappa_pn = *mode.kappa_pn;

  ResultRow row;
  row.sweep_value = sweep_value;
  row.mode = mode.label();
  row.seed = seed;

  const PowerAllocation budget = split_budget(scenario.total_power_w, ris, n, k,
                                              spec.scenario.split, spec.scenario.p_max_w);
  if (!budget.feasible) {
    // The budget does not cover the RIS circuit power: rate defined as zero.
    row.per_user.assign(k, 0.0);
    row.sum_rate_mc = spec.trials > 0 ? 0.0 : kNaN;
    row.mc_std_err = spec.trials > 0 ? 0.0 : kNaN;
    row.sum_rate_asymptotic = mode.mode == RisMode::absent ? kNaN : 0.0;
    row.elapsed_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start).count();
    return row;
  }

  GaProblem problem{&csi, ris, budget};
  Chromosome choice = equal_power_chromosome(problem);
  const bool has_phases = mode.mode != RisMode::absent;
  switch (mode.strategy) {
    case Strategy::random_phase: {
      RngStream rng(seed, kRandomPhaseStream);
      for (int& t : choice.theta) {
        t = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(ris.phase_levels())));
      }
      break;
    }
    case Strategy::pso:
      if (has_phases) choice = best_of_restarts(problem, spec, seed, false);
      break;
    case Strategy::pcpso:
    case Strategy::no_phase_noise:
      choice = best_of_restarts(problem, spec, seed, true);
      break;
  }

  const PowerAllocation alloc = allocation_for(choice, problem);
  const RisState chosen = ris_for(choice, problem);
  const RateReport cf = ergodic_rate(alloc, csi, chosen);
  row.per_user = cf.per_user;
  row.sum_rate_closed_form = cf.sum;
  row.sum_rate_asymptotic =
      has_phases ? asymptotic_rate_rician(alloc, csi, chosen).sum : kNaN;
  if (spec.trials > 0) {
    McConfig mc;
    mc.trials = spec.trials;
    mc.seed = seed;
    mc.mode = mode.mode;
    mc.workers = spec.workers;
    const RateReport sim = ergodic_rate_mc(csi, alloc, chosen, mc);
    row.sum_rate_mc = sim.sum;
    row.mc_std_err = sim.sum_std_err;
  } else {
    row.sum_rate_mc = kNaN;
    row.mc_std_err = kNaN;
  }
  row.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      const std::atomic<bool>* stop) {
  spec.validate();
  const std::size_t points = spec.values.size();
  const std::size_t modes = spec.modes.size();
  std::vector<std::vector<ResultRow>> cells(points);
  std::vector<char> done(points, 0);

  // Sweep points run concurrently; inner stages stay single-threaded then.
  ExperimentSpec inner = spec;
  if (points > 1) inner.workers = 1;
  parallel_for(points, spec.workers, [&](std::size_t p) {
    if (stop && stop->load()) return;
    const Scenario scenario = build_scenario(scenario_at(spec, spec.values[p]));
    std::vector<ResultRow> rows;
    rows.reserve(modes);
    for (std::size_t m = 0; m < modes; ++m) {
      rows.push_back(evaluate_mode(inner, scenario, spec.modes[m], spec.values[p],
                                   cell_seed(spec.seed, p, m)));
    }
    cells[p] = std::move(rows);
    done[p] = 1;
  });

  std::vector<ResultRow> out;
  for (std::size_t p = 0; p < points; ++p) {
    if (!done[p]) continue;
    for (auto& r : cells[p]) out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, SweepVariable sweep,
               bool timing) {
  const std::size_t users = rows.empty() ? 0 : rows.front().per_user.size();
  out << to_string(sweep)
      << ",mode,sum_rate_closed_form,sum_rate_mc,mc_std_err,sum_rate_asymptotic,seed";
  for (std::size_t u = 0; u < users; ++u) out << ",rate_u" << (u + 1);
  if (timing) out << ",elapsed_ms";
  out << '\n';
  for (const auto& r : rows) {
    out << format_g(r.sweep_value, 9) << ',' << r.mode << ','
        << format_g(r.sum_rate_closed_form, 9) << ',' << format_g(r.sum_rate_mc, 9) << ','
        << format_g(r.mc_std_err, 9) << ',' << format_g(r.sum_rate_asymptotic, 9) << ','
        << r.seed;
    for (std::size_t u = 0; u < users; ++u) {
      out << ',' << (u < r.per_user.size() ? format_g(r.per_user[u], 9) : std::string());
    }
    if (timing) out << ',' << format_g(r.elapsed_ms, 9);
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows,
                    SweepVariable sweep, bool timing) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out, rows, sweep, timing);
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = parse_string_list(line);
  std::size_t users = 0;
  bool timing = false;
  for (const auto& h : header) {
    if (h.rfind("rate_u", 0) == 0) ++users;
    if (h == "elapsed_ms") timing = true;
  }
  auto number = [](const std::string& field) {
    return field.empty() ? kNaN : parse_double("csv", field);
  };
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                 : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 7 + users + (timing ? 1 : 0)) {
      throw std::runtime_error("csv: row has " + std::to_string(f.size()) + " fields");
    }
    ResultRow r;
    r.sweep_value = number(f[0]);
    r.mode = f[1];
    r.sum_rate_closed_form = number(f[2]);
    r.sum_rate_mc = number(f[3]);
    r.mc_std_err = number(f[4]);
    r.sum_rate_asymptotic = number(f[5]);
    r.seed = std::stoull(f[6]);
    for (std::size_t u = 0; u < users; ++u) r.per_user.push_back(number(f[7 + u]));
    if (timing) r.elapsed_ms = number(f[7 + users]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_metadata_file(const std::string& path, const ExperimentSpec& spec,
                         std::size_t rows_written, bool complete) {
  nlohmann::ordered_json j;
  j["name"] = spec.name;
  j["complete"] = complete;
  j["rows"] = rows_written;
  j["csv"] = spec.output_path;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : resolved_config(spec).entries) cfg[k] = v;
  j["config"] = cfg;
  j["notes"] = spec.notes;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace risd2d::runner
