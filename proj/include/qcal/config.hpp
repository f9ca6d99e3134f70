#pragma once

// Run configuration: defaults reproduce the published device setup, and a
// YAML file may override any subset. Values in files use GHz (ordinary
// frequency) and microseconds; internally frequencies are rad/us.

#include <yaml-cpp/yaml.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include "qcal/error.hpp"
#include "qcal/inference.hpp"
#include "qcal/kernels.hpp"
#include "qcal/likelihood.hpp"
#include "qcal/qudit_model.hpp"
#include "qcal/ramsey.hpp"
#include "qcal/units.hpp"

namespace qcal {

enum class Approach { no_gp, gp_se, gp_exp };

inline std::string to_string(Approach a) {
  switch (a) {
    case Approach::no_gp:
      return "no-gp";
    case Approach::gp_se:
      return "gp-se";
    case Approach::gp_exp:
      return "gp-exp";
  }
  return "?";
}

inline Approach parse_approach(const std::string& s) {
  if (s == "no-gp") return Approach::no_gp;
  if (s == "gp-se") return Approach::gp_se;
  if (s == "gp-exp") return Approach::gp_exp;
  throw ConfigError("unknown approach '" + s + "' (expected no-gp, gp-se or gp-exp)");
}

inline double approach_gamma(Approach a) { return a == Approach::gp_exp ? 1.0 : 2.0; }

enum class BandKind { automatic, model, measurement };

struct SyntheticSettings {
  double gamma = 2.0;
  std::array<double, 2> sigma_eps{0.03, 0.03};
  std::array<double, 2> sigma_delta{0.05, 0.05};
  std::array<double, 2> ell{2.0, 2.0};  // us
};

struct McmcSettings {
  int iterations = 20000;
  double burn_in = 0.5;
  int thinning = 2;
  int chains = 1;
  int workers = 1;
  bool random_init = false;  // multi-chain runs always draw inits from the prior
  int bins = 40;
};

struct LikelihoodSettings {
  std::optional<BackendKind> backend;  // unset: follows the approach
  int lowrank_rank = 5;
  double measure_sigma = 0.01;
  int marginal_rank = 25;
  bool marginal_auto = false;
  double marginal_floor = 1e-10;
};

struct PredictSettings {
  int case_kind = 2;
  int realizations = 500;
  int ensemble = 500;
  BandKind band = BandKind::automatic;
  std::optional<DarkTimeGrid> test_grid;  // unset: the training grid
};

struct IoSettings {
  std::array<std::string, 2> data{"", ""};  // empty: <out>/data_e<k>.csv
  std::string out_dir = "out";
  double population_min = -0.2;
  double population_max = 1.2;
  bool strict_bounds = false;
};

struct RunConfig {
  DeviceParams device;  // theta entries hold the synthetic truth
  std::array<DarkTimeGrid, 2> grids{};
  PulseMode pulse_mode = PulseMode::ideal;
  double pulse_amplitude = 0.0;  // rad/us
  PriorSpec priors;
  ProposalSpec proposals;
  McmcSettings mcmc;
  LikelihoodSettings likelihood;
  SyntheticSettings synthetic;
  PredictSettings predict;
  IoSettings io;
  Approach approach = Approach::gp_se;
  std::uint64_t seed = 20240611;

  std::array<RamseyConfig, 2> ramsey_configs() const {
    return {RamseyConfig{Transition::t01, grids[0], device.drive01, pulse_mode, pulse_amplitude},
            RamseyConfig{Transition::t12, grids[1], device.drive12, pulse_mode, pulse_amplitude}};
  }

  BackendSettings backend() const {
    BackendSettings b;
    b.gamma = approach_gamma(approach);
    b.kind = likelihood.backend.value_or(approach == Approach::no_gp   ? BackendKind::noise_only
                                         : approach == Approach::gp_se ? BackendKind::lowrank
                                                                       : BackendKind::marginal);
    b.lowrank_rank = likelihood.lowrank_rank;
    b.measure_sigma = likelihood.measure_sigma;
    b.marginal_rank = likelihood.marginal_rank;
    b.marginal_auto = likelihood.marginal_auto;
    b.marginal_floor = likelihood.marginal_floor;
    return b;
  }

  /// Proposal widths for alpha: only 1/sigma_eps^2 moves without a GP.
  Eigen::VectorXd alpha_widths() const {
    Eigen::VectorXd w = proposals.alpha;
    if (approach == Approach::no_gp) w(1) = w(2) = 0.0;
    return w;
  }

  std::filesystem::path data_path(int k) const {
    const auto& p = io.data[static_cast<std::size_t>(k)];
    if (!p.empty()) return p;
    return std::filesystem::path(io.out_dir) / ("data_e" + std::to_string(k) + ".csv");
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    try {
      device.validate();
    } catch (const Error& e) {
      fail(std::string("device: ") + e.what());
    }
    for (const auto& c : ramsey_configs()) {
      try {
        c.validate();
      } catch (const Error& e) {
        fail(std::string("ramsey: ") + e.what());
      }
    }
    priors.validate();
    if (priors.theta.size() != 5) fail("priors: theta needs 5 entries");
    for (const auto& a : priors.alpha) {
      if (a.size() != 3) fail("priors: alpha needs 3 entries");
      if (!(a.lower.array() > 0.0).all()) fail("priors: alpha lower bounds must be positive");
    }
    proposals.validate();
    if (proposals.theta.size() != 5 || proposals.alpha.size() != 3) fail("proposals: need 5 theta and 3 alpha widths");
    if (mcmc.iterations < 1) fail("mcmc.iterations must be at least 1");
    if (!(mcmc.burn_in >= 0.0 && mcmc.burn_in < 1.0)) fail("mcmc.burn_in must lie in [0, 1)");
    if (mcmc.thinning < 1) fail("mcmc.thinning must be at least 1");
    if (mcmc.chains < 1 || mcmc.workers < 1) fail("mcmc.chains and mcmc.workers must be at least 1");
    if (mcmc.bins < 1) fail("mcmc.bins must be at least 1");
    const double kept =
        static_cast<double>(mcmc.iterations) * (1.0 - mcmc.burn_in) / static_cast<double>(mcmc.thinning);
    if (kept < 10.0) fail("mcmc: fewer than 10 samples would survive burn-in and thinning");
    if (likelihood.lowrank_rank < 1) fail("likelihood.lowrank_rank must be at least 1");
    if (!(likelihood.measure_sigma > 0.0)) fail("likelihood.measure_sigma must be positive");
    if (likelihood.marginal_rank < 1) fail("likelihood.marginal_rank must be at least 1");
    if (backend().kind == BackendKind::lowrank && approach == Approach::gp_exp)
      fail("likelihood: the low-rank backend needs the squared-exponential kernel");
    if (!(synthetic.gamma >= 1.0 && synthetic.gamma <= 2.0)) fail("synthetic.gamma must lie in [1, 2]");
    for (int k = 0; k < 2; ++k) {
      const auto i = static_cast<std::size_t>(k);
      if (!(synthetic.sigma_eps[i] >= 0.0) || !(synthetic.sigma_delta[i] >= 0.0) || !(synthetic.ell[i] > 0.0))
        fail("synthetic: noise levels must be nonnegative and ell positive");
    }
    if (predict.case_kind != 1 && predict.case_kind != 2) fail("predict.case must be 1 or 2");
    if (predict.realizations < 0) fail("predict.realizations must be nonnegative");
    if (predict.ensemble < 2) fail("predict.ensemble must be at least 2");
    if (predict.test_grid) {
      try {
        predict.test_grid->validate();
      } catch (const Error& e) {
        fail(std::string("predict.test_grid: ") + e.what());
      }
    }
    if (!(io.population_min < io.population_max)) fail("io: population bounds are inverted");
  }
};

/// Published priors, proposals and fixed device constants.
inline RunConfig default_run_config() {
  using units::ghz_to_rad_per_us;
  RunConfig c;
  c.device.omega01 = ghz_to_rad_per_us(3.448646);
  c.device.omega12_minus = ghz_to_rad_per_us(3.240100);
  c.device.omega12_plus = ghz_to_rad_per_us(3.240399);
  c.device.t2_1 = 10.43;
  c.device.t2_2 = 2.48;
  c.device.t1 = {258.39, 100.79, 100.79};
  c.device.drive01 = ghz_to_rad_per_us(3.4476698);
  c.device.drive12 = ghz_to_rad_per_us(3.2392576);

  const double hw = ghz_to_rad_per_us(1e-3);
  c.priors.theta.lower.resize(5);
  c.priors.theta.upper.resize(5);
  const double centers[] = {ghz_to_rad_per_us(3.448646), ghz_to_rad_per_us(3.240105), ghz_to_rad_per_us(3.240403),
                            13.07, 2.73};
  const double halves[] = {hw, hw, hw, 5.0, 1.5};
  for (int i = 0; i < 5; ++i) {
    c.priors.theta.lower(i) = centers[i] - halves[i];
    c.priors.theta.upper(i) = centers[i] + halves[i];
  }
  Box alpha;
  alpha.lower = Eigen::Vector3d(1.0, 1.0, 0.1);
  alpha.upper = Eigen::Vector3d(1e4, 1e4, 10.0);
  c.priors.alpha = {alpha, alpha};

  const double fw = ghz_to_rad_per_us(1e-6);
  c.proposals.theta = (Eigen::VectorXd(5) << fw, fw, fw, 0.2, 0.1).finished();
  c.proposals.alpha = Eigen::Vector3d(8.0, 8.0, 0.05);
  return c;
}

namespace detail {

inline std::string where(const YAML::Node& n, const std::string& field) {
  const auto m = n.Mark();
  if (m.line < 0) return "field '" + field + "'";
  return "line " + std::to_string(m.line + 1) + ", field '" + field + "'";
}

template <class T>
T as(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config " + where(n, field) + ": cannot read value");
  }
}

inline void check_keys(const YAML::Node& n, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!n.IsMap()) throw ConfigError("config " + where(n, section) + ": expected a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) throw ConfigError("config " + where(kv.first, section + "." + key) + ": unknown key");
  }
}

template <class T, std::size_t N>
std::array<T, N> as_array(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence() || n.size() != N)
    throw ConfigError("config " + where(n, field) + ": expected a list of " + std::to_string(N) + " values");
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = as<T>(n[i], field);
  return out;
}

inline DarkTimeGrid read_grid(const YAML::Node& n, const std::string& field, DarkTimeGrid g) {
  check_keys(n, field, {"n", "dt_us", "start_us"});
  if (n["n"]) g.n = as<int>(n["n"], field + ".n");
  if (n["dt_us"]) g.step = as<double>(n["dt_us"], field + ".dt_us");
  if (n["start_us"]) g.start = as<double>(n["start_us"], field + ".start_us");
  try {
    g.validate();
  } catch (const Error& e) {
    throw ConfigError("config " + where(n, field) + ": " + e.what());
  }
  return g;
}

// [lower, upper] or {center, half_width}.
inline std::pair<double, double> read_bounds(const YAML::Node& n, const std::string& field, double scale) {
  double lo = 0.0, hi = 0.0;
  if (n.IsSequence()) {
    const auto v = as_array<double, 2>(n, field);
    lo = v[0];
    hi = v[1];
  } else {
    check_keys(n, field, {"center", "half_width"});
    if (!n["center"] || !n["half_width"]) throw ConfigError("config " + where(n, field) + ": need center and half_width");
    const double c = as<double>(n["center"], field + ".center");
    const double h = as<double>(n["half_width"], field + ".half_width");
    lo = c - h;
    hi = c + h;
  }
  if (!(lo < hi)) throw ConfigError("config " + where(n, field) + ": lower bound must be below upper bound");
  return {lo * scale, hi * scale};
}

}  // namespace detail

/// Applies a YAML document on top of `base`, then validates.
inline RunConfig apply_yaml(const YAML::Node& root, RunConfig c) {
  using detail::as;
  using detail::check_keys;
  const double ghz = units::ghz_to_rad_per_us(1.0);
  if (!root || root.IsNull()) {
    c.validate();
    return c;
  }
  check_keys(root, "<root>",
             {"approach", "seed", "device", "ramsey", "priors", "proposals", "mcmc", "likelihood", "synthetic",
              "predict", "io"});

  if (auto n = root["approach"]) c.approach = parse_approach(as<std::string>(n, "approach"));
  if (auto n = root["seed"]) c.seed = as<std::uint64_t>(n, "seed");

  if (auto d = root["device"]) {
    check_keys(d, "device",
               {"omega01_ghz", "omega12_minus_ghz", "omega12_plus_ghz", "t2_1_us", "t2_2_us", "t1_us", "omega23_ghz",
                "t2_3_us", "drive01_ghz", "drive12_ghz"});
    if (auto n = d["omega01_ghz"]) c.device.omega01 = as<double>(n, "device.omega01_ghz") * ghz;
    if (auto n = d["omega12_minus_ghz"]) c.device.omega12_minus = as<double>(n, "device.omega12_minus_ghz") * ghz;
    if (auto n = d["omega12_plus_ghz"]) c.device.omega12_plus = as<double>(n, "device.omega12_plus_ghz") * ghz;
    if (auto n = d["t2_1_us"]) c.device.t2_1 = as<double>(n, "device.t2_1_us");
    if (auto n = d["t2_2_us"]) c.device.t2_2 = as<double>(n, "device.t2_2_us");
    if (auto n = d["t1_us"]) {
      if (n.IsSequence() && n.size() == 2) {
        const auto v = detail::as_array<double, 2>(n, "device.t1_us");
        c.device.t1 = {v[0], v[1], v[1]};
      } else {
        c.device.t1 = detail::as_array<double, 3>(n, "device.t1_us");
      }
    }
    if (auto n = d["omega23_ghz"]) c.device.omega23 = as<double>(n, "device.omega23_ghz") * ghz;
    if (auto n = d["t2_3_us"]) c.device.t2_3 = as<double>(n, "device.t2_3_us");
    if (auto n = d["drive01_ghz"]) c.device.drive01 = as<double>(n, "device.drive01_ghz") * ghz;
    if (auto n = d["drive12_ghz"]) c.device.drive12 = as<double>(n, "device.drive12_ghz") * ghz;
  }

  if (auto r = root["ramsey"]) {
    check_keys(r, "ramsey", {"grid", "grid_e0", "grid_e1", "pulse_mode", "pulse_amplitude_mhz"});
    if (auto n = r["grid"]) c.grids[0] = c.grids[1] = detail::read_grid(n, "ramsey.grid", c.grids[0]);
    if (auto n = r["grid_e0"]) c.grids[0] = detail::read_grid(n, "ramsey.grid_e0", c.grids[0]);
    if (auto n = r["grid_e1"]) c.grids[1] = detail::read_grid(n, "ramsey.grid_e1", c.grids[1]);
    if (auto n = r["pulse_mode"]) {
      const auto m = as<std::string>(n, "ramsey.pulse_mode");
      if (m == "ideal")
        c.pulse_mode = PulseMode::ideal;
      else if (m == "finite")
        c.pulse_mode = PulseMode::finite;
      else
        throw ConfigError("config " + detail::where(n, "ramsey.pulse_mode") + ": expected ideal or finite");
    }
    if (auto n = r["pulse_amplitude_mhz"])
      c.pulse_amplitude = units::mhz_to_rad_per_us(as<double>(n, "ramsey.pulse_amplitude_mhz"));
  }

  if (auto p = root["priors"]) {
    check_keys(p, "priors",
               {"omega01_ghz", "omega12_minus_ghz", "omega12_plus_ghz", "t2_1_us", "t2_2_us", "inv_noise_var",
                "inv_gp_var", "ell_us"});
    const char* theta_keys[] = {"omega01_ghz", "omega12_minus_ghz", "omega12_plus_ghz", "t2_1_us", "t2_2_us"};
    for (int i = 0; i < 5; ++i) {
      if (auto n = p[theta_keys[i]]) {
        const auto [lo, hi] = detail::read_bounds(n, std::string("priors.") + theta_keys[i], i < 3 ? ghz : 1.0);
        c.priors.theta.lower(i) = lo;
        c.priors.theta.upper(i) = hi;
      }
    }
    const char* alpha_keys[] = {"inv_noise_var", "inv_gp_var", "ell_us"};
    for (int i = 0; i < 3; ++i) {
      if (auto n = p[alpha_keys[i]]) {
        const auto [lo, hi] = detail::read_bounds(n, std::string("priors.") + alpha_keys[i], 1.0);
        if (!(lo > 0.0))
          throw ConfigError("config " + detail::where(n, std::string("priors.") + alpha_keys[i]) +
                            ": hyper-parameter bounds must be positive");
        for (auto& a : c.priors.alpha) {
          a.lower(i) = lo;
          a.upper(i) = hi;
        }
      }
    }
  }

  if (auto p = root["proposals"]) {
    check_keys(p, "proposals", {"theta", "alpha"});
    if (auto n = p["theta"]) {
      // GHz, GHz, GHz, us, us
      const auto v = detail::as_array<double, 5>(n, "proposals.theta");
      for (int i = 0; i < 5; ++i) c.proposals.theta(i) = v[static_cast<std::size_t>(i)] * (i < 3 ? ghz : 1.0);
    }
    if (auto n = p["alpha"]) {
      const auto v = detail::as_array<double, 3>(n, "proposals.alpha");
      c.proposals.alpha = Eigen::Vector3d(v[0], v[1], v[2]);
    }
  }

  if (auto m = root["mcmc"]) {
    check_keys(m, "mcmc", {"iterations", "burn_in", "thinning", "chains", "workers", "init", "histogram_bins"});
    if (auto n = m["iterations"]) c.mcmc.iterations = as<int>(n, "mcmc.iterations");
    if (auto n = m["burn_in"]) c.mcmc.burn_in = as<double>(n, "mcmc.burn_in");
    if (auto n = m["thinning"]) c.mcmc.thinning = as<int>(n, "mcmc.thinning");
    if (auto n = m["chains"]) c.mcmc.chains = as<int>(n, "mcmc.chains");
    if (auto n = m["workers"]) c.mcmc.workers = as<int>(n, "mcmc.workers");
    if (auto n = m["histogram_bins"]) c.mcmc.bins = as<int>(n, "mcmc.histogram_bins");
    if (auto n = m["init"]) {
      const auto s = as<std::string>(n, "mcmc.init");
      if (s != "center" && s != "random")
        throw ConfigError("config " + detail::where(n, "mcmc.init") + ": expected center or random");
      c.mcmc.random_init = s == "random";
    }
  }

  if (auto l = root["likelihood"]) {
    check_keys(l, "likelihood", {"backend", "lowrank_rank", "measure_sigma", "marginal_rank", "marginal_floor"});
    if (auto n = l["backend"]) {
      const auto s = as<std::string>(n, "likelihood.backend");
      if (s == "direct")
        c.likelihood.backend = BackendKind::direct;
      else if (s == "lowrank")
        c.likelihood.backend = BackendKind::lowrank;
      else if (s == "marginal")
        c.likelihood.backend = BackendKind::marginal;
      else if (s == "noise-only")
        c.likelihood.backend = BackendKind::noise_only;
      else if (s != "auto")
        throw ConfigError("config " + detail::where(n, "likelihood.backend") +
                          ": expected auto, direct, lowrank, marginal or noise-only");
    }
    if (auto n = l["lowrank_rank"]) c.likelihood.lowrank_rank = as<int>(n, "likelihood.lowrank_rank");
    if (auto n = l["measure_sigma"]) c.likelihood.measure_sigma = as<double>(n, "likelihood.measure_sigma");
    if (auto n = l["marginal_rank"]) {
      if (n.IsScalar() && n.Scalar() == "auto")
        c.likelihood.marginal_auto = true;
      else
        c.likelihood.marginal_rank = as<int>(n, "likelihood.marginal_rank");
    }
    if (auto n = l["marginal_floor"]) c.likelihood.marginal_floor = as<double>(n, "likelihood.marginal_floor");
  }

  if (auto s = root["synthetic"]) {
    check_keys(s, "synthetic", {"gamma", "sigma_eps", "sigma_delta", "ell_us"});
    if (auto n = s["gamma"]) c.synthetic.gamma = as<double>(n, "synthetic.gamma");
    if (auto n = s["sigma_eps"]) c.synthetic.sigma_eps = detail::as_array<double, 2>(n, "synthetic.sigma_eps");
    if (auto n = s["sigma_delta"]) c.synthetic.sigma_delta = detail::as_array<double, 2>(n, "synthetic.sigma_delta");
    if (auto n = s["ell_us"]) c.synthetic.ell = detail::as_array<double, 2>(n, "synthetic.ell_us");
  }

  if (auto p = root["predict"]) {
    check_keys(p, "predict", {"case", "realizations", "ensemble", "band", "test_grid"});
    if (auto n = p["case"]) c.predict.case_kind = as<int>(n, "predict.case");
    if (auto n = p["realizations"]) c.predict.realizations = as<int>(n, "predict.realizations");
    if (auto n = p["ensemble"]) c.predict.ensemble = as<int>(n, "predict.ensemble");
    if (auto n = p["band"]) {
      const auto s = as<std::string>(n, "predict.band");
      if (s == "auto")
        c.predict.band = BandKind::automatic;
      else if (s == "model")
        c.predict.band = BandKind::model;
      else if (s == "measurement")
        c.predict.band = BandKind::measurement;
      else
        throw ConfigError("config " + detail::where(n, "predict.band") + ": expected auto, model or measurement");
    }
    if (auto n = p["test_grid"]) c.predict.test_grid = detail::read_grid(n, "predict.test_grid", c.grids[0]);
  }

  if (auto io = root["io"]) {
    check_keys(io, "io", {"data", "out_dir", "population_bounds", "strict_bounds"});
    if (auto n = io["data"]) c.io.data = detail::as_array<std::string, 2>(n, "io.data");
    if (auto n = io["out_dir"]) c.io.out_dir = as<std::string>(n, "io.out_dir");
    if (auto n = io["population_bounds"]) {
      const auto v = detail::as_array<double, 2>(n, "io.population_bounds");
      c.io.population_min = v[0];
      c.io.population_max = v[1];
    }
    if (auto n = io["strict_bounds"]) c.io.strict_bounds = as<bool>(n, "io.strict_bounds");
  }

  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw IoError("cannot open config file " + path.string());
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config " + path.string() + ": line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return apply_yaml(root, default_run_config());
}

inline RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config: line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return apply_yaml(root, default_run_config());
}

}  // namespace qcal
