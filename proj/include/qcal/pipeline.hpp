#pragma once

// End-to-end steps behind the CLI: synthetic data, characterization runs,
// predictive bands, spectra and posterior tables.

#include <Eigen/Dense>
#include <fmt/format.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "qcal/config.hpp"
#include "qcal/data_io.hpp"
#include "qcal/inference.hpp"
#include "qcal/kernels.hpp"
#include "qcal/likelihood.hpp"
#include "qcal/predict.hpp"
#include "qcal/ramsey.hpp"
#include "qcal/units.hpp"

namespace qcal {

using Datasets = std::array<RamseyDataset, 2>;

// ---------------------------------------------------------------- synthetic

struct SyntheticData {
  Datasets clean;
  Datasets noisy;
  std::array<Eigen::VectorXd, 2> discrepancy;
};

/// Simulation at cfg.device plus one GP draw per experiment (shared by its
/// included components) plus i.i.d. noise on every value. Nothing is clamped.
inline SyntheticData generate_synthetic(const RunConfig& cfg, Rng& rng) {
  SyntheticData out;
  const auto sims = cfg.ramsey_configs();
  std::normal_distribution<double> normal;
  for (int k = 0; k < 2; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    out.clean[ku] = simulate_ramsey(cfg.device, sims[ku]);
    out.noisy[ku] = out.clean[ku];
    const int n = sims[ku].grid.n;
    const KernelParams kp{cfg.synthetic.sigma_delta[ku], cfg.synthetic.ell[ku], cfg.synthetic.gamma};
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = normal(rng);
    out.discrepancy[ku] = kp.sigma_delta > 0.0 ? Eigen::VectorXd(psd_sqrt(build_kernel_matrix(kp, sims[ku].grid.times())) * z)
                                                : Eigen::VectorXd::Zero(n);
    const auto inc = included_components(static_cast<Transition>(k));
    for (int s = 0; s < 3; ++s) {
      auto& p = out.noisy[ku].populations[static_cast<std::size_t>(s)];
      if (s == inc[0] || s == inc[1]) p += out.discrepancy[ku];
      for (int i = 0; i < n; ++i) p(i) += cfg.synthetic.sigma_eps[ku] * normal(rng);
    }
  }
  return out;
}

inline nlohmann::json theta_json(const DeviceParams& p) {
  return {{"omega01_ghz", units::rad_per_us_to_ghz(p.omega01)},
          {"omega12_minus_ghz", units::rad_per_us_to_ghz(p.omega12_minus)},
          {"omega12_plus_ghz", units::rad_per_us_to_ghz(p.omega12_plus)},
          {"t2_1_us", p.t2_1},
          {"t2_2_us", p.t2_2}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_synthetic(const RunConfig& cfg, const SyntheticData& s, const std::filesystem::path& dir) {
  for (int k = 0; k < 2; ++k)
    write_data_file(dir / ("data_e" + std::to_string(k) + ".csv"), s.noisy[static_cast<std::size_t>(k)]);
  nlohmann::json truth;
  truth["seed"] = cfg.seed;
  truth["theta"] = theta_json(cfg.device);
  truth["gamma"] = cfg.synthetic.gamma;
  truth["sigma_eps"] = cfg.synthetic.sigma_eps;
  truth["sigma_delta"] = cfg.synthetic.sigma_delta;
  truth["ell_us"] = cfg.synthetic.ell;
  write_json(dir / "truth.json", truth);
}

// ------------------------------------------------------------ characterize

enum RamseyBlock { kAlpha0 = 0, kAlpha1 = 1, kTheta = 2 };

/// Flat state [theta(5) | alpha0(3) | alpha1(3)] in internal units.
class RamseyTarget {
 public:
  RamseyTarget(RamseyLikelihood lik, double gamma) : lik_(std::move(lik)), gamma_(gamma) {}

  NoiseHypers hypers(const Eigen::VectorXd& x, int experiment) const {
    const Eigen::Index o = 5 + 3 * experiment;
    return {x(o), x(o + 1), x(o + 2), gamma_};
  }

  double log_density(int block, const Eigen::VectorXd& x) {
    const ThetaVector theta = x.head<5>();
    switch (block) {
      case kAlpha0:
        return lik_.experiment_loglik(0, theta, hypers(x, 0));
      case kAlpha1:
        return lik_.experiment_loglik(1, theta, hypers(x, 1));
      default:
        return lik_.joint(theta, hypers(x, 0), hypers(x, 1));
    }
  }

  RamseyLikelihood& likelihood() { return lik_; }

 private:
  RamseyLikelihood lik_;
  double gamma_;
};

inline std::vector<BlockSpec> ramsey_blocks(const RunConfig& cfg, bool swap_alpha = false) {
  const Eigen::VectorXd aw = cfg.alpha_widths();
  BlockSpec a0{"alpha0", {5, 6, 7}, aw, kAlpha0};
  BlockSpec a1{"alpha1", {8, 9, 10}, aw, kAlpha1};
  BlockSpec th{"theta", {0, 1, 2, 3, 4}, cfg.proposals.theta, kTheta};
  if (swap_alpha) return {a1, a0, th};
  return {a0, a1, th};
}

inline const std::vector<std::string>& reported_columns() {
  static const std::vector<std::string> cols{"omega01_ghz", "omega12_minus_ghz", "omega12_plus_ghz", "t2_1_us",
                                             "t2_2_us",     "sigma_eps_0",       "sigma_delta_0",    "ell_0_us",
                                             "sigma_eps_1", "sigma_delta_1",     "ell_1_us"};
  return cols;
}

/// State -> (GHz, us, sigma_eps, sigma_delta, ell per experiment). GP columns
/// are NaN when the approach has no discrepancy term.
inline Eigen::VectorXd to_reported(const Eigen::VectorXd& x, Approach a) {
  Eigen::VectorXd r(11);
  for (int i = 0; i < 3; ++i) r(i) = units::rad_per_us_to_ghz(x(i));
  r(3) = x(3);
  r(4) = x(4);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < 2; ++k) {
    const int o = 5 + 3 * k;
    r(o) = 1.0 / std::sqrt(x(o));
    r(o + 1) = a == Approach::no_gp ? nan : 1.0 / std::sqrt(x(o + 1));
    r(o + 2) = a == Approach::no_gp ? nan : x(o + 2);
  }
  return r;
}

inline DeviceParams theta_from_reported(DeviceParams base, const Eigen::VectorXd& r) {
  base.omega01 = units::ghz_to_rad_per_us(r(0));
  base.omega12_minus = units::ghz_to_rad_per_us(r(1));
  base.omega12_plus = units::ghz_to_rad_per_us(r(2));
  base.t2_1 = r(3);
  base.t2_2 = r(4);
  return base;
}

inline std::vector<int> active_columns(Approach a) {
  if (a == Approach::no_gp) return {0, 1, 2, 3, 4, 5, 8};
  return {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
}

struct CharacterizeResult {
  Approach approach = Approach::gp_se;
  std::vector<Chain> chains;
  Eigen::MatrixXd retained;  // internal units, all chains stacked
  Eigen::MatrixXd reported;  // same rows in reported units
  Eigen::VectorXi chain_of_row;
  PosteriorSummary summary;  // active reported columns
  std::vector<AcceptanceDiagnostics> diagnostics;
};

inline Eigen::VectorXd initial_state(const RunConfig& cfg, int chain, Rng& rng) {
  const Box box = cfg.priors.joint();
  Eigen::VectorXd x = box.center();
  if (chain > 0 || cfg.mcmc.random_init) {
    const Eigen::VectorXd draw = box.sample(rng);
    const Eigen::VectorXd aw = cfg.alpha_widths();
    for (int i = 0; i < 5; ++i) x(i) = draw(i);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 3; ++i)
        if (aw(i) > 0.0) x(5 + 3 * k + i) = draw(5 + 3 * k + i);
  }
  return x;
}

inline Chain run_ramsey_chain(const RunConfig& cfg, const Datasets& data, int chain_id, bool swap_alpha = false) {
  Rng rng = make_chain_rng(cfg.seed, static_cast<std::uint64_t>(chain_id));
  RamseyTarget target(RamseyLikelihood(cfg.device, cfg.ramsey_configs(), data, cfg.backend()),
                      approach_gamma(cfg.approach));
  const Eigen::VectorXd init = initial_state(cfg, chain_id, rng);
  Chain c = metropolis_within_gibbs(target, ramsey_blocks(cfg, swap_alpha), cfg.priors.joint(), init,
                                    cfg.mcmc.iterations, rng);
  c.seed = cfg.seed;
  c.chain_id = static_cast<std::uint64_t>(chain_id);
  return c;
}

inline CharacterizeResult summarize_chains(const RunConfig& cfg, std::vector<Chain> chains) {
  CharacterizeResult res;
  res.approach = cfg.approach;
  std::vector<Eigen::MatrixXd> kept;
  Eigen::Index rows = 0;
  for (const auto& c : chains) {
    kept.push_back(retained_samples(c, cfg.mcmc.burn_in, cfg.mcmc.thinning));
    rows += kept.back().rows();
    res.diagnostics.push_back(acceptance_diagnostics(c));
  }
  res.retained.resize(rows, 11);
  res.reported.resize(rows, 11);
  res.chain_of_row.resize(rows);
  Eigen::Index at = 0;
  for (std::size_t c = 0; c < kept.size(); ++c)
    for (Eigen::Index i = 0; i < kept[c].rows(); ++i, ++at) {
      res.retained.row(at) = kept[c].row(i);
      res.reported.row(at) = to_reported(kept[c].row(i).transpose(), cfg.approach).transpose();
      res.chain_of_row(at) = static_cast<int>(c);
    }
  const auto cols = active_columns(cfg.approach);
  Eigen::MatrixXd active(rows, static_cast<Eigen::Index>(cols.size()));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    active.col(static_cast<Eigen::Index>(j)) = res.reported.col(cols[j]);
    names.push_back(reported_columns()[static_cast<std::size_t>(cols[j])]);
  }
  res.summary = summarize(active, names, cfg.mcmc.bins);
  res.chains = std::move(chains);
  return res;
}

inline CharacterizeResult characterize(const RunConfig& cfg, const Datasets& data) {
  cfg.validate();
  auto chains = run_chains(cfg.mcmc.chains, cfg.mcmc.workers, [&](int i) { return run_ramsey_chain(cfg, data, i); });
  return summarize_chains(cfg, std::move(chains));
}

inline void write_samples(const std::filesystem::path& path, const RunConfig& cfg, const CharacterizeResult& res) {
  DelimitedTable t;
  t.header["format"] = "qcal-samples-1";
  t.header["approach"] = to_string(res.approach);
  t.header["seed"] = std::to_string(cfg.seed);
  t.header["chains"] = std::to_string(res.chains.size());
  t.header["iterations"] = std::to_string(cfg.mcmc.iterations);
  t.header["burn_in"] = fmt17(cfg.mcmc.burn_in);
  t.header["thinning"] = std::to_string(cfg.mcmc.thinning);
  t.header["units"] = "frequencies GHz (ordinary), times us";
  t.columns = {"chain"};
  for (const auto& c : reported_columns()) t.columns.push_back(c);
  for (Eigen::Index i = 0; i < res.reported.rows(); ++i) {
    std::vector<double> row{static_cast<double>(res.chain_of_row(i))};
    for (Eigen::Index j = 0; j < res.reported.cols(); ++j) row.push_back(res.reported(i, j));
    t.rows.push_back(std::move(row));
  }
  write_table(path, t, {"format", "approach", "seed", "chains", "iterations", "burn_in", "thinning", "units"});
}

struct SampleFile {
  Approach approach = Approach::gp_se;
  Eigen::MatrixXd reported;
  Eigen::VectorXi chain_of_row;
};

inline SampleFile read_samples(const std::filesystem::path& path) {
  const auto t = read_table(path);
  std::vector<std::string> expect{"chain"};
  for (const auto& c : reported_columns()) expect.push_back(c);
  if (t.columns != expect) throw IoError(path.string() + ": unexpected sample columns");
  SampleFile s;
  try {
    s.approach = parse_approach(header_value(t, "approach", path.string()));
  } catch (const ConfigError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (t.rows.empty()) throw IoError(path.string() + ": no samples");
  s.reported.resize(static_cast<Eigen::Index>(t.rows.size()), 11);
  s.chain_of_row.resize(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    s.chain_of_row(static_cast<Eigen::Index>(i)) = static_cast<int>(t.rows[i][0]);
    for (int j = 0; j < 11; ++j) s.reported(static_cast<Eigen::Index>(i), j) = t.rows[i][static_cast<std::size_t>(j + 1)];
  }
  return s;
}

inline nlohmann::json summary_json(const RunConfig& cfg, const CharacterizeResult& res) {
  nlohmann::json j;
  j["approach"] = to_string(res.approach);
  j["seed"] = cfg.seed;
  j["iterations"] = cfg.mcmc.iterations;
  j["burn_in"] = cfg.mcmc.burn_in;
  j["thinning"] = cfg.mcmc.thinning;
  j["retained"] = res.summary.retained;
  for (const auto& p : res.summary.params) {
    nlohmann::json e;
    e["mean"] = p.mean;
    e["sd"] = p.sd;
    e["mode"] = p.mode;
    e["histogram"]["edges"] = std::vector<double>(p.histogram.edges.data(), p.histogram.edges.data() + p.histogram.edges.size());
    e["histogram"]["density"] =
        std::vector<double>(p.histogram.density.data(), p.histogram.density.data() + p.histogram.density.size());
    j["parameters"][p.name] = e;
  }
  for (std::size_t c = 0; c < res.diagnostics.size(); ++c) {
    nlohmann::json d;
    for (const auto& b : res.diagnostics[c].blocks) d[b.name] = {{"rate", b.rate}, {"warn", b.warn}};
    j["acceptance"].push_back(d);
  }
  return j;
}

inline void write_traces(const std::filesystem::path& path, const CharacterizeResult& res) {
  DelimitedTable t;
  t.header["format"] = "qcal-trace-1";
  t.header["approach"] = to_string(res.approach);
  t.columns = {"chain", "iteration"};
  for (const auto& c : reported_columns()) t.columns.push_back(c);
  for (std::size_t c = 0; c < res.chains.size(); ++c) {
    const auto& s = res.chains[c].samples;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const Eigen::VectorXd r = to_reported(s.row(i).transpose(), res.approach);
      std::vector<double> row{static_cast<double>(c), static_cast<double>(i)};
      for (Eigen::Index k = 0; k < r.size(); ++k) row.push_back(r(k));
      t.rows.push_back(std::move(row));
    }
  }
  write_table(path, t, {"format", "approach"});
}

// ----------------------------------------------------------------- predict

struct ComponentPrediction {
  int experiment = 0;
  int component = 0;
  PredictiveGaussian pg;
  double noise_var = 0.0;  // added to the band when it describes measurements
  Band band;
  Eigen::MatrixXd realizations;
};

struct PredictionInputs {
  Approach approach = Approach::gp_se;
  Eigen::MatrixXd reported;  // retained samples in reported units
};

/// Hat hyper-parameters per experiment from posterior means.
inline std::array<HatHypers, 2> hat_hypers(const Eigen::MatrixXd& reported, Approach a) {
  std::array<HatHypers, 2> h;
  for (int k = 0; k < 2; ++k) {
    auto& hk = h[static_cast<std::size_t>(k)];
    const int o = 5 + 3 * k;
    hk.sigma_eps = reported.col(o).mean();
    hk.gamma = approach_gamma(a);
    if (a != Approach::no_gp) {
      hk.sigma_delta = reported.col(o + 1).mean();
      hk.ell = reported.col(o + 2).mean();
    }
  }
  return h;
}

/// Evenly spaced subset of rows, at most `count`.
inline std::vector<Eigen::Index> ensemble_rows(Eigen::Index available, int count) {
  std::vector<Eigen::Index> idx;
  const Eigen::Index m = std::min<Eigen::Index>(available, count);
  for (Eigen::Index i = 0; i < m; ++i) idx.push_back(i * available / m);
  return idx;
}

/// Predictions for the four included components on the test grids.
/// Training data are the datasets on the configured grids.
inline std::vector<ComponentPrediction> predict_components(const RunConfig& cfg, const PredictionInputs& in,
                                                           const Datasets& data,
                                                           const std::array<DarkTimeGrid, 2>& test_grids, Rng& rng,
                                                           int realizations) {
  if (in.reported.rows() < 2) throw DomainError("prediction needs at least two posterior samples");
  const auto train_cfg = cfg.ramsey_configs();
  const auto hats = hat_hypers(in.reported, in.approach);
  const auto rows = ensemble_rows(in.reported.rows(), cfg.predict.ensemble);
  const bool use_gp = in.approach != Approach::no_gp;
  const bool case1 = use_gp && cfg.predict.case_kind == 1;
  const bool measurement = cfg.predict.band == BandKind::measurement ||
                           (cfg.predict.band == BandKind::automatic && use_gp);

  std::vector<ComponentPrediction> out;
  for (int k = 0; k < 2; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    RamseyConfig test_cfg = train_cfg[ku];
    test_cfg.grid = test_grids[ku];
    const Eigen::VectorXd train_t = train_cfg[ku].grid.times();
    const Eigen::VectorXd test_t = test_grids[ku].times();

    // Ensemble curves, or the posterior-mean theta for Case I.
    std::array<ThetaEnsemble, 3> ens;
    std::vector<Eigen::Index> use_rows = rows;
    Eigen::VectorXd mean_row;
    if (case1) {
      mean_row = in.reported.colwise().mean().transpose();
      use_rows = {0};
    }
    for (auto& e : ens) {
      e.train.resize(static_cast<Eigen::Index>(use_rows.size()), train_t.size());
      e.test.resize(static_cast<Eigen::Index>(use_rows.size()), test_t.size());
    }
    for (std::size_t m = 0; m < use_rows.size(); ++m) {
      const Eigen::VectorXd r = case1 ? mean_row : Eigen::VectorXd(in.reported.row(use_rows[m]).transpose());
      const DeviceParams p = theta_from_reported(cfg.device, r);
      const auto a = simulate_ramsey(p, train_cfg[ku]);
      const auto b = simulate_ramsey(p, test_cfg);
      for (int s = 0; s < 3; ++s) {
        ens[static_cast<std::size_t>(s)].train.row(static_cast<Eigen::Index>(m)) = a.series(s).transpose();
        ens[static_cast<std::size_t>(s)].test.row(static_cast<Eigen::Index>(m)) = b.series(s).transpose();
      }
    }

    for (int s : included_components(static_cast<Transition>(k))) {
      const auto& e = ens[static_cast<std::size_t>(s)];
      ComponentPrediction cp;
      cp.experiment = k;
      cp.component = s;
      const TrainingSet train{train_t, data[ku].series(s)};
      if (!use_gp)
        cp.pg = model_only_predictive(e.test, test_t);
      else if (case1)
        cp.pg = predict_case1(e.train.row(0).transpose(), e.test.row(0).transpose(), train, test_t, hats[ku]);
      else
        cp.pg = predict_case2(e, train, test_t, hats[ku]);
      cp.noise_var = measurement ? hats[ku].sigma_eps * hats[ku].sigma_eps : 0.0;
      cp.band = pointwise_band(cp.pg, cp.noise_var);
      cp.realizations = sample_realizations(cp.pg, realizations, rng);
      out.push_back(std::move(cp));
    }
  }
  return out;
}

inline void write_prediction(const std::filesystem::path& dir, Approach a, const ComponentPrediction& cp) {
  const std::string stem =
      "predict_" + to_string(a) + "_e" + std::to_string(cp.experiment) + "_p" + std::to_string(cp.component);
  DelimitedTable band;
  band.header["approach"] = to_string(a);
  band.header["experiment"] = std::to_string(cp.experiment);
  band.header["component"] = "p" + std::to_string(cp.component);
  band.header["band"] = cp.noise_var > 0.0 ? "measurement (includes noise variance)" : "model";
  band.columns = {"t_us", "mean", "lower_2_5", "upper_97_5", "sd"};
  for (Eigen::Index i = 0; i < cp.pg.mean.size(); ++i)
    band.rows.push_back({cp.pg.test_times(i), cp.pg.mean(i), cp.band.lower(i), cp.band.upper(i),
                         std::sqrt(std::max(0.0, cp.pg.covariance(i, i)))});
  write_table(dir / (stem + "_band.csv"), band, {"approach", "experiment", "component", "band"});

  DelimitedTable real;
  real.header["approach"] = to_string(a);
  real.header["layout"] = "one realization per row; columns are dark times in us";
  for (Eigen::Index i = 0; i < cp.pg.test_times.size(); ++i) real.columns.push_back(fmt17(cp.pg.test_times(i)));
  for (Eigen::Index r = 0; r < cp.realizations.rows(); ++r) {
    const Eigen::VectorXd row = cp.realizations.row(r).transpose();
    real.rows.emplace_back(row.data(), row.data() + row.size());
  }
  write_table(dir / (stem + "_realizations.csv"), real, {"approach", "layout"});
}

// ---------------------------------------------------------------- spectrum

struct SpectrumReport {
  int experiment = 0;
  std::array<std::vector<SpectrumPoint>, 3> spectra;
  std::array<std::vector<SpectrumPoint>, 3> peaks;
};

inline SpectrumReport spectrum_report(const RamseyDataset& d) {
  SpectrumReport r;
  r.experiment = static_cast<int>(d.config.experiment);
  for (int s = 0; s < 3; ++s) {
    r.spectra[static_cast<std::size_t>(s)] = detuning_spectrum(d, s);
    r.peaks[static_cast<std::size_t>(s)] = find_peaks(r.spectra[static_cast<std::size_t>(s)]);
  }
  return r;
}

inline void write_spectrum(const std::filesystem::path& path, const SpectrumReport& r) {
  DelimitedTable t;
  t.header["experiment"] = std::to_string(r.experiment);
  t.header["units"] = "frequency MHz, one-sided DFT amplitude";
  for (int s = 0; s < 3; ++s) {
    std::string peaks;
    for (const auto& p : r.peaks[static_cast<std::size_t>(s)])
      peaks += (peaks.empty() ? "" : " ") + fmt::format("{:.6g}@{:.6g}", p.frequency, p.magnitude);
    t.header["peaks_p" + std::to_string(s)] = peaks.empty() ? "none" : peaks;
  }
  t.columns = {"f_mhz", "p0", "p1", "p2"};
  for (std::size_t i = 0; i < r.spectra[0].size(); ++i)
    t.rows.push_back({r.spectra[0][i].frequency, r.spectra[0][i].magnitude, r.spectra[1][i].magnitude,
                      r.spectra[2][i].magnitude});
  write_table(path, t, {"experiment", "units", "peaks_p0", "peaks_p1", "peaks_p2"});
}

// --------------------------------------------------------------- summaries

/// Mean and standard deviation per reported column, NaN columns skipped.
inline std::string format_table(const std::vector<std::pair<std::string, Eigen::MatrixXd>>& runs) {
  std::string out = fmt::format("{:<20}", "parameter");
  for (const auto& [name, _] : runs) out += fmt::format(" {:>22} {:>12}", name + " mean", "sd");
  out += '\n';
  for (std::size_t j = 0; j < reported_columns().size(); ++j) {
    out += fmt::format("{:<20}", reported_columns()[j]);
    for (const auto& [_, m] : runs) {
      const Eigen::VectorXd c = m.col(static_cast<Eigen::Index>(j));
      if (c.hasNaN()) {
        out += fmt::format(" {:>22} {:>12}", "-", "-");
        continue;
      }
      const double mean = c.mean();
      const double sd =
          c.size() > 1 ? std::sqrt((c.array() - mean).square().sum() / static_cast<double>(c.size() - 1)) : 0.0;
      out += fmt::format(" {:>22.10g} {:>12.4g}", mean, sd);
    }
    out += '\n';
  }
  return out;
}

}  // namespace qcal
