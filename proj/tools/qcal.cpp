// qcal: command-line driver for Ramsey characterization runs.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "qcal/qcal.hpp"

namespace fs = std::filesystem;
using namespace qcal;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> approach;
  std::optional<int> chains;
  std::optional<std::string> out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "YAML configuration file");
  app->add_option("--seed", c.seed, "RNG seed");
  app->add_option("--approach", c.approach, "no-gp, gp-se or gp-exp")
      ->check(CLI::IsMember({"no-gp", "gp-se", "gp-exp"}));
  app->add_option("--chains", c.chains, "number of Markov chains")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? default_run_config() : load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.approach) cfg.approach = parse_approach(*c.approach);
  if (c.chains) {
    cfg.mcmc.chains = *c.chains;
    cfg.mcmc.workers = std::max(cfg.mcmc.workers, *c.chains);
  }
  if (c.out) cfg.io.out_dir = *c.out;
  cfg.validate();
  return cfg;
}

Datasets load_data(const RunConfig& cfg) {
  Datasets d;
  const PopulationBounds bounds{cfg.io.population_min, cfg.io.population_max, cfg.io.strict_bounds};
  for (int k = 0; k < 2; ++k) {
    std::vector<std::string> warnings;
    d[static_cast<std::size_t>(k)] = read_data_file(cfg.data_path(k), bounds, &warnings);
    if (!warnings.empty())
      fmt::print(stderr, "warning: {} value(s) outside population bounds in {} (first: {})\n", warnings.size(),
                 cfg.data_path(k).string(), warnings.front());
    if (static_cast<int>(d[static_cast<std::size_t>(k)].config.experiment) != k)
      throw IoError(cfg.data_path(k).string() + ": expected experiment " + std::to_string(k));
  }
  return d;
}

fs::path samples_path(const RunConfig& cfg) { return fs::path(cfg.io.out_dir) / ("samples_" + to_string(cfg.approach) + ".csv"); }

int cmd_simulate(const Common& c) {
  const RunConfig cfg = resolve(c);
  Rng rng = make_chain_rng(cfg.seed, 0);
  const auto s = generate_synthetic(cfg, rng);
  write_synthetic(cfg, s, cfg.io.out_dir);
  fmt::print("wrote {0}/data_e0.csv, {0}/data_e1.csv and {0}/truth.json\n", cfg.io.out_dir);
  return 0;
}

int cmd_characterize(const Common& c) {
  const RunConfig cfg = resolve(c);
  const Datasets data = load_data(cfg);
  const auto res = characterize(cfg, data);
  const fs::path out = cfg.io.out_dir;
  write_samples(samples_path(cfg), cfg, res);
  write_json(out / ("summary_" + to_string(cfg.approach) + ".json"), summary_json(cfg, res));
  write_traces(out / ("trace_" + to_string(cfg.approach) + ".csv"), res);

  fmt::print("approach {}: {} retained samples from {} chain(s)\n", to_string(cfg.approach), res.summary.retained,
             res.chains.size());
  for (const auto& p : res.summary.params) fmt::print("  {:<18} mean {:>20.12g}  sd {:.4g}\n", p.name, p.mean, p.sd);
  for (std::size_t i = 0; i < res.diagnostics.size(); ++i)
    for (const auto& b : res.diagnostics[i].blocks)
      fmt::print("  chain {} block {:<7} acceptance {:.3f}{}\n", i, b.name, b.rate,
                 b.warn ? "  WARN (target 0.20-0.25)" : "");
  return 0;
}

int cmd_predict(const Common& c, std::optional<int> count) {
  RunConfig cfg = resolve(c);
  if (count) cfg.predict.realizations = *count;
  const Datasets data = load_data(cfg);
  const auto samples = read_samples(samples_path(cfg));
  if (samples.approach != cfg.approach) throw IoError("sample file approach does not match --approach");
  const DarkTimeGrid tg0 = cfg.predict.test_grid.value_or(cfg.grids[0]);
  const DarkTimeGrid tg1 = cfg.predict.test_grid.value_or(cfg.grids[1]);
  Rng rng = make_chain_rng(cfg.seed, 1000);
  const auto preds = predict_components(cfg, {samples.approach, samples.reported}, data, {tg0, tg1}, rng,
                                        cfg.predict.realizations);
  for (const auto& p : preds) {
    write_prediction(cfg.io.out_dir, cfg.approach, p);
    const auto k = static_cast<std::size_t>(p.experiment);
    const bool same_grid = (k == 0 ? tg0 : tg1) == data[k].config.grid;
    if (same_grid)
      fmt::print("e{} p{}: band covers {:.1f}% of the training points\n", p.experiment, p.component,
                 100.0 * band_coverage(p.band, data[k].series(p.component)));
  }
  fmt::print("wrote predictions for {} series to {}\n", preds.size(), cfg.io.out_dir);
  return 0;
}

int cmd_spectrum(const Common& c, const std::vector<std::string>& files) {
  const RunConfig cfg = resolve(c);
  std::vector<fs::path> inputs(files.begin(), files.end());
  if (inputs.empty()) inputs = {cfg.data_path(0), cfg.data_path(1)};
  const PopulationBounds bounds{cfg.io.population_min, cfg.io.population_max, cfg.io.strict_bounds};
  for (const auto& f : inputs) {
    const auto d = read_data_file(f, bounds);
    const auto r = spectrum_report(d);
    const fs::path out = fs::path(cfg.io.out_dir) / ("spectrum_" + f.stem().string() + ".csv");
    write_spectrum(out, r);
    fmt::print("{} (experiment {}):\n", f.string(), r.experiment);
    for (int s = 0; s < 3; ++s) {
      std::string peaks;
      for (const auto& p : r.peaks[static_cast<std::size_t>(s)]) peaks += fmt::format(" {:.3f}", p.frequency);
      fmt::print("  p{} peaks [MHz]:{}\n", s, peaks.empty() ? " none" : peaks);
    }
  }
  return 0;
}

int cmd_summarize(const Common& c) {
  const RunConfig cfg = resolve(c);
  std::vector<std::pair<std::string, Eigen::MatrixXd>> runs;
  const std::vector<Approach> all{Approach::no_gp, Approach::gp_se, Approach::gp_exp};
  for (Approach a : all) {
    if (c.approach && a != cfg.approach) continue;
    const fs::path p = fs::path(cfg.io.out_dir) / ("samples_" + to_string(a) + ".csv");
    if (!fs::exists(p)) continue;
    runs.emplace_back(to_string(a), read_samples(p).reported);
  }
  if (runs.empty()) throw IoError("no sample files found in " + cfg.io.out_dir);
  const std::string table = format_table(runs);
  fmt::print("{}", table);
  std::ofstream out(fs::path(cfg.io.out_dir) / "summary_table.txt");
  if (!out) throw IoError("cannot write summary table");
  out << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian characterization of a superconducting qudit from Ramsey data"};
  app.require_subcommand(1);
  Common common;

  auto* sim = app.add_subcommand("simulate", "generate synthetic Ramsey datasets");
  add_common(sim, common);
  auto* chr = app.add_subcommand("characterize", "run Metropolis-within-Gibbs on the datasets");
  add_common(chr, common);
  auto* pred = app.add_subcommand("predict", "predictive realizations and 95% bands");
  add_common(pred, common);
  std::optional<int> count;
  pred->add_option("--count", count, "number of realizations")->check(CLI::NonNegativeNumber);
  auto* spec = app.add_subcommand("spectrum", "detuning spectra of datasets");
  add_common(spec, common);
  std::vector<std::string> files;
  spec->add_option("files", files, "data files (default: the configured datasets)");
  auto* sum = app.add_subcommand("summarize", "posterior mean/sd table across approaches");
  add_common(sum, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(common);
    if (*chr) return cmd_characterize(common);
    if (*pred) return cmd_predict(common, count);
    if (*spec) return cmd_spectrum(common, files);
    if (*sum) return cmd_summarize(common);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 0;
}
