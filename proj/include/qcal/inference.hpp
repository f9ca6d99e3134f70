#pragma once

// Metropolis-within-Gibbs over blocks of a flat parameter vector with a
// uniform (box) prior and uniform random-walk proposals.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qcal/error.hpp"

namespace qcal {

using Rng = std::mt19937_64;

/// Independent stream for chain `chain` of a run seeded with `seed`.
inline Rng make_chain_rng(std::uint64_t seed, std::uint64_t chain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chain), static_cast<std::uint32_t>(chain >> 32), 0x51dU};
  return Rng(seq);
}

/// Uniform on (0, 1]; never returns 0 so log(u) is finite.
inline double uniform_open0(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index size() const { return lower.size(); }
  Eigen::VectorXd center() const { return 0.5 * (lower + upper); }

  bool contains(const Eigen::VectorXd& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x(i) >= lower(i) && x(i) <= upper(i))) return false;
    return true;
  }

  void validate() const {
    if (lower.size() != upper.size()) throw ConfigError("prior box: bound vectors differ in length");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
      if (!(lower(i) < upper(i)))
        throw ConfigError("prior box: lower bound must be below upper bound at index " + std::to_string(i));
  }

  Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd x(size());
    for (Eigen::Index i = 0; i < size(); ++i) x(i) = lower(i) + (upper(i) - lower(i)) * (1.0 - uniform_open0(rng));
    return x;
  }
};

/// theta box (5 entries) and one alpha box (3 entries) per experiment.
struct PriorSpec {
  Box theta;
  std::array<Box, 2> alpha;

  void validate() const {
    theta.validate();
    alpha[0].validate();
    alpha[1].validate();
  }

  /// Flat state layout [theta | alpha0 | alpha1].
  Box joint() const {
    Box b;
    b.lower.resize(theta.size() + alpha[0].size() + alpha[1].size());
    b.upper.resizeLike(b.lower);
    b.lower << theta.lower, alpha[0].lower, alpha[1].lower;
    b.upper << theta.upper, alpha[0].upper, alpha[1].upper;
    return b;
  }
};

/// Proposal supports. A width of zero pins that coordinate.
struct ProposalSpec {
  Eigen::VectorXd theta;
  Eigen::VectorXd alpha;

  void validate() const {
    if (theta.size() == 0 || alpha.size() == 0) throw ConfigError("proposal widths are missing");
    if (!(theta.array() > 0.0).all()) throw ConfigError("theta proposal widths must be positive");
    if (!(alpha.array() >= 0.0).all() || !(alpha.array() > 0.0).any())
      throw ConfigError("alpha proposal widths must be nonnegative with at least one active");
  }
};

/// candidate_i ~ U(current_i - w_i/2, current_i + w_i/2) restricted to `idx`,
/// redrawn while outside the box (at most `max_draws` attempts).
inline Eigen::VectorXd propose_uniform(const Eigen::VectorXd& current, const std::vector<int>& idx,
                                       const Eigen::VectorXd& widths, const Box& box, Rng& rng,
                                       int max_draws = 100) {
  Eigen::VectorXd cand = current;
  for (int draw = 0; draw < max_draws; ++draw) {
    bool inside = true;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const int i = idx[j];
      const double w = widths(static_cast<Eigen::Index>(j));
      cand(i) = current(i) + w * (uniform_open0(rng) - 0.5);
      inside = inside && cand(i) >= box.lower(i) && cand(i) <= box.upper(i);
    }
    if (inside) return cand;
  }
  throw ConfigError("proposal redraw cap of " + std::to_string(max_draws) +
                    " exceeded: the prior box is too narrow for the proposal support");
}

/// Whole-vector form: every coordinate is proposed.
inline Eigen::VectorXd propose_uniform(const Eigen::VectorXd& current, const Eigen::VectorXd& widths,
                                       const Box& box, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(current.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return propose_uniform(current, idx, widths, box, rng);
}

struct BlockSpec {
  std::string name;
  std::vector<int> indices;
  Eigen::VectorXd widths;
  int tag = -1;  // passed to log_density; -1 means the block's position
};

/// Log target restricted to the factors that depend on `block`.
template <class T>
concept BlockTarget = requires(T& t, int block, const Eigen::VectorXd& x) {
  { t.log_density(block, x) } -> std::convertible_to<double>;
};

struct Chain {
  Eigen::MatrixXd samples;  // M x dim
  std::vector<std::string> block_names;
  std::vector<long> accepts;
  std::vector<long> attempts;
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;

  Eigen::Index iterations() const { return samples.rows(); }
};

namespace detail {

inline std::string format_state(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << std::setprecision(17) << '[';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ']';
  return os.str();
}

}  // namespace detail

/// One Metropolis step per block per iteration, blocks in the given order.
/// Acceptance is min{1, exp(delta log density)}; the prior ratio is 1 in the box.
template <BlockTarget Target>
Chain metropolis_within_gibbs(Target& target, const std::vector<BlockSpec>& blocks, const Box& prior,
                              const Eigen::VectorXd& init, int iterations, Rng& rng) {
  if (iterations < 1) throw ConfigError("MCMC needs at least one iteration");
  if (init.size() != prior.size()) throw ConfigError("initial point has the wrong dimension");
  if (!prior.contains(init)) throw ConfigError("initial point lies outside the prior box");
  for (const auto& b : blocks)
    if (static_cast<std::size_t>(b.widths.size()) != b.indices.size())
      throw ConfigError("block '" + b.name + "': widths and indices differ in length");

  Chain chain;
  chain.samples.resize(iterations, init.size());
  chain.accepts.assign(blocks.size(), 0);
  chain.attempts.assign(blocks.size(), 0);
  for (const auto& b : blocks) chain.block_names.push_back(b.name);

  Eigen::VectorXd x = init;
  for (int m = 0; m < iterations; ++m) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const int id = blocks[b].tag >= 0 ? blocks[b].tag : static_cast<int>(b);
      Eigen::VectorXd cand;
      double delta = 0.0;
      try {
        cand = propose_uniform(x, blocks[b].indices, blocks[b].widths, prior, rng);
        delta = target.log_density(id, cand) - target.log_density(id, x);
      } catch (const Error& e) {
        throw Error(e.kind(), std::string(e.what()) + " (iteration " + std::to_string(m) + ", block '" +
                                  blocks[b].name + "', state " + detail::format_state(cand.size() ? cand : x) +
                                  ")");
      }
      ++chain.attempts[b];
      if (std::isnan(delta)) continue;
      if (delta >= 0.0 || std::log(uniform_open0(rng)) <= delta) {
        x = std::move(cand);
        ++chain.accepts[b];
      }
    }
    chain.samples.row(m) = x.transpose();
  }
  return chain;
}

/// Indices i >= floor(M * burn_in) with i % thinning == 0.
inline std::vector<Eigen::Index> retained_indices(Eigen::Index m, double burn_in_fraction, int thinning) {
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) throw ConfigError("burn-in fraction must be in [0, 1)");
  if (thinning < 1) throw ConfigError("thinning must be at least 1");
  const auto start = static_cast<Eigen::Index>(std::floor(static_cast<double>(m) * burn_in_fraction));
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = start; i < m; ++i)
    if (i % thinning == 0) out.push_back(i);
  if (out.size() < 10) throw ConfigError("fewer than 10 samples survive burn-in and thinning");
  return out;
}

inline Eigen::MatrixXd retained_samples(const Chain& chain, double burn_in_fraction = 0.5, int thinning = 2) {
  const auto idx = retained_indices(chain.iterations(), burn_in_fraction, thinning);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), chain.samples.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = chain.samples.row(idx[k]);
  return out;
}

struct Histogram {
  Eigen::VectorXd edges;    // bins + 1
  Eigen::VectorXd density;  // bins, integrates to 1

  double integral() const {
    double s = 0.0;
    for (Eigen::Index k = 0; k < density.size(); ++k) s += density(k) * (edges(k + 1) - edges(k));
    return s;
  }
};

inline Histogram make_histogram(const Eigen::VectorXd& v, int bins) {
  if (v.size() == 0) throw DomainError("histogram of an empty sample");
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  double lo = v.minCoeff();
  double hi = v.maxCoeff();
  Histogram h;
  if (!(hi > lo)) {
    h.edges.resize(2);
    h.edges << lo - 0.5, lo + 0.5;
    h.density = Eigen::VectorXd::Ones(1);
    return h;
  }
  h.edges = Eigen::VectorXd::LinSpaced(bins + 1, lo, hi);
  h.density = Eigen::VectorXd::Zero(bins);
  const double width = (hi - lo) / bins;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    auto k = static_cast<Eigen::Index>((v(i) - lo) / width);
    h.density(std::clamp<Eigen::Index>(k, 0, bins - 1)) += 1.0;
  }
  for (Eigen::Index k = 0; k < bins; ++k) h.density(k) /= static_cast<double>(v.size()) * (h.edges(k + 1) - h.edges(k));
  return h;
}

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double mode = 0.0;  // midpoint of the densest histogram bin
  Histogram histogram;
};

struct PosteriorSummary {
  std::vector<ParamSummary> params;
  Eigen::Index retained = 0;

  const ParamSummary& at(const std::string& name) const {
    for (const auto& p : params)
      if (p.name == name) return p;
    throw DomainError("no summary for parameter '" + name + "'");
  }
};

/// Column statistics of an already-retained (and possibly transformed) sample matrix.
inline PosteriorSummary summarize(const Eigen::MatrixXd& samples, const std::vector<std::string>& names,
                                  int bins = 40) {
  if (static_cast<std::size_t>(samples.cols()) != names.size())
    throw DomainError("summarize: one name per column required");
  PosteriorSummary out;
  out.retained = samples.rows();
  const double n = static_cast<double>(samples.rows());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    const Eigen::VectorXd col = samples.col(j);
    ParamSummary ps;
    ps.name = names[static_cast<std::size_t>(j)];
    ps.mean = col.mean();
    ps.sd = samples.rows() > 1 ? std::sqrt((col.array() - ps.mean).square().sum() / (n - 1.0)) : 0.0;
    ps.histogram = make_histogram(col, bins);
    Eigen::Index top = 0;
    ps.histogram.density.maxCoeff(&top);
    ps.mode = 0.5 * (ps.histogram.edges(top) + ps.histogram.edges(top + 1));
    out.params.push_back(std::move(ps));
  }
  return out;
}

/// Burn-in, thinning, optional per-sample transform, then summary.
inline PosteriorSummary postprocess(
    const Chain& chain, const std::vector<std::string>& names, double burn_in_fraction = 0.5, int thinning = 2,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& transform = {}, int bins = 40) {
  Eigen::MatrixXd kept = retained_samples(chain, burn_in_fraction, thinning);
  if (transform) {
    Eigen::MatrixXd mapped;
    for (Eigen::Index i = 0; i < kept.rows(); ++i) {
      const Eigen::VectorXd row = transform(kept.row(i).transpose());
      if (i == 0) mapped.resize(kept.rows(), row.size());
      mapped.row(i) = row.transpose();
    }
    kept = std::move(mapped);
  }
  return summarize(kept, names, bins);
}

struct BlockRate {
  std::string name;
  double rate = 0.0;
  bool warn = false;  // outside the 20-25% target
};

struct AcceptanceDiagnostics {
  std::vector<BlockRate> blocks;
  Eigen::MatrixXd traces;  // one column per parameter
};

inline AcceptanceDiagnostics acceptance_diagnostics(const Chain& chain) {
  if (chain.iterations() == 0) throw DomainError("acceptance diagnostics of an empty chain");
  AcceptanceDiagnostics d;
  for (std::size_t b = 0; b < chain.block_names.size(); ++b) {
    BlockRate r;
    r.name = chain.block_names[b];
    r.rate = chain.attempts[b] ? static_cast<double>(chain.accepts[b]) / static_cast<double>(chain.attempts[b]) : 0.0;
    r.warn = r.rate < 0.20 || r.rate > 0.25;
    d.blocks.push_back(r);
  }
  d.traces = chain.samples;
  return d;
}

/// Runs `count` chains on up to `workers` threads. `run(i)` must only touch
/// state it owns; results come back in chain order.
template <class Fn>
std::vector<Chain> run_chains(int count, int workers, Fn run) {
  if (count < 1) throw ConfigError("need at least one chain");
  workers = std::clamp(workers, 1, count);
  std::vector<Chain> chains(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  for (int first = 0; first < count; first += workers) {
    std::vector<std::thread> pool;
    for (int i = first; i < std::min(count, first + workers); ++i)
      pool.emplace_back([&, i] {
        try {
          chains[static_cast<std::size_t>(i)] = run(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return chains;
}

}  // namespace qcal
