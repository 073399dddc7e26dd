#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rramcap/channel.hpp"
#include "rramcap/errors.hpp"

namespace rramcap {

/// Uniform trapezoid rule over the conductance range: resolution subintervals,
/// resolution + 1 nodes, weights summing to the span.
struct QuadratureGrid {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t resolution = 0;
};

inline QuadratureGrid make_trapezoid_grid(const ConductanceRange& range, std::size_t resolution) {
  range.validate();
  if (resolution < 1) throw ValidationError("grid resolution must be >= 1");
  QuadratureGrid grid;
  grid.resolution = resolution;
  grid.points.resize(resolution + 1);
  grid.weights.resize(resolution + 1);
  const double n = static_cast<double>(resolution);
  const double h = range.span() / n;
  for (std::size_t k = 0; k <= resolution; ++k) {
    grid.points[k] = range.g_min + range.span() * (static_cast<double>(k) / n);
    grid.weights[k] = h;
  }
  grid.points.back() = range.g_max;
  grid.weights.front() *= 0.5;
  grid.weights.back() *= 0.5;
  return grid;
}

struct GridPolicy {
  std::size_t initial_resolution = 4096;
  double refine_tolerance_bits = 1e-5;
  std::size_t max_resolution = std::size_t{1} << 20;
};

/// C = ideal_bits + coupling_bits. ideal_bits is the prior entropy; the
/// coupling term is the (nonpositive) overlap loss.
struct CapacityResult {
  double bits = 0.0;
  double ideal_bits = 0.0;
  double coupling_bits = 0.0;
  std::size_t resolution_used = 0;
  double convergence_delta = 0.0;
};

struct McEstimate {
  double bits = 0.0;
  double standard_error = 0.0;
};

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Per-channel scratch for evaluating log p(level, g) over all levels.
class JointEvaluator {
 public:
  explicit JointEvaluator(const Channel& channel)
      : channel_(channel), log_prior_(channel.level_count()), joint_(channel.level_count()) {
    for (std::size_t i = 0; i < log_prior_.size(); ++i) {
      const double p = channel.prior()[i];
      log_prior_[i] = p > 0.0 ? std::log(p) : kNegInf;
    }
  }

  /// Fills log p(i, g) and returns log P(g).
  double fill(double g) {
    double peak = kNegInf;
    for (std::size_t i = 0; i < joint_.size(); ++i) {
      joint_[i] = log_prior_[i] == kNegInf ? kNegInf
                                            : log_prior_[i] + channel_.log_conditional(i, g);
      peak = std::max(peak, joint_[i]);
    }
    double sum = 0.0;
    for (double lj : joint_)
      if (lj != kNegInf) sum += std::exp(lj - peak);
    return peak + std::log(sum);
  }

  /// sum_i p(i, g) * log2 P(i | g), with 0 * log 0 = 0.
  double coupling_integrand(double g) {
    const double log_marginal = fill(g);
    double acc = 0.0;
    for (double lj : joint_) {
      if (lj == kNegInf) continue;
      const double log_post = std::min(0.0, lj - log_marginal);
      const double joint = std::exp(lj);
      if (joint > 0.0) acc += joint * log_post;
    }
    return acc / std::numbers::ln2;
  }

  std::span<const double> log_joint() const noexcept { return joint_; }
  const Channel& channel() const noexcept { return channel_; }

 private:
  const Channel& channel_;
  std::vector<double> log_prior_;
  std::vector<double> joint_;
};

}  // namespace detail

/// Marginal P(g) = sum_i prior_i p(g | i); zero outside the range.
inline double output_density(const Channel& channel, double g) {
  if (!channel.range().contains(g)) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < channel.level_count(); ++i) {
    const double p = channel.prior()[i];
    if (p > 0.0) total += p * std::exp(channel.log_conditional(i, g));
  }
  return total;
}

/// Bayes posterior P(level | g), computed in log space.
inline std::vector<double> posterior(const Channel& channel, double g) {
  if (!channel.range().contains(g))
    throw DomainError("output density is zero at g = " + std::to_string(g) + " uS");
  detail::JointEvaluator eval(channel);
  const double log_marginal = eval.fill(g);
  if (!std::isfinite(log_marginal))
    throw DomainError("output density is zero at g = " + std::to_string(g) + " uS");
  std::vector<double> post(channel.level_count());
  double total = 0.0;
  for (std::size_t i = 0; i < post.size(); ++i) {
    const double lj = eval.log_joint()[i];
    post[i] = lj == detail::kNegInf ? 0.0 : std::exp(lj - log_marginal);
    total += post[i];
  }
  for (double& p : post) p /= total;
  return post;
}

/// Input entropy in bits, the "ideal" first term.
inline double prior_entropy(const Channel& channel) {
  double h = 0.0;
  for (double p : channel.prior())
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

/// Capacity on a fixed grid; no refinement.
inline CapacityResult capacity_on_grid(const Channel& channel, const QuadratureGrid& grid) {
  detail::JointEvaluator eval(channel);
  double coupling = 0.0;
  for (std::size_t k = 0; k < grid.points.size(); ++k)
    coupling += grid.weights[k] * eval.coupling_integrand(grid.points[k]);
  CapacityResult r;
  r.ideal_bits = prior_entropy(channel);
  r.coupling_bits = std::min(0.0, coupling);
  r.bits = r.ideal_bits + r.coupling_bits;
  r.resolution_used = grid.resolution;
  return r;
}

/// Mutual information between level index and stored conductance. The
/// trapezoid grid is doubled (reusing existing nodes) until two successive
/// estimates differ by less than refine_tolerance_bits.
inline CapacityResult mutual_information(const Channel& channel, const GridPolicy& policy = {}) {
  if (policy.initial_resolution < 64) throw ValidationError("initial grid resolution must be >= 64");
  if (!(policy.refine_tolerance_bits > 0.0))
    throw ValidationError("grid refinement tolerance must be > 0 bits");

  const double ideal = prior_entropy(channel);
  if (channel.level_count() == 1)
    return {0.0, ideal, 0.0, policy.initial_resolution, 0.0};

  const auto& range = channel.range();
  const double span = range.span();
  detail::JointEvaluator eval(channel);

  std::size_t n = policy.initial_resolution;
  const double ends = 0.5 * (eval.coupling_integrand(range.g_min) +
                             eval.coupling_integrand(range.g_max));
  double interior = 0.0;
  for (std::size_t k = 1; k < n; ++k)
    interior += eval.coupling_integrand(range.g_min + span * (static_cast<double>(k) / n));

  auto capacity_of = [&](std::size_t intervals) {
    const double coupling = std::min(0.0, span / static_cast<double>(intervals) * (ends + interior));
    return CapacityResult{ideal + coupling, ideal, coupling, intervals, 0.0};
  };

  CapacityResult current = capacity_of(n);
  double delta = std::numeric_limits<double>::infinity();
  while (true) {
    const std::size_t next = 2 * n;
    if (next > policy.max_resolution)
      throw ConvergenceError("quadrature did not converge below " +
                                 std::to_string(policy.refine_tolerance_bits) +
                                 " bits within " + std::to_string(policy.max_resolution) +
                                 " intervals (last delta " + std::to_string(delta) + " bits)",
                             delta);
    const double dn = static_cast<double>(next);
    for (std::size_t k = 1; k < next; k += 2)
      interior += eval.coupling_integrand(range.g_min + span * (static_cast<double>(k) / dn));
    CapacityResult refined = capacity_of(next);
    delta = std::abs(refined.bits - current.bits);
    n = next;
    current = refined;
    if (delta < policy.refine_tolerance_bits) {
      current.convergence_delta = delta;
      return current;
    }
  }
}

/// Sampling estimate of E[log2 p(g|v) / P(g)] with v ~ prior and g drawn from
/// the truncated level density by rejection. Deterministic per seed.
inline McEstimate mc_mi_estimate(const Channel& channel, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 10000) throw ValidationError("Monte Carlo estimate needs >= 1e4 samples");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick_level(channel.prior().begin(),
                                                     channel.prior().end());
  std::normal_distribution<double> standard(0.0, 1.0);
  const auto& range = channel.range();
  detail::JointEvaluator eval(channel);

  constexpr int kMaxRejections = 1000000;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const std::size_t level = pick_level(rng);
    const double mu = channel.means()[level];
    const double sigma = channel.sigmas()[level];
    double g = 0.0;
    int attempts = 0;
    do {
      if (++attempts > kMaxRejections)
        throw ConvergenceError("truncated sampling rejected too many draws", 0.0);
      g = mu + sigma * standard(rng);
    } while (!range.contains(g));
    const double log_marginal = eval.fill(g);
    const double term = (channel.log_conditional(level, g) - log_marginal) / std::numbers::ln2;
    const double d = term - mean;
    mean += d / static_cast<double>(s + 1);
    m2 += d * (term - mean);
  }
  const double n = static_cast<double>(n_samples);
  return {mean, std::sqrt(m2 / (n - 1.0) / n)};
}

}  // namespace rramcap
