#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rramcap/capacity.hpp"
#include "rramcap/channel.hpp"
#include "rramcap/errors.hpp"
#include "rramcap/seeding.hpp"
#include "rramcap/sweep.hpp"

namespace rramcap {

/// An ensemble of capacity curves with randomly drawn per-level sigma.
struct TrialSpec {
  ConductanceRange range{10.0, 200.0};
  std::vector<std::size_t> l_values = level_range(2, 40);
  RandomDraw sigma_draw{UniformDraw{3.0, 20.0}, 0.1};
  std::size_t n_trials = 100;
  std::uint64_t seed = 0;
  GridPolicy policy{};

  void validate() const {
    range.validate();
    if (n_trials < 1) throw ValidationError("trial count must be >= 1");
    if (l_values.empty()) throw ValidationError("level-count list must not be empty");
    for (std::size_t k = 0; k < l_values.size(); ++k) {
      if (l_values[k] < 1) throw ValidationError("level counts must be >= 1");
      if (k > 0 && l_values[k] <= l_values[k - 1])
        throw ValidationError("level counts must be strictly increasing");
    }
    detail::validate_draw(sigma_draw);
  }
};

struct Envelopes {
  CapacityCurve envelope_high;  // constant sigma at the lower bound
  CapacityCurve envelope_low;   // constant sigma at the upper bound
};

struct TrialEnsemble {
  std::vector<CapacityCurve> curves;
  std::vector<CurvePoint> mean_curve;
  CapacityCurve envelope_low;
  CapacityCurve envelope_high;
  double sigma_lo = 0.0;  // sigma behind envelope_high
  double sigma_hi = 0.0;  // sigma behind envelope_low
  double final_l_mean = 0.0;
};

/// Best- and worst-case constant-sigma curves.
inline Envelopes envelope_curves(const ConductanceRange& range, double sigma_lo, double sigma_hi,
                                 std::span<const std::size_t> l_values,
                                 const GridPolicy& policy = {}) {
  if (!(sigma_lo > 0.0) || !(sigma_lo < sigma_hi))
    throw ValidationError("envelopes need 0 < sigma_lo < sigma_hi");
  return {capacity_curve(range, ConstantNoise{sigma_lo}, l_values, std::nullopt, policy),
          capacity_curve(range, ConstantNoise{sigma_hi}, l_values, std::nullopt, policy)};
}

/// Seed driving trial t; capacity_curve derives the per-L seeds from it.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return derive_seed(seed, {static_cast<std::uint64_t>(trial)});
}

/// The sigma values a trial draws at one L.
inline std::vector<double> trial_sigmas(const TrialSpec& spec, std::size_t trial, std::size_t L) {
  return resolve_noise(spec.sigma_draw, L, derive_seed(trial_seed(spec.seed, trial), {L}));
}

inline TrialEnsemble run_trials(const TrialSpec& spec) {
  spec.validate();
  TrialEnsemble out;
  out.curves.reserve(spec.n_trials);
  for (std::size_t t = 0; t < spec.n_trials; ++t) {
    try {
      out.curves.push_back(capacity_curve(spec.range, spec.sigma_draw, spec.l_values,
                                          trial_seed(spec.seed, t), spec.policy));
    } catch (const ConvergenceError& e) {
      detail::rethrow_with(e, "(trial " + std::to_string(t) + ")");
    }
  }

  const std::size_t n_points = spec.l_values.size();
  out.mean_curve.resize(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    double sum = 0.0;
    for (const auto& c : out.curves) sum += c.points[k].bits;
    out.mean_curve[k] = {spec.l_values[k], sum / static_cast<double>(spec.n_trials)};
  }
  out.final_l_mean = out.mean_curve.back().bits;

  // Uniform draws bound sigma by their support; normal draws are unbounded
  // above, so the realized extremes over the ensemble are used instead.
  if (auto bounds = draw_bounds(spec.sigma_draw)) {
    out.sigma_lo = bounds->first;
    out.sigma_hi = bounds->second;
  } else {
    out.sigma_lo = std::numeric_limits<double>::infinity();
    out.sigma_hi = 0.0;
    for (std::size_t t = 0; t < spec.n_trials; ++t)
      for (std::size_t L : spec.l_values)
        for (double s : trial_sigmas(spec, t, L)) {
          out.sigma_lo = std::min(out.sigma_lo, s);
          out.sigma_hi = std::max(out.sigma_hi, s);
        }
  }

  if (out.sigma_lo < out.sigma_hi) {
    auto env = envelope_curves(spec.range, out.sigma_lo, out.sigma_hi, spec.l_values, spec.policy);
    out.envelope_high = std::move(env.envelope_high);
    out.envelope_low = std::move(env.envelope_low);
  } else {
    out.envelope_high = capacity_curve(spec.range, ConstantNoise{out.sigma_lo}, spec.l_values,
                                       std::nullopt, spec.policy);
    out.envelope_low = out.envelope_high;
  }
  return out;
}

}  // namespace rramcap
