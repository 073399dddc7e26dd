#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rramcap/capacity.hpp"
#include "rramcap/channel.hpp"
#include "rramcap/errors.hpp"
#include "rramcap/seeding.hpp"

namespace rramcap {

struct CurvePoint {
  std::size_t level_count = 0;
  double bits = 0.0;
};

/// Capacity against the number of pre-defined levels for one range and noise model.
struct CapacityCurve {
  ConductanceRange range;
  NoiseModel noise;
  std::vector<CurvePoint> points;

  std::optional<double> bits_at(std::size_t level_count) const {
    for (const auto& p : points)
      if (p.level_count == level_count) return p.bits;
    return std::nullopt;
  }
};

struct SaturationSummary {
  double c_max = 0.0;
  std::size_t l_t = 0;
  double delta_at_lt = 0.0;  // uS
  double ratio = 0.0;        // delta_g / sigma at l_t
};

/// log C_max = log a + b log sigma, fit by ordinary least squares.
struct PowerLawFit {
  double a = 0.0;
  double b = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // log-space, observed minus fitted

  double operator()(double sigma) const { return a * std::pow(sigma, b); }
};

struct SigmaCmax {
  double sigma = 0.0;
  double c_max = 0.0;
};

struct CmaxResult {
  double c_max = 0.0;
  std::size_t l_used = 0;
};

inline constexpr double kSaturationFraction = 0.95;

namespace detail {

[[noreturn]] inline void rethrow_with(const ConvergenceError& e, const std::string& where) {
  if (const auto* s = dynamic_cast<const SaturationError*>(&e))
    throw SaturationError(std::string(e.what()) + " " + where, s->previous_bits(), s->last_bits());
  throw ConvergenceError(std::string(e.what()) + " " + where, e.last_delta());
}

inline std::string describe(const ConductanceRange& r) {
  return "[" + std::to_string(r.g_min) + ", " + std::to_string(r.g_max) + "] uS";
}

}  // namespace detail

/// One mutual-information evaluation per requested L. RandomDraw noise is
/// re-drawn for every L from a seed derived from (seed, L).
inline CapacityCurve capacity_curve(const ConductanceRange& range, const NoiseModel& noise,
                                    std::span<const std::size_t> l_values,
                                    std::optional<std::uint64_t> seed = std::nullopt,
                                    const GridPolicy& policy = {}) {
  range.validate();
  if (l_values.empty()) throw ValidationError("level-count list must not be empty");
  for (std::size_t k = 0; k < l_values.size(); ++k) {
    if (l_values[k] < 1) throw ValidationError("level counts must be >= 1");
    if (k > 0 && l_values[k] <= l_values[k - 1])
      throw ValidationError("level counts must be strictly increasing");
  }
  const bool random = std::holds_alternative<RandomDraw>(noise);
  if (random && !seed) throw ValidationError("a random sigma draw requires a seed");

  CapacityCurve curve{range, noise, {}};
  curve.points.reserve(l_values.size());
  for (std::size_t L : l_values) {
    std::optional<std::uint64_t> level_seed;
    if (random) level_seed = derive_seed(*seed, {L});
    const Channel channel = make_channel(range, L, noise, level_seed);
    try {
      curve.points.push_back({L, mutual_information(channel, policy).bits});
    } catch (const ConvergenceError& e) {
      detail::rethrow_with(e, "at L = " + std::to_string(L));
    }
  }
  return curve;
}

inline std::vector<std::size_t> level_range(std::size_t first, std::size_t last) {
  std::vector<std::size_t> out;
  for (std::size_t L = first; L <= last; ++L) out.push_back(L);
  return out;
}

/// Saturation capacity: C at L = 8, 16, 32, ... until C(2L) - C(L) < tol.
inline CmaxResult find_cmax(const ConductanceRange& range, const NoiseModel& noise,
                            double saturation_tol = 1e-3, const GridPolicy& policy = {},
                            std::optional<std::uint64_t> seed = std::nullopt,
                            std::size_t max_levels = 4096) {
  if (!(saturation_tol > 0.0)) throw ValidationError("saturation tolerance must be > 0 bits");
  auto capacity_at = [&](std::size_t L) {
    const std::size_t one[] = {L};
    return capacity_curve(range, noise, one, seed, policy).points.front().bits;
  };
  std::size_t L = 8;
  double before = capacity_at(L);
  double current = before;
  while (2 * L <= max_levels) {
    before = current;
    current = capacity_at(2 * L);
    if (current - before < saturation_tol) return {current, 2 * L};
    L *= 2;
  }
  throw SaturationError("capacity did not saturate by L = " + std::to_string(max_levels) +
                            " for range " + detail::describe(range),
                        before, current);
}

/// Smallest L with C(L) >= 0.95 c_max, scanning a curve that starts at L = 1
/// with step 1. Only defined for constant noise.
inline SaturationSummary find_lt(const CapacityCurve& curve, double c_max) {
  const auto* constant = std::get_if<ConstantNoise>(&curve.noise);
  if (!constant) throw ValidationError("L_T ratio is only defined for constant sigma");
  const double threshold = kSaturationFraction * c_max;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const auto& p = curve.points[k];
    if (p.level_count != k + 1)
      throw ValidationError("curve must hold consecutive L values starting at 1");
    if (p.bits >= threshold) {
      SaturationSummary s;
      s.c_max = c_max;
      s.l_t = p.level_count;
      s.delta_at_lt = curve.range.span() / static_cast<double>(p.level_count);
      s.ratio = s.delta_at_lt / constant->sigma;
      return s;
    }
  }
  throw IncompleteCurveError("curve never reaches 0.95 * C_max = " + std::to_string(threshold) +
                             " bits");
}

struct SaturationAnalysis {
  CmaxResult cmax;
  CapacityCurve curve;  // L = 1 .. l_t
  SaturationSummary summary;
};

/// find_cmax followed by a step-1 scan from L = 1 up to the threshold crossing.
inline SaturationAnalysis analyze_saturation(const ConductanceRange& range, double sigma,
                                             double saturation_tol = 1e-3,
                                             const GridPolicy& policy = {}) {
  const NoiseModel noise = ConstantNoise{sigma};
  SaturationAnalysis out{find_cmax(range, noise, saturation_tol, policy), {range, noise, {}}, {}};
  const double threshold = kSaturationFraction * out.cmax.c_max;
  for (std::size_t L = 1; L <= out.cmax.l_used; ++L) {
    const std::size_t one[] = {L};
    out.curve.points.push_back(capacity_curve(range, noise, one, std::nullopt, policy).points[0]);
    if (out.curve.points.back().bits >= threshold) break;
  }
  out.summary = find_lt(out.curve, out.cmax.c_max);
  return out;
}

inline PowerLawFit fit_power_law(std::span<const SigmaCmax> points) {
  if (points.size() < 3) throw ValidationError("power-law fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    if (!(p.sigma > 0.0) || !(p.c_max > 0.0))
      throw ValidationError("power-law fit needs positive sigma and C_max values");
    mx += std::log(p.sigma);
    my += std::log(p.c_max);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.sigma) - mx;
    const double dy = std::log(p.c_max) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ValidationError("power-law fit needs at least two distinct sigma values");

  PowerLawFit fit;
  fit.b = sxy / sxx;
  const double intercept = my - fit.b * mx;
  fit.a = std::exp(intercept);
  double ss_res = 0.0;
  for (const auto& p : points) {
    const double r = std::log(p.c_max) - (intercept + fit.b * std::log(p.sigma));
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

struct RangeStudyRow {
  ConductanceRange range;
  double sigma = 0.0;
  CmaxResult cmax;
};

struct RangeFit {
  ConductanceRange range;
  std::optional<PowerLawFit> fit;  // present when >= 3 sigma values were studied
};

struct RangeStudy {
  std::vector<RangeStudyRow> rows;  // range-major, sigma-minor
  std::vector<RangeFit> fits;
};

/// Ranges behind the default range study.
inline std::vector<ConductanceRange> preset_ranges() {
  return {{1.0, 250.0}, {10.0, 200.0}, {1.0, 125.0}, {50.0, 250.0}};
}

inline std::vector<double> preset_sigmas() { return {3.0, 6.0, 10.0, 15.0, 20.0}; }

inline RangeStudy range_study(std::span<const ConductanceRange> ranges,
                              std::span<const double> sigmas, double saturation_tol = 1e-3,
                              const GridPolicy& policy = {}) {
  if (ranges.empty() || sigmas.empty())
    throw ValidationError("range study needs at least one range and one sigma");
  RangeStudy study;
  for (const auto& range : ranges) {
    std::vector<SigmaCmax> points;
    for (double sigma : sigmas) {
      CmaxResult cmax;
      try {
        cmax = find_cmax(range, ConstantNoise{sigma}, saturation_tol, policy);
      } catch (const ConvergenceError& e) {
        detail::rethrow_with(e, "(range " + detail::describe(range) +
                                    ", sigma " + std::to_string(sigma) + " uS)");
      }
      study.rows.push_back({range, sigma, cmax});
      points.push_back({sigma, cmax.c_max});
    }
    RangeFit rf{range, std::nullopt};
    if (points.size() >= 3) rf.fit = fit_power_law(points);
    study.fits.push_back(std::move(rf));
  }
  return study;
}

}  // namespace rramcap
