#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "rramcap/errors.hpp"
#include "rramcap/normal.hpp"

namespace rramcap {

/// Admissible conductance window [g_min, g_max] in uS.
struct ConductanceRange {
  double g_min = 0.0;
  double g_max = 0.0;

  double span() const noexcept { return g_max - g_min; }
  double midpoint() const noexcept { return 0.5 * (g_min + g_max); }
  bool contains(double g) const noexcept { return g >= g_min && g <= g_max; }

  void validate() const {
    if (!std::isfinite(g_min) || !std::isfinite(g_max))
      throw ValidationError("conductance range bounds must be finite");
    if (g_min < 0.0) throw ValidationError("g_min must be >= 0 uS");
    if (!(g_max > g_min)) throw ValidationError("g_max must be greater than g_min");
  }

  friend bool operator==(const ConductanceRange&, const ConductanceRange&) = default;
};

/// L evenly spaced level means with half-spacing margins at both edges.
struct LevelScheme {
  ConductanceRange range;
  std::size_t level_count = 0;
  double delta_g = 0.0;
  std::vector<double> means;
};

inline LevelScheme build_level_scheme(const ConductanceRange& range, std::size_t level_count) {
  range.validate();
  if (level_count == 0) throw ValidationError("level count must be >= 1");
  LevelScheme scheme{range, level_count, range.span() / static_cast<double>(level_count), {}};
  scheme.means.reserve(level_count);
  for (std::size_t i = 0; i < level_count; ++i)
    scheme.means.push_back(range.g_min + scheme.delta_g * (0.5 + static_cast<double>(i)));
  return scheme;
}

// ---------------------------------------------------------------------------
// Noise models

struct ConstantNoise {
  double sigma = 0.0;
};

struct PerLevelNoise {
  std::vector<double> sigmas;
};

struct UniformDraw {
  double lo = 0.0;
  double hi = 0.0;
};

struct NormalDraw {
  double mean = 0.0;
  double sd = 0.0;
};

/// Independent per-level sigma draws; values below clip_min are redrawn.
struct RandomDraw {
  std::variant<UniformDraw, NormalDraw> kind;
  double clip_min = 0.1;
};

using NoiseModel = std::variant<ConstantNoise, PerLevelNoise, RandomDraw>;

namespace detail {

inline void require_positive_sigma(double sigma, const char* what) {
  if (!std::isfinite(sigma) || !(sigma > 0.0))
    throw ValidationError(std::string(what) + " must be a positive finite value in uS");
}

inline void validate_draw(const RandomDraw& draw) {
  if (!std::isfinite(draw.clip_min) || !(draw.clip_min > 0.0))
    throw ValidationError("clip_min must be > 0 uS");
  std::visit(
      [&](const auto& kind) {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, UniformDraw>) {
          if (!std::isfinite(kind.lo) || !std::isfinite(kind.hi) || kind.lo > kind.hi)
            throw ValidationError("uniform draw needs finite lo <= hi");
          if (kind.hi < draw.clip_min)
            throw ValidationError("uniform draw support lies entirely below clip_min");
        } else {
          if (!std::isfinite(kind.mean) || !std::isfinite(kind.sd) || !(kind.sd > 0.0))
            throw ValidationError("normal draw needs a finite mean and sd > 0");
        }
      },
      draw.kind);
}

inline double draw_one(const RandomDraw& draw, std::mt19937_64& rng) {
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    double value = std::visit(
        [&](const auto& kind) -> double {
          using K = std::decay_t<decltype(kind)>;
          if constexpr (std::is_same_v<K, UniformDraw>) {
            if (kind.lo == kind.hi) return kind.lo;
            return std::uniform_real_distribution<double>(kind.lo, kind.hi)(rng);
          } else {
            return std::normal_distribution<double>(kind.mean, kind.sd)(rng);
          }
        },
        draw.kind);
    if (value >= draw.clip_min) return value;
  }
  throw ValidationError("sigma draw rejected too often below clip_min");
}

}  // namespace detail

/// Lower/upper sigma bound implied by a draw, when it has one.
inline std::optional<std::pair<double, double>> draw_bounds(const RandomDraw& draw) {
  if (const auto* u = std::get_if<UniformDraw>(&draw.kind))
    return std::pair{std::max(u->lo, draw.clip_min), u->hi};
  return std::nullopt;
}

/// Expands a noise model into one sigma per level. RandomDraw is deterministic
/// for a given seed and requires one.
inline std::vector<double> resolve_noise(const NoiseModel& model, std::size_t level_count,
                                         std::optional<std::uint64_t> seed = std::nullopt) {
  if (level_count == 0) throw ValidationError("level count must be >= 1");
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantNoise>) {
          detail::require_positive_sigma(m.sigma, "sigma");
          return std::vector<double>(level_count, m.sigma);
        } else if constexpr (std::is_same_v<M, PerLevelNoise>) {
          if (m.sigmas.size() != level_count)
            throw ValidationError("per-level sigma count " + std::to_string(m.sigmas.size()) +
                                  " does not match level count " + std::to_string(level_count));
          for (double s : m.sigmas) detail::require_positive_sigma(s, "per-level sigma");
          return m.sigmas;
        } else {
          if (!seed) throw ValidationError("a random sigma draw requires a seed");
          detail::validate_draw(m);
          std::mt19937_64 rng(*seed);
          std::vector<double> sigmas(level_count);
          for (double& s : sigmas) s = detail::draw_one(m, rng);
          return sigmas;
        }
      },
      model);
}

// ---------------------------------------------------------------------------
// Channel

/// Level scheme + resolved per-level sigma + input prior. Every level is a
/// normal density truncated to the range and renormalized. Immutable.
class Channel {
 public:
  Channel(LevelScheme scheme, std::vector<double> sigmas)
      : Channel(std::move(scheme), std::move(sigmas), {}) {}

  /// An empty prior means uniform 1/L.
  Channel(LevelScheme scheme, std::vector<double> sigmas, std::vector<double> prior)
      : scheme_(std::move(scheme)), sigmas_(std::move(sigmas)), prior_(std::move(prior)) {
    scheme_.range.validate();
    const std::size_t L = scheme_.level_count;
    if (L == 0 || scheme_.means.size() != L) throw ValidationError("malformed level scheme");
    if (sigmas_.size() != L)
      throw ValidationError("sigma count " + std::to_string(sigmas_.size()) +
                            " does not match level count " + std::to_string(L));
    for (double s : sigmas_) detail::require_positive_sigma(s, "sigma");

    if (prior_.empty()) prior_.assign(L, 1.0 / static_cast<double>(L));
    if (prior_.size() != L) throw ValidationError("prior length does not match level count");
    double total = 0.0;
    for (double p : prior_) {
      if (!std::isfinite(p) || p < 0.0) throw ValidationError("prior entries must be >= 0");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("prior must sum to 1");

    log_mass_.resize(L);
    inv_sigma_.resize(L);
    log_offset_.resize(L);
    const auto& r = scheme_.range;
    for (std::size_t i = 0; i < L; ++i) {
      const double mu = scheme_.means[i];
      const double s = sigmas_[i];
      const double mass = normal::interval_mass((r.g_min - mu) / s, (r.g_max - mu) / s);
      log_mass_[i] = std::log(mass);
      inv_sigma_[i] = 1.0 / s;
      log_offset_[i] = -std::log(s) - normal::kLogSqrtTwoPi - log_mass_[i];
    }
  }

  const LevelScheme& scheme() const noexcept { return scheme_; }
  const ConductanceRange& range() const noexcept { return scheme_.range; }
  std::size_t level_count() const noexcept { return scheme_.level_count; }
  std::span<const double> means() const noexcept { return scheme_.means; }
  std::span<const double> sigmas() const noexcept { return sigmas_; }
  std::span<const double> prior() const noexcept { return prior_; }

  /// log of the truncation normalizer Phi(b) - Phi(a) for a level.
  double log_truncation_mass(std::size_t level) const { return log_mass_.at(level); }

  /// log p(g | level) for g inside the range; no bounds checks.
  double log_conditional(std::size_t level, double g) const noexcept {
    const double z = (g - scheme_.means[level]) * inv_sigma_[level];
    return log_offset_[level] - 0.5 * z * z;
  }

 private:
  LevelScheme scheme_;
  std::vector<double> sigmas_;
  std::vector<double> prior_;
  std::vector<double> log_mass_;
  std::vector<double> inv_sigma_;
  std::vector<double> log_offset_;
};

/// Builds the evenly spaced scheme and resolves the noise model in one step.
inline Channel make_channel(const ConductanceRange& range, std::size_t level_count,
                            const NoiseModel& noise,
                            std::optional<std::uint64_t> seed = std::nullopt,
                            std::vector<double> prior = {}) {
  auto scheme = build_level_scheme(range, level_count);
  auto sigmas = resolve_noise(noise, level_count, seed);
  return Channel(std::move(scheme), std::move(sigmas), std::move(prior));
}

/// Truncated normal density p(g | level) in 1/uS; zero outside the range.
inline double conditional_density(const Channel& channel, std::size_t level, double g) {
  if (level >= channel.level_count())
    throw IndexError("level " + std::to_string(level) + " out of bounds for " +
                     std::to_string(channel.level_count()) + " levels");
  if (!channel.range().contains(g)) return 0.0;
  return std::exp(channel.log_conditional(level, g));
}

}  // namespace rramcap
