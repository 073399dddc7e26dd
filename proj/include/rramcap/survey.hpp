#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rramcap/channel.hpp"
#include "rramcap/errors.hpp"

namespace rramcap {

/// One (G, sigma_G) observation from the literature or a measured device.
struct SurveyRecord {
  double g = 0.0;      // uS
  double sigma = 0.0;  // uS
  std::string source;
  std::size_t row = 0;  // line number in the originating file, 0 if synthetic

  friend bool operator==(const SurveyRecord& x, const SurveyRecord& y) {
    return x.g == y.g && x.sigma == y.sigma && x.source == y.source;
  }
};

struct SurveySummary {
  std::size_t count = 0;
  double g_min = 0.0;
  double g_max = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::optional<double> slope;  // OLS slope of sigma on G; absent for < 2 distinct G
};

inline constexpr std::string_view kSurveyHeader = "g_us,sigma_us,source";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_positive(std::string_view field, const char* column, std::size_t row) {
  field = trim(field);
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
    throw ParseError(std::string(column) + " is not a number: '" + std::string(field) + "'", row);
  if (!(value > 0.0)) throw ParseError(std::string(column) + " must be positive", row);
  return value;
}

inline std::string format_shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Reads `g_us,sigma_us,source` CSV. Lines starting with '#' and blank lines
/// are skipped; CRLF is accepted. The source column takes the rest of the line.
inline std::vector<SurveyRecord> parse_survey_csv(std::istream& in) {
  std::vector<SurveyRecord> records;
  std::string line;
  std::size_t row = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++row;
    std::string_view view(line);
    if (row == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.starts_with("#") || detail::trim(view).empty()) continue;
    if (!seen_header) {
      if (view != kSurveyHeader)
        throw ParseError("expected header '" + std::string(kSurveyHeader) + "'", row);
      seen_header = true;
      continue;
    }
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos)
      throw ParseError("expected 3 fields " + std::string(kSurveyHeader), row);
    SurveyRecord r;
    r.g = detail::parse_positive(view.substr(0, c1), "g_us", row);
    r.sigma = detail::parse_positive(view.substr(c1 + 1, c2 - c1 - 1), "sigma_us", row);
    r.source = std::string(view.substr(c2 + 1));
    r.row = row;
    records.push_back(std::move(r));
  }
  if (!seen_header) throw ParseError("expected header '" + std::string(kSurveyHeader) + "'", row + 1);
  return records;
}

inline std::vector<SurveyRecord> parse_survey_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_survey_csv(in);
}

inline std::string write_survey_csv(std::span<const SurveyRecord> records) {
  std::string out(kSurveyHeader);
  out += '\n';
  for (const auto& r : records) {
    out += detail::format_shortest(r.g);
    out += ',';
    out += detail::format_shortest(r.sigma);
    out += ',';
    out += r.source;
    out += '\n';
  }
  return out;
}

inline SurveySummary summarize(std::span<const SurveyRecord> records) {
  if (records.empty()) throw ValidationError("survey summary needs at least one record");
  SurveySummary s;
  s.count = records.size();
  s.g_min = s.g_max = records[0].g;
  s.sigma_min = s.sigma_max = records[0].sigma;
  double mg = 0.0, ms = 0.0;
  for (const auto& r : records) {
    s.g_min = std::min(s.g_min, r.g);
    s.g_max = std::max(s.g_max, r.g);
    s.sigma_min = std::min(s.sigma_min, r.sigma);
    s.sigma_max = std::max(s.sigma_max, r.sigma);
    mg += r.g;
    ms += r.sigma;
  }
  const double n = static_cast<double>(records.size());
  mg /= n;
  ms /= n;
  double sgg = 0.0, sgs = 0.0;
  for (const auto& r : records) {
    sgg += (r.g - mg) * (r.g - mg);
    sgs += (r.g - mg) * (r.sigma - ms);
  }
  if (records.size() >= 2 && sgg > 0.0) s.slope = sgs / sgg;
  return s;
}

/// Per-level sigma by nearest record in G; ties go to the lower G.
inline PerLevelNoise noise_model_from_survey(std::span<const SurveyRecord> records,
                                             const LevelScheme& scheme) {
  if (records.empty()) throw ValidationError("noise model needs at least one survey record");
  std::vector<SurveyRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SurveyRecord& x, const SurveyRecord& y) { return x.g < y.g; });
  PerLevelNoise model;
  model.sigmas.reserve(scheme.means.size());
  for (double mean : scheme.means) {
    auto first_at_or_above = [&](double g) {
      return std::lower_bound(sorted.begin(), sorted.end(), g,
                              [](const SurveyRecord& r, double v) { return r.g < v; });
    };
    auto hi = first_at_or_above(mean);
    double nearest_g;
    if (hi == sorted.end()) {
      nearest_g = sorted.back().g;
    } else if (hi == sorted.begin()) {
      nearest_g = hi->g;
    } else {
      const double lower_g = std::prev(hi)->g;
      nearest_g = (mean - lower_g) <= (hi->g - mean) ? lower_g : hi->g;
    }
    // Records sharing a G value keep their file order; the first one wins.
    model.sigmas.push_back(first_at_or_above(nearest_g)->sigma);
  }
  return model;
}

}  // namespace rramcap
