#pragma once

// Command-line front end. Kept in a header so the test suites can drive it
// in-process; tools/rramcap.cpp is the thin main().

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rramcap/capacity.hpp"
#include "rramcap/channel.hpp"
#include "rramcap/errors.hpp"
#include "rramcap/monte_carlo.hpp"
#include "rramcap/survey.hpp"
#include "rramcap/sweep.hpp"

namespace rramcap::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kValidation = 1, kUsage = 2, kConvergence = 3 };

/// Everything a subcommand may read from the command line.
struct RunConfig {
  std::string subcommand;
  double g_min = 1.0;
  double g_max = 250.0;
  std::optional<double> sigma;
  std::optional<std::string> draw;
  double clip_min = 0.1;
  std::optional<std::string> noise_file;
  std::optional<std::size_t> levels;
  std::optional<std::size_t> l_max;
  std::optional<std::string> l_list;
  std::size_t trials = 100;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  double grid_tol = 1e-5;
  std::size_t grid_max = std::size_t{1} << 20;
  double sat_tol = 1e-3;
  std::optional<std::string> preset;
  std::optional<std::string> ranges;
  std::optional<std::string> sigmas;
  std::optional<std::string> input;
  std::optional<std::string> noise_out;
};

namespace detail {

/// Six significant digits, fixed for stable diffs.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline nlohmann::json jnum(double v) { return std::stod(num(v)); }

inline double parse_double(std::string_view text, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError(what + ": '" + std::string(text) + "' is not a number");
  return v;
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline std::vector<double> parse_double_list(std::string_view text, const std::string& what) {
  std::vector<double> out;
  for (auto part : split(text, ',')) out.push_back(parse_double(part, what));
  return out;
}

inline std::vector<std::size_t> parse_level_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (auto part : split(text, ',')) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
      throw ValidationError("--l-list: '" + std::string(part) + "' is not a level count");
    out.push_back(v);
  }
  return out;
}

/// "uniform:<lo>:<hi>" or "normal:<mean>:<sd>".
inline RandomDraw parse_draw(std::string_view text, double clip_min) {
  const auto parts = split(text, ':');
  if (parts.size() != 3)
    throw ValidationError("--draw must be uniform:<lo>:<hi> or normal:<mean>:<sd>");
  const double x = parse_double(parts[1], "--draw");
  const double y = parse_double(parts[2], "--draw");
  RandomDraw draw;
  draw.clip_min = clip_min;
  if (parts[0] == "uniform")
    draw.kind = UniformDraw{x, y};
  else if (parts[0] == "normal")
    draw.kind = NormalDraw{x, y};
  else
    throw ValidationError("--draw: unknown distribution '" + std::string(parts[0]) + "'");
  ::rramcap::detail::validate_draw(draw);
  return draw;
}

inline std::vector<ConductanceRange> parse_ranges(std::string_view text) {
  std::vector<ConductanceRange> out;
  for (auto part : split(text, ',')) {
    const auto bounds = split(part, ':');
    if (bounds.size() != 2) throw ValidationError("--ranges entries must be <g_min>:<g_max>");
    ConductanceRange r{parse_double(bounds[0], "--ranges"), parse_double(bounds[1], "--ranges")};
    r.validate();
    out.push_back(r);
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Reads a per-level noise file written by `ingest --noise-out`.
inline std::vector<double> read_noise_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t row = 0;
  std::vector<double> sigmas;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (sigmas.empty() && row == 1) {
      if (line != "level,mean_us,sigma_us")
        throw ParseError("expected header 'level,mean_us,sigma_us'", row);
      continue;
    }
    const auto parts = split(line, ',');
    if (parts.size() != 3) throw ParseError("expected 3 fields level,mean_us,sigma_us", row);
    sigmas.push_back(parse_double(parts[2], "sigma_us (row " + std::to_string(row) + ")"));
  }
  return sigmas;
}

class Emitter {
 public:
  Emitter(const RunConfig& cfg, std::ostream& out, std::ostream& err)
      : cfg_(cfg), out_(out), err_(err) {
    if (cfg.format) {
      if (*cfg.format != "csv" && *cfg.format != "json")
        throw ValidationError("--format must be csv or json");
      json_ = *cfg.format == "json";
    } else if (cfg.out) {
      json_ = cfg.out->size() >= 5 && cfg.out->ends_with(".json");
    }
  }

  bool json() const noexcept { return json_; }

  /// Informational lines go to stdout when data goes to a file, else stderr.
  std::ostream& info() { return cfg_.out ? out_ : err_; }

  void write(const std::string& csv, const nlohmann::json& doc) {
    const std::string body = json_ ? doc.dump(2) + "\n" : csv;
    if (!cfg_.out) {
      out_ << body;
      return;
    }
    std::ofstream f(*cfg_.out, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write '" + *cfg_.out + "'");
    f << body;
    if (!f) throw ValidationError("failed writing '" + *cfg_.out + "'");
  }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
  std::ostream& err_;
  bool json_ = false;
};

inline GridPolicy grid_policy(const RunConfig& cfg) {
  GridPolicy policy;
  if (!(cfg.grid_tol > 0.0)) throw ValidationError("--grid-tol must be > 0 bits");
  policy.refine_tolerance_bits = cfg.grid_tol;
  if (cfg.grid_max < policy.initial_resolution)
    throw ValidationError("--grid-max must be >= " + std::to_string(policy.initial_resolution) + " intervals");
  policy.max_resolution = cfg.grid_max;
  return policy;
}

inline nlohmann::json meta(const RunConfig& cfg, const GridPolicy& policy) {
  nlohmann::json m;
  m["tool"] = "rramcap";
  m["version"] = kVersion;
  m["command"] = cfg.subcommand;
  m["seed"] = cfg.seed ? nlohmann::json(*cfg.seed) : nlohmann::json(nullptr);
  m["grid"] = {{"initial_resolution", policy.initial_resolution},
               {"refine_tolerance_bits", policy.refine_tolerance_bits},
               {"max_resolution", policy.max_resolution}};
  return m;
}

inline ConductanceRange range_of(const RunConfig& cfg) {
  ConductanceRange r{cfg.g_min, cfg.g_max};
  r.validate();
  return r;
}

/// --sigma, --draw or (capacity only) --noise-file; exactly one.
inline NoiseModel noise_of(const RunConfig& cfg, bool allow_file) {
  const int given = int(cfg.sigma.has_value()) + int(cfg.draw.has_value()) +
                    int(allow_file && cfg.noise_file.has_value());
  if (given != 1)
    throw ValidationError(allow_file ? "give exactly one of --sigma, --draw, --noise-file"
                                     : "give exactly one of --sigma, --draw");
  if (cfg.sigma) {
    if (!(*cfg.sigma > 0.0)) throw ValidationError("--sigma must be > 0 uS");
    return ConstantNoise{*cfg.sigma};
  }
  if (cfg.draw) {
    if (!cfg.seed) throw ValidationError("--draw requires --seed");
    return parse_draw(*cfg.draw, cfg.clip_min);
  }
  return PerLevelNoise{read_noise_file(*cfg.noise_file)};
}

inline std::vector<std::size_t> levels_of(const RunConfig& cfg) {
  if (cfg.l_max && cfg.l_list) throw ValidationError("give only one of --l-max, --l-list");
  if (cfg.l_list) return parse_level_list(*cfg.l_list);
  if (cfg.l_max) {
    if (*cfg.l_max < 1) throw ValidationError("--l-max must be >= 1");
    return level_range(1, *cfg.l_max);
  }
  throw ValidationError("one of --l-max, --l-list is required");
}

inline nlohmann::json curve_json(const std::vector<CurvePoint>& points) {
  auto arr = nlohmann::json::array();
  for (const auto& p : points) arr.push_back({{"L", p.level_count}, {"capacity_bits", jnum(p.bits)}});
  return arr;
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_capacity(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Emitter emit(cfg, out, err);
  const auto policy = grid_policy(cfg);
  if (!cfg.levels || *cfg.levels < 1) throw ValidationError("--levels must be >= 1");
  const auto channel = make_channel(range_of(cfg), *cfg.levels, noise_of(cfg, true), cfg.seed);
  const auto r = mutual_information(channel, policy);

  std::string csv = "L,capacity_bits,ideal_bits,coupling_bits,resolution,convergence_delta_bits\n";
  csv += std::to_string(*cfg.levels) + "," + num(r.bits) + "," + num(r.ideal_bits) + "," +
         num(r.coupling_bits) + "," + std::to_string(r.resolution_used) + "," +
         num(r.convergence_delta) + "\n";
  nlohmann::json doc;
  doc["meta"] = meta(cfg, policy);
  doc["range"] = {{"g_min_us", jnum(cfg.g_min)}, {"g_max_us", jnum(cfg.g_max)}};
  auto sig = nlohmann::json::array();
  for (double s : channel.sigmas()) sig.push_back(jnum(s));
  doc["sigmas_us"] = sig;
  doc["result"] = {{"L", *cfg.levels},
                   {"capacity_bits", jnum(r.bits)},
                   {"ideal_bits", jnum(r.ideal_bits)},
                   {"coupling_bits", jnum(r.coupling_bits)},
                   {"resolution", r.resolution_used},
                   {"convergence_delta_bits", jnum(r.convergence_delta)}};
  emit.write(csv, doc);
  return kOk;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Emitter emit(cfg, out, err);
  const auto policy = grid_policy(cfg);
  const auto range = range_of(cfg);
  const auto noise = noise_of(cfg, false);
  const auto levels = levels_of(cfg);
  const auto curve = capacity_curve(range, noise, levels, cfg.seed, policy);

  std::string csv = "L,capacity_bits\n";
  for (const auto& p : curve.points) csv += std::to_string(p.level_count) + "," + num(p.bits) + "\n";

  nlohmann::json doc;
  doc["meta"] = meta(cfg, policy);
  doc["range"] = {{"g_min_us", jnum(range.g_min)}, {"g_max_us", jnum(range.g_max)}};
  doc["points"] = curve_json(curve.points);
  doc["summary"] = nullptr;

  if (std::holds_alternative<ConstantNoise>(noise)) {
    const auto cmax = find_cmax(range, noise, cfg.sat_tol, policy);
    try {
      const auto s = find_lt(curve, cmax.c_max);
      doc["summary"] = {{"c_max_bits", jnum(s.c_max)},
                        {"l_used", cmax.l_used},
                        {"l_t", s.l_t},
                        {"delta_at_lt_us", jnum(s.delta_at_lt)},
                        {"ratio", jnum(s.ratio)}};
      emit.info() << "c_max_bits=" << num(s.c_max) << " l_t=" << s.l_t
                  << " delta_at_lt_us=" << num(s.delta_at_lt) << " ratio=" << num(s.ratio)
                  << "\n";
    } catch (const std::exception& e) {
      emit.info() << "c_max_bits=" << num(cmax.c_max) << " (no L_T: " << e.what() << ")\n";
      doc["summary"] = {{"c_max_bits", jnum(cmax.c_max)}, {"l_used", cmax.l_used}};
    }
  }
  emit.write(csv, doc);
  return kOk;
}

inline int cmd_cmax(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Emitter emit(cfg, out, err);
  const auto policy = grid_policy(cfg);
  const auto range = range_of(cfg);
  const auto noise = noise_of(cfg, false);
  const auto r = find_cmax(range, noise, cfg.sat_tol, policy, cfg.seed);

  const std::string sigma_text = cfg.sigma ? num(*cfg.sigma) : std::string();
  std::string csv = "g_min_us,g_max_us,sigma_us,c_max_bits,l_used\n";
  csv += num(range.g_min) + "," + num(range.g_max) + "," + sigma_text + "," + num(r.c_max) + "," +
         std::to_string(r.l_used) + "\n";
  nlohmann::json doc;
  doc["meta"] = meta(cfg, policy);
  doc["result"] = {{"g_min_us", jnum(range.g_min)},
                   {"g_max_us", jnum(range.g_max)},
                   {"sigma_us", cfg.sigma ? jnum(*cfg.sigma) : nlohmann::json(nullptr)},
                   {"draw", cfg.draw ? nlohmann::json(*cfg.draw) : nlohmann::json(nullptr)},
                   {"saturation_tol_bits", cfg.sat_tol},
                   {"c_max_bits", jnum(r.c_max)},
                   {"l_used", r.l_used}};
  emit.write(csv, doc);
  return kOk;
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Emitter emit(cfg, out, err);
  const auto policy = grid_policy(cfg);
  std::vector<ConductanceRange> ranges;
  if (cfg.preset && cfg.ranges) throw ValidationError("give only one of --preset, --ranges");
  if (cfg.preset) {
    if (*cfg.preset != "paper-ranges")
      throw ValidationError("--preset: unknown preset '" + *cfg.preset + "'");
    ranges = preset_ranges();
  } else if (cfg.ranges) {
    ranges = parse_ranges(*cfg.ranges);
  } else {
    ranges = {range_of(cfg)};
  }
  const auto sigmas = cfg.sigmas ? parse_double_list(*cfg.sigmas, "--sigmas") : preset_sigmas();
  for (double s : sigmas)
    if (!(s > 0.0)) throw ValidationError("--sigmas values must be > 0 uS");

  const auto study = range_study(ranges, sigmas, cfg.sat_tol, policy);

  std::string csv = "g_min_us,g_max_us,a,b,r_squared\n";
  nlohmann::json doc;
  doc["meta"] = meta(cfg, policy);
  auto fits = nlohmann::json::array();
  for (const auto& rf : study.fits) {
    nlohmann::json f = {{"g_min_us", jnum(rf.range.g_min)}, {"g_max_us", jnum(rf.range.g_max)}};
    if (rf.fit) {
      csv += num(rf.range.g_min) + "," + num(rf.range.g_max) + "," + num(rf.fit->a) + "," +
             num(rf.fit->b) + "," + num(rf.fit->r_squared) + "\n";
      auto res = nlohmann::json::array();
      for (double r : rf.fit->residuals) res.push_back(jnum(r));
      f["a"] = jnum(rf.fit->a);
      f["b"] = jnum(rf.fit->b);
      f["r_squared"] = jnum(rf.fit->r_squared);
      f["residuals"] = res;
    }
    fits.push_back(f);
  }
  auto table = nlohmann::json::array();
  for (const auto& row : study.rows)
    table.push_back({{"g_min_us", jnum(row.range.g_min)},
                     {"g_max_us", jnum(row.range.g_max)},
                     {"sigma_us", jnum(row.sigma)},
                     {"c_max_bits", jnum(row.cmax.c_max)},
                     {"l_used", row.cmax.l_used}});
  doc["fits"] = fits;
  doc["table"] = table;
  if (sigmas.size() < 3) emit.info() << "note: fewer than 3 sigma values, no power-law fit\n";
  emit.write(csv, doc);
  return kOk;
}

inline int cmd_montecarlo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Emitter emit(cfg, out, err);
  TrialSpec spec;
  spec.policy = grid_policy(cfg);
  spec.range = range_of(cfg);
  if (!cfg.draw) throw ValidationError("--draw is required");
  if (!cfg.seed) throw ValidationError("--seed is required");
  if (cfg.sigma) throw ValidationError("--sigma is not used by montecarlo; give --draw");
  spec.sigma_draw = parse_draw(*cfg.draw, cfg.clip_min);
  spec.l_values = levels_of(cfg);
  spec.n_trials = cfg.trials;
  spec.seed = *cfg.seed;
  const auto ens = run_trials(spec);

  std::string csv = "trial,L,capacity_bits\n";
  auto trials = nlohmann::json::array();
  for (std::size_t t = 0; t < ens.curves.size(); ++t) {
    for (const auto& p : ens.curves[t].points)
      csv += std::to_string(t) + "," + std::to_string(p.level_count) + "," + num(p.bits) + "\n";
    trials.push_back({{"trial", t}, {"points", curve_json(ens.curves[t].points)}});
  }
  nlohmann::json doc;
  doc["meta"] = meta(cfg, spec.policy);
  doc["range"] = {{"g_min_us", jnum(spec.range.g_min)}, {"g_max_us", jnum(spec.range.g_max)}};
  doc["draw"] = *cfg.draw;
  doc["clip_min_us"] = jnum(cfg.clip_min);
  doc["trials"] = trials;
  doc["mean_curve"] = curve_json(ens.mean_curve);
  doc["envelope_high"] = {{"sigma_us", jnum(ens.sigma_lo)},
                          {"points", curve_json(ens.envelope_high.points)}};
  doc["envelope_low"] = {{"sigma_us", jnum(ens.sigma_hi)},
                         {"points", curve_json(ens.envelope_low.points)}};
  doc["final_l_mean_bits"] = jnum(ens.final_l_mean);
  emit.info() << "final_l_mean_bits=" << num(ens.final_l_mean) << " trials=" << ens.curves.size()
              << "\n";
  emit.write(csv, doc);
  return kOk;
}

inline int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Emitter emit(cfg, out, err);
  if (!cfg.input) throw ValidationError("--in is required");
  const auto records = parse_survey_csv(read_file(*cfg.input));
  const auto s = summarize(records);

  std::string csv = "count,g_min_us,g_max_us,sigma_min_us,sigma_max_us,slope\n";
  csv += std::to_string(s.count) + "," + num(s.g_min) + "," + num(s.g_max) + "," +
         num(s.sigma_min) + "," + num(s.sigma_max) + "," + (s.slope ? num(*s.slope) : "") + "\n";
  nlohmann::json doc;
  doc["meta"] = {{"tool", "rramcap"}, {"version", kVersion}, {"command", "ingest"}};
  doc["summary"] = {{"count", s.count},
                    {"g_min_us", jnum(s.g_min)},
                    {"g_max_us", jnum(s.g_max)},
                    {"sigma_min_us", jnum(s.sigma_min)},
                    {"sigma_max_us", jnum(s.sigma_max)},
                    {"slope", s.slope ? jnum(*s.slope) : nlohmann::json(nullptr)}};

  if (cfg.noise_out) {
    if (!cfg.levels || *cfg.levels < 1) throw ValidationError("--noise-out requires --levels >= 1");
    const auto scheme = build_level_scheme(range_of(cfg), *cfg.levels);
    const auto model = noise_model_from_survey(records, scheme);
    std::string noise = "level,mean_us,sigma_us\n";
    for (std::size_t i = 0; i < scheme.means.size(); ++i)
      noise += std::to_string(i) + "," + num(scheme.means[i]) + "," + num(model.sigmas[i]) + "\n";
    std::ofstream f(*cfg.noise_out, std::ios::binary | std::ios::trunc);
    if (!f || !(f << noise)) throw ValidationError("cannot write '" + *cfg.noise_out + "'");
  }
  emit.write(csv, doc);
  return kOk;
}

inline void add_range(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--g-min", cfg.g_min, "Lower conductance bound (μS)")->capture_default_str();
  sub->add_option("--g-max", cfg.g_max, "Upper conductance bound (μS)")->capture_default_str();
}

inline void add_noise(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--sigma", cfg.sigma, "Constant per-level standard deviation (μS)");
  sub->add_option("--draw", cfg.draw,
                  "Random per-level sigma: uniform:<lo>:<hi> or normal:<mean>:<sd> (μS)");
  sub->add_option("--clip-min", cfg.clip_min, "Redraw sampled sigma below this value (μS)")
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Seed for random sigma draws");
}

inline void add_grid(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--grid-tol", cfg.grid_tol,
                  "Stop doubling the quadrature grid when capacity changes less than this (bits)")
      ->capture_default_str();
  sub->add_option("--grid-max", cfg.grid_max,
                  "Largest quadrature grid tried before reporting non-convergence (intervals)")
      ->capture_default_str();
}

inline void add_output(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--out", cfg.out, "Output file (default: stdout)");
  sub->add_option("--format", cfg.format, "csv or json (default: from --out extension, else csv)");
}

inline void add_levels(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--l-max", cfg.l_max, "Evaluate L = 1..n levels");
  sub->add_option("--l-list", cfg.l_list, "Comma-separated, increasing level counts");
}

inline void add_sat(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--sat-tol", cfg.sat_tol,
                  "C_max stops when doubling L gains less than this (bits)")
      ->capture_default_str();
}

}  // namespace detail

/// Runs one invocation. args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Storage capacity of open-loop written multi-level memory cells (bits)", "rramcap"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* capacity = app.add_subcommand("capacity", "Capacity of one channel (bits)");
  detail::add_range(capacity, cfg);
  detail::add_noise(capacity, cfg);
  capacity->add_option("--noise-file", cfg.noise_file,
                       "Per-level sigma file from `ingest --noise-out` (μS)");
  capacity->add_option("--levels", cfg.levels, "Number of pre-defined levels L")->required();
  detail::add_grid(capacity, cfg);
  detail::add_output(capacity, cfg);

  auto* sweep = app.add_subcommand("sweep", "Capacity against L plus C_max, L_T, delta_G/sigma (bits)");
  detail::add_range(sweep, cfg);
  detail::add_noise(sweep, cfg);
  detail::add_levels(sweep, cfg);
  detail::add_sat(sweep, cfg);
  detail::add_grid(sweep, cfg);
  detail::add_output(sweep, cfg);

  auto* cmax = app.add_subcommand("cmax", "Saturation capacity C_max by doubling L (bits)");
  detail::add_range(cmax, cfg);
  detail::add_noise(cmax, cfg);
  detail::add_sat(cmax, cfg);
  detail::add_grid(cmax, cfg);
  detail::add_output(cmax, cfg);

  auto* fit = app.add_subcommand("fit", "C_max over ranges and sigmas with power-law fits");
  detail::add_range(fit, cfg);
  fit->add_option("--preset", cfg.preset,
                  "paper-ranges: [1,250], [10,200], [1,125], [50,250] μS");
  fit->add_option("--ranges", cfg.ranges, "Comma-separated <g_min>:<g_max> pairs (μS)");
  fit->add_option("--sigmas", cfg.sigmas, "Comma-separated sigma values (μS; default 3,6,10,15,20)");
  detail::add_sat(fit, cfg);
  detail::add_grid(fit, cfg);
  detail::add_output(fit, cfg);

  auto* mc = app.add_subcommand("montecarlo", "Ensemble of curves with random per-level sigma (bits)");
  cfg.g_min = 10.0;
  cfg.g_max = 200.0;
  detail::add_range(mc, cfg);
  detail::add_noise(mc, cfg);
  detail::add_levels(mc, cfg);
  mc->add_option("--trials", cfg.trials, "Number of trials")->capture_default_str();
  detail::add_grid(mc, cfg);
  detail::add_output(mc, cfg);

  auto* ingest = app.add_subcommand("ingest", "Parse and summarize a g_us,sigma_us,source survey CSV");
  ingest->add_option("--in", cfg.input, "Survey CSV path")->required();
  ingest->add_option("--noise-out", cfg.noise_out, "Write a per-level sigma file (μS)");
  ingest->add_option("--levels", cfg.levels, "Levels for --noise-out");
  detail::add_range(ingest, cfg);
  detail::add_output(ingest, cfg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ConversionError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run `rramcap --help` for usage\n";
    return kUsage;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  cfg.subcommand = chosen->get_name();
  // Subcommands other than montecarlo default to the full [1, 250] uS window.
  if (cfg.subcommand != "montecarlo") {
    if (chosen->count("--g-min") == 0) cfg.g_min = 1.0;
    if (chosen->count("--g-max") == 0) cfg.g_max = 250.0;
  }

  try {
    if (cfg.subcommand == "capacity") return detail::cmd_capacity(cfg, out, err);
    if (cfg.subcommand == "sweep") return detail::cmd_sweep(cfg, out, err);
    if (cfg.subcommand == "cmax") return detail::cmd_cmax(cfg, out, err);
    if (cfg.subcommand == "fit") return detail::cmd_fit(cfg, out, err);
    if (cfg.subcommand == "montecarlo") return detail::cmd_montecarlo(cfg, out, err);
    return detail::cmd_ingest(cfg, out, err);
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << "\n";
    return kConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace rramcap::cli
