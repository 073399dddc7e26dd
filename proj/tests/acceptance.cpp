// Acceptance report: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rramcap/rramcap.hpp"

using namespace rramcap;

namespace {

int failures = 0;

void report(bool ok, const std::string& id, const std::string& text) {
  std::printf("%s [%s] %s\n", ok ? "PASS" : "FAIL", id.c_str(), text.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Channel random_channel(std::mt19937_64& rng, std::size_t max_levels) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lo = 100.0 * u(rng);
  const double span = 10.0 + 290.0 * u(rng);
  const auto L = std::uniform_int_distribution<std::size_t>(1, max_levels)(rng);
  const auto scheme = build_level_scheme({lo, lo + span}, L);
  std::vector<double> sigmas(L), prior(L);
  double total = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    sigmas[i] = scheme.delta_g * (0.05 + 1.5 * u(rng));
    prior[i] = 0.05 + u(rng);
    total += prior[i];
  }
  for (auto& p : prior) p /= total;
  return Channel(scheme, sigmas, prior);
}

std::string run_tool(const std::string& args, const std::string& out) {
  const std::string cmd = std::string(RRAMCAP_TOOL) + " " + args + " --out " + out + " > /dev/null";
  if (std::system(cmd.c_str()) != 0) return "<command failed: " + cmd + ">";
  std::ifstream in(out, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void headline() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = find_cmax({1.0, 250.0}, ConstantNoise{3.0});
  const double secs = seconds_since(t0);
  const bool ok = std::abs(r.c_max - 4.3) <= 0.15 && secs < 10.0;
  report(ok, "1", fmt("headline C_max on [1,250] uS, sigma 3 uS: %.4f bits (4.3 +/- 0.15), %.2f s (< 10 s)",
                      r.c_max, secs));
}

void transition_ratio() {
  const auto t0 = std::chrono::steady_clock::now();
  bool all = true;
  std::string detail;
  for (double sigma : preset_sigmas()) {
    const auto a = analyze_saturation({1.0, 250.0}, sigma);
    const double ratio = a.summary.ratio;
    const bool ok = ratio >= 3.2 && ratio <= 4.8;
    all = all && ok;
    detail += fmt(" sigma=%g:L_T=%zu,ratio=%.3f%s", sigma, a.summary.l_t, ratio, ok ? "" : "(out)");
  }
  const double secs = seconds_since(t0);
  report(all && secs < 60.0, "2",
         fmt("Delta_G/sigma at L_T in [3.2, 4.8] on [1,250] uS:%s, %.1f s (< 60 s)", detail.c_str(), secs));
}

void noise_and_range(const RangeStudy& study) {
  bool all = true;
  std::string detail;
  const auto sigmas = preset_sigmas();
  for (const auto& f : study.fits) {
    bool decreasing = true;
    double prev = INFINITY;
    for (const auto& row : study.rows) {
      if (!(row.range == f.range)) continue;
      decreasing = decreasing && row.cmax.c_max < prev;
      prev = row.cmax.c_max;
    }
    const bool ok = decreasing && f.fit && f.fit->r_squared >= 0.99 && f.fit->b < 0.0;
    all = all && ok;
    detail += fmt(" [%g,%g]:%s,R2=%.4f,b=%.3f%s", f.range.g_min, f.range.g_max,
                  decreasing ? "decreasing" : "NOT-decreasing", f.fit ? f.fit->r_squared : NAN,
                  f.fit ? f.fit->b : NAN, ok ? "" : "(out)");
  }
  report(all, "3", "C_max strictly decreasing in sigma, log-log R2 >= 0.99, b < 0:" + detail);

  auto at = [&](ConductanceRange r) -> double {
    for (const auto& row : study.rows)
      if (row.range == r && row.sigma == 3.0) return row.cmax.c_max;
    return NAN;
  };
  const double wide = at({1.0, 250.0});
  const double narrow = at({10.0, 200.0});
  report(narrow < wide && narrow < 4.0, "4",
         fmt("range effect at sigma 3 uS: C_max[10,200]=%.4f < C_max[1,250]=%.4f and < 4.0 bits", narrow, wide));
}

void monte_carlo() {
  const auto t0 = std::chrono::steady_clock::now();
  TrialSpec spec;
  spec.seed = 7;
  const auto ens = run_trials(spec);
  std::size_t outside = 0;
  for (const auto& c : ens.curves)
    for (std::size_t k = 0; k < c.points.size(); ++k)
      if (c.points[k].bits < ens.envelope_low.points[k].bits - 1e-6 ||
          c.points[k].bits > ens.envelope_high.points[k].bits + 1e-6)
        ++outside;
  const double secs = seconds_since(t0);
  report(ens.final_l_mean < 3.0 && outside == 0 && secs < 300.0, "5",
         fmt("Monte Carlo [10,200] uS, sigma~U(3,20), %zu trials, L=2..40: final-L mean %.4f bits (< 3.0), "
             "%zu points outside envelopes, %.1f s (< 300 s)",
             ens.curves.size(), ens.final_l_mean, outside, secs));
}

void properties() {
  std::mt19937_64 rng(20260601);

  {
    double worst_low = 0.0, worst_high = 0.0, worst_halving = 0.0;
    for (int t = 0; t < 50; ++t) {
      const auto ch = random_channel(rng, 16);
      const auto r = mutual_information(ch);
      worst_low = std::min(worst_low, r.bits);
      worst_high = std::max(worst_high, r.bits - std::log2(static_cast<double>(ch.level_count())));
      if (ch.level_count() > 1) {
        const auto half = capacity_on_grid(ch, make_trapezoid_grid(ch.range(), r.resolution_used / 2));
        worst_halving = std::max(worst_halving, std::abs(half.bits - r.bits));
      }
    }
    const double at_one = mutual_information(Channel(build_level_scheme({1.0, 250.0}, 1), {5.0})).bits;
    report(worst_low >= 0.0 && worst_high <= 0.0 && at_one == 0.0, "6a",
           fmt("0 <= C <= log2 L on 50 random channels (min C %.3g, max C - log2 L %.3g), C(L=1) = %g", worst_low,
               worst_high, at_one));
    report(worst_halving < 1e-4, "6e",
           fmt("halving the returned grid changes C by at most %.3g bits (< 1e-4) on 50 random channels",
               worst_halving));
  }

  {
    double worst = 0.0;
    for (std::size_t L : {2, 4, 8}) {
      const auto scheme = build_level_scheme({1.0, 250.0}, L);
      const auto r = mutual_information(Channel(scheme, std::vector<double>(L, scheme.delta_g / 100.0)));
      worst = std::max(worst, std::abs(r.bits - std::log2(static_cast<double>(L))));
    }
    report(worst < 1e-3, "6b", fmt("near-noiseless L in {2,4,8}: max |C - log2 L| = %.3g (< 1e-3)", worst));
  }

  {
    double worst = 0.0;
    const std::vector<std::pair<std::size_t, double>> bases = {{8, 10.0}, {19, 3.0}, {4, 40.0}};
    for (auto [L, sigma] : bases) {
      const double base = mutual_information(make_channel({1.0, 250.0}, L, ConstantNoise{sigma})).bits;
      for (double k : {0.1, 10.0, 1000.0}) {
        const double scaled = mutual_information(make_channel({k, 250.0 * k}, L, ConstantNoise{sigma * k})).bits;
        worst = std::max(worst, std::abs(scaled - base));
      }
    }
    report(worst < 1e-9, "6c", fmt("scale invariance k in {0.1,10,1000}: max |dC| = %.3g bits (< 1e-9)", worst));
  }

  {
    double worst_z = 0.0;
    for (int t = 0; t < 10; ++t) {
      const auto ch = random_channel(rng, 6);
      const double q = mutual_information(ch).bits;
      const auto mc = mc_mi_estimate(ch, 1'000'000, 1000 + static_cast<std::uint64_t>(t));
      const double z = mc.standard_error > 0.0 ? std::abs(q - mc.bits) / mc.standard_error
                                               : (std::abs(q - mc.bits) < 1e-12 ? 0.0 : INFINITY);
      worst_z = std::max(worst_z, z);
    }
    report(worst_z <= 3.0, "6d",
           fmt("quadrature vs Monte Carlo (1e6 samples) on 10 random channels: max |diff| = %.2f SE (<= 3)",
               worst_z));
  }

  {
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"montecarlo --g-min 10 --g-max 200 --draw uniform:3:20 --trials 100 --l-max 40 --seed 7", "json"},
        {"sweep --g-min 1 --g-max 250 --draw uniform:3:20 --seed 3 --l-max 24", "csv"},
        {"capacity --g-min 1 --g-max 250 --draw normal:10:4 --seed 5 --levels 12", "json"},
        {"cmax --g-min 1 --g-max 250 --draw uniform:3:20 --seed 11", "csv"},
    };
    const std::string dir = "acceptance_determinism";
    std::filesystem::create_directories(dir);
    std::size_t identical = 0;
    for (std::size_t i = 0; i < commands.size(); ++i) {
      const auto& [args, ext] = commands[i];
      const auto a = run_tool(args, dir + "/run" + std::to_string(i) + "a." + ext);
      const auto b = run_tool(args, dir + "/run" + std::to_string(i) + "b." + ext);
      if (a == b && !a.empty() && a[0] != '<') ++identical;
    }
    report(identical == commands.size(), "6f",
           fmt("seeded commands byte-identical across two processes: %zu/%zu", identical, commands.size()));
  }
}

}  // namespace

int main() {
  try {
    headline();
    transition_ratio();
    const auto ranges = preset_ranges();
    const auto sigmas = preset_sigmas();
    noise_and_range(range_study(ranges, sigmas));
    monte_carlo();
    properties();
  } catch (const std::exception& e) {
    std::printf("FAIL [error] %s\n", e.what());
    return 1;
  }
  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
