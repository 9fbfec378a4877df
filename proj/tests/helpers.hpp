#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <sys/wait.h>
#include <utility>
#include <vector>

#include "triagebench/domain.hpp"

namespace testutil {

// ---------------------------------------------------------------------------
// Process helpers

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

// Runs the real binary through the shell; `args` is appended verbatim, so the
// caller is responsible for quoting. `env_prefix` may hold VAR=value pairs.
inline CliResult run_cli(const std::string& args,
                         const std::string& env_prefix = {}) {
  std::string cmd;
  if (!env_prefix.empty()) cmd += env_prefix + " ";
  cmd += std::string(TRIAGEBENCH_EXE) + " " + args + " 2>&1";
  CliResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return result;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    result.output.append(buf, n);
  }
  const int status = pclose(pipe);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() /
                        "triagebench-test-XXXXXX")
                           .string();
    path_ = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Independent statistical oracles (deliberately written from first
// principles, not by calling the library under test).

namespace oracle {

// Pearson correlation via exact integer sums.
inline std::optional<double> pearson(const std::vector<int>& x,
                                     const std::vector<int>& y) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  if (n < 2 || x.size() != y.size()) return std::nullopt;
  std::int64_t sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::int64_t a = x[i], b = y[i];
    sx += a;
    sy += b;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  const std::int64_t vx = n * sxx - sx * sx;
  const std::int64_t vy = n * syy - sy * sy;
  if (vx == 0 || vy == 0) return std::nullopt;
  return static_cast<double>(n * sxy - sx * sy) /
         std::sqrt(static_cast<double>(vx) * static_cast<double>(vy));
}

// Fleiss' kappa over per-item category counts, straight from the textbook
// formula. Rows must all sum to the same rater count.
inline std::optional<double> fleiss_kappa(
    const std::vector<std::array<int, 4>>& counts, int n_raters) {
  const double n = n_raters;
  const double N = static_cast<double>(counts.size());
  double p_bar = 0.0;
  std::array<double, 4> share{0, 0, 0, 0};
  for (const auto& row : counts) {
    double sumsq = 0.0;
    for (int c = 0; c < 4; ++c) {
      sumsq += static_cast<double>(row[c]) * row[c];
      share[c] += row[c];
    }
    p_bar += (sumsq - n) / (n * (n - 1.0));
  }
  p_bar /= N;
  double pe = 0.0;
  for (int c = 0; c < 4; ++c) {
    const double s = share[c] / (N * n);
    pe += s * s;
  }
  if (1.0 - pe == 0.0) return std::nullopt;
  return (p_bar - pe) / (1.0 - pe);
}

inline double percent_agreement(const std::vector<std::array<int, 4>>& counts,
                                int n_raters) {
  const double n = n_raters;
  double p_bar = 0.0;
  for (const auto& row : counts) {
    double sumsq = 0.0;
    for (int c = 0; c < 4; ++c)
      sumsq += static_cast<double>(row[c]) * row[c];
    p_bar += (sumsq - n) / (n * (n - 1.0));
  }
  return p_bar / static_cast<double>(counts.size());
}

// Standard normal quantile via Newton iteration on the complementary error
// function; accurate to ~1e-13 over (1e-10, 1-1e-10).
inline double normal_quantile(double p) {
  double x = 0.0;
  // Crude starting point from the logistic approximation.
  x = std::log(p / (1.0 - p)) * 0.5513;
  for (int i = 0; i < 60; ++i) {
    const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
    const double pdf =
        std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
    const double step = (cdf - p) / pdf;
    x -= step;
    if (std::abs(step) < 1e-14) break;
  }
  return x;
}

// Per-group n for the two-sided two-proportion z-test, pooled variance.
inline long sample_size(double p0, double p1, double alpha, double power) {
  const double za = normal_quantile(1.0 - alpha / 2.0);
  const double zb = normal_quantile(power);
  const double pbar = (p0 + p1) / 2.0;
  const double root = za * std::sqrt(2.0 * pbar * (1.0 - pbar)) +
                      zb * std::sqrt(p0 * (1 - p0) + p1 * (1 - p1));
  double n = (root * root) / ((p1 - p0) * (p1 - p0));
  if (std::abs(n - std::round(n)) < 1e-9) n = std::round(n);
  return static_cast<long>(std::ceil(n));
}

// log C(n, k) via lgamma.
inline double log_choose(long n, long k) {
  return std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

// Central binomial interval: smallest k with CDF >= tail and smallest k with
// CDF >= 1 - tail, so P(lo <= X <= hi) >= confidence.
inline std::pair<long, long> binomial_central_interval(long n, double p,
                                                       double confidence) {
  const double tail = (1.0 - confidence) / 2.0;
  double cdf = 0.0;
  long lo = -1, hi = -1;
  for (long k = 0; k <= n; ++k) {
    const double logpmf = log_choose(n, k) +
                          static_cast<double>(k) * std::log(p) +
                          static_cast<double>(n - k) * std::log1p(-p);
    cdf += std::exp(logpmf);
    if (lo < 0 && cdf >= tail) lo = k;
    if (hi < 0 && cdf >= 1.0 - tail) hi = k;
  }
  if (hi < 0) hi = n;
  if (lo < 0) lo = 0;
  return {lo, hi};
}

}  // namespace oracle

// ---------------------------------------------------------------------------
// Random-study generation

// Strings that stress CSV quoting and the cfg escape rules.
inline const std::vector<std::string>& nasty_strings() {
  static const std::vector<std::string> kStrings = {
      "plain text",
      "with, comma",
      "with \"quotes\" inside",
      "line\nbreak",
      "semi;colon",
      " leading space",
      "trailing space ",
      "tab\tseparated",
      "equals = sign",
      "[bracketed]",
      "# not a comment",
      "unicode \xc3\xbc\xc3\xb1\xc3\xae",
      "back\\slash",
  };
  return kStrings;
}

inline std::string pick_nasty(std::mt19937_64& rng) {
  const auto& pool = nasty_strings();
  return pool[static_cast<std::size_t>(rng() % pool.size())];
}

struct RandomStudyOptions {
  int n_vignettes = 10;
  int n_apps = 2;
  int n_inputters = 3;
  double abstain_rate = 0.1;
  bool nasty_text = true;       // descriptions/strata/advice with hard bytes
  bool extended_levels = true;  // declare extended levels + one override
};

// A structurally valid random study: every (vignette, app, inputter) triple
// has a record and every raw advice string is mapped.
inline triagebench::Study make_random_study(std::mt19937_64& rng,
                                            const RandomStudyOptions& opt) {
  using namespace triagebench;
  const auto levels = kAllLevels;

  std::vector<Vignette> vignettes;
  for (int i = 0; i < opt.n_vignettes; ++i) {
    Vignette v;
    v.id = "v" + std::to_string(i + 1);
    v.description =
        opt.nasty_text ? pick_nasty(rng) : "case " + std::to_string(i + 1);
    v.gold = levels[rng() % 3];
    v.stratum = opt.nasty_text && (rng() % 4 == 0)
                    ? pick_nasty(rng)
                    : std::string(level_name(v.gold));
    v.source = opt.nasty_text && (rng() % 4 == 0) ? pick_nasty(rng)
                                                  : std::string("synthetic");
    v.consensus.panel_count = 2 + static_cast<int>(rng() % 3);
    v.consensus.method = rng() % 2 == 0 ? "majority" : "delphi";
    vignettes.push_back(std::move(v));
  }

  MappingConfig mapping;
  if (opt.extended_levels) {
    mapping.extended["1-day-urgent"] = {"1-day-urgent",
                                        TriageLevel::NonEmergency};
    mapping.extended["watchful waiting"] = {"watchful waiting",
                                            TriageLevel::SelfCare};
    mapping.overrides["urgent-as-emergency"]["1-day-urgent"] =
        TriageLevel::Emergency;
  }

  std::vector<std::string> apps;
  for (int a = 0; a < opt.n_apps; ++a)
    apps.push_back("app" + std::to_string(a + 1));

  // Raw advice vocabulary per app: a few strings per canonical level plus
  // optionally one per extended level.
  std::map<std::string, std::vector<std::string>> vocab;
  for (const std::string& app : apps) {
    auto& table = mapping.app_tables[app];
    std::vector<std::string> keys;
    for (TriageLevel level : levels) {
      for (int k = 0; k < 2; ++k) {
        std::string raw = std::string(level_name(level)) + " wording " +
                          std::to_string(k) + " (" + app + ")";
        if (opt.nasty_text && rng() % 3 == 0) raw += " " + pick_nasty(rng);
        table[raw] = MapTarget::canonical(level);
        keys.push_back(raw);
      }
    }
    if (opt.extended_levels) {
      for (const auto& [name, ext] : mapping.extended) {
        if (rng() % 2 == 0) continue;
        std::string raw = "says " + name + " (" + app + ")";
        table[raw] = MapTarget::extended(name);
        keys.push_back(raw);
      }
    }
    vocab[app] = std::move(keys);
  }

  std::vector<AdviceRecord> records;
  for (const Vignette& v : vignettes) {
    for (const std::string& app : apps) {
      for (int i = 0; i < opt.n_inputters; ++i) {
        AdviceRecord r;
        r.vignette_id = v.id;
        r.app_id = app;
        r.inputter_id = "rater" + std::to_string(i + 1);
        const double u =
            static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < opt.abstain_rate) {
          r.advice = RawAdvice::abstain();
        } else {
          const auto& keys = vocab[app];
          r.advice = RawAdvice::text(keys[rng() % keys.size()]);
        }
        records.push_back(std::move(r));
      }
    }
  }

  return assemble_study(std::move(vignettes), std::move(records),
                        std::move(mapping));
}

}  // namespace testutil
