#include "triagebench/sim.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "triagebench/config_text.hpp"
#include "triagebench/error.hpp"

namespace triagebench::sim {

namespace {

std::string at(std::string_view source, int line) {
  std::ostringstream os;
  os << source << ":" << line;
  return os.str();
}

double parse_double(const cfg::Entry& e, std::string_view source) {
  double v = 0.0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("BadNumber", at(source, e.line),
                "'" + e.value + "' is not a number");
  }
  return v;
}

template <typename Int>
Int parse_int(const cfg::Entry& e, std::string_view source) {
  Int v = 0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("BadNumber", at(source, e.line),
                "'" + e.value + "' is not an integer");
  }
  return v;
}

Eigen::RowVector3d parse_row(const cfg::Entry& e, std::string_view source) {
  std::istringstream is(e.value);
  std::vector<double> probs;
  std::string tok;
  while (is >> tok) {
    double v = 0.0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
      throw Error("BadConfusionRow", at(source, e.line),
                  "'" + tok + "' is not a probability");
    }
    probs.push_back(v);
  }
  if (probs.size() != 3) {
    throw Error("BadConfusionRow", at(source, e.line),
                "expected exactly three probabilities");
  }
  Eigen::RowVector3d row;
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (probs[static_cast<std::size_t>(i)] < 0.0) {
      throw Error("BadConfusionRow", at(source, e.line),
                  "probabilities must be non-negative");
    }
    row[i] = probs[static_cast<std::size_t>(i)];
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error("BadConfusionRow", at(source, e.line),
                "row must sum to 1 (within 1e-12)");
  }
  return row;
}

void check_unit_interval(double v, const char* what, const std::string& where) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error("OutOfRange", where,
                std::string(what) + " must lie in [0, 1]");
  }
}

void check_spec(const SimSpec& spec) {
  long total = 0;
  for (const auto& [level, n] : spec.vignettes_per_stratum) {
    if (n < 0) {
      throw Error("OutOfRange", "", "stratum counts must be non-negative");
    }
    total += n;
  }
  if (total == 0) {
    throw Error("EmptyStudy", "", "simulation would produce no vignettes");
  }
  if (spec.apps.empty()) {
    throw Error("NoApps", "", "simulation needs at least one app");
  }
  if (spec.n_inputters < 2) {
    throw Error("TooFewInputters", "",
                "simulation needs at least two inputters");
  }
  check_unit_interval(spec.inputter_noise, "inputter_noise", "");
  for (const AppSpec& app : spec.apps) {
    if (app.app_id.empty()) {
      throw Error("BadId", "", "app id must be non-empty");
    }
    check_unit_interval(app.abstain_rate, "abstain_rate", "app " + app.app_id);
    for (int r = 0; r < 3; ++r) {
      double sum = 0.0;
      for (int c = 0; c < 3; ++c) {
        if (app.confusion(r, c) < 0.0) {
          throw Error("BadConfusionRow", "app " + app.app_id,
                      "probabilities must be non-negative");
        }
        sum += app.confusion(r, c);
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw Error("BadConfusionRow", "app " + app.app_id,
                    "row must sum to 1 (within 1e-12)");
      }
    }
  }
}

// Uniform double in [0, 1) with 53 random bits.
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

TriageLevel sample_level(const Eigen::RowVector3d& row, std::mt19937_64& rng) {
  const double u = unit(rng);
  double cum = 0.0;
  for (int c = 0; c < 2; ++c) {
    cum += row[c];
    if (u < cum) return static_cast<TriageLevel>(c);
  }
  return TriageLevel::Emergency;
}

TriageLevel flip_other(TriageLevel from, std::mt19937_64& rng) {
  const int pick = std::min(1, static_cast<int>(unit(rng) * 2.0));
  int seen = 0;
  for (int c = 0; c < 3; ++c) {
    if (c == static_cast<int>(from)) continue;
    if (seen == pick) return static_cast<TriageLevel>(c);
    ++seen;
  }
  return TriageLevel::Emergency;
}

TriageLevel flip_any(std::mt19937_64& rng) {
  return static_cast<TriageLevel>(
      std::min(2, static_cast<int>(unit(rng) * 3.0)));
}

}  // namespace

SimSpec parse_simspec(std::string_view cfg_text, std::string_view source_name) {
  const cfg::Document doc = cfg::parse(cfg_text, source_name);
  SimSpec spec;
  bool saw_sim = false;
  std::set<std::string> seen_apps;

  for (const cfg::Section& section : doc.sections) {
    if (section.kind == "sim") {
      if (!section.name.empty()) {
        throw Error("UnknownSection", at(source_name, section.line),
                    "[sim] takes no name");
      }
      if (saw_sim) {
        throw Error("DuplicateSection", at(source_name, section.line),
                    "[sim] declared twice");
      }
      saw_sim = true;
      for (const cfg::Entry& e : section.entries) {
        if (auto level = parse_level(e.key)) {
          const int n = parse_int<int>(e, source_name);
          if (n < 0) {
            throw Error("OutOfRange", at(source_name, e.line),
                        "stratum counts must be non-negative");
          }
          spec.vignettes_per_stratum[*level] = n;
        } else if (e.key == "inputters") {
          spec.n_inputters = parse_int<int>(e, source_name);
        } else if (e.key == "noise") {
          spec.inputter_noise = parse_double(e, source_name);
          check_unit_interval(spec.inputter_noise, "noise",
                              at(source_name, e.line));
        } else if (e.key == "seed") {
          spec.seed = parse_int<std::uint64_t>(e, source_name);
        } else {
          throw Error("UnknownKey", at(source_name, e.line),
                      "unknown [sim] key '" + e.key + "'");
        }
      }
    } else if (section.kind == "app") {
      if (section.name.empty()) {
        throw Error("UnknownSection", at(source_name, section.line),
                    "[app:<id>] needs an id");
      }
      if (!seen_apps.insert(section.name).second) {
        throw Error("DuplicateSection", at(source_name, section.line),
                    "[app:" + section.name + "] declared twice");
      }
      AppSpec app;
      app.app_id = section.name;
      for (const cfg::Entry& e : section.entries) {
        if (auto level = parse_level(e.key)) {
          app.confusion.row(static_cast<int>(*level)) =
              parse_row(e, source_name);
        } else if (e.key == "abstain_rate") {
          app.abstain_rate = parse_double(e, source_name);
          check_unit_interval(app.abstain_rate, "abstain_rate",
                              at(source_name, e.line));
        } else {
          throw Error("UnknownKey", at(source_name, e.line),
                      "unknown [app] key '" + e.key + "'");
        }
      }
      spec.apps.push_back(std::move(app));
    } else {
      throw Error("UnknownSection", at(source_name, section.line),
                  "unknown section [" + section.kind + "]");
    }
  }

  check_spec(spec);
  return spec;
}

Study simulate_study(const SimSpec& spec) {
  check_spec(spec);
  std::mt19937_64 rng(spec.seed);

  std::vector<Vignette> vignettes;
  for (TriageLevel level : kAllLevels) {
    auto it = spec.vignettes_per_stratum.find(level);
    const int count = it == spec.vignettes_per_stratum.end() ? 0 : it->second;
    for (int i = 0; i < count; ++i) {
      Vignette v;
      char id[16];
      std::snprintf(id, sizeof(id), "v%04d",
                    static_cast<int>(vignettes.size()) + 1);
      v.id = id;
      v.description = "Simulated case " + v.id + " (" +
                      std::string(level_name(level)) + " gold)";
      v.gold = level;
      v.stratum = std::string(level_name(level));
      v.source = "sim seed=" + std::to_string(spec.seed);
      v.consensus = {2, "simulated"};
      vignettes.push_back(std::move(v));
    }
  }

  MappingConfig mapping;
  for (const AppSpec& app : spec.apps) {
    for (TriageLevel level : kAllLevels) {
      mapping.app_tables[app.app_id][std::string(level_name(level))] =
          MapTarget::canonical(level);
    }
  }

  std::vector<AdviceRecord> records;
  records.reserve(vignettes.size() * spec.apps.size() *
                  static_cast<std::size_t>(spec.n_inputters));
  for (const Vignette& v : vignettes) {
    for (const AppSpec& app : spec.apps) {
      // Abstention is decided before any advice is drawn.
      const bool abstained =
          app.abstain_rate > 0.0 && unit(rng) < app.abstain_rate;
      std::optional<TriageLevel> advice;
      if (!abstained) {
        advice = sample_level(app.confusion.row(static_cast<int>(v.gold)), rng);
      }
      for (int i = 1; i <= spec.n_inputters; ++i) {
        std::optional<TriageLevel> observed = advice;
        if (spec.inputter_noise > 0.0 && unit(rng) < spec.inputter_noise) {
          observed = advice ? flip_other(*advice, rng) : flip_any(rng);
        }
        AdviceRecord r;
        r.vignette_id = v.id;
        r.app_id = app.app_id;
        r.inputter_id = "i" + std::to_string(i);
        r.advice = observed
                       ? RawAdvice::text(std::string(level_name(*observed)))
                       : RawAdvice::abstain();
        records.push_back(std::move(r));
      }
    }
  }

  return assemble_study(std::move(vignettes), std::move(records),
                        std::move(mapping));
}

}  // namespace triagebench::sim
