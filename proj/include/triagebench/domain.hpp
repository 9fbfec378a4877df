#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace triagebench {

// Canonical three-tier urgency scale. The ordinal codes define the urgency
// order used for over/undertriage decisions; richer app scales never extend
// this enum, they map onto it (see ExtendedLevel).
enum class TriageLevel : int { SelfCare = 0, NonEmergency = 1, Emergency = 2 };

inline constexpr std::array<TriageLevel, 3> kAllLevels = {
    TriageLevel::SelfCare, TriageLevel::NonEmergency, TriageLevel::Emergency};

// Case-sensitive file tokens: "self_care", "non_emergency", "emergency".
std::string_view level_name(TriageLevel level);
std::optional<TriageLevel> parse_level(std::string_view token);

std::strong_ordering urgency_compare(TriageLevel a, TriageLevel b);

// Reserved advice token marking an abstention in record files.
inline constexpr std::string_view kAbstainToken = "__ABSTAIN__";

// Advice exactly as recorded by an inputter: the app's raw advice string,
// kept verbatim, or an abstention. Abstentions never carry text and never
// take part in urgency comparisons.
class RawAdvice {
 public:
  RawAdvice() = default;

  static RawAdvice abstain() { return RawAdvice(std::nullopt); }
  static RawAdvice text(std::string raw) { return RawAdvice(std::move(raw)); }

  bool is_abstain() const { return !text_.has_value(); }
  const std::string& text() const { return *text_; }

  bool operator==(const RawAdvice&) const = default;

 private:
  explicit RawAdvice(std::optional<std::string> t) : text_(std::move(t)) {}
  std::optional<std::string> text_;
};

// A study- or app-specific advice category outside the canonical scale
// (e.g. "1-day-urgent"). Each one declares the canonical level it collapses
// to when no override variant is in effect.
struct ExtendedLevel {
  std::string name;
  TriageLevel default_collapse = TriageLevel::NonEmergency;
  bool operator==(const ExtendedLevel&) const = default;
};

struct Consensus {
  int panel_count = 1;
  std::string method;
  bool operator==(const Consensus&) const = default;
};

// One test case. Gold standards live on the canonical scale only.
struct Vignette {
  std::string id;
  std::string description;
  TriageLevel gold = TriageLevel::SelfCare;
  std::string stratum;
  std::string source;
  Consensus consensus;
  bool operator==(const Vignette&) const = default;
};

// One (vignette x app x inputter) observation.
struct AdviceRecord {
  std::string vignette_id;
  std::string app_id;
  std::string inputter_id;
  RawAdvice advice;
  bool operator==(const AdviceRecord&) const = default;
};

// Target of a raw-advice mapping entry: a canonical level or the name of a
// declared extended level.
class MapTarget {
 public:
  MapTarget() = default;

  static MapTarget canonical(TriageLevel level) { return MapTarget(Value(level)); }
  static MapTarget extended(std::string name) { return MapTarget(Value(std::move(name))); }

  bool is_canonical() const { return std::holds_alternative<TriageLevel>(value_); }
  TriageLevel level() const { return std::get<TriageLevel>(value_); }
  const std::string& extended_name() const { return std::get<std::string>(value_); }

  bool operator==(const MapTarget&) const = default;

 private:
  using Value = std::variant<TriageLevel, std::string>;
  explicit MapTarget(Value v) : value_(std::move(v)) {}
  Value value_ = TriageLevel::SelfCare;
};

// Per-app advice mapping plus named override variants for sensitivity
// re-analysis. An empty override set means the declared defaults apply.
struct MappingConfig {
  // Declared extended levels, keyed by name.
  std::map<std::string, ExtendedLevel> extended;
  // app_id -> raw advice string -> target.
  std::map<std::string, std::map<std::string, MapTarget>> app_tables;
  // variant name -> extended level name -> collapse target.
  std::map<std::string, std::map<std::string, TriageLevel>> overrides;
  bool operator==(const MappingConfig&) const = default;
};

struct Study {
  std::vector<Vignette> vignettes;
  std::vector<AdviceRecord> records;
  std::vector<std::string> apps;       // distinct, sorted
  std::vector<std::string> inputters;  // distinct, sorted
  MappingConfig mapping;

  bool operator==(const Study&) const = default;
  const Vignette* find_vignette(std::string_view id) const;
};

// Builds a Study, deriving the app and inputter lists from the records.
Study assemble_study(std::vector<Vignette> vignettes,
                     std::vector<AdviceRecord> records, MappingConfig mapping);

}  // namespace triagebench
