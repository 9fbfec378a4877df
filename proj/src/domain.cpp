#include "triagebench/domain.hpp"

#include <algorithm>
#include <set>

namespace triagebench {

std::string_view level_name(TriageLevel level) {
  switch (level) {
    case TriageLevel::SelfCare:
      return "self_care";
    case TriageLevel::NonEmergency:
      return "non_emergency";
    case TriageLevel::Emergency:
      return "emergency";
  }
  return "?";
}

std::optional<TriageLevel> parse_level(std::string_view token) {
  for (TriageLevel level : kAllLevels) {
    if (token == level_name(level)) return level;
  }
  return std::nullopt;
}

std::strong_ordering urgency_compare(TriageLevel a, TriageLevel b) {
  return static_cast<int>(a) <=> static_cast<int>(b);
}

const Vignette* Study::find_vignette(std::string_view id) const {
  for (const Vignette& v : vignettes) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

Study assemble_study(std::vector<Vignette> vignettes,
                     std::vector<AdviceRecord> records, MappingConfig mapping) {
  std::set<std::string> apps;
  std::set<std::string> inputters;
  for (const AdviceRecord& r : records) {
    apps.insert(r.app_id);
    inputters.insert(r.inputter_id);
  }
  Study study;
  study.vignettes = std::move(vignettes);
  study.records = std::move(records);
  study.apps.assign(apps.begin(), apps.end());
  study.inputters.assign(inputters.begin(), inputters.end());
  study.mapping = std::move(mapping);
  return study;
}

}  // namespace triagebench
