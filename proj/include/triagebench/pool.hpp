#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "triagebench/domain.hpp"

namespace triagebench::pool {

// A mapped vote: a canonical level, or nullopt for an abstention.
using Vote = std::optional<TriageLevel>;

inline constexpr std::string_view kDefaultVariant = "default";

// Level token or the abstain token.
std::string vote_token(const Vote& v);

struct PooledAdvice {
  std::string vignette_id;
  std::string app_id;
  Vote level;
  // Per-inputter mapped levels, sorted by inputter id.
  std::vector<std::pair<std::string, Vote>> vote_detail;
  bool tie_broken = false;
};

struct AgreementStats {
  std::string app_id;
  std::optional<double> fleiss_kappa;  // nullopt when chance agreement is 1
  double percent_agreement = 0.0;
  int n_items = 0;
  int n_raters = 0;
};

// Extended level name -> collapse target, with variant overrides applied on
// top of the declared defaults. "" and "default" name the default variant.
using CollapseMap = std::map<std::string, TriageLevel>;
CollapseMap resolve_variant(const MappingConfig& config,
                            std::string_view variant);

Vote map_advice(const RawAdvice& raw, const std::string& app_id,
                const MappingConfig& config, const CollapseMap& collapse);

// Plurality among non-abstaining votes; ties escalate to the highest-urgency
// tied level with tie_broken set. All-abstain pools to Abstain.
std::pair<Vote, bool> pool_majority(const std::vector<Vote>& votes);

// One PooledAdvice per (vignette, app), vignettes in study order, apps
// alphabetical.
std::vector<PooledAdvice> pool_study(const Study& study,
                                     std::string_view variant = kDefaultVariant);

// Per-vignette category counts over raters. Columns follow the canonical
// ordinal order (SelfCare, NonEmergency, Emergency) plus Abstain.
inline constexpr int kCategories = 4;
inline constexpr int kAbstainColumn = 3;

struct RatingTable {
  std::vector<std::string> item_ids;
  Eigen::MatrixXi counts;  // items x kCategories
  int n_raters = 0;
};

RatingTable rating_table(const Study& study, const std::string& app_id,
                         const CollapseMap& collapse);

// Standard Fleiss' kappa; nullopt when expected agreement equals 1 (every
// rating in a single category).
std::optional<double> fleiss_kappa(const RatingTable& table);

// Mean over items of agreeing rater pairs / total rater pairs.
double percent_agreement(const RatingTable& table);

AgreementStats agreement_stats(const Study& study, const std::string& app_id,
                               std::string_view variant = kDefaultVariant);
std::vector<AgreementStats> agreement_all(const Study& study,
                                          std::string_view variant = kDefaultVariant);

}  // namespace triagebench::pool
