#include "triagebench/pool.hpp"

#include <algorithm>
#include <array>

#include "triagebench/error.hpp"

namespace triagebench::pool {

std::string vote_token(const Vote& v) {
  return v ? std::string(level_name(*v)) : std::string(kAbstainToken);
}

CollapseMap resolve_variant(const MappingConfig& config,
                            std::string_view variant) {
  CollapseMap collapse;
  for (const auto& [name, level] : config.extended) {
    collapse[name] = level.default_collapse;
  }
  if (variant.empty() || variant == kDefaultVariant) return collapse;
  auto it = config.overrides.find(std::string(variant));
  if (it == config.overrides.end()) {
    throw Error("UnknownVariant", "",
                "mapping declares no variant '" + std::string(variant) + "'");
  }
  for (const auto& [name, level] : it->second) collapse[name] = level;
  return collapse;
}

Vote map_advice(const RawAdvice& raw, const std::string& app_id,
                const MappingConfig& config, const CollapseMap& collapse) {
  if (raw.is_abstain()) return std::nullopt;
  auto table = config.app_tables.find(app_id);
  if (table == config.app_tables.end()) {
    throw Error("UnmappedAdvice", "app " + app_id,
                "no mapping table for app");
  }
  auto entry = table->second.find(raw.text());
  if (entry == table->second.end()) {
    throw Error("UnmappedAdvice", "app " + app_id,
                "raw advice '" + raw.text() + "' not in mapping table");
  }
  const MapTarget& target = entry->second;
  if (target.is_canonical()) return target.level();
  auto c = collapse.find(target.extended_name());
  if (c == collapse.end()) {
    throw Error("UnknownLevel", "app " + app_id,
                "extended level '" + target.extended_name() +
                    "' has no collapse target");
  }
  return c->second;
}

std::pair<Vote, bool> pool_majority(const std::vector<Vote>& votes) {
  if (votes.empty()) {
    throw Error("EmptyVotes", "", "majority vote over an empty vote list");
  }
  std::array<int, 3> counts{0, 0, 0};
  int given = 0;
  for (const Vote& v : votes) {
    if (v) {
      ++counts[static_cast<int>(*v)];
      ++given;
    }
  }
  if (given == 0) return {std::nullopt, false};

  const int top = *std::max_element(counts.begin(), counts.end());
  int tied = 0;
  TriageLevel winner = TriageLevel::SelfCare;
  // Scan upward so the winner is the highest-urgency tied level.
  for (int i = 0; i < 3; ++i) {
    if (counts[i] == top) {
      ++tied;
      winner = static_cast<TriageLevel>(i);
    }
  }
  return {winner, tied > 1};
}

std::vector<PooledAdvice> pool_study(const Study& study,
                                     std::string_view variant) {
  const CollapseMap collapse = resolve_variant(study.mapping, variant);

  // (vignette, app) -> sorted per-inputter votes.
  std::map<std::pair<std::string, std::string>,
           std::vector<std::pair<std::string, Vote>>>
      detail;
  for (const AdviceRecord& r : study.records) {
    detail[{r.vignette_id, r.app_id}].emplace_back(
        r.inputter_id, map_advice(r.advice, r.app_id, study.mapping, collapse));
  }

  std::vector<PooledAdvice> pooled;
  pooled.reserve(study.vignettes.size() * study.apps.size());
  for (const Vignette& v : study.vignettes) {
    for (const std::string& app : study.apps) {
      auto it = detail.find({v.id, app});
      if (it == detail.end()) {
        throw Error("EmptyVotes", "vignette " + v.id + " / app " + app,
                    "no records for pair (study not validated?)");
      }
      std::sort(it->second.begin(), it->second.end());
      std::vector<Vote> votes;
      votes.reserve(it->second.size());
      for (const auto& [inputter, vote] : it->second) votes.push_back(vote);
      auto [level, tie_broken] = pool_majority(votes);
      PooledAdvice p;
      p.vignette_id = v.id;
      p.app_id = app;
      p.level = level;
      p.vote_detail = std::move(it->second);
      p.tie_broken = tie_broken;
      pooled.push_back(std::move(p));
    }
  }
  return pooled;
}

namespace {

int category_index(const Vote& v) {
  return v ? static_cast<int>(*v) : kAbstainColumn;
}

void check_table(const RatingTable& table) {
  if (table.n_raters < 2) {
    throw Error("TooFewRaters", "",
                "agreement statistics need at least two raters");
  }
  for (Eigen::Index i = 0; i < table.counts.rows(); ++i) {
    if (table.counts.row(i).sum() != table.n_raters) {
      throw Error("RaggedRatings",
                  table.item_ids.empty()
                      ? ""
                      : "vignette " + table.item_ids[static_cast<std::size_t>(i)],
                  "unequal rater count across vignettes");
    }
  }
}

}  // namespace

RatingTable rating_table(const Study& study, const std::string& app_id,
                         const CollapseMap& collapse) {
  std::map<std::string, std::array<int, kCategories>> rows;
  for (const AdviceRecord& r : study.records) {
    if (r.app_id != app_id) continue;
    Vote vote = map_advice(r.advice, app_id, study.mapping, collapse);
    auto [it, fresh] = rows.try_emplace(r.vignette_id);
    if (fresh) it->second.fill(0);
    ++it->second[static_cast<std::size_t>(category_index(vote))];
  }

  RatingTable table;
  table.counts.resize(static_cast<Eigen::Index>(study.vignettes.size()),
                      kCategories);
  table.counts.setZero();
  Eigen::Index row = 0;
  int raters = -1;
  for (const Vignette& v : study.vignettes) {
    auto it = rows.find(v.id);
    if (it == rows.end()) {
      throw Error("RaggedRatings", "vignette " + v.id + " / app " + app_id,
                  "no ratings for vignette");
    }
    int total = 0;
    for (int c = 0; c < kCategories; ++c) {
      table.counts(row, c) = it->second[static_cast<std::size_t>(c)];
      total += it->second[static_cast<std::size_t>(c)];
    }
    if (raters < 0) raters = total;
    if (total != raters) {
      throw Error("RaggedRatings", "vignette " + v.id + " / app " + app_id,
                  "unequal rater count across vignettes");
    }
    table.item_ids.push_back(v.id);
    ++row;
  }
  table.n_raters = raters < 0 ? 0 : raters;
  return table;
}

std::optional<double> fleiss_kappa(const RatingTable& table) {
  check_table(table);
  const auto counts = table.counts.cast<double>().array();
  const double n = table.n_raters;
  const double N = static_cast<double>(table.counts.rows());

  // Per-item observed pairwise agreement.
  Eigen::ArrayXd item_agreement =
      (counts.square().rowwise().sum() - n) / (n * (n - 1.0));
  const double observed = item_agreement.mean();

  // Chance agreement from the marginal category shares.
  Eigen::ArrayXd share = counts.colwise().sum() / (N * n);
  const double expected = share.square().sum();

  if (1.0 - expected == 0.0) return std::nullopt;
  return (observed - expected) / (1.0 - expected);
}

double percent_agreement(const RatingTable& table) {
  check_table(table);
  const auto counts = table.counts.cast<double>().array();
  const double n = table.n_raters;
  Eigen::ArrayXd item_agreement =
      (counts.square().rowwise().sum() - n) / (n * (n - 1.0));
  return item_agreement.mean();
}

AgreementStats agreement_stats(const Study& study, const std::string& app_id,
                               std::string_view variant) {
  const CollapseMap collapse = resolve_variant(study.mapping, variant);
  RatingTable table = rating_table(study, app_id, collapse);
  AgreementStats stats;
  stats.app_id = app_id;
  stats.fleiss_kappa = fleiss_kappa(table);
  stats.percent_agreement = percent_agreement(table);
  stats.n_items = static_cast<int>(table.counts.rows());
  stats.n_raters = table.n_raters;
  return stats;
}

std::vector<AgreementStats> agreement_all(const Study& study,
                                          std::string_view variant) {
  std::vector<AgreementStats> all;
  all.reserve(study.apps.size());
  for (const std::string& app : study.apps) {
    all.push_back(agreement_stats(study, app, variant));
  }
  return all;
}

}  // namespace triagebench::pool
