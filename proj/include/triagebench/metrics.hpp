#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "triagebench/domain.hpp"
#include "triagebench/pool.hpp"
#include "triagebench/rational.hpp"

namespace triagebench::metrics {

using GoldMap = std::map<std::string, TriageLevel>;
GoldMap gold_map(const Study& study);

// The fixed comparable suite for one app. Abstentions count as incorrect for
// accuracy, are excluded from the safety and overtriage denominators, and
// are measured by comprehensiveness.
struct AppMetrics {
  std::string app_id;
  int n_cases = 0;
  Rational accuracy{0};
  std::map<TriageLevel, Rational> accuracy_by_level;  // only levels present in gold
  Rational safety{0};
  std::optional<Rational> overtriage_inclination;  // nullopt when zero errors
  Rational comprehensiveness{0};
};

using PooledCases = std::vector<pool::PooledAdvice>;

Rational accuracy(const PooledCases& cases, const GoldMap& gold);
std::map<TriageLevel, Rational> accuracy_by_level(const PooledCases& cases,
                                                  const GoldMap& gold);
// Share of advice-given cases not undertriaged. Error "NoAdviceGiven" when
// every case is an abstention.
Rational safety(const PooledCases& cases, const GoldMap& gold);
std::optional<Rational> overtriage_inclination(const PooledCases& cases,
                                               const GoldMap& gold);
Rational comprehensiveness(const PooledCases& cases);

AppMetrics app_metrics(const std::string& app_id, const PooledCases& cases,
                       const GoldMap& gold);

// Cross-app comparison on the items every app completed.
struct CcsTable {
  std::vector<std::string> common_item_ids;
  Rational coverage{0};  // |common| / |all vignettes|
  std::map<std::string, Rational> ccs;
};

// pooled must cover >= 2 apps ("TooFewApps"); an empty intersection is an
// error ("NoCommonItems").
CcsTable ccs(const PooledCases& pooled, const GoldMap& gold);

struct VariantMetrics {
  std::string variant;
  std::vector<AppMetrics> per_app;  // apps alphabetical
};

// Flattened (metric name, value) view of AppMetrics; undefined metrics carry
// a note instead of a value.
struct MetricValue {
  std::string name;
  std::optional<Rational> value;
  std::string note;
};
std::vector<MetricValue> enumerate_metrics(const AppMetrics& m);

struct DeltaRow {
  std::string variant;
  std::string app_id;
  std::string metric;
  std::optional<Rational> delta;
  std::string note;
};

struct SensitivityReport {
  std::vector<VariantMetrics> variants;  // default first
  std::vector<DeltaRow> deltas;          // vs default, default rows included
};

// Reruns the pooling + metric pipeline per mapping variant; the default
// variant is always included (and prepended when absent).
SensitivityReport sensitivity_analysis(const Study& study,
                                       const std::vector<std::string>& variants);

struct EvaluationBundle {
  std::vector<VariantMetrics> variants;            // default first
  std::optional<CcsTable> ccs;                     // absent for single-app studies
  std::vector<pool::AgreementStats> agreement;     // default variant
  SensitivityReport sensitivity;
};

EvaluationBundle evaluate_all(const Study& study,
                              const std::vector<std::string>& variants);

}  // namespace triagebench::metrics
