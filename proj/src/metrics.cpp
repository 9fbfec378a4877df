#include "triagebench/metrics.hpp"

#include <algorithm>
#include <set>

#include "triagebench/error.hpp"

namespace triagebench::metrics {

namespace {

TriageLevel gold_for(const pool::PooledAdvice& p, const GoldMap& gold) {
  auto it = gold.find(p.vignette_id);
  if (it == gold.end()) {
    throw Error("UnknownVignette", "vignette " + p.vignette_id,
                "pooled case has no gold label");
  }
  return it->second;
}

void require_cases(const PooledCases& cases) {
  if (cases.empty()) {
    throw Error("EmptyCases", "", "metric over an empty case list");
  }
}

struct Tally {
  std::int64_t correct = 0;
  std::int64_t overtriage = 0;
  std::int64_t undertriage = 0;
  std::int64_t abstain = 0;
  std::int64_t total = 0;
};

Tally tally(const PooledCases& cases, const GoldMap& gold) {
  Tally t;
  for (const pool::PooledAdvice& p : cases) {
    const TriageLevel g = gold_for(p, gold);
    ++t.total;
    if (!p.level) {
      ++t.abstain;
    } else if (*p.level == g) {
      ++t.correct;
    } else if (urgency_compare(*p.level, g) > 0) {
      ++t.overtriage;
    } else {
      ++t.undertriage;
    }
  }
  return t;
}

}  // namespace

GoldMap gold_map(const Study& study) {
  GoldMap gold;
  for (const Vignette& v : study.vignettes) gold[v.id] = v.gold;
  return gold;
}

Rational accuracy(const PooledCases& cases, const GoldMap& gold) {
  require_cases(cases);
  const Tally t = tally(cases, gold);
  return {t.correct, t.total};
}

std::map<TriageLevel, Rational> accuracy_by_level(const PooledCases& cases,
                                                  const GoldMap& gold) {
  require_cases(cases);
  std::map<TriageLevel, std::pair<std::int64_t, std::int64_t>> counts;
  for (const pool::PooledAdvice& p : cases) {
    const TriageLevel g = gold_for(p, gold);
    auto& [correct, total] = counts[g];
    ++total;
    if (p.level && *p.level == g) ++correct;
  }
  std::map<TriageLevel, Rational> out;
  for (const auto& [level, c] : counts) out[level] = {c.first, c.second};
  return out;
}

Rational safety(const PooledCases& cases, const GoldMap& gold) {
  require_cases(cases);
  const Tally t = tally(cases, gold);
  const std::int64_t given = t.total - t.abstain;
  if (given == 0) {
    throw Error("NoAdviceGiven", "", "safety needs at least one advice-given case");
  }
  return {given - t.undertriage, given};
}

std::optional<Rational> overtriage_inclination(const PooledCases& cases,
                                               const GoldMap& gold) {
  require_cases(cases);
  const Tally t = tally(cases, gold);
  const std::int64_t errors = t.overtriage + t.undertriage;
  if (errors == 0) return std::nullopt;
  return Rational{t.overtriage, errors};
}

Rational comprehensiveness(const PooledCases& cases) {
  require_cases(cases);
  std::int64_t given = 0;
  for (const pool::PooledAdvice& p : cases)
    if (p.level) ++given;
  return {given, static_cast<std::int64_t>(cases.size())};
}

AppMetrics app_metrics(const std::string& app_id, const PooledCases& cases,
                       const GoldMap& gold) {
  AppMetrics m;
  m.app_id = app_id;
  m.n_cases = static_cast<int>(cases.size());
  m.accuracy = accuracy(cases, gold);
  m.accuracy_by_level = accuracy_by_level(cases, gold);
  m.safety = safety(cases, gold);
  m.overtriage_inclination = overtriage_inclination(cases, gold);
  m.comprehensiveness = comprehensiveness(cases);
  return m;
}

CcsTable ccs(const PooledCases& pooled, const GoldMap& gold) {
  std::set<std::string> apps;
  std::set<std::string> items;
  for (const pool::PooledAdvice& p : pooled) {
    apps.insert(p.app_id);
    items.insert(p.vignette_id);
  }
  if (apps.size() < 2) {
    throw Error("TooFewApps", "",
                "capability comparison needs at least two apps");
  }

  // vignette -> apps that gave advice on it.
  std::map<std::string, std::set<std::string>> advised;
  for (const pool::PooledAdvice& p : pooled) {
    if (p.level) advised[p.vignette_id].insert(p.app_id);
  }

  CcsTable table;
  std::set<std::string> common;
  for (const std::string& item : items) {
    auto it = advised.find(item);
    if (it != advised.end() && it->second.size() == apps.size()) {
      common.insert(item);
      table.common_item_ids.push_back(item);
    }
  }
  if (common.empty()) {
    throw Error("NoCommonItems", "",
                "no vignette was completed by every app");
  }
  table.coverage = {static_cast<std::int64_t>(common.size()),
                    static_cast<std::int64_t>(items.size())};

  std::map<std::string, std::int64_t> correct;
  for (const std::string& app : apps) correct[app] = 0;
  for (const pool::PooledAdvice& p : pooled) {
    if (!common.count(p.vignette_id)) continue;
    if (p.level && *p.level == gold_for(p, gold)) ++correct[p.app_id];
  }
  for (const std::string& app : apps) {
    table.ccs[app] =
        Rational{correct[app], static_cast<std::int64_t>(common.size())};
  }
  return table;
}

std::vector<MetricValue> enumerate_metrics(const AppMetrics& m) {
  std::vector<MetricValue> out;
  out.push_back({"accuracy", m.accuracy, ""});
  for (const auto& [level, value] : m.accuracy_by_level) {
    out.push_back(
        {"accuracy_" + std::string(level_name(level)), value, ""});
  }
  out.push_back({"safety", m.safety, ""});
  if (m.overtriage_inclination) {
    out.push_back({"overtriage_inclination", *m.overtriage_inclination, ""});
  } else {
    out.push_back({"overtriage_inclination", std::nullopt, "no_errors"});
  }
  out.push_back({"comprehensiveness", m.comprehensiveness, ""});
  out.push_back({"n_cases", Rational{m.n_cases}, ""});
  return out;
}

namespace {

std::vector<std::string> variant_order(const std::vector<std::string>& requested) {
  std::vector<std::string> order{std::string(pool::kDefaultVariant)};
  for (const std::string& v : requested) {
    if (std::find(order.begin(), order.end(), v) == order.end()) {
      order.push_back(v);
    }
  }
  return order;
}

VariantMetrics variant_metrics(const Study& study, const std::string& variant,
                               const GoldMap& gold) {
  std::map<std::string, PooledCases> by_app;
  for (pool::PooledAdvice& p : pool::pool_study(study, variant)) {
    by_app[p.app_id].push_back(std::move(p));
  }
  VariantMetrics vm;
  vm.variant = variant;
  for (const std::string& app : study.apps) {
    vm.per_app.push_back(app_metrics(app, by_app[app], gold));
  }
  return vm;
}

}  // namespace

SensitivityReport sensitivity_analysis(
    const Study& study, const std::vector<std::string>& variants) {
  const GoldMap gold = gold_map(study);
  SensitivityReport report;
  for (const std::string& v : variant_order(variants)) {
    report.variants.push_back(variant_metrics(study, v, gold));
  }

  const VariantMetrics& base = report.variants.front();
  for (const VariantMetrics& vm : report.variants) {
    for (std::size_t a = 0; a < vm.per_app.size(); ++a) {
      const auto rows = enumerate_metrics(vm.per_app[a]);
      const auto base_rows = enumerate_metrics(base.per_app[a]);
      for (const MetricValue& row : rows) {
        DeltaRow d;
        d.variant = vm.variant;
        d.app_id = vm.per_app[a].app_id;
        d.metric = row.name;
        const MetricValue* base_row = nullptr;
        for (const MetricValue& b : base_rows) {
          if (b.name == row.name) {
            base_row = &b;
            break;
          }
        }
        if (base_row && row.value && base_row->value) {
          d.delta = *row.value - *base_row->value;
        } else if (!row.value && (!base_row || !base_row->value)) {
          d.note = "undefined_both";
        } else if (!row.value) {
          d.note = "undefined_variant";
        } else {
          d.note = "undefined_default";
        }
        report.deltas.push_back(std::move(d));
      }
    }
  }
  return report;
}

EvaluationBundle evaluate_all(const Study& study,
                              const std::vector<std::string>& variants) {
  EvaluationBundle bundle;
  bundle.sensitivity = sensitivity_analysis(study, variants);
  bundle.variants = bundle.sensitivity.variants;
  if (study.apps.size() >= 2) {
    const GoldMap gold = gold_map(study);
    bundle.ccs = ccs(pool::pool_study(study, pool::kDefaultVariant), gold);
  }
  bundle.agreement = pool::agreement_all(study, pool::kDefaultVariant);
  return bundle;
}

}  // namespace triagebench::metrics
