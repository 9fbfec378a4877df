#pragma once

#include <map>
#include <string>
#include <vector>

#include "triagebench/ingest.hpp"
#include "triagebench/metrics.hpp"

namespace triagebench::report {

// Everything the renderers need; no computation happens past this point.
struct ReportBundle {
  ingest::StudySummary summary;
  metrics::EvaluationBundle eval;
  std::string tool_version;
  // variant name -> human-readable description of its collapses.
  std::map<std::string, std::string> variant_descriptions;
  // ISO-8601; the only content excluded from golden-file comparison.
  std::string timestamp;
};

ReportBundle make_bundle(const Study& study,
                         const metrics::EvaluationBundle& eval,
                         std::string timestamp = {});

// Fixed-section document: study summary, agreement, per-app metrics per
// variant, CCS, sensitivity deltas. Apps alphabetical throughout.
std::string render_markdown(const ReportBundle& bundle);

struct CsvOutputs {
  std::string metrics_csv;      // app_id,variant,metric,value,reason
  std::string ccs_csv;          // app_id,ccs,common_items,total_items,coverage
  std::string sensitivity_csv;  // variant,app_id,metric,delta,reason
};

CsvOutputs emit_csv(const ReportBundle& bundle);

// Metrics accepted by emit_svg_chart.
const std::vector<std::string>& chartable_metrics();

// Self-contained grouped bar chart (apps x variants) for one metric;
// coordinates are a pure function of the data. Error "UnknownMetric" for
// anything outside chartable_metrics().
std::string emit_svg_chart(const ReportBundle& bundle,
                           const std::string& metric);

}  // namespace triagebench::report
