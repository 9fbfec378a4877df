#include "triagebench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "triagebench/csv.hpp"
#include "triagebench/error.hpp"
#include "triagebench/pool.hpp"
#include "triagebench/rational.hpp"
#include "triagebench/version.hpp"

namespace triagebench::report {

namespace {

std::string iso_utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string describe_collapse(const pool::CollapseMap& collapse) {
  if (collapse.empty()) return "no extended levels";
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, level] : collapse) {
    if (!first) os << "; ";
    first = false;
    os << name << " -> " << level_name(level);
  }
  return os.str();
}

// n_cases is a count, everything else a proportion.
std::string render_value(const std::string& metric, const Rational& value) {
  if (metric == "n_cases") {
    return std::to_string(value.numerator() / value.denominator());
  }
  return format_fixed4(value);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759",
                                    "#76b7b2", "#59a14f", "#edc949"};
constexpr int kPaletteSize = 6;

}  // namespace

ReportBundle make_bundle(const Study& study,
                         const metrics::EvaluationBundle& eval,
                         std::string timestamp) {
  ReportBundle bundle;
  bundle.summary = ingest::build_summary(study);
  bundle.eval = eval;
  bundle.tool_version = std::string(kVersion);
  for (const metrics::VariantMetrics& vm : eval.variants) {
    bundle.variant_descriptions[vm.variant] =
        describe_collapse(pool::resolve_variant(study.mapping, vm.variant));
  }
  bundle.timestamp = timestamp.empty() ? iso_utc_now() : std::move(timestamp);
  return bundle;
}

std::string render_markdown(const ReportBundle& bundle) {
  std::ostringstream md;
  md << "# Triage benchmark report\n\n";
  md << "- Tool: " << kToolName << " " << bundle.tool_version << "\n";
  md << "- Generated: " << bundle.timestamp << "\n\n";

  const ingest::StudySummary& s = bundle.summary;
  md << "## Study summary\n\n";
  md << "- Vignettes: " << s.n_vignettes << "\n";
  md << "- Advice records: " << s.n_records << "\n";
  md << "- Apps: " << s.n_apps << "\n";
  md << "- Inputters: " << s.n_inputters << "\n\n";

  md << "### Vignettes per stratum\n\n";
  md << "| Stratum | Vignettes |\n|---|---:|\n";
  for (const auto& [stratum, n] : s.vignettes_per_stratum) {
    md << "| " << stratum << " | " << n << " |\n";
  }
  md << "\n### Gold standard per level\n\n";
  md << "| Level | Vignettes |\n|---|---:|\n";
  for (const auto& [level, n] : s.gold_per_level) {
    md << "| " << level << " | " << n << " |\n";
  }
  md << "\n### Records per app\n\n";
  md << "| App | Records |\n|---|---:|\n";
  for (const auto& [app, n] : s.records_per_app) {
    md << "| " << app << " | " << n << " |\n";
  }
  md << "\n### Records per inputter\n\n";
  md << "| Inputter | Records |\n|---|---:|\n";
  for (const auto& [inputter, n] : s.records_per_inputter) {
    md << "| " << inputter << " | " << n << " |\n";
  }

  md << "\n## Inter-inputter agreement (default mapping)\n\n";
  md << "| App | Fleiss' kappa | Percent agreement | Items | Raters |\n";
  md << "|---|---:|---:|---:|---:|\n";
  for (const pool::AgreementStats& a : bundle.eval.agreement) {
    md << "| " << a.app_id << " | "
       << (a.fleiss_kappa ? format_fixed4(*a.fleiss_kappa) : std::string("n/a"))
       << " | " << format_fixed4(a.percent_agreement) << " | " << a.n_items
       << " | " << a.n_raters << " |\n";
  }

  md << "\n## Metrics\n";
  for (const metrics::VariantMetrics& vm : bundle.eval.variants) {
    md << "\n### Variant: " << vm.variant << "\n\n";
    auto desc = bundle.variant_descriptions.find(vm.variant);
    if (desc != bundle.variant_descriptions.end()) {
      md << "Mapping: " << desc->second << "\n\n";
    }
    if (vm.per_app.empty()) continue;
    const auto names = metrics::enumerate_metrics(vm.per_app.front());
    md << "| App |";
    for (const metrics::MetricValue& mv : names) md << " " << mv.name << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < names.size(); ++i) md << "---:|";
    md << "\n";
    for (const metrics::AppMetrics& am : vm.per_app) {
      md << "| " << am.app_id << " |";
      for (const metrics::MetricValue& mv : metrics::enumerate_metrics(am)) {
        if (mv.value) {
          md << " " << render_value(mv.name, *mv.value) << " |";
        } else {
          md << " n/a (no errors) |";
        }
      }
      md << "\n";
    }
  }

  md << "\n## Capability comparison\n\n";
  if (bundle.eval.ccs) {
    const metrics::CcsTable& t = *bundle.eval.ccs;
    md << "- Common items: " << t.common_item_ids.size() << " of "
       << s.n_vignettes << "\n";
    md << "- Coverage: " << format_fixed4(t.coverage) << "\n\n";
    md << "| App | CCS |\n|---|---:|\n";
    for (const auto& [app, score] : t.ccs) {
      md << "| " << app << " | " << format_fixed4(score) << " |\n";
    }
  } else {
    md << "Not computed: capability comparison needs at least two apps.\n";
  }

  md << "\n## Sensitivity analysis\n\n";
  md << "| Variant | App | Metric | Delta |\n|---|---|---|---:|\n";
  for (const metrics::DeltaRow& d : bundle.eval.sensitivity.deltas) {
    md << "| " << d.variant << " | " << d.app_id << " | " << d.metric << " | ";
    if (d.delta) {
      md << render_value(d.metric, *d.delta);
    } else {
      md << "n/a (" << d.note << ")";
    }
    md << " |\n";
  }
  return md.str();
}

CsvOutputs emit_csv(const ReportBundle& bundle) {
  CsvOutputs out;

  std::ostringstream metrics_csv;
  metrics_csv << "app_id,variant,metric,value,reason\n";
  for (const metrics::VariantMetrics& vm : bundle.eval.variants) {
    for (const metrics::AppMetrics& am : vm.per_app) {
      for (const metrics::MetricValue& mv : metrics::enumerate_metrics(am)) {
        metrics_csv << csv::format_row(
            {am.app_id, vm.variant, mv.name,
             mv.value ? render_value(mv.name, *mv.value) : std::string(),
             mv.note});
      }
    }
  }
  out.metrics_csv = metrics_csv.str();

  std::ostringstream ccs_csv;
  ccs_csv << "app_id,ccs,common_items,total_items,coverage\n";
  if (bundle.eval.ccs) {
    const metrics::CcsTable& t = *bundle.eval.ccs;
    for (const auto& [app, score] : t.ccs) {
      ccs_csv << csv::format_row(
          {app, format_fixed4(score), std::to_string(t.common_item_ids.size()),
           std::to_string(bundle.summary.n_vignettes),
           format_fixed4(t.coverage)});
    }
  }
  out.ccs_csv = ccs_csv.str();

  std::ostringstream sens_csv;
  sens_csv << "variant,app_id,metric,delta,reason\n";
  for (const metrics::DeltaRow& d : bundle.eval.sensitivity.deltas) {
    sens_csv << csv::format_row(
        {d.variant, d.app_id, d.metric,
         d.delta ? render_value(d.metric, *d.delta) : std::string(), d.note});
  }
  out.sensitivity_csv = sens_csv.str();
  return out;
}

const std::vector<std::string>& chartable_metrics() {
  static const std::vector<std::string> kMetrics = {
      "accuracy", "safety", "overtriage_inclination", "comprehensiveness"};
  return kMetrics;
}

std::string emit_svg_chart(const ReportBundle& bundle,
                           const std::string& metric) {
  const auto& known = chartable_metrics();
  if (std::find(known.begin(), known.end(), metric) == known.end()) {
    throw Error("UnknownMetric", "chart",
                "no chart is defined for metric '" + metric + "'");
  }

  // One group of bars per app, one bar per variant.
  std::vector<std::string> apps;
  if (!bundle.eval.variants.empty()) {
    for (const metrics::AppMetrics& am : bundle.eval.variants.front().per_app) {
      apps.push_back(am.app_id);
    }
  }
  const std::size_t n_variants = bundle.eval.variants.size();

  constexpr double kBarW = 26.0, kBarGap = 4.0, kGroupGap = 28.0;
  constexpr double kLeft = 52.0, kTop = 34.0, kPlotH = 220.0;
  const double group_w =
      static_cast<double>(n_variants) * kBarW +
      static_cast<double>(n_variants ? n_variants - 1 : 0) * kBarGap;
  const double plot_w =
      apps.empty()
          ? 80.0
          : static_cast<double>(apps.size()) * (group_w + kGroupGap);
  const double width = kLeft + plot_w + 160.0;  // legend space on the right
  const double height = kTop + kPlotH + 58.0;
  const double base_y = kTop + kPlotH;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width)
      << "\" height=\"" << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width)
      << " " << fmt2(height) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt2(width) << "\" height=\""
      << fmt2(height) << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << fmt2(kLeft) << "\" y=\"20\" font-family=\"monospace\" "
         "font-size=\"14\">"
      << xml_escape(metric) << "</text>\n";

  // Axis and gridlines at 0, 0.25, ..., 1.
  for (int i = 0; i <= 4; ++i) {
    const double frac = static_cast<double>(i) / 4.0;
    const double y = base_y - frac * kPlotH;
    svg << "<line x1=\"" << fmt2(kLeft) << "\" y1=\"" << fmt2(y) << "\" x2=\""
        << fmt2(kLeft + plot_w) << "\" y2=\"" << fmt2(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt2(kLeft - 8.0) << "\" y=\"" << fmt2(y + 4.0)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">"
        << fmt2(frac) << "</text>\n";
  }
  svg << "<line x1=\"" << fmt2(kLeft) << "\" y1=\"" << fmt2(kTop - 6.0)
      << "\" x2=\"" << fmt2(kLeft) << "\" y2=\"" << fmt2(base_y)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  for (std::size_t a = 0; a < apps.size(); ++a) {
    const double group_x =
        kLeft + kGroupGap / 2.0 +
        static_cast<double>(a) * (group_w + kGroupGap);
    for (std::size_t v = 0; v < n_variants; ++v) {
      const metrics::VariantMetrics& vm = bundle.eval.variants[v];
      std::optional<Rational> value;
      for (const metrics::MetricValue& mv :
           metrics::enumerate_metrics(vm.per_app[a])) {
        if (mv.name == metric) {
          value = mv.value;
          break;
        }
      }
      const double x = group_x + static_cast<double>(v) * (kBarW + kBarGap);
      const char* fill = kPalette[v % kPaletteSize];
      if (value) {
        const double h = to_double(*value) * kPlotH;
        svg << "<rect x=\"" << fmt2(x) << "\" y=\"" << fmt2(base_y - h)
            << "\" width=\"" << fmt2(kBarW) << "\" height=\"" << fmt2(h)
            << "\" fill=\"" << fill << "\"/>\n";
        svg << "<text x=\"" << fmt2(x + kBarW / 2.0) << "\" y=\""
            << fmt2(base_y - h - 4.0)
            << "\" text-anchor=\"middle\" font-family=\"monospace\" "
               "font-size=\"9\">"
            << format_fixed4(*value) << "</text>\n";
      } else {
        svg << "<text x=\"" << fmt2(x + kBarW / 2.0) << "\" y=\""
            << fmt2(base_y - 4.0)
            << "\" text-anchor=\"middle\" font-family=\"monospace\" "
               "font-size=\"9\">n/a</text>\n";
      }
    }
    svg << "<text x=\"" << fmt2(group_x + group_w / 2.0) << "\" y=\""
        << fmt2(base_y + 16.0)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"11\">"
        << xml_escape(apps[a]) << "</text>\n";
  }

  // Legend: one swatch per variant.
  for (std::size_t v = 0; v < n_variants; ++v) {
    const double y = kTop + static_cast<double>(v) * 18.0;
    svg << "<rect x=\"" << fmt2(kLeft + plot_w + 16.0) << "\" y=\"" << fmt2(y)
        << "\" width=\"12\" height=\"12\" fill=\"" << kPalette[v % kPaletteSize]
        << "\"/>\n";
    svg << "<text x=\"" << fmt2(kLeft + plot_w + 34.0) << "\" y=\""
        << fmt2(y + 10.0) << "\" font-family=\"monospace\" font-size=\"11\">"
        << xml_escape(bundle.eval.variants[v].variant) << "</text>\n";
  }

  svg << "<line x1=\"" << fmt2(kLeft) << "\" y1=\"" << fmt2(base_y)
      << "\" x2=\"" << fmt2(kLeft + plot_w) << "\" y2=\"" << fmt2(base_y)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace triagebench::report
