#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "triagebench/csv.hpp"
#include "triagebench/error.hpp"
#include "triagebench/ingest.hpp"
#include "triagebench/metrics.hpp"
#include "triagebench/rational.hpp"
#include "triagebench/report.hpp"

using namespace triagebench;

namespace {

Study two_app_study() {
  return assemble_study(
      ingest::parse_vignettes(
          "vignette_id,description,gold_level,stratum,source,panel_count,"
          "consensus_method\n"
          "v1,a,emergency,cardiac,src,2,m\n"
          "v2,b,self_care,rash,src,2,m\n"
          "v3,c,non_emergency,rash,src,2,m\n",
          "v"),
      ingest::parse_records("vignette_id,app_id,inputter_id,raw_advice\n"
                            "v1,alpha,i1,go\n"
                            "v1,alpha,i2,go\n"
                            "v2,alpha,i1,stay\n"
                            "v2,alpha,i2,stay\n"
                            "v3,alpha,i1,gp\n"
                            "v3,alpha,i2,gp\n"
                            "v1,beta,i1,go\n"
                            "v1,beta,i2,go\n"
                            "v2,beta,i1,go\n"
                            "v2,beta,i2,go\n"
                            "v3,beta,i1,__ABSTAIN__\n"
                            "v3,beta,i2,__ABSTAIN__\n",
                            "r"),
      ingest::parse_mapping("[extended]\n"
                            "1-day-urgent = non_emergency\n"
                            "[app:alpha]\n"
                            "go = emergency\nstay = self_care\ngp = 1-day-urgent\n"
                            "[app:beta]\n"
                            "go = emergency\n"
                            "[override:strict]\n"
                            "1-day-urgent = emergency\n",
                            "m"));
}

report::ReportBundle demo_bundle() {
  const Study s = two_app_study();
  return report::make_bundle(s, metrics::evaluate_all(s, {"strict"}),
                             "2026-01-02T03:04:05Z");
}

}  // namespace

TEST_CASE("format_fixed4 rounds rationals half-even at the 4th place") {
  CHECK(format_fixed4(Rational{2, 3}) == "0.6667");
  CHECK(format_fixed4(Rational{1, 3}) == "0.3333");
  CHECK(format_fixed4(Rational{1, 2}) == "0.5000");
  CHECK(format_fixed4(Rational{1}) == "1.0000");
  CHECK(format_fixed4(Rational{0}) == "0.0000");
  // Exact ties round to even: 1/20000 = 0.00005 -> 0.0000, 3/20000 -> 0.0002.
  CHECK(format_fixed4(Rational{1, 20000}) == "0.0000");
  CHECK(format_fixed4(Rational{3, 20000}) == "0.0002");
  CHECK(format_fixed4(Rational{-1, 20000}) == "0.0000");  // never "-0"
  CHECK(format_fixed4(Rational{-2, 3}) == "-0.6667");
  CHECK(format_fixed4(Rational{-1, 6}) == "-0.1667");
  CHECK(format_fixed4(Rational{7, 2}) == "3.5000");
  CHECK(format_fixed4(0.25) == "0.2500");
}

TEST_CASE("format_fixed4 on rationals agrees with long-double rounding") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::int64_t den = 1 + static_cast<std::int64_t>(rng() % 999);
    const std::int64_t num = static_cast<std::int64_t>(rng() % 2000) - 1000;
    const Rational r{num, den};
    // Skip exact .00005 ties, where binary doubles cannot represent the tie.
    if ((20000 * num) % den == 0 && (10000 * num) % den != 0) continue;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4Lf",
                  static_cast<long double>(num) / den);
    std::string want(buf);
    if (want == "-0.0000") want = "0.0000";
    CHECK(format_fixed4(r) == want);
  }
}

TEST_CASE("make_bundle snapshots summary, versions and variant descriptions") {
  const report::ReportBundle b = demo_bundle();
  CHECK(b.summary.n_vignettes == 3);
  CHECK(b.summary.n_apps == 2);
  CHECK(b.timestamp == "2026-01-02T03:04:05Z");
  CHECK(!b.tool_version.empty());
  REQUIRE(b.variant_descriptions.count("default") == 1);
  REQUIRE(b.variant_descriptions.count("strict") == 1);
  CHECK(b.variant_descriptions.at("default") ==
        "1-day-urgent -> non_emergency");
  CHECK(b.variant_descriptions.at("strict") == "1-day-urgent -> emergency");
}

TEST_CASE("render_markdown emits every fixed section") {
  const std::string md = report::render_markdown(demo_bundle());
  CHECK(md.find("# Triage benchmark report") != std::string::npos);
  CHECK(md.find("- Generated: 2026-01-02T03:04:05Z") != std::string::npos);
  CHECK(md.find("## Study summary") != std::string::npos);
  CHECK(md.find("## Inter-inputter agreement (default mapping)") !=
        std::string::npos);
  CHECK(md.find("## Metrics") != std::string::npos);
  CHECK(md.find("### Variant: default") != std::string::npos);
  CHECK(md.find("### Variant: strict") != std::string::npos);
  CHECK(md.find("## Capability comparison") != std::string::npos);
  CHECK(md.find("## Sensitivity analysis") != std::string::npos);
  // beta abstains on v3, so the common set is v1,v2 of 3 items.
  CHECK(md.find("- Common items: 2 of 3") != std::string::npos);
  CHECK(md.find("- Coverage: 0.6667") != std::string::npos);
  // beta makes no triage errors under the default mapping.
  CHECK(md.find("n/a (no errors)") != std::string::npos);
}

TEST_CASE("render_markdown notes a skipped capability table") {
  const Study s = two_app_study();
  std::vector<AdviceRecord> alpha_only;
  for (const auto& r : s.records)
    if (r.app_id == "alpha") alpha_only.push_back(r);
  const Study solo = assemble_study(s.vignettes, alpha_only, s.mapping);
  const auto bundle =
      report::make_bundle(solo, metrics::evaluate_all(solo, {}), "t");
  const std::string md = report::render_markdown(bundle);
  CHECK(md.find("Not computed: capability comparison needs at least two apps") !=
        std::string::npos);
}

TEST_CASE("emit_csv writes the three flat files with exact cells") {
  const report::CsvOutputs out = report::emit_csv(demo_bundle());

  const csv::Table metrics_table = csv::parse(out.metrics_csv, "metrics.csv");
  REQUIRE(!metrics_table.rows.empty());
  CHECK(metrics_table.header ==
        std::vector<std::string>{"app_id", "variant", "metric", "value",
                                 "reason"});
  // alpha is perfectly accurate (hence error-free) under the default mapping.
  bool found_alpha_accuracy = false;
  bool found_alpha_overtriage = false;
  for (const auto& row : metrics_table.rows) {
    if (row[0] == "alpha" && row[1] == "default" && row[2] == "accuracy") {
      CHECK(row[3] == "1.0000");
      CHECK(row[4].empty());
      found_alpha_accuracy = true;
    }
    if (row[0] == "alpha" && row[1] == "default" &&
        row[2] == "overtriage_inclination") {
      CHECK(row[3].empty());
      CHECK(row[4] == "no_errors");
      found_alpha_overtriage = true;
    }
    if (row[2] == "n_cases" && row[0] == "alpha") CHECK(row[3] == "3");
  }
  CHECK(found_alpha_accuracy);
  CHECK(found_alpha_overtriage);

  const csv::Table ccs_table = csv::parse(out.ccs_csv, "ccs.csv");
  CHECK(ccs_table.header ==
        std::vector<std::string>{"app_id", "ccs", "common_items",
                                 "total_items", "coverage"});
  REQUIRE(ccs_table.rows.size() == 2);
  CHECK(ccs_table.rows[0] ==
        std::vector<std::string>{"alpha", "1.0000", "2", "3", "0.6667"});
  CHECK(ccs_table.rows[1][0] == "beta");

  const csv::Table sens = csv::parse(out.sensitivity_csv, "sensitivity.csv");
  CHECK(sens.header == std::vector<std::string>{"variant", "app_id", "metric",
                                                "delta", "reason"});
  bool strict_accuracy = false;
  for (const auto& row : sens.rows) {
    if (row[0] == "strict" && row[1] == "alpha" && row[2] == "accuracy") {
      // gp -> emergency turns v3 into an overtriage: 3/3 -> 2/3.
      CHECK(row[3] == "-0.3333");
      strict_accuracy = true;
    }
  }
  CHECK(strict_accuracy);
}

TEST_CASE("emit_csv leaves no blank separator lines") {
  const report::CsvOutputs out = report::emit_csv(demo_bundle());
  for (const std::string* text :
       {&out.metrics_csv, &out.ccs_csv, &out.sensitivity_csv}) {
    CHECK(text->find("\n\n") == std::string::npos);
    REQUIRE(!text->empty());
    CHECK(text->back() == '\n');
  }
}

TEST_CASE("svg charts are a pure function of the bundle") {
  const report::ReportBundle b = demo_bundle();
  REQUIRE(report::chartable_metrics() ==
          std::vector<std::string>{"accuracy", "safety",
                                   "overtriage_inclination",
                                   "comprehensiveness"});
  for (const std::string& metric : report::chartable_metrics()) {
    const std::string svg = report::emit_svg_chart(b, metric);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find(metric) != std::string::npos);
    CHECK(svg == report::emit_svg_chart(b, metric));  // deterministic
  }
  // Undefined overtriage values render as labels, not bars of height NaN.
  const std::string svg = report::emit_svg_chart(b, "overtriage_inclination");
  CHECK(svg.find("n/a") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK_THROWS_WITH_AS(report::emit_svg_chart(b, "n_cases"),
                       doctest::Contains("UnknownMetric"), Error);
}

TEST_CASE("markdown and csv outputs are identical across repeated builds") {
  const Study s = two_app_study();
  const auto eval = metrics::evaluate_all(s, {"strict"});
  const auto b1 = report::make_bundle(s, eval, "fixed");
  const auto b2 = report::make_bundle(s, eval, "fixed");
  CHECK(report::render_markdown(b1) == report::render_markdown(b2));
  const auto c1 = report::emit_csv(b1);
  const auto c2 = report::emit_csv(b2);
  CHECK(c1.metrics_csv == c2.metrics_csv);
  CHECK(c1.ccs_csv == c2.ccs_csv);
  CHECK(c1.sensitivity_csv == c2.sensitivity_csv);
}
