#include "triagebench/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <set>
#include <sstream>

#include "triagebench/config_text.hpp"
#include "triagebench/csv.hpp"
#include "triagebench/error.hpp"
#include "triagebench/ingest.hpp"
#include "triagebench/metrics.hpp"
#include "triagebench/pool.hpp"
#include "triagebench/rational.hpp"
#include "triagebench/refine.hpp"
#include "triagebench/report.hpp"
#include "triagebench/sim.hpp"
#include "triagebench/version.hpp"

namespace triagebench::cli {

namespace {

namespace fs = std::filesystem;

// Signals an invocation problem (exit 2) rather than a data problem (exit 1).
struct UsageError {
  std::string message;
};

std::string at(std::string_view source, int line) {
  std::ostringstream os;
  os << source << ":" << line;
  return os.str();
}

template <typename T>
T entry_number(const cfg::Entry& e, std::string_view source) {
  T v{};
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("BadNumber", at(source, e.line),
                "'" + e.value + "' is not a valid number");
  }
  return v;
}

bool entry_bool(const cfg::Entry& e, std::string_view source) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw Error("BadBoolean", at(source, e.line),
              "'" + e.value + "' is not 'true' or 'false'");
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

RunConfig parse_run_config(std::string_view cfg_text,
                           std::string_view source_name,
                           const fs::path& base_dir) {
  const cfg::Document doc = cfg::parse(cfg_text, source_name);
  RunConfig rc;
  std::set<std::string> seen;
  for (const cfg::Section& section : doc.sections) {
    if (!section.name.empty()) {
      throw Error("UnknownSection", at(source_name, section.line),
                  "run config sections take no name");
    }
    if (!seen.insert(section.kind).second) {
      throw Error("DuplicateSection", at(source_name, section.line),
                  "[" + section.kind + "] declared twice");
    }
    if (section.kind == "paths") {
      for (const cfg::Entry& e : section.entries) {
        if (e.key == "vignettes") {
          rc.vignettes = resolve(base_dir, e.value);
        } else if (e.key == "records") {
          rc.records = resolve(base_dir, e.value);
        } else if (e.key == "mapping") {
          rc.mapping = resolve(base_dir, e.value);
        } else if (e.key == "simspec") {
          rc.simspec = resolve(base_dir, e.value);
        } else {
          throw Error("UnknownKey", at(source_name, e.line),
                      "unknown [paths] key '" + e.key + "'");
        }
      }
    } else if (section.kind == "run") {
      for (const cfg::Entry& e : section.entries) {
        if (e.key == "out") {
          rc.out = resolve(base_dir, e.value);
        } else if (e.key == "variant") {
          rc.variants.push_back(e.value);
        } else if (e.key == "refine") {
          rc.refine = entry_bool(e, source_name);
        } else if (e.key == "seed") {
          rc.seed = entry_number<std::uint64_t>(e, source_name);
        } else {
          throw Error("UnknownKey", at(source_name, e.line),
                      "unknown [run] key '" + e.key + "'");
        }
      }
    } else if (section.kind == "power") {
      PowerParams p;
      bool got[4] = {false, false, false, false};
      for (const cfg::Entry& e : section.entries) {
        if (e.key == "p0") {
          p.p0 = entry_number<double>(e, source_name);
          got[0] = true;
        } else if (e.key == "p1") {
          p.p1 = entry_number<double>(e, source_name);
          got[1] = true;
        } else if (e.key == "alpha") {
          p.alpha = entry_number<double>(e, source_name);
          got[2] = true;
        } else if (e.key == "power") {
          p.power = entry_number<double>(e, source_name);
          got[3] = true;
        } else {
          throw Error("UnknownKey", at(source_name, e.line),
                      "unknown [power] key '" + e.key + "'");
        }
      }
      if (!(got[0] && got[1] && got[2] && got[3])) {
        throw Error("MissingKey", at(source_name, section.line),
                    "[power] needs p0, p1, alpha and power");
      }
      rc.power = p;
    } else {
      throw Error("UnknownSection", at(source_name, section.line),
                  "unknown section [" + section.kind + "]");
    }
  }
  return rc;
}

namespace {

std::string describe(const Error& e) {
  std::string s = "error " + e.code();
  if (!e.location().empty()) s += " at " + e.location();
  s += ": " + e.message();
  return s;
}

void print_findings(const ingest::ValidationReport& rep, std::ostream& err) {
  for (const ingest::Finding& f : rep.errors) {
    err << "error " << f.code;
    if (!f.location.empty()) err << " at " << f.location;
    err << ": " << f.message << "\n";
  }
  for (const ingest::Finding& f : rep.warnings) {
    err << "warning " << f.code;
    if (!f.location.empty()) err << " at " << f.location;
    err << ": " << f.message << "\n";
  }
}

Study load(const RunConfig& rc) {
  if (rc.vignettes.empty() || rc.records.empty() || rc.mapping.empty()) {
    throw UsageError{"config must set [paths] vignettes, records and mapping"};
  }
  return ingest::load_study(rc.vignettes, rc.records, rc.mapping);
}

Study load_validated(const RunConfig& rc, std::ostream& err) {
  Study study = load(rc);
  const ingest::ValidationReport rep = ingest::validate_study(study);
  print_findings(rep, err);
  if (!rep.ok()) {
    throw Error("ValidationFailed", "",
                std::to_string(rep.errors.size()) + " validation error(s)");
  }
  return study;
}

fs::path require_out(const RunConfig& rc) {
  if (rc.out.empty()) {
    throw UsageError{
        "no output directory: pass --out, set [run] out, or export "
        "TRIAGEBENCH_OUT"};
  }
  fs::create_directories(rc.out);
  return rc.out;
}

void write_out(const fs::path& dir, const std::string& name,
               std::string_view content, std::ostream& out) {
  ingest::write_file(dir / name, content);
  out << "wrote " << (dir / name).string() << "\n";
}

// Flag/config fallback: no explicit selection means every declared override.
std::vector<std::string> pick_variants(const RunConfig& rc,
                                       const Study& study) {
  if (!rc.variants.empty()) return rc.variants;
  std::vector<std::string> all;
  all.reserve(study.mapping.overrides.size());
  for (const auto& [name, overrides] : study.mapping.overrides) {
    all.push_back(name);
  }
  return all;
}

std::string pooled_csv(const std::vector<pool::PooledAdvice>& pooled) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(pooled.size());
  for (const pool::PooledAdvice& p : pooled) {
    std::string votes;
    for (const auto& [inputter, vote] : p.vote_detail) {
      if (!votes.empty()) votes += ";";
      votes += inputter + "=" + pool::vote_token(vote);
    }
    rows.push_back({p.vignette_id, p.app_id, pool::vote_token(p.level),
                    p.tie_broken ? "true" : "false", votes});
  }
  return csv::write({"vignette_id", "app_id", "pooled_level", "tie_broken",
                     "votes"},
                    rows);
}

std::string agreement_csv(const std::vector<pool::AgreementStats>& stats) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(stats.size());
  for (const pool::AgreementStats& a : stats) {
    rows.push_back({a.app_id,
                    a.fleiss_kappa ? format_fixed4(*a.fleiss_kappa)
                                   : std::string(),
                    format_fixed4(a.percent_agreement),
                    std::to_string(a.n_items), std::to_string(a.n_raters)});
  }
  return csv::write(
      {"app_id", "fleiss_kappa", "percent_agreement", "n_items", "n_raters"},
      rows);
}

std::string item_stats_csv(const refine::RefineResult& result) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < result.iterations.size(); ++i) {
    for (const refine::ItemStats& s : result.iterations[i]) {
      rows.push_back({s.vignette_id, std::to_string(i + 1),
                      format_fixed4(s.difficulty),
                      s.item_total_r ? format_fixed4(*s.item_total_r)
                                     : std::string(),
                      std::string(refine::exclusion_name(s.excluded))});
    }
  }
  return csv::write(
      {"vignette_id", "iteration", "difficulty", "item_total_r",
       "excluded_reason"},
      rows);
}

std::string retained_csv(const refine::RefineResult& result) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(result.retained.size());
  for (const std::string& id : result.retained) rows.push_back({id});
  return csv::write({"vignette_id"}, rows);
}

void print_power(const PowerParams& p, std::ostream& out) {
  const refine::SampleSize n =
      refine::required_sample_size(p.p0, p.p1, p.alpha, p.power);
  out << "power analysis: n >= " << n.per_group
      << " per group (recommended vignette-set size "
      << n.recommended_set_size << ")\n";
}

Study restrict_to(const Study& study, const std::vector<std::string>& ids) {
  const std::set<std::string> keep(ids.begin(), ids.end());
  std::vector<Vignette> vignettes;
  for (const Vignette& v : study.vignettes) {
    if (keep.count(v.id)) vignettes.push_back(v);
  }
  std::vector<AdviceRecord> records;
  for (const AdviceRecord& r : study.records) {
    if (keep.count(r.vignette_id)) records.push_back(r);
  }
  return assemble_study(std::move(vignettes), std::move(records),
                        study.mapping);
}

int cmd_validate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const Study study = load(rc);
  const ingest::ValidationReport rep = ingest::validate_study(study);
  print_findings(rep, err);
  const ingest::StudySummary& s = rep.summary;
  out << "study: " << s.n_vignettes << " vignette(s), " << s.n_records
      << " record(s), " << s.n_apps << " app(s), " << s.n_inputters
      << " inputter(s)\n";
  out << "validation: " << rep.errors.size() << " error(s), "
      << rep.warnings.size() << " warning(s)\n";
  return rep.ok() ? kExitOk : kExitDataError;
}

int cmd_refine(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const Study study = load_validated(rc, err);
  const fs::path dir = require_out(rc);
  const refine::ScoreMatrix matrix = refine::build_score_matrix(study);
  const refine::RefineResult result = refine::refine_set(matrix);
  write_out(dir, "item_stats.csv", item_stats_csv(result), out);
  write_out(dir, "retained_vignettes.csv", retained_csv(result), out);
  out << "refine: retained " << result.retained.size() << " of "
      << matrix.vignette_ids.size() << " vignette(s) in "
      << result.iterations.size() << " iteration(s)\n";
  if (rc.power) print_power(*rc.power, out);
  return kExitOk;
}

int cmd_pool(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (rc.variants.size() > 1) {
    throw UsageError{"pool takes at most one --variant"};
  }
  const std::string variant = rc.variants.empty()
                                  ? std::string(pool::kDefaultVariant)
                                  : rc.variants.front();
  const Study study = load_validated(rc, err);
  const fs::path dir = require_out(rc);
  write_out(dir, "pooled.csv", pooled_csv(pool::pool_study(study, variant)),
            out);
  write_out(dir, "agreement.csv",
            agreement_csv(pool::agreement_all(study, variant)), out);
  out << "pool: variant " << variant << ", " << study.vignettes.size() << " x "
      << study.apps.size() << " case(s)\n";
  return kExitOk;
}

int cmd_evaluate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const Study study = load_validated(rc, err);
  const fs::path dir = require_out(rc);
  const metrics::EvaluationBundle bundle =
      metrics::evaluate_all(study, pick_variants(rc, study));
  const report::ReportBundle rb = report::make_bundle(study, bundle);
  const report::CsvOutputs csvs = report::emit_csv(rb);
  write_out(dir, "metrics.csv", csvs.metrics_csv, out);
  write_out(dir, "ccs.csv", csvs.ccs_csv, out);
  write_out(dir, "sensitivity.csv", csvs.sensitivity_csv, out);
  out << "evaluate: " << study.apps.size() << " app(s), "
      << bundle.variants.size() << " variant(s)\n";
  return kExitOk;
}

int cmd_sensitivity(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const Study study = load_validated(rc, err);
  const fs::path dir = require_out(rc);
  const metrics::EvaluationBundle bundle =
      metrics::evaluate_all(study, pick_variants(rc, study));
  const report::ReportBundle rb = report::make_bundle(study, bundle);
  write_out(dir, "sensitivity.csv", report::emit_csv(rb).sensitivity_csv, out);
  out << "sensitivity: " << bundle.variants.size() << " variant(s)\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  (void)err;
  if (rc.simspec.empty()) {
    throw UsageError{"config must set [paths] simspec for 'simulate'"};
  }
  sim::SimSpec spec = sim::parse_simspec(ingest::read_file(rc.simspec),
                                         rc.simspec.string());
  if (rc.seed) spec.seed = *rc.seed;
  const Study study = sim::simulate_study(spec);
  const fs::path dir = require_out(rc);
  ingest::write_study(study, dir);
  out << "wrote " << (dir / "vignettes.csv").string() << "\n";
  out << "wrote " << (dir / "records.csv").string() << "\n";
  out << "wrote " << (dir / "mapping.cfg").string() << "\n";
  out << "simulate: seed " << spec.seed << ", " << study.vignettes.size()
      << " vignette(s), " << study.records.size() << " record(s), "
      << study.apps.size() << " app(s)\n";
  return kExitOk;
}

void write_report_files(const Study& study, const RunConfig& rc,
                        const fs::path& dir, std::ostream& out) {
  const metrics::EvaluationBundle bundle =
      metrics::evaluate_all(study, pick_variants(rc, study));
  const report::ReportBundle rb = report::make_bundle(study, bundle);
  const report::CsvOutputs csvs = report::emit_csv(rb);
  write_out(dir, "metrics.csv", csvs.metrics_csv, out);
  write_out(dir, "ccs.csv", csvs.ccs_csv, out);
  write_out(dir, "sensitivity.csv", csvs.sensitivity_csv, out);
  write_out(dir, "report.md", report::render_markdown(rb), out);
  for (const std::string& metric : report::chartable_metrics()) {
    write_out(dir, "chart_" + metric + ".svg",
              report::emit_svg_chart(rb, metric), out);
  }
}

int cmd_report(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const Study study = load_validated(rc, err);
  const fs::path dir = require_out(rc);
  write_report_files(study, rc, dir, out);
  out << "report: written to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_all(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  Study study = load_validated(rc, err);
  const fs::path dir = require_out(rc);
  out << "validate: ok (" << study.vignettes.size() << " vignette(s), "
      << study.records.size() << " record(s))\n";

  if (rc.refine) {
    const refine::ScoreMatrix matrix = refine::build_score_matrix(study);
    const refine::RefineResult result = refine::refine_set(matrix);
    write_out(dir, "item_stats.csv", item_stats_csv(result), out);
    write_out(dir, "retained_vignettes.csv", retained_csv(result), out);
    out << "refine: retained " << result.retained.size() << " of "
        << matrix.vignette_ids.size() << " vignette(s)\n";
    if (rc.power) print_power(*rc.power, out);
    study = restrict_to(study, result.retained);
  }

  write_out(dir, "pooled.csv",
            pooled_csv(pool::pool_study(study, pool::kDefaultVariant)), out);
  write_out(dir, "agreement.csv",
            agreement_csv(pool::agreement_all(study, pool::kDefaultVariant)),
            out);
  write_report_files(study, rc, dir, out);
  out << "all: outputs written to " << dir.string() << "\n";
  return kExitOk;
}

int dispatch(const std::string& sub, const RunConfig& rc, std::ostream& out,
             std::ostream& err) {
  if (sub == "validate") return cmd_validate(rc, out, err);
  if (sub == "refine") return cmd_refine(rc, out, err);
  if (sub == "pool") return cmd_pool(rc, out, err);
  if (sub == "evaluate") return cmd_evaluate(rc, out, err);
  if (sub == "sensitivity") return cmd_sensitivity(rc, out, err);
  if (sub == "simulate") return cmd_simulate(rc, out, err);
  if (sub == "report") return cmd_report(rc, out, err);
  if (sub == "all") return cmd_all(rc, out, err);
  throw UsageError{"unknown subcommand '" + sub + "'"};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"pre-clinical triage benchmark harness for symptom checkers"};
  app.name(std::string(kToolName));
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path;
  std::string out_flag;
  std::vector<std::string> variant_flags;
  std::uint64_t seed_flag = 0;
  bool no_refine = false;

  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--out", out_flag,
                 "output directory (overrides config and TRIAGEBENCH_OUT)");
  app.add_option("--variant", variant_flags,
                 "mapping variant to evaluate (repeatable)");
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_flag, "simulator seed override");
  app.add_flag("--no-refine", no_refine, "skip the refinement stage in 'all'");

  const std::pair<const char*, const char*> subs[] = {
      {"validate", "check a study against the schema and pipeline gates"},
      {"refine", "run item analysis and write the retained vignette set"},
      {"pool", "pool per-inputter advice and write agreement statistics"},
      {"evaluate", "compute the metric suite across mapping variants"},
      {"sensitivity", "write metric deltas per mapping variant"},
      {"simulate", "generate a synthetic study from a simspec"},
      {"report", "render the full evaluation report"},
      {"all", "validate, optionally refine, pool, evaluate and report"},
  };
  for (const auto& [name, desc] : subs) {
    app.add_subcommand(name, desc)->fallthrough();
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolName << " " << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << app.help();
    return kExitUsage;
  }

  try {
    if (config_path.empty()) {
      throw UsageError{"--config <path> is required"};
    }
    std::string cfg_text;
    try {
      cfg_text = ingest::read_file(config_path);
    } catch (const Error& e) {
      throw UsageError{e.what()};
    }
    RunConfig rc;
    try {
      rc = parse_run_config(cfg_text, config_path,
                            fs::path(config_path).parent_path());
    } catch (const Error& e) {
      throw UsageError{e.what()};
    }

    if (!variant_flags.empty()) rc.variants = variant_flags;
    if (seed_opt->count() > 0) rc.seed = seed_flag;
    if (no_refine) rc.refine = false;
    if (!out_flag.empty()) {
      rc.out = out_flag;
    } else if (rc.out.empty()) {
      const char* env = std::getenv("TRIAGEBENCH_OUT");
      if (env && *env) rc.out = env;
    }

    return dispatch(app.get_subcommands().front()->get_name(), rc, out, err);
  } catch (const UsageError& u) {
    err << "usage error: " << u.message << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << describe(e) << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
}

}  // namespace triagebench::cli
