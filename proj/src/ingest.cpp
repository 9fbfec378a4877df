#include "triagebench/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "triagebench/config_text.hpp"
#include "triagebench/csv.hpp"
#include "triagebench/error.hpp"

namespace triagebench::ingest {
namespace {

std::string at(std::string_view source, int line) {
  std::string loc(source);
  loc += ":";
  loc += std::to_string(line);
  return loc;
}

std::vector<std::string> split_header(std::string_view header) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = header.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(header.substr(start));
      return out;
    }
    out.emplace_back(header.substr(start, comma - start));
    start = comma + 1;
  }
}

void check_header(const csv::Table& table, std::string_view expected,
                  std::string_view source) {
  const std::vector<std::string> want = split_header(expected);
  for (const std::string& name : want) {
    if (std::find(table.header.begin(), table.header.end(), name) ==
        table.header.end()) {
      throw Error("MissingColumn", at(source, 1),
                  "missing required column '" + name + "'");
    }
  }
  if (table.header != want) {
    throw Error("BadHeader", at(source, 1),
                "header must be exactly '" + std::string(expected) + "'");
  }
}

void check_arity(const csv::Table& table, std::size_t row_idx,
                 std::string_view source) {
  if (table.rows[row_idx].size() != table.header.size()) {
    throw Error("FieldCount", at(source, table.row_lines[row_idx]),
                "expected " + std::to_string(table.header.size()) +
                    " fields, got " +
                    std::to_string(table.rows[row_idx].size()));
  }
}

int parse_int(const std::string& cell, std::string_view source, int line,
              std::string_view column) {
  int value = 0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error("BadInteger", at(source, line),
                "column '" + std::string(column) + "': not an integer: '" +
                    cell + "'");
  }
  return value;
}

TriageLevel parse_level_cell(const std::string& cell, std::string_view source,
                             int line, std::string_view column) {
  if (auto level = parse_level(cell)) return *level;
  throw Error("UnknownLevel", at(source, line),
              "column '" + std::string(column) + "': unknown level '" + cell +
                  "' (expected emergency | non_emergency | self_care)");
}

std::string pair_key(const std::string& vignette, const std::string& app) {
  return vignette + "\x1f" + app;
}

}  // namespace

std::vector<Vignette> parse_vignettes(std::string_view csv_text,
                                      std::string_view source_name) {
  csv::Table table = csv::parse(csv_text, source_name);
  check_header(table, kVignetteHeader, source_name);
  if (table.rows.empty()) {
    throw Error("EmptyStudy", std::string(source_name),
                "no vignette rows in data section");
  }
  std::vector<Vignette> vignettes;
  vignettes.reserve(table.rows.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    check_arity(table, i, source_name);
    const auto& row = table.rows[i];
    const int line = table.row_lines[i];
    Vignette v;
    v.id = row[0];
    if (v.id.empty()) {
      throw Error("BadId", at(source_name, line), "empty vignette_id");
    }
    if (!seen.insert(v.id).second) {
      throw Error("DuplicateId", at(source_name, line),
                  "duplicate vignette_id '" + v.id + "'");
    }
    v.description = row[1];
    v.gold = parse_level_cell(row[2], source_name, line, "gold_level");
    v.stratum = row[3];
    v.source = row[4];
    v.consensus.panel_count =
        parse_int(row[5], source_name, line, "panel_count");
    if (v.consensus.panel_count < 1) {
      throw Error("BadPanelCount", at(source_name, line),
                  "panel_count must be >= 1");
    }
    v.consensus.method = row[6];
    vignettes.push_back(std::move(v));
  }
  return vignettes;
}

std::vector<AdviceRecord> parse_records(std::string_view csv_text,
                                        std::string_view source_name) {
  csv::Table table = csv::parse(csv_text, source_name);
  check_header(table, kRecordHeader, source_name);
  std::vector<AdviceRecord> records;
  records.reserve(table.rows.size());
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    check_arity(table, i, source_name);
    const auto& row = table.rows[i];
    const int line = table.row_lines[i];
    AdviceRecord r;
    r.vignette_id = row[0];
    r.app_id = row[1];
    r.inputter_id = row[2];
    if (r.vignette_id.empty() || r.app_id.empty() || r.inputter_id.empty()) {
      throw Error("BadId", at(source_name, line),
                  "vignette_id, app_id and inputter_id must be non-empty");
    }
    if (!seen.insert({r.vignette_id, r.app_id, r.inputter_id}).second) {
      throw Error("DuplicateRecord", at(source_name, line),
                  "duplicate (vignette, app, inputter) triple (" +
                      r.vignette_id + ", " + r.app_id + ", " + r.inputter_id +
                      ")");
    }
    r.advice = (row[3] == kAbstainToken) ? RawAdvice::abstain()
                                         : RawAdvice::text(row[3]);
    records.push_back(std::move(r));
  }
  return records;
}

MappingConfig parse_mapping(std::string_view cfg_text,
                            std::string_view source_name) {
  cfg::Document doc = cfg::parse(cfg_text, source_name);
  MappingConfig config;

  // Extended declarations first; app tables and overrides resolve against
  // them regardless of section order.
  for (const cfg::Section& sec : doc.sections) {
    if (sec.kind != "extended") continue;
    if (!sec.name.empty()) {
      throw Error("BadSyntax", at(source_name, sec.line),
                  "[extended] takes no name");
    }
    for (const cfg::Entry& e : sec.entries) {
      if (parse_level(e.key) || e.key == kAbstainToken) {
        throw Error("ReservedName", at(source_name, e.line),
                    "extended level may not shadow '" + e.key + "'");
      }
      ExtendedLevel level;
      level.name = e.key;
      level.default_collapse =
          parse_level_cell(e.value, source_name, e.line, "extended");
      if (!config.extended.emplace(level.name, level).second) {
        throw Error("DuplicateKey", at(source_name, e.line),
                    "extended level '" + e.key + "' declared twice");
      }
    }
  }

  for (const cfg::Section& sec : doc.sections) {
    if (sec.kind == "extended") continue;
    if (sec.kind == "app") {
      if (sec.name.empty()) {
        throw Error("BadSyntax", at(source_name, sec.line),
                    "[app:<id>] requires an app id");
      }
      auto [it, fresh] = config.app_tables.try_emplace(sec.name);
      if (!fresh) {
        throw Error("DuplicateSection", at(source_name, sec.line),
                    "app '" + sec.name + "' mapped twice");
      }
      for (const cfg::Entry& e : sec.entries) {
        if (e.key == kAbstainToken) {
          throw Error("ReservedName", at(source_name, e.line),
                      "the abstain token cannot be mapped");
        }
        MapTarget target;
        if (auto level = parse_level(e.value)) {
          target = MapTarget::canonical(*level);
        } else if (config.extended.count(e.value) != 0) {
          target = MapTarget::extended(e.value);
        } else {
          throw Error("UnknownLevel", at(source_name, e.line),
                      "'" + e.value +
                          "' is neither canonical nor a declared extended "
                          "level");
        }
        if (!it->second.emplace(e.key, target).second) {
          throw Error("DuplicateKey", at(source_name, e.line),
                      "raw advice '" + e.key + "' mapped twice for app '" +
                          sec.name + "'");
        }
      }
      continue;
    }
    if (sec.kind == "override") {
      if (sec.name.empty()) {
        throw Error("BadSyntax", at(source_name, sec.line),
                    "[override:<variant>] requires a variant name");
      }
      if (sec.name == "default") {
        throw Error("ReservedName", at(source_name, sec.line),
                    "'default' names the built-in variant");
      }
      auto [it, fresh] = config.overrides.try_emplace(sec.name);
      if (!fresh) {
        throw Error("DuplicateSection", at(source_name, sec.line),
                    "variant '" + sec.name + "' declared twice");
      }
      for (const cfg::Entry& e : sec.entries) {
        if (config.extended.count(e.key) == 0) {
          throw Error("UnknownLevel", at(source_name, e.line),
                      "override names undeclared extended level '" + e.key +
                          "'");
        }
        TriageLevel target =
            parse_level_cell(e.value, source_name, e.line, "override");
        if (!it->second.emplace(e.key, target).second) {
          throw Error("DuplicateKey", at(source_name, e.line),
                      "extended level '" + e.key + "' overridden twice");
        }
      }
      continue;
    }
    throw Error("UnknownSection", at(source_name, sec.line),
                "unknown section kind '" + sec.kind + "'");
  }
  return config;
}

StudySummary build_summary(const Study& study) {
  StudySummary s;
  s.n_vignettes = static_cast<int>(study.vignettes.size());
  s.n_records = static_cast<int>(study.records.size());
  s.n_apps = static_cast<int>(study.apps.size());
  s.n_inputters = static_cast<int>(study.inputters.size());
  for (const Vignette& v : study.vignettes) {
    ++s.vignettes_per_stratum[v.stratum];
    ++s.gold_per_level[std::string(level_name(v.gold))];
  }
  for (const AdviceRecord& r : study.records) {
    ++s.records_per_app[r.app_id];
    ++s.records_per_inputter[r.inputter_id];
  }
  return s;
}

ValidationReport validate_study(const Study& study) {
  ValidationReport report;
  report.summary = build_summary(study);
  auto error = [&](std::string code, std::string loc, std::string msg) {
    report.errors.push_back({std::move(code), std::move(loc), std::move(msg)});
  };
  auto warn = [&](std::string code, std::string loc, std::string msg) {
    report.warnings.push_back(
        {std::move(code), std::move(loc), std::move(msg)});
  };

  if (study.vignettes.empty()) {
    error("EmptyStudy", "", "study has no vignettes");
  }

  std::set<std::string> vignette_ids;
  for (const Vignette& v : study.vignettes) {
    if (!vignette_ids.insert(v.id).second) {
      error("DuplicateId", "vignette " + v.id, "duplicate vignette id");
    }
    if (v.consensus.panel_count < 1) {
      error("BadPanelCount", "vignette " + v.id, "panel_count must be >= 1");
    } else if (v.consensus.panel_count < 2) {
      warn("PanelCountBelowTwo", "vignette " + v.id,
           "gold standard consensus from fewer than two panels");
    }
  }
  if (!study.vignettes.empty() && study.vignettes.size() < 45) {
    warn("BelowRecommendedSize", "",
         "study has " + std::to_string(study.vignettes.size()) +
             " vignettes; at least 45 are recommended");
  }

  // Referential integrity and duplicate triples.
  std::set<std::tuple<std::string, std::string, std::string>> triples;
  std::map<std::string, std::set<std::string>> inputters_per_pair;
  for (const AdviceRecord& r : study.records) {
    std::string loc =
        "record (" + r.vignette_id + ", " + r.app_id + ", " + r.inputter_id +
        ")";
    if (vignette_ids.count(r.vignette_id) == 0) {
      error("UnknownVignette", loc,
            "record references missing vignette '" + r.vignette_id + "'");
      continue;
    }
    if (!triples.insert({r.vignette_id, r.app_id, r.inputter_id}).second) {
      error("DuplicateRecord", loc, "duplicate (vignette, app, inputter)");
      continue;
    }
    inputters_per_pair[pair_key(r.vignette_id, r.app_id)].insert(
        r.inputter_id);

    // Mapping totality over observed raw strings.
    if (!r.advice.is_abstain()) {
      auto table = study.mapping.app_tables.find(r.app_id);
      if (table == study.mapping.app_tables.end() ||
          table->second.count(r.advice.text()) == 0) {
        error("UnmappedAdvice", loc,
              "raw advice '" + r.advice.text() + "' has no mapping for app '" +
                  r.app_id + "'");
      } else {
        const MapTarget& target = table->second.at(r.advice.text());
        if (!target.is_canonical() &&
            study.mapping.extended.count(target.extended_name()) == 0) {
          error("UnknownLevel", loc,
                "mapping target '" + target.extended_name() +
                    "' is not a declared extended level");
        }
      }
    }
  }

  // Every (vignette, app) pair needs at least two distinct inputters.
  for (const Vignette& v : study.vignettes) {
    for (const std::string& app : study.apps) {
      auto it = inputters_per_pair.find(pair_key(v.id, app));
      const int n = (it == inputters_per_pair.end())
                        ? 0
                        : static_cast<int>(it->second.size());
      if (n < 2) {
        error("TooFewInputters", "vignette " + v.id + " / app " + app,
              "pair has " + std::to_string(n) +
                  " inputter(s); at least two are required");
      }
    }
  }

  return report;
}

StudyFiles serialize_study(const Study& study) {
  if (study.vignettes.empty()) {
    throw Error("EmptyStudy", "", "refusing to serialize a study without "
                                  "vignettes");
  }
  StudyFiles files;

  std::vector<std::vector<std::string>> vrows;
  vrows.reserve(study.vignettes.size());
  for (const Vignette& v : study.vignettes) {
    vrows.push_back({v.id, v.description, std::string(level_name(v.gold)),
                     v.stratum, v.source,
                     std::to_string(v.consensus.panel_count),
                     v.consensus.method});
  }
  files.vignettes_csv = csv::write(split_header(kVignetteHeader), vrows);

  std::vector<std::vector<std::string>> rrows;
  rrows.reserve(study.records.size());
  for (const AdviceRecord& r : study.records) {
    rrows.push_back({r.vignette_id, r.app_id, r.inputter_id,
                     r.advice.is_abstain() ? std::string(kAbstainToken)
                                           : r.advice.text()});
  }
  files.records_csv = csv::write(split_header(kRecordHeader), rrows);

  std::string cfg;
  const MappingConfig& m = study.mapping;
  if (!m.extended.empty()) {
    cfg += "[extended]\n";
    for (const auto& [name, level] : m.extended) {
      cfg += cfg::quote_if_needed(name);
      cfg += " = ";
      cfg += level_name(level.default_collapse);
      cfg += '\n';
    }
    cfg += '\n';
  }
  for (const auto& [app, table] : m.app_tables) {
    cfg += "[app:";
    cfg += cfg::quote_if_needed(app);
    cfg += "]\n";
    for (const auto& [raw, target] : table) {
      cfg += cfg::quote_if_needed(raw);
      cfg += " = ";
      cfg += target.is_canonical()
                 ? std::string(level_name(target.level()))
                 : cfg::quote_if_needed(target.extended_name());
      cfg += '\n';
    }
    cfg += '\n';
  }
  for (const auto& [variant, table] : m.overrides) {
    cfg += "[override:";
    cfg += cfg::quote_if_needed(variant);
    cfg += "]\n";
    for (const auto& [name, level] : table) {
      cfg += cfg::quote_if_needed(name);
      cfg += " = ";
      cfg += level_name(level);
      cfg += '\n';
    }
    cfg += '\n';
  }
  files.mapping_cfg = cfg;
  return files;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("IoError", path.string(), "cannot open file for reading");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("IoError", path.string(), "cannot open file for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw Error("IoError", path.string(), "write failed");
  }
}

Study load_study(const std::filesystem::path& vignettes,
                 const std::filesystem::path& records,
                 const std::filesystem::path& mapping) {
  std::vector<Vignette> vs =
      parse_vignettes(read_file(vignettes), vignettes.string());
  std::vector<AdviceRecord> rs =
      parse_records(read_file(records), records.string());
  MappingConfig mc = parse_mapping(read_file(mapping), mapping.string());
  return assemble_study(std::move(vs), std::move(rs), std::move(mc));
}

void write_study(const Study& study, const std::filesystem::path& dir) {
  StudyFiles files = serialize_study(study);
  std::filesystem::create_directories(dir);
  write_file(dir / "vignettes.csv", files.vignettes_csv);
  write_file(dir / "records.csv", files.records_csv);
  write_file(dir / "mapping.cfg", files.mapping_cfg);
}

}  // namespace triagebench::ingest
