#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "triagebench/domain.hpp"

namespace triagebench::ingest {

struct Finding {
  std::string code;
  std::string location;
  std::string message;
  bool operator==(const Finding&) const = default;
};

// Base-rate and workload transparency: always emitted, even for broken
// studies.
struct StudySummary {
  std::map<std::string, int> vignettes_per_stratum;
  std::map<std::string, int> gold_per_level;  // keyed by level token
  std::map<std::string, int> records_per_app;
  std::map<std::string, int> records_per_inputter;
  int n_vignettes = 0;
  int n_records = 0;
  int n_apps = 0;
  int n_inputters = 0;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;
  StudySummary summary;
  bool ok() const { return errors.empty(); }
};

// File schemas (all UTF-8, LF or CRLF, standard CSV quoting):
inline constexpr std::string_view kVignetteHeader =
    "vignette_id,description,gold_level,stratum,source,panel_count,consensus_method";
inline constexpr std::string_view kRecordHeader =
    "vignette_id,app_id,inputter_id,raw_advice";

std::vector<Vignette> parse_vignettes(std::string_view csv_text,
                                      std::string_view source_name);
std::vector<AdviceRecord> parse_records(std::string_view csv_text,
                                        std::string_view source_name);
MappingConfig parse_mapping(std::string_view cfg_text,
                            std::string_view source_name);

// Pure and deterministic; problems are reported, never thrown.
ValidationReport validate_study(const Study& study);

// Summary part of validate_study, reusable by report bundling.
StudySummary build_summary(const Study& study);

struct StudyFiles {
  std::string vignettes_csv;
  std::string records_csv;
  std::string mapping_cfg;
};

// Inverse of the parsers; refuses to serialize a study without vignettes
// (Error "EmptyStudy").
StudyFiles serialize_study(const Study& study);

Study load_study(const std::filesystem::path& vignettes,
                 const std::filesystem::path& records,
                 const std::filesystem::path& mapping);

// Writes vignettes.csv, records.csv and mapping.cfg into dir.
void write_study(const Study& study, const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace triagebench::ingest
