#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace triagebench::cfg {

// Line-oriented key/value tree shared by mapping.cfg, run configs and
// simulator specs:
//
//   # full-line comment
//   [kind] or [kind:name]
//   key = value
//   "quoted key" = "quoted value"
//
// Quoted strings use backslash escapes (\\ \" \n \r \t) so arbitrary advice
// strings survive a round trip. Unquoted keys/values are trimmed verbatim.

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string kind;
  std::string name;  // empty for [kind] headers
  std::vector<Entry> entries;
  int line = 0;
};

struct Document {
  std::vector<Section> sections;
};

Document parse(std::string_view text, std::string_view source_name);

// Quotes and escapes s when it could not be written verbatim.
std::string quote_if_needed(std::string_view s);

}  // namespace triagebench::cfg
