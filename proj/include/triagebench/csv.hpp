#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace triagebench::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line on which each data row starts (rows may span lines when a
  // quoted field contains a line break).
  std::vector<int> row_lines;
};

// RFC-4180 style: fields containing commas, quotes or line breaks are
// double-quoted, with "" escaping an embedded quote. Accepts LF and CRLF row
// endings; bytes inside quotes are preserved verbatim. Throws Error
// ("BadQuoting") on malformed quoting.
Table parse(std::string_view text, std::string_view source_name);

std::string format_row(const std::vector<std::string>& fields);
std::string write(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows);

}  // namespace triagebench::csv
