#include "triagebench/csv.hpp"

#include <cstddef>

#include "triagebench/error.hpp"

namespace triagebench::csv {
namespace {

std::string location(std::string_view source, int line) {
  std::string loc(source);
  loc += ":";
  loc += std::to_string(line);
  return loc;
}

bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\n\r") != std::string_view::npos;
}

}  // namespace

Table parse(std::string_view text, std::string_view source_name) {
  Table table;
  std::vector<std::string> fields;
  std::string field;
  bool row_has_content = false;  // any char or separator seen on this row
  int line = 1;
  int row_start_line = 1;

  auto end_row = [&]() {
    if (row_has_content || !fields.empty() || !field.empty()) {
      fields.push_back(std::move(field));
      field.clear();
      if (table.header.empty() && table.rows.empty()) {
        table.header = std::move(fields);
      } else {
        table.rows.push_back(std::move(fields));
        table.row_lines.push_back(row_start_line);
      }
      fields.clear();
    }
    row_has_content = false;
    row_start_line = line;
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (c == '"') {
      if (!field.empty()) {
        throw Error("BadQuoting", location(source_name, line),
                    "quote inside unquoted field");
      }
      // Quoted field: consume to the closing quote, honoring "" escapes.
      ++i;
      while (true) {
        if (i >= n) {
          throw Error("BadQuoting", location(source_name, line),
                      "unterminated quoted field");
        }
        char q = text[i];
        if (q == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (q == '\n') ++line;
        field += q;
        ++i;
      }
      row_has_content = true;
      // Only a separator, row end or EOF may follow the closing quote.
      if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw Error("BadQuoting", location(source_name, line),
                    "junk after closing quote");
      }
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      row_has_content = true;
      ++i;
      continue;
    }
    if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
      ++line;
      end_row();
      i += 2;
      continue;
    }
    if (c == '\n') {
      ++line;
      end_row();
      ++i;
      continue;
    }
    field += c;
    row_has_content = true;
    ++i;
  }
  end_row();  // final row without trailing newline
  return table;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    const std::string& f = fields[i];
    if (needs_quoting(f)) {
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    } else {
      out += f;
    }
  }
  out += '\n';
  return out;
}

std::string write(const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
  std::string out = format_row(header);
  for (const auto& row : rows) out += format_row(row);
  return out;
}

}  // namespace triagebench::csv
