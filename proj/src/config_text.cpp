#include "triagebench/config_text.hpp"

#include <cctype>
#include <cstddef>

#include "triagebench/error.hpp"

namespace triagebench::cfg {
namespace {

std::string location(std::string_view source, int line) {
  std::string loc(source);
  loc += ":";
  loc += std::to_string(line);
  return loc;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Parses a double-quoted string starting at s[pos] == '"'; advances pos past
// the closing quote.
std::string parse_quoted(std::string_view s, std::size_t& pos,
                         std::string_view source, int line) {
  std::string out;
  ++pos;  // opening quote
  while (true) {
    if (pos >= s.size())
      throw Error("BadSyntax", location(source, line), "unterminated string");
    char c = s[pos++];
    if (c == '"') return out;
    if (c == '\\') {
      if (pos >= s.size())
        throw Error("BadSyntax", location(source, line), "dangling escape");
      char e = s[pos++];
      switch (e) {
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        default:
          throw Error("BadSyntax", location(source, line),
                      std::string("unknown escape \\") + e);
      }
      continue;
    }
    out += c;
  }
}

}  // namespace

Document parse(std::string_view text, std::string_view source_name) {
  Document doc;
  Section* current = nullptr;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t eol = text.find('\n', start);
    std::string_view raw = (eol == std::string_view::npos)
                               ? text.substr(start)
                               : text.substr(start, eol - start);
    start = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;

    if (s.front() == '[') {
      if (s.back() != ']')
        throw Error("BadSyntax", location(source_name, line_no),
                    "unterminated section header");
      std::string_view inner = trim(s.substr(1, s.size() - 2));
      Section sec;
      sec.line = line_no;
      std::size_t colon = inner.find(':');
      if (colon == std::string_view::npos) {
        sec.kind = std::string(trim(inner));
      } else {
        sec.kind = std::string(trim(inner.substr(0, colon)));
        std::string_view name = trim(inner.substr(colon + 1));
        if (!name.empty() && name.front() == '"') {
          std::size_t pos = 0;
          sec.name = parse_quoted(name, pos, source_name, line_no);
          if (trim(name.substr(pos)).size() != 0)
            throw Error("BadSyntax", location(source_name, line_no),
                        "junk after quoted section name");
        } else {
          sec.name = std::string(name);
        }
      }
      if (sec.kind.empty())
        throw Error("BadSyntax", location(source_name, line_no),
                    "empty section kind");
      doc.sections.push_back(std::move(sec));
      current = &doc.sections.back();
      continue;
    }

    if (current == nullptr)
      throw Error("BadSyntax", location(source_name, line_no),
                  "entry before any section header");

    Entry entry;
    entry.line = line_no;
    std::size_t pos = 0;
    if (s.front() == '"') {
      entry.key = parse_quoted(s, pos, source_name, line_no);
      std::string_view rest = trim(s.substr(pos));
      if (rest.empty() || rest.front() != '=')
        throw Error("BadSyntax", location(source_name, line_no),
                    "expected '=' after quoted key");
      s = trim(rest.substr(1));
    } else {
      std::size_t eq = s.find('=');
      if (eq == std::string_view::npos)
        throw Error("BadSyntax", location(source_name, line_no),
                    "expected key = value");
      entry.key = std::string(trim(s.substr(0, eq)));
      s = trim(s.substr(eq + 1));
    }
    if (!s.empty() && s.front() == '"') {
      std::size_t vpos = 0;
      entry.value = parse_quoted(s, vpos, source_name, line_no);
      if (trim(s.substr(vpos)).size() != 0)
        throw Error("BadSyntax", location(source_name, line_no),
                    "junk after quoted value");
    } else {
      entry.value = std::string(s);
    }
    current->entries.push_back(std::move(entry));
  }
  return doc;
}

std::string quote_if_needed(std::string_view s) {
  bool quote = s.empty();
  if (!s.empty()) {
    if (std::isspace(static_cast<unsigned char>(s.front())) ||
        std::isspace(static_cast<unsigned char>(s.back())))
      quote = true;
    if (s.front() == '[' || s.front() == '#' || s.front() == '"') quote = true;
    if (s.find_first_of("=\\\n\r\t") != std::string_view::npos) quote = true;
  }
  if (!quote) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace triagebench::cfg
