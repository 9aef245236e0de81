#include "fraudlens/csv.hpp"

namespace fraudlens::csv {

std::optional<std::vector<std::string>> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::size_t i = 0;
  bool at_field_start = true;
  while (true) {
    if (at_field_start && i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) return std::nullopt;
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
      if (i < line.size() && line[i] != delimiter) return std::nullopt;
    } else {
      while (i < line.size() && line[i] != delimiter) field += line[i++];
    }
    fields.push_back(std::move(field));
    field.clear();
    if (i >= line.size()) break;
    ++i;  // delimiter
    at_field_start = true;
  }
  return fields;
}

std::string escape(std::string_view field, char delimiter) {
  if (field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace fraudlens::csv
