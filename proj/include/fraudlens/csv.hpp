#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fraudlens::csv {

// Splits one RFC 4180 record. Quoted fields may contain the delimiter and
// doubled quotes but not line breaks. Returns nullopt on an unterminated or
// malformed quote.
std::optional<std::vector<std::string>> split_line(std::string_view line, char delimiter = ',');

// Quotes a field only when it needs it.
std::string escape(std::string_view field, char delimiter = ',');

}  // namespace fraudlens::csv
