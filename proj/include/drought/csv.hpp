#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace drought::csv {

// RFC-4180 reader: handles quoted fields, escaped quotes, and embedded
// newlines. Returns std::nullopt at end of input.
std::optional<std::vector<std::string>> read_record(std::istream& in);

void write_record(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace drought::csv
