#include "drought/csv.hpp"

namespace drought::csv {

std::optional<std::vector<std::string>> read_record(std::istream& in) {
  if (in.peek() == std::char_traits<char>::eof()) return std::nullopt;

  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  int c;
  while ((c = in.get()) != std::char_traits<char>::eof()) {
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"' && field.empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else if (ch == '\n') {
      break;
    } else {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    const std::string& f = fields[i];
    const bool needs_quotes = f.find_first_of(",\"\r\n") != std::string::npos;
    if (needs_quotes) {
      out << '"';
      for (char ch : f) {
        if (ch == '"') out << "\"\"";
        else out << ch;
      }
      out << '"';
    } else {
      out << f;
    }
  }
  out << '\n';
}

}  // namespace drought::csv
