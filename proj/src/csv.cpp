#include "fairaudit/csv.hpp"

#include "fairaudit/error.hpp"

namespace fairaudit::csv {

std::optional<Row> Reader::next() {
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return std::nullopt;
  record_line_ = line_;

  Row row;
  std::string field;
  bool quoted = false;
  bool after_quote = false;
  for (;; c = in_.get()) {
    if (c == std::char_traits<char>::eof()) {
      if (quoted) {
        fail(ErrorCode::MalformedRow,
             "unterminated quoted field starting on line " + std::to_string(record_line_));
      }
      row.push_back(std::move(field));
      return row;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field.empty() && !after_quote) {
          quoted = true;
        } else {
          field.push_back(ch);
        }
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        after_quote = false;
        break;
      case '\r':
        if (in_.peek() == '\n') break;
        field.push_back(ch);
        break;
      case '\n':
        ++line_;
        row.push_back(std::move(field));
        return row;
      default:
        field.push_back(ch);
    }
  }
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << quote(row[i]);
  }
  out << '\n';
}

}  // namespace fairaudit::csv
