#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit::csv {

using Row = std::vector<std::string>;

/// Streaming RFC-4180 reader: comma separator, double-quote quoting with
/// "" escapes, CRLF or LF line endings, embedded newlines inside quotes.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws MalformedRow on an
  /// unterminated quoted field.
  std::optional<Row> next();

  /// 1-based physical line where the last returned record started.
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

std::string quote(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace fairaudit::csv
