#ifndef FAIRAUDIT_CSV_HPP
#define FAIRAUDIT_CSV_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the row starts
};

/// RFC-4180 style reader: comma separated, double-quoted fields may hold
/// commas, quotes ("") and newlines. Accepts LF and CRLF. Blank lines are
/// skipped. Throws Error{ParseError} with line/column on an unterminated
/// quote or stray characters after a closing quote.
std::vector<Row> read_all(std::istream& in);

/// Quotes only when the field needs it.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace fairaudit::csv

#endif  // FAIRAUDIT_CSV_HPP
