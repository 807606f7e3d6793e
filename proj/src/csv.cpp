#include "fairaudit/csv.hpp"

#include <istream>
#include <iterator>
#include <ostream>

#include "fairaudit/error.hpp"

namespace fairaudit::csv {

std::vector<Row> read_all(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw Error(ErrorCode::Io, "failed reading CSV stream");

  std::vector<Row> rows;
  Row row;
  std::string field;
  std::size_t line = 1;
  std::size_t column = 1;
  bool in_quotes = false;
  bool after_quote = false;  // just closed a quoted field
  bool row_has_content = false;
  std::size_t quote_line = 0;
  std::size_t quote_column = 0;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    after_quote = false;
  };
  auto end_row = [&] {
    if (row_has_content) {
      end_field();
      rows.push_back(std::move(row));
    }
    row = Row{};
    row_has_content = false;
    after_quote = false;
    field.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!row_has_content && c != '\r' && c != '\n') {
      row_has_content = true;
      row.line = line;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
          column += 2;
          continue;
        }
        in_quotes = false;
        after_quote = true;
      } else {
        field.push_back(c);
        if (c == '\n') {
          ++line;
          column = 0;
        }
      }
      ++column;
      continue;
    }
    switch (c) {
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        throw Error(ErrorCode::ParseError, "bare carriage return", line, column);
      case '\n':
        end_row();
        ++line;
        column = 0;
        break;
      case '"':
        if (!field.empty() || after_quote) {
          throw Error(ErrorCode::ParseError, "quote inside unquoted field", line, column);
        }
        in_quotes = true;
        quote_line = line;
        quote_column = column;
        break;
      default:
        if (after_quote) {
          throw Error(ErrorCode::ParseError, "characters after closing quote", line, column);
        }
        field.push_back(c);
    }
    ++column;
  }
  if (in_quotes) {
    throw Error(ErrorCode::ParseError, "unterminated quoted field", quote_line, quote_column);
  }
  end_row();
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace fairaudit::csv
