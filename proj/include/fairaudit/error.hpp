#ifndef FAIRAUDIT_ERROR_HPP
#define FAIRAUDIT_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fairaudit {

enum class ErrorCode {
  ParseError,
  BinOverlap,
  DuplicateSubgroup,
  UnbinnableAge,
  UnknownSubgroup,
  DuplicateId,
  MissingAge,
  TaxonomyMismatch,
  EmptyManifest,
  EmptyLattice,
  SourceMismatch,
  EmptyLog,
  MalformedLabel,
  UndefinedRate,
  DegenerateReference,
  UnknownReference,
  DegenerateAccuracy,
  IncompatibleReports,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library. `row` is 1-based and counts the
/// header line of CSV inputs, so it lines up with what an editor shows.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> row = std::nullopt,
        std::optional<std::size_t> column = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> column() const noexcept { return column_; }

private:
  ErrorCode code_;
  std::optional<std::size_t> row_;
  std::optional<std::size_t> column_;
};

/// Non-fatal diagnostics (remaps, label/score disagreements, thin split
/// cells). Printed by the CLI as `WARN <code> <detail>`.
struct Warning {
  std::string code;
  std::string detail;

  bool operator==(const Warning&) const = default;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_ERROR_HPP
