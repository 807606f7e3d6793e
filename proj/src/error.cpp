#include "fairaudit/error.hpp"

namespace fairaudit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BinOverlap: return "BinOverlap";
    case ErrorCode::DuplicateSubgroup: return "DuplicateSubgroup";
    case ErrorCode::UnbinnableAge: return "UnbinnableAge";
    case ErrorCode::UnknownSubgroup: return "UnknownSubgroup";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingAge: return "MissingAge";
    case ErrorCode::TaxonomyMismatch: return "TaxonomyMismatch";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::EmptyLattice: return "EmptyLattice";
    case ErrorCode::SourceMismatch: return "SourceMismatch";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::MalformedLabel: return "MalformedLabel";
    case ErrorCode::UndefinedRate: return "UndefinedRate";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::DegenerateAccuracy: return "DegenerateAccuracy";
    case ErrorCode::IncompatibleReports: return "IncompatibleReports";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> row,
                     std::optional<std::size_t> column) {
  std::string out(to_string(code));
  if (row) {
    out += " (line " + std::to_string(*row);
    if (column) out += ", column " + std::to_string(*column);
    out += ")";
  }
  out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> row, std::optional<std::size_t> column)
    : std::runtime_error(decorate(code, message, row, column)),
      code_(code),
      row_(row),
      column_(column) {}

}  // namespace fairaudit
