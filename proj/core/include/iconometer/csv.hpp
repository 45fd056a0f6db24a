#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iconometer {

// Fixed six-decimal rendering; negative zero prints as "0.000000".
std::string format_fixed(double value);
std::string format_fixed(const std::optional<double>& value);  // empty when undefined

// RFC-4180 writer: fields containing a comma, quote or line break are quoted
// and embedded quotes doubled. Lines end with '\n'.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& row(const std::vector<std::string>& fields);
  const std::string& str() const noexcept { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

std::string csv_escape(std::string_view field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

// Parses RFC-4180 text (quoted fields, CRLF or LF). The first record is the
// header. Throws FormatError on unterminated quotes or ragged rows.
CsvTable parse_csv(std::string_view text);

}  // namespace iconometer
