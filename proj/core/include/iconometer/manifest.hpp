#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "iconometer/types.hpp"

namespace iconometer {

struct Violation {
  std::string code;     // e.g. "static cardinality", "dangling reference"
  std::string subject;  // offending reference/image id
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
  friend auto operator<=>(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;  // sorted, duplicates removed

  bool ok() const { return violations.empty(); }
};

// Parses the manifest JSON document. Syntax and schema problems raise
// FormatError carrying the line and byte offset of the first problem.
Manifest parse_manifest(std::string_view json_text);
Manifest load_manifest(const std::filesystem::path& path);

// Serializes back to the same schema; parse_manifest(to_json(m)) == m.
std::string manifest_to_json(const Manifest& manifest);

ValidationReport validate_manifest(const Manifest& manifest, const Thresholds& thresholds);

}  // namespace iconometer
