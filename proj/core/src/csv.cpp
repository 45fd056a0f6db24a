#include "iconometer/csv.hpp"

#include <cmath>
#include <cstdio>

#include "iconometer/error.hpp"

namespace iconometer {

std::string format_fixed(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", value);
  std::string out(buffer);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

std::string format_fixed(const std::optional<double>& value) {
  return value ? format_fixed(*value) : std::string();
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

CsvWriter& CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) {
    throw ContractViolation("csv row has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(columns_));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_.push_back(',');
    text_ += csv_escape(fields[i]);
  }
  text_.push_back('\n');
  return *this;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t quote_line = 0;
  std::size_t quote_offset = 0;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // Skip blank lines.
    if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw FormatError("stray quote inside unquoted field", line, i);
        in_quotes = true;
        field_started = true;
        quote_line = line;
        quote_offset = i;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw FormatError("unterminated quoted field", quote_line, quote_offset);
  if (field_started || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) return table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw FormatError("record " + std::to_string(r + 1) + " has " +
                            std::to_string(records[r].size()) + " fields, header has " +
                            std::to_string(table.header.size()),
                        r + 1, 0);
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

}  // namespace iconometer
