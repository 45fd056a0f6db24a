#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iconometer/realization.hpp"
#include "iconometer/recognition.hpp"
#include "iconometer/types.hpp"

namespace iconometer {

enum class LevelMetric { kCra, kVr, kCrt };
std::string_view to_string(LevelMetric metric);

inline constexpr int kMaxPdfeLevel = 5;

// Per-reference metrics joined with the reference's replication level.
struct LevelRecord {
  std::string reference_id;
  std::string model_name;
  Category category = Category::kStatic;
  int pdfe_level = 0;
  double cra = 0.0;
  std::optional<double> vr;  // only when at least one generation aligned
  double crt = 0.0;
};

struct LevelStats {
  Category category = Category::kStatic;
  int level = 0;
  LevelMetric metric = LevelMetric::kCra;
  double mean = 0.0;
  double sd = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

struct LevelStatsResult {
  std::vector<LevelStats> stats;  // sorted by category, level, metric
  std::vector<std::string> warnings;
};

LevelStatsResult stats_by_level(std::span<const LevelRecord> records);

// Most frequent level; ties resolve to the lowest level. nullopt when empty.
std::optional<int> mode_level(std::span<const int> levels);

inline constexpr double kHighCrtThreshold = 0.8;

struct ScatterRow {
  std::string reference_id;
  std::string model_name;
  Variant variant = Variant::kOriginal;
  Category category = Category::kStatic;
  double cra = 0.0;
  std::optional<double> vr_mean;
  double crt = 0.0;
  bool high_crt = false;  // crt > 0.8
};

struct ScatterSummary {
  std::string model_name;
  Variant variant = Variant::kOriginal;
  Category category = Category::kStatic;
  std::size_t n_aligned = 0;
  std::size_t n_high_crt = 0;
  std::optional<double> high_crt_share;  // among aligned references
};

struct ScatterExport {
  std::vector<ScatterRow> rows;
  std::vector<ScatterSummary> summaries;
};

ScatterExport cra_vr_export(std::span<const ReferenceRealization> per_reference);

struct CrcBin {
  std::string model_name;
  Variant variant = Variant::kOriginal;
  double bin = 0.0;  // round(cra * 10) / 10
  double mean_crc = 0.0;
  std::size_t count = 0;
};

struct CrcBinResult {
  std::vector<CrcBin> bins;  // descending bin within each (model, variant)
  std::vector<std::string> warnings;
};

// Dynamic references only; static entries are skipped. CRA values off the
// 0.1 lattice are assigned to the nearest bin with a warning.
CrcBinResult cra_crc_bins(std::span<const ReferenceRecognition> per_reference);

}  // namespace iconometer
