#include "iconometer/level_variance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "iconometer/error.hpp"
#include "iconometer/stats.hpp"

namespace iconometer {

std::string_view to_string(LevelMetric metric) {
  switch (metric) {
    case LevelMetric::kCra:
      return "cra";
    case LevelMetric::kVr:
      return "vr";
    case LevelMetric::kCrt:
      return "crt";
  }
  return "cra";
}

LevelStatsResult stats_by_level(std::span<const LevelRecord> records) {
  LevelStatsResult result;
  std::map<std::tuple<Category, int, LevelMetric>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (r.pdfe_level < 0 || r.pdfe_level > kMaxPdfeLevel) {
      result.warnings.push_back(r.reference_id + "/" + r.model_name + ": pdfe level " +
                                std::to_string(r.pdfe_level) + " outside 0-5, row rejected");
      continue;
    }
    groups[{r.category, r.pdfe_level, LevelMetric::kCra}].push_back(r.cra);
    if (r.vr) groups[{r.category, r.pdfe_level, LevelMetric::kVr}].push_back(*r.vr);
    groups[{r.category, r.pdfe_level, LevelMetric::kCrt}].push_back(r.crt);
  }
  for (const auto& [key, values] : groups) {
    const auto s = summarize(values);
    const auto& [category, level, metric] = key;
    result.stats.push_back({category, level, metric, s->mean, s->sd, s->min, s->max, s->n});
  }
  return result;
}

std::optional<int> mode_level(std::span<const int> levels) {
  if (levels.empty()) return std::nullopt;
  std::map<int, std::size_t> counts;
  for (int l : levels) ++counts[l];
  // Map iteration is ascending, so strict > keeps the lowest level on ties.
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

ScatterExport cra_vr_export(std::span<const ReferenceRealization> per_reference) {
  ScatterExport out;
  std::map<std::tuple<std::string, Variant, Category>, ScatterSummary> summaries;
  for (const auto& r : per_reference) {
    ScatterRow row;
    row.reference_id = r.reference_id;
    row.model_name = r.model_name;
    row.variant = r.variant;
    row.category = r.category;
    row.cra = r.cra;
    row.vr_mean = r.vr_align_mean;
    row.crt = r.crt;
    row.high_crt = r.crt > kHighCrtThreshold;
    out.rows.push_back(row);

    auto& s = summaries[{r.model_name, r.variant, r.category}];
    s.model_name = r.model_name;
    s.variant = r.variant;
    s.category = r.category;
    if (r.n_aligned > 0) {
      ++s.n_aligned;
      if (row.high_crt) ++s.n_high_crt;
    }
  }
  for (auto& [key, s] : summaries) {
    if (s.n_aligned > 0) {
      s.high_crt_share = static_cast<double>(s.n_high_crt) / static_cast<double>(s.n_aligned);
    }
    out.summaries.push_back(s);
  }
  return out;
}

CrcBinResult cra_crc_bins(std::span<const ReferenceRecognition> per_reference) {
  CrcBinResult result;
  struct Acc {
    double sum = 0.0;
    std::size_t count = 0;
  };
  // Bin keyed by its integer tenth so equal bins compare exactly.
  std::map<std::tuple<std::string, Variant, long>, Acc> groups;
  for (const auto& r : per_reference) {
    if (r.category != Category::kDynamic) continue;
    if (!r.crc) throw ContractViolation("dynamic reference " + r.reference_id + " has no CRC");
    const double scaled = r.cra * 10.0;
    const long tenth = std::lround(scaled);
    if (std::abs(scaled - static_cast<double>(tenth)) > 1e-9) {
      result.warnings.push_back(r.reference_id + "/" + r.model_name + ": CRA " + std::to_string(r.cra) +
                                " is off the 0.1 lattice, assigned to bin " +
                                std::to_string(static_cast<double>(tenth) / 10.0));
    }
    auto& acc = groups[{r.model_name, r.variant, tenth}];
    acc.sum += *r.crc;
    ++acc.count;
  }
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
    const auto& [model, variant, tenth] = it->first;
    result.bins.push_back({model, variant, static_cast<double>(tenth) / 10.0,
                           it->second.sum / static_cast<double>(it->second.count), it->second.count});
  }
  // Reverse iteration flips model order too; restore ascending models.
  std::stable_sort(result.bins.begin(), result.bins.end(), [](const CrcBin& a, const CrcBin& b) {
    return std::tie(a.model_name, a.variant) < std::tie(b.model_name, b.variant);
  });
  return result;
}

}  // namespace iconometer
