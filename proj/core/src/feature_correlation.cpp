#include "iconometer/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "iconometer/csv.hpp"
#include "iconometer/error.hpp"
#include "iconometer/random.hpp"
#include "iconometer/stats.hpp"

namespace iconometer {
namespace {

// Slack for deciding |rho_perm| >= |rho_obs| when both come from the same
// finite set of rank arrangements.
constexpr double kRhoTieEpsilon = 1e-12;

std::vector<double> centered(std::vector<double> values) {
  const double m = mean(values);
  for (double& v : values) v -= m;
  return values;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

bool is_known_feature(std::string_view name) {
  return std::find(kFeatureNames.begin(), kFeatureNames.end(), name) != kFeatureNames.end();
}

std::optional<double> FeatureVector::get(std::string_view feature) const {
  const auto it = values.find(std::string(feature));
  return it == values.end() ? std::nullopt : it->second;
}

std::vector<std::string> sanitize_features(std::vector<FeatureVector>& features) {
  std::vector<std::string> warnings;
  for (auto& fv : features) {
    for (auto& [name, value] : fv.values) {
      if (!value) continue;
      const double v = *value;
      std::string problem;
      if (!std::isfinite(v)) {
        problem = "non-finite value";
      } else if (name == "n_dedup_pairs" && (v < 0.0 || v != std::floor(v))) {
        problem = "n_dedup_pairs must be a nonnegative integer";
      } else if (name == "creation_year" && (v < 1000.0 || v > 2100.0)) {
        problem = "creation_year outside 1000-2100";
      }
      if (!problem.empty()) {
        warnings.push_back(fv.reference_id + ": " + name + ": " + problem + "; treated as missing");
        value.reset();
      }
    }
  }
  return warnings;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = shared;
    i = j;
  }
  return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y,
                        std::size_t permutations, std::uint64_t seed) {
  if (x.size() != y.size()) throw ContractViolation("spearman inputs differ in length");
  if (x.size() < 3) throw ContractViolation("spearman needs at least 3 observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw ContractViolation("spearman input is not finite");
  }

  SpearmanResult result;
  result.n = x.size();
  const auto cx = centered(average_ranks(x));
  auto cy = centered(average_ranks(y));
  const double sxx = dot(cx, cx);
  const double syy = dot(cy, cy);
  if (sxx == 0.0 || syy == 0.0) return result;  // constant input

  const double denom = std::sqrt(sxx * syy);
  const double rho = std::clamp(dot(cx, cy) / denom, -1.0, 1.0);
  result.rho = rho;
  result.permutations = permutations;
  if (permutations == 0) return result;

  Rng rng(seed);
  const double observed = std::abs(rho) - kRhoTieEpsilon;
  std::size_t at_least = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    fisher_yates(std::span<double>(cy), rng);
    if (std::abs(dot(cx, cy) / denom) >= observed) ++at_least;
  }
  result.p_value = static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
  return result;
}

std::size_t dedup_filter(std::span<const double> match_scores, const Thresholds& thresholds) {
  std::size_t kept = 0;
  for (double s : match_scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw ContractViolation("dedup score outside [0, 1]");
    if (s <= thresholds.tau_dedup) ++kept;
  }
  return kept;
}

std::size_t dedup_filter(std::span<const std::vector<double>> match_scores, const Thresholds& thresholds) {
  std::vector<double> best;
  best.reserve(match_scores.size());
  for (const auto& candidate : match_scores) {
    if (candidate.empty()) throw ContractViolation("training match without scores");
    best.push_back(*std::max_element(candidate.begin(), candidate.end()));
  }
  return dedup_filter(best, thresholds);
}

CorrelationRow correlate_feature(std::string_view feature, Category category,
                                 std::span<const FeatureVector> features,
                                 const std::map<std::string, double>& cra_by_reference,
                                 const std::map<std::string, Category>& category_by_reference,
                                 std::size_t permutations, std::uint64_t seed) {
  CorrelationRow row;
  row.feature = std::string(feature);
  row.category = category;

  std::vector<double> xs, ys;
  for (const auto& fv : features) {
    const auto cat = category_by_reference.find(fv.reference_id);
    const auto cra = cra_by_reference.find(fv.reference_id);
    if (cat == category_by_reference.end() || cra == cra_by_reference.end()) continue;
    if (cat->second != category) continue;
    const auto value = fv.get(feature);
    if (!value) continue;
    xs.push_back(*value);
    ys.push_back(cra->second);
  }
  row.n_used = xs.size();
  if (xs.size() < 3) {
    row.flag = "insufficient n";
    return row;
  }
  const SpearmanResult s = spearman(xs, ys, permutations, seed);
  if (!s.rho) {
    row.flag = "undefined";
    return row;
  }
  row.rho = s.rho;
  row.p_value = s.p_value;
  row.significant = s.p_value && *s.p_value < kSignificanceLevel;
  return row;
}

std::vector<CorrelationRow> correlation_table(std::span<const FeatureVector> features,
                                              const std::map<std::string, double>& cra_by_reference,
                                              const std::map<std::string, Category>& category_by_reference,
                                              std::size_t permutations, std::uint64_t seed) {
  std::vector<CorrelationRow> rows;
  for (std::size_t f = 0; f < kFeatureNames.size(); ++f) {
    for (Category category : {Category::kStatic, Category::kDynamic}) {
      const std::uint64_t stream = 2 * f + (category == Category::kDynamic ? 1 : 0);
      rows.push_back(correlate_feature(kFeatureNames[f], category, features, cra_by_reference,
                                       category_by_reference, permutations, derive_seed(seed, stream)));
    }
  }
  return rows;
}

double median(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("median of empty sequence");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

QuadrantSummary quadrant_summary(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> cra) {
  if (x.size() != y.size() || x.size() != cra.size()) throw ContractViolation("quadrant inputs differ in length");
  if (x.size() < 4) throw ContractViolation("quadrant summary needs at least 4 points");

  QuadrantSummary out;
  out.median_x = median(x);
  out.median_y = median(y);
  out.degenerate_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  out.degenerate_y = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });

  std::array<double, 4> sums{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t q = (x[i] > out.median_x ? 1 : 0) + (y[i] > out.median_y ? 2 : 0);
    ++out.quadrants[q].count;
    sums[q] += cra[i];
  }
  for (std::size_t q = 0; q < 4; ++q) {
    if (out.quadrants[q].count > 0) {
      out.quadrants[q].mean_cra = sums[q] / static_cast<double>(out.quadrants[q].count);
    }
  }
  return out;
}

std::vector<FeatureVector> read_features_csv(const std::string& csv_text) {
  const CsvTable table = parse_csv(csv_text);
  const auto id_col = table.column("reference_id");
  if (!id_col) throw FormatError("features.csv needs a reference_id column", 1, 0);
  std::vector<FeatureVector> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    FeatureVector fv;
    fv.reference_id = table.rows[r][*id_col];
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == *id_col) continue;
      const std::string& cell = table.rows[r][c];
      if (cell.empty()) {
        fv.values[table.header[c]] = std::nullopt;
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size()) {
        throw FormatError("bad value '" + cell + "' for " + table.header[c], r + 2, 0);
      }
      fv.values[table.header[c]] = v;
    }
    out.push_back(std::move(fv));
  }
  return out;
}

std::vector<FeatureVector> features_from_manifest(const Manifest& manifest, const Thresholds& thresholds) {
  std::vector<FeatureVector> out;
  for (const auto& r : manifest.references) {
    FeatureVector fv;
    fv.reference_id = r.id;
    for (const auto& [name, value] : r.features) fv.values[name] = value;
    if (!fv.values.contains("popularity")) fv.values["popularity"] = static_cast<double>(r.sitelink_count);
    if (!fv.values.contains("creation_year") && r.creation_year) {
      fv.values["creation_year"] = static_cast<double>(*r.creation_year);
    }
    if (!fv.values.contains("n_dedup_pairs") && r.training_match_scores) {
      fv.values["n_dedup_pairs"] = static_cast<double>(dedup_filter(*r.training_match_scores, thresholds));
    }
    out.push_back(std::move(fv));
  }
  return out;
}

}  // namespace iconometer
