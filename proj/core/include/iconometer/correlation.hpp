#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iconometer/types.hpp"

namespace iconometer {

inline constexpr std::size_t kDefaultPermutations = 10000;
inline constexpr double kSignificanceLevel = 0.05;

inline constexpr std::array<std::string_view, 8> kFeatureNames = {
    "text_uniqueness",   "image_uniqueness",  "n_dedup_pairs",    "popularity",
    "creation_year",     "image_memorability", "word_memorability", "text_concreteness"};

bool is_known_feature(std::string_view name);

struct FeatureVector {
  std::string reference_id;
  std::map<std::string, std::optional<double>> values;

  std::optional<double> get(std::string_view feature) const;
};

// Values that break the feature invariants (negative or fractional
// n_dedup_pairs, creation_year outside 1000-2100, non-finite) are cleared
// and reported.
std::vector<std::string> sanitize_features(std::vector<FeatureVector>& features);

// Ties share the mean of the ranks they span (1-based).
std::vector<double> average_ranks(std::span<const double> values);

struct SpearmanResult {
  std::optional<double> rho;      // undefined when either input is constant
  std::optional<double> p_value;  // (count(|rho_perm| >= |rho_obs|) + 1) / (P + 1)
  std::size_t n = 0;
  std::size_t permutations = 0;
};

// Pearson correlation of average ranks with a seeded two-sided permutation
// p-value. Throws ContractViolation for length mismatch, n < 3 or non-finite
// input.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y,
                        std::size_t permutations = kDefaultPermutations, std::uint64_t seed = 42);

// Number of candidate training matches kept after near-duplicate removal:
// candidates scoring strictly above tau_dedup are dropped.
std::size_t dedup_filter(std::span<const double> match_scores, const Thresholds& thresholds);
// Candidates scored against several reference images use their maximum.
std::size_t dedup_filter(std::span<const std::vector<double>> match_scores,
                         const Thresholds& thresholds);

struct CorrelationRow {
  std::string feature;
  Category category = Category::kStatic;
  std::optional<double> rho;
  std::optional<double> p_value;
  std::size_t n_used = 0;
  bool significant = false;
  std::string flag;  // "", "insufficient n" or "undefined"
};

// One row per feature x category, pairwise deletion of missing values.
CorrelationRow correlate_feature(std::string_view feature, Category category,
                                 std::span<const FeatureVector> features,
                                 const std::map<std::string, double>& cra_by_reference,
                                 const std::map<std::string, Category>& category_by_reference,
                                 std::size_t permutations, std::uint64_t seed);

std::vector<CorrelationRow> correlation_table(
    std::span<const FeatureVector> features, const std::map<std::string, double>& cra_by_reference,
    const std::map<std::string, Category>& category_by_reference,
    std::size_t permutations = kDefaultPermutations, std::uint64_t seed = 42);

struct Quadrant {
  std::size_t count = 0;
  std::optional<double> mean_cra;  // empty quadrants stay undefined
};

// Quadrants ordered (low x, low y), (high x, low y), (low x, high y),
// (high x, high y). Points on a median go to the lower side.
struct QuadrantSummary {
  double median_x = 0.0;
  double median_y = 0.0;
  std::array<Quadrant, 4> quadrants;
  bool degenerate_x = false;  // every x equal
  bool degenerate_y = false;
};

QuadrantSummary quadrant_summary(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> cra);

double median(std::span<const double> values);

// features.csv: reference_id plus one column per feature, blanks for missing.
std::vector<FeatureVector> read_features_csv(const std::string& csv_text);

// Features carried on the references themselves: the `features` map,
// popularity from sitelinks, creation_year, and n_dedup_pairs reduced from
// training_match_scores when not given directly.
std::vector<FeatureVector> features_from_manifest(const Manifest& manifest,
                                                  const Thresholds& thresholds);

}  // namespace iconometer
