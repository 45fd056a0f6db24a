#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iconometer {

enum class Category { kStatic, kDynamic };
enum class Variant { kOriginal, kSynonym, kDescription };

std::string_view to_string(Category category);
std::string_view to_string(Variant variant);
// Throw ContractViolation on unknown names.
Category parse_category(std::string_view text);
Variant parse_variant(std::string_view text);

// One cultural concept. Static references carry exactly one canonical image;
// dynamic references carry a candidate bank of depictions.
struct Reference {
  std::string id;
  std::string title;
  Category category = Category::kStatic;
  std::vector<std::string> reference_image_ids;
  std::int64_t sitelink_count = 0;
  std::optional<int> creation_year;
  std::map<std::string, double> features;
  // Max SSCD-style score of each candidate training match to the reference
  // image. When present it is reduced to the n_dedup_pairs feature.
  std::optional<std::vector<double>> training_match_scores;

  friend bool operator==(const Reference&, const Reference&) = default;
};

struct GenerationSet {
  std::string reference_id;
  std::string model_name;
  Variant variant = Variant::kOriginal;
  std::vector<std::string> image_ids;

  friend bool operator==(const GenerationSet&, const GenerationSet&) = default;
};

inline constexpr std::size_t kDefaultGenerationsPerReference = 10;

struct Thresholds {
  double tau_align = 0.7;
  double tau_reuse = 0.6;
  double tau_coherence = 0.7;
  double tau_dedup = 0.90;
  int grid_side = 4;

  std::size_t patches_per_image() const {
    return static_cast<std::size_t>(grid_side) * static_cast<std::size_t>(grid_side);
  }

  // Throws ContractViolation unless every tau is in (0, 1) and grid_side >= 1.
  void validate() const;
  // Human-readable descriptions of every out-of-range field.
  std::vector<std::string> problems() const;
};

// Where the embeddings for one image live. `global_row` selects a row inside a
// multi-row global file such as the extraction worker's batched output.
struct ImageEntry {
  std::string global_path;
  std::size_t global_row = 0;
  std::optional<std::string> patch_path;

  friend bool operator==(const ImageEntry&, const ImageEntry&) = default;
};

struct ExternalScore {
  std::optional<double> sscd;
  std::optional<int> pdfe_level;

  friend bool operator==(const ExternalScore&, const ExternalScore&) = default;
};

using ScoreKey = std::pair<std::string, std::string>;  // (image_id, reference_id)

struct Manifest {
  std::vector<Reference> references;
  std::vector<GenerationSet> generation_sets;
  std::map<std::string, ImageEntry> image_registry;
  std::map<ScoreKey, ExternalScore> external_scores;
  bool compliance_mode = false;

  const Reference* find_reference(std::string_view id) const;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// Minimum sitelink count (exclusive) required of references in compliance mode.
inline constexpr std::int64_t kComplianceSitelinkFloor = 20;

}  // namespace iconometer
