#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iconometer/embedding.hpp"
#include "iconometer/stats.hpp"
#include "iconometer/types.hpp"

namespace iconometer {

// 8-bit RGB, row-major, no padding.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  RasterImage() = default;
  RasterImage(int w, int h);
  RasterImage(int w, int h, std::vector<std::uint8_t> pixels);

  std::uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* pixel(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

RasterImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RasterImage& image);

enum class OverlapKind { kExactCopy, kHalfSpatial, kQuarterLocalized, kUnrelated };

inline constexpr std::array<OverlapKind, 4> kAllOverlapKinds = {
    OverlapKind::kExactCopy, OverlapKind::kHalfSpatial, OverlapKind::kQuarterLocalized,
    OverlapKind::kUnrelated};

std::string_view to_string(OverlapKind kind);
OverlapKind parse_overlap_kind(std::string_view text);
double true_overlap_fraction(OverlapKind kind);

struct OverlapCondition {
  OverlapKind kind = OverlapKind::kExactCopy;
  double true_overlap_fraction() const { return iconometer::true_overlap_fraction(kind); }
};

// For each target grid cell (row-major), the source cell copied into it, or -1
// when the cell keeps the target's content.
struct CompositePlan {
  int grid_side = 4;
  std::vector<int> cell_source;

  std::size_t copied_cells() const;
};

// Cell-level layout of a composite. half_spatial copies the top, bottom, left
// or right half in place; quarter_localized moves 2x2 source blocks (a quarter
// of the cells) to random non-overlapping target positions.
CompositePlan plan_composite(OverlapKind kind, int grid_side, std::uint64_t seed);

RasterImage apply_plan(const RasterImage& source, const RasterImage& target,
                       const CompositePlan& plan);

RasterImage make_composite(const RasterImage& source, const RasterImage& target,
                           OverlapCondition condition, std::uint64_t seed, int grid_side = 4);

// One (condition, reference, pair) comparison of the validation protocol.
struct SyntheticTrial {
  OverlapKind kind = OverlapKind::kExactCopy;
  std::size_t reference = 0;  // source reference index
  std::size_t pair = 0;
  std::size_t target = 0;     // target reference index (== reference for exact copies)
  CompositePlan plan;
};

// Ten distinct targets per reference when the pool allows it; every trial
// seed derives from `seed`.
std::vector<SyntheticTrial> plan_trials(std::size_t n_references, std::size_t pairs_per_reference,
                                        int grid_side, std::uint64_t seed);

struct TrialEmbeddings {
  EmbeddingMatrix reference_patches;
  EmbeddingMatrix composite_patches;
};

struct TrialScores {
  std::optional<double> sscd;
  std::optional<double> pdfe;
};

using PatchProvider = std::function<std::optional<TrialEmbeddings>(const SyntheticTrial&)>;
using ScoreProvider = std::function<TrialScores(const SyntheticTrial&)>;

// Patch embeddings realized directly from the plan: source cells are basis
// vectors e_0..e_{K-1}, target cells e_K..e_{2K-1}. Copied cells match at
// cosine 1, all others at 0.
PatchProvider planted_patch_provider(int grid_side);

struct ValidationRow {
  OverlapKind kind = OverlapKind::kExactCopy;
  Summary vr;  // across per-reference means
  std::optional<Summary> sscd;
  std::optional<Summary> pdfe;
  std::size_t n_references = 0;
  std::size_t n_trials = 0;
};

struct ValidationResult {
  std::vector<ValidationRow> rows;  // in kAllOverlapKinds order
  std::vector<std::string> gaps;    // trials without embeddings
};

// Averages VR over each reference's pairs, then summarizes across references.
ValidationResult run_validation(std::span<const SyntheticTrial> trials,
                                const PatchProvider& patches, const Thresholds& thresholds,
                                const ScoreProvider& scores = {});

std::string composite_name(const SyntheticTrial& trial, std::string_view reference_stem);

}  // namespace iconometer
