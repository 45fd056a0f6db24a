#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iconometer/embedding.hpp"
#include "iconometer/recognition.hpp"
#include "iconometer/types.hpp"

namespace iconometer {

// Patch-level reuse evidence for one aligned generated image.
struct RealizationRecord {
  std::string image_id;
  std::string reference_id;
  std::vector<std::uint8_t> reuse_flags;  // one per grid cell
  std::vector<double> per_patch_max;      // best cosine to any reference patch
  std::size_t reused_count = 0;
  double vr = 0.0;
  double vi = 1.0;
};

struct ReferenceRealization {
  std::string reference_id;
  std::string model_name;
  Variant variant = Variant::kOriginal;
  Category category = Category::kStatic;
  double cra = 0.0;
  std::size_t n_aligned = 0;
  // Statistics over aligned images; empty when nothing aligned.
  std::optional<double> vr_align_mean;
  std::optional<double> vr_align_sd;
  std::optional<double> vi_mean;
  double crt = 0.0;
  std::vector<RealizationRecord> records;
};

// Compares every generated patch against every bank patch, ignoring position.
// The bank is the concatenated cells of all reference images. Throws
// GridMismatch if the generated image does not have grid_side^2 rows or the
// bank is not a whole number of grids.
RealizationRecord patch_reuse(const EmbeddingMatrix& generated_patches,
                              const EmbeddingMatrix& reference_patch_bank,
                              const Thresholds& thresholds);

double compute_crt(double cra, double vi_mean);

// Folds the per-image records of one (reference, model, variant) cell.
ReferenceRealization realize_reference(const ReferenceRecognition& recognition,
                                       std::vector<RealizationRecord> records);

struct ModelSummary {
  std::string model_name;
  Variant variant = Variant::kOriginal;
  std::optional<Category> category;  // nullopt when references of both kinds are pooled
  std::size_t n_references = 0;
  std::size_t n_aligned_references = 0;
  double cra_model = 0.0;
  std::optional<double> vr_align_mean;
  std::optional<double> vr_align_sd;
  std::optional<double> crt_align_mean;
  std::optional<double> crt_align_sd;
  double crt_all_mean = 0.0;
  double crt_all_sd = 0.0;
  // Model-level view: mean VI over recognized references, and its product
  // with the model-level CRA.
  std::optional<double> vi_align_mean;
  double crt_model = 0.0;
};

// SDs are taken across references. Throws ContractViolation unless both
// lists cover the same reference ids.
ModelSummary aggregate_model(std::span<const ReferenceRealization> realizations,
                             std::span<const ReferenceRecognition> recognitions);

// Counts of records by reused-patch count, bins [3,6), [6,11), [11,16] on a
// 16-cell grid (scaled proportionally for other grids). Records below the
// first edge are not counted.
std::array<std::size_t, 3> vr_histogram(std::span<const RealizationRecord> records,
                                        std::size_t patches_per_image = 16);

}  // namespace iconometer
