#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iconometer/embedding.hpp"
#include "iconometer/types.hpp"

namespace iconometer {

struct AlignmentRecord {
  std::string image_id;
  std::string reference_id;
  double similarity = 0.0;  // max cosine to the reference bank
  bool aligned = false;     // similarity > tau_align
  std::size_t best_reference_row = 0;
  std::string best_reference_image;
};

// n x |R| cosines between generations (rows) and reference images (columns).
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static ScoreMatrix pairwise(const EmbeddingMatrix& generations, const EmbeddingMatrix& bank);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct ReferenceRecognition {
  std::string reference_id;
  std::string model_name;
  Variant variant = Variant::kOriginal;
  Category category = Category::kStatic;
  double cra = 0.0;
  std::optional<double> crc;  // dynamic references only
  std::size_t n_aligned = 0;
  std::size_t n = 0;
  std::vector<AlignmentRecord> records;

  bool recognized() const { return n_aligned > 0; }
};

// Ids are left empty; callers that know them fill them in.
AlignmentRecord align_one(std::span<const float> generated, const EmbeddingMatrix& reference_bank,
                          const Thresholds& thresholds);

double compute_cra(std::span<const AlignmentRecord> records);

// Fraction of reference images matched (> tau_align) by at least one
// generation. Throws DegenerateInput for static references.
double compute_crc(const ScoreMatrix& scores, std::size_t reference_bank_size, Category category,
                   const Thresholds& thresholds);

// Aligns all generations of one (reference, model, variant) cell against the
// reference bank. `bank_image_ids` names the bank rows.
ReferenceRecognition recognize_reference(const Reference& reference, const GenerationSet& set,
                                         const EmbeddingMatrix& generations,
                                         const EmbeddingMatrix& bank,
                                         std::span<const std::string> bank_image_ids,
                                         const Thresholds& thresholds);

// Share of references with at least one aligned generation.
double model_level_cra(std::span<const ReferenceRecognition> per_reference);

}  // namespace iconometer
