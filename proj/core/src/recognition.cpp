#include "iconometer/recognition.hpp"

#include <algorithm>

#include "iconometer/error.hpp"

namespace iconometer {

ScoreMatrix::ScoreMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) throw ContractViolation("score matrix shape mismatch");
}

ScoreMatrix ScoreMatrix::pairwise(const EmbeddingMatrix& generations, const EmbeddingMatrix& bank) {
  std::vector<double> values;
  values.reserve(generations.rows() * bank.rows());
  for (std::size_t i = 0; i < generations.rows(); ++i) {
    for (std::size_t j = 0; j < bank.rows(); ++j) {
      values.push_back(cosine(generations.row(i), bank.row(j)));
    }
  }
  return ScoreMatrix(generations.rows(), bank.rows(), std::move(values));
}

AlignmentRecord align_one(std::span<const float> generated, const EmbeddingMatrix& reference_bank,
                          const Thresholds& thresholds) {
  const BestMatch best = max_similarity(generated, reference_bank);
  AlignmentRecord record;
  record.similarity = best.score;
  record.aligned = best.score > thresholds.tau_align;
  record.best_reference_row = best.row;
  return record;
}

double compute_cra(std::span<const AlignmentRecord> records) {
  if (records.empty()) throw ContractViolation("CRA of an empty generation set");
  std::size_t aligned = 0;
  for (const auto& r : records) {
    if (r.reference_id != records.front().reference_id) {
      throw ContractViolation("CRA over records of different references");
    }
    if (r.aligned) ++aligned;
  }
  return static_cast<double>(aligned) / static_cast<double>(records.size());
}

double compute_crc(const ScoreMatrix& scores, std::size_t reference_bank_size, Category category,
                   const Thresholds& thresholds) {
  if (category == Category::kStatic) throw DegenerateInput("CRC undefined for static");
  if (reference_bank_size == 0 || scores.cols() != reference_bank_size) {
    throw ContractViolation("score matrix has " + std::to_string(scores.cols()) +
                            " columns, reference bank has " + std::to_string(reference_bank_size));
  }
  if (scores.rows() == 0) throw ContractViolation("CRC without generations");
  std::size_t covered = 0;
  for (std::size_t j = 0; j < scores.cols(); ++j) {
    for (std::size_t i = 0; i < scores.rows(); ++i) {
      if (scores.at(i, j) > thresholds.tau_align) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(reference_bank_size);
}

ReferenceRecognition recognize_reference(const Reference& reference, const GenerationSet& set,
                                         const EmbeddingMatrix& generations,
                                         const EmbeddingMatrix& bank,
                                         std::span<const std::string> bank_image_ids,
                                         const Thresholds& thresholds) {
  if (set.reference_id != reference.id) throw ContractViolation("generation set belongs to another reference");
  if (generations.rows() != set.image_ids.size()) {
    throw ContractViolation("generation embeddings do not match the generation set");
  }
  if (bank_image_ids.size() != bank.rows()) throw ContractViolation("bank ids do not match bank rows");
  if (reference.category == Category::kStatic && bank.rows() != 1) {
    throw ContractViolation("static reference bank must hold exactly one image");
  }

  ReferenceRecognition out;
  out.reference_id = reference.id;
  out.model_name = set.model_name;
  out.variant = set.variant;
  out.category = reference.category;
  out.n = set.image_ids.size();

  const ScoreMatrix scores = ScoreMatrix::pairwise(generations, bank);
  for (std::size_t i = 0; i < generations.rows(); ++i) {
    AlignmentRecord rec = align_one(generations.row(i), bank, thresholds);
    rec.image_id = set.image_ids[i];
    rec.reference_id = reference.id;
    rec.best_reference_image = bank_image_ids[rec.best_reference_row];
    if (rec.aligned) ++out.n_aligned;
    out.records.push_back(std::move(rec));
  }
  out.cra = compute_cra(out.records);
  if (reference.category == Category::kDynamic) {
    out.crc = compute_crc(scores, bank.rows(), reference.category, thresholds);
  }
  return out;
}

double model_level_cra(std::span<const ReferenceRecognition> per_reference) {
  if (per_reference.empty()) throw ContractViolation("model-level CRA over zero references");
  const auto recognized = std::count_if(per_reference.begin(), per_reference.end(),
                                        [](const ReferenceRecognition& r) { return r.cra > 0.0; });
  return static_cast<double>(recognized) / static_cast<double>(per_reference.size());
}

}  // namespace iconometer
