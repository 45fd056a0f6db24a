#include "iconometer/realization.hpp"

#include <cmath>
#include <map>

#include "iconometer/error.hpp"
#include "iconometer/stats.hpp"

namespace iconometer {

RealizationRecord patch_reuse(const EmbeddingMatrix& generated_patches,
                              const EmbeddingMatrix& reference_patch_bank,
                              const Thresholds& thresholds) {
  const std::size_t k = thresholds.patches_per_image();
  if (reference_patch_bank.empty()) throw ContractViolation("empty reference patch bank");
  if (generated_patches.rows() != k) {
    throw GridMismatch("grid mismatch: generated image has " +
                       std::to_string(generated_patches.rows()) + " patches, expected " +
                       std::to_string(k));
  }
  if (reference_patch_bank.rows() % k != 0) {
    throw GridMismatch("grid mismatch: reference bank has " +
                       std::to_string(reference_patch_bank.rows()) +
                       " patches, not a multiple of " + std::to_string(k));
  }

  RealizationRecord record;
  record.reuse_flags.resize(k);
  record.per_patch_max.resize(k);
  for (std::size_t p = 0; p < k; ++p) {
    const double best = max_similarity(generated_patches.row(p), reference_patch_bank).score;
    record.per_patch_max[p] = best;
    const bool reused = best > thresholds.tau_reuse;
    record.reuse_flags[p] = reused ? 1 : 0;
    if (reused) ++record.reused_count;
  }
  record.vr = static_cast<double>(record.reused_count) / static_cast<double>(k);
  record.vi = 1.0 - record.vr;
  return record;
}

double compute_crt(double cra, double vi_mean) {
  if (!(cra >= 0.0 && cra <= 1.0) || !(vi_mean >= 0.0 && vi_mean <= 1.0)) {
    throw ContractViolation("CRT inputs must lie in [0, 1]");
  }
  return cra * vi_mean;
}

ReferenceRealization realize_reference(const ReferenceRecognition& recognition,
                                       std::vector<RealizationRecord> records) {
  ReferenceRealization out;
  out.reference_id = recognition.reference_id;
  out.model_name = recognition.model_name;
  out.variant = recognition.variant;
  out.category = recognition.category;
  out.cra = recognition.cra;
  out.n_aligned = records.size();
  if (records.size() != recognition.n_aligned) {
    throw ContractViolation("expected one realization record per aligned generation");
  }
  if (!records.empty()) {
    std::vector<double> vr, vi;
    for (const auto& r : records) {
      vr.push_back(r.vr);
      vi.push_back(r.vi);
    }
    out.vr_align_mean = mean(vr);
    out.vr_align_sd = population_sd(vr);
    out.vi_mean = mean(vi);
    out.crt = compute_crt(out.cra, *out.vi_mean);
  }
  out.records = std::move(records);
  return out;
}

ModelSummary aggregate_model(std::span<const ReferenceRealization> realizations,
                             std::span<const ReferenceRecognition> recognitions) {
  if (realizations.empty()) throw ContractViolation("model summary over zero references");
  if (realizations.size() != recognitions.size()) {
    throw ContractViolation("realizations and recognitions cover different references");
  }
  std::map<std::string, const ReferenceRecognition*> by_id;
  for (const auto& r : recognitions) {
    if (!by_id.emplace(r.reference_id, &r).second) {
      throw ContractViolation("duplicate reference " + r.reference_id + " in recognitions");
    }
  }

  ModelSummary s;
  s.model_name = realizations.front().model_name;
  s.variant = realizations.front().variant;
  s.category = realizations.front().category;
  s.n_references = realizations.size();

  std::vector<double> vr_align, crt_align, crt_all, vi_align;
  for (const auto& real : realizations) {
    const auto it = by_id.find(real.reference_id);
    if (it == by_id.end()) throw ContractViolation("reference " + real.reference_id + " has no recognition");
    if (real.category != s.category) s.category.reset();  // pooled static + dynamic
    const ReferenceRecognition& rec = *it->second;
    crt_all.push_back(real.crt);
    if (rec.recognized()) {
      if (!real.vr_align_mean || !real.vi_mean) {
        throw ContractViolation("recognized reference " + real.reference_id + " lacks realization");
      }
      vr_align.push_back(*real.vr_align_mean);
      vi_align.push_back(*real.vi_mean);
      crt_align.push_back(real.crt);
    }
  }
  s.n_aligned_references = crt_align.size();
  s.cra_model = model_level_cra(recognitions);
  s.crt_all_mean = mean(crt_all);
  s.crt_all_sd = population_sd(crt_all);
  if (!crt_align.empty()) {
    s.vr_align_mean = mean(vr_align);
    s.vr_align_sd = population_sd(vr_align);
    s.crt_align_mean = mean(crt_align);
    s.crt_align_sd = population_sd(crt_align);
    s.vi_align_mean = mean(vi_align);
    s.crt_model = s.cra_model * *s.vi_align_mean;
  }
  return s;
}

std::array<std::size_t, 3> vr_histogram(std::span<const RealizationRecord> records,
                                        std::size_t patches_per_image) {
  if (patches_per_image == 0) throw ContractViolation("histogram needs a positive patch count");
  // Edges at 3, 6, 11 of 16 cells; compare 16 * count against edge * K.
  const std::size_t k = patches_per_image;
  std::array<std::size_t, 3> counts{};
  for (const auto& r : records) {
    const std::size_t scaled = 16 * r.reused_count;
    if (scaled < 3 * k) continue;
    if (scaled < 6 * k) {
      ++counts[0];
    } else if (scaled < 11 * k) {
      ++counts[1];
    } else {
      ++counts[2];
    }
  }
  return counts;
}

}  // namespace iconometer
