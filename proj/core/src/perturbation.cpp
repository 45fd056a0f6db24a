#include "iconometer/perturbation.hpp"

#include <map>

#include "iconometer/error.hpp"
#include "iconometer/random.hpp"

namespace iconometer {
namespace {

template <typename T>
std::map<std::string, const T*> index_by_reference(std::span<const T> items, const char* what) {
  std::map<std::string, const T*> out;
  for (const auto& item : items) {
    if (!out.emplace(item.reference_id, &item).second) {
      throw ContractViolation(std::string("duplicate reference ") + item.reference_id + " in " + what);
    }
  }
  return out;
}

}  // namespace

PerturbationOutcome retention(std::span<const ReferenceRecognition> before,
                              std::span<const ReferenceRecognition> after) {
  const auto before_ids = index_by_reference(before, "baseline recognitions");
  const auto after_ids = index_by_reference(after, "perturbed recognitions");

  PerturbationOutcome out;
  if (!before.empty()) {
    out.model_name = before.front().model_name;
    out.category = before.front().category;
  }
  if (!after.empty()) out.variant = after.front().variant;
  for (const auto& r : before) {
    if (r.category != out.category) out.category.reset();
  }

  for (const auto& [id, b] : before_ids) {
    const auto it = after_ids.find(id);
    if (it == after_ids.end()) {
      out.unmatched_ids.push_back(id);
      continue;
    }
    ++out.matched;
    if (b->recognized()) {
      ++out.recognized_before;
      if (it->second->recognized()) ++out.retained;
    }
  }
  for (const auto& [id, a] : after_ids) {
    if (!before_ids.contains(id)) out.unmatched_ids.push_back(id);
  }
  if (out.recognized_before > 0) {
    out.retention_rate = static_cast<double>(out.retained) / static_cast<double>(out.recognized_before);
  }
  return out;
}

PerturbationOutcome delta_metrics(std::span<const ReferenceRecognition> before,
                                  std::span<const ReferenceRecognition> after,
                                  std::span<const ReferenceRealization> realizations_before,
                                  std::span<const ReferenceRealization> realizations_after,
                                  std::uint64_t seed, std::size_t resamples) {
  PerturbationOutcome out = retention(before, after);
  const auto before_ids = index_by_reference(before, "baseline recognitions");
  const auto after_ids = index_by_reference(after, "perturbed recognitions");
  const auto real_before = index_by_reference(realizations_before, "baseline realizations");
  const auto real_after = index_by_reference(realizations_after, "perturbed realizations");

  std::vector<double> delta_cra, delta_crt;
  for (const auto& [id, b] : before_ids) {
    const auto a = after_ids.find(id);
    if (a == after_ids.end()) continue;
    delta_cra.push_back(a->second->cra - b->cra);
    if (b->recognized() && a->second->recognized()) {
      const auto rb = real_before.find(id);
      const auto ra = real_after.find(id);
      if (rb == real_before.end() || ra == real_after.end()) {
        throw ContractViolation("retained reference " + id + " lacks a realization");
      }
      delta_crt.push_back(ra->second->crt - rb->second->crt);
    }
  }

  if (!delta_cra.empty()) {
    out.delta_cra_mean = mean(delta_cra);
    out.delta_cra_ci95 = bootstrap_mean_ci(delta_cra, resamples, derive_seed(seed, 0));
  }
  out.n_delta_crt = delta_crt.size();
  if (!delta_crt.empty()) {
    out.delta_crt_retained_mean = mean(delta_crt);
    out.delta_crt_retained_ci95 = bootstrap_mean_ci(delta_crt, resamples, derive_seed(seed, 1));
  }
  return out;
}

}  // namespace iconometer
