#include "iconometer/types.hpp"

#include <algorithm>
#include <string>

#include "iconometer/error.hpp"

namespace iconometer {

std::string_view to_string(Category category) {
  return category == Category::kStatic ? "static" : "dynamic";
}

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kOriginal:
      return "original";
    case Variant::kSynonym:
      return "synonym";
    case Variant::kDescription:
      return "description";
  }
  return "original";
}

Category parse_category(std::string_view text) {
  if (text == "static") return Category::kStatic;
  if (text == "dynamic") return Category::kDynamic;
  throw ContractViolation("unknown category '" + std::string(text) + "'");
}

Variant parse_variant(std::string_view text) {
  if (text == "original") return Variant::kOriginal;
  if (text == "synonym") return Variant::kSynonym;
  if (text == "description") return Variant::kDescription;
  throw ContractViolation("unknown variant '" + std::string(text) + "'");
}

std::vector<std::string> Thresholds::problems() const {
  std::vector<std::string> out;
  auto check = [&](const char* name, double value) {
    if (!(value > 0.0 && value < 1.0)) {
      out.push_back(std::string(name) + "=" + std::to_string(value) + " is outside (0, 1)");
    }
  };
  check("tau_align", tau_align);
  check("tau_reuse", tau_reuse);
  check("tau_coherence", tau_coherence);
  check("tau_dedup", tau_dedup);
  if (grid_side < 1) out.push_back("grid_side=" + std::to_string(grid_side) + " must be >= 1");
  return out;
}

void Thresholds::validate() const {
  const auto issues = problems();
  if (!issues.empty()) throw ContractViolation("invalid thresholds: " + issues.front());
}

const Reference* Manifest::find_reference(std::string_view id) const {
  const auto it = std::find_if(references.begin(), references.end(),
                               [&](const Reference& r) { return r.id == id; });
  return it == references.end() ? nullptr : &*it;
}

}  // namespace iconometer
