#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iconometer/realization.hpp"
#include "iconometer/recognition.hpp"
#include "iconometer/stats.hpp"

namespace iconometer {

inline constexpr std::size_t kDefaultBootstrapResamples = 1000;

struct PerturbationOutcome {
  std::string model_name;
  std::optional<Category> category;
  Variant variant = Variant::kSynonym;
  std::size_t matched = 0;
  std::size_t recognized_before = 0;
  std::size_t retained = 0;
  std::optional<double> retention_rate;  // undefined when nothing was recognized before
  std::vector<std::string> unmatched_ids;

  std::optional<double> delta_cra_mean;
  std::optional<ConfidenceInterval> delta_cra_ci95;
  std::optional<double> delta_crt_retained_mean;
  std::optional<ConfidenceInterval> delta_crt_retained_ci95;
  std::size_t n_delta_crt = 0;
};

// A reference counts as recognized when at least one of its generations is
// aligned. References present on one side only are reported in
// `unmatched_ids` and excluded.
PerturbationOutcome retention(std::span<const ReferenceRecognition> before,
                              std::span<const ReferenceRecognition> after);

// Fills the retention counts plus: mean CRA change over all matched
// references, and mean CRT change over references recognized on both sides,
// each with a seeded percentile-bootstrap 95% interval.
PerturbationOutcome delta_metrics(std::span<const ReferenceRecognition> before,
                                  std::span<const ReferenceRecognition> after,
                                  std::span<const ReferenceRealization> realizations_before,
                                  std::span<const ReferenceRealization> realizations_after,
                                  std::uint64_t seed,
                                  std::size_t resamples = kDefaultBootstrapResamples);

}  // namespace iconometer
