#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace iconometer {

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // population (divide by n)
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

double mean(std::span<const double> values);
double population_sd(std::span<const double> values);
// Empty input yields std::nullopt.
std::optional<Summary> summarize(std::span<const double> values);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap interval for the mean.
ConfidenceInterval bootstrap_mean_ci(std::span<const double> values, std::size_t resamples,
                                     std::uint64_t seed, double level = 0.95);

}  // namespace iconometer
