#include "iconometer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "iconometer/error.hpp"
#include "iconometer/random.hpp"

namespace iconometer {

double mean(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("mean of empty sequence");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double population_sd(std::span<const double> values) {
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

std::optional<Summary> summarize(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  Summary s;
  s.n = values.size();
  s.mean = mean(values);
  s.sd = population_sd(values);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  // Rounding in the sum can push the mean a hair outside [min, max] for
  // constant input.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

ConfidenceInterval bootstrap_mean_ci(std::span<const double> values, std::size_t resamples,
                                     std::uint64_t seed, double level) {
  if (values.empty()) throw ContractViolation("bootstrap of empty sequence");
  if (resamples == 0) throw ContractViolation("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw ContractViolation("confidence level outside (0, 1)");

  Rng rng(seed);
  const std::size_t n = values.size();
  std::vector<double> means(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[uniform_index(rng, n)];
    means[b] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());

  const double alpha = (1.0 - level) / 2.0;
  const auto last = static_cast<double>(resamples - 1);
  const auto lo = static_cast<std::size_t>(std::floor(alpha * last));
  const auto hi = static_cast<std::size_t>(std::ceil((1.0 - alpha) * last));
  return {means[lo], means[std::min(hi, resamples - 1)]};
}

}  // namespace iconometer
