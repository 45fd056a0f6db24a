#pragma once

#include <span>
#include <string>
#include <vector>

namespace iconometer {

enum class PairLabel { kSame, kDifferent };

struct PairSample {
  double sim = 0.0;
  PairLabel label = PairLabel::kSame;
};

struct OperatingPoint {
  double tau = 0.0;
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;
  double precision = 0.0;  // 0 when nothing is predicted "same"
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
};

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t same = 0;
  std::size_t different = 0;
};

struct CalibrationReport {
  double mu_same = 0.0;
  double mu_diff = 0.0;
  std::size_t n_same = 0;
  std::size_t n_diff = 0;
  double chosen_tau = 0.0;
  double true_match_retention = 0.0;
  double false_positive_rate = 0.0;
  double f1 = 0.0;
  std::vector<OperatingPoint> sweep;  // ascending tau
  std::vector<HistogramBin> histogram;
};

// {0.50, 0.55, ..., 0.90}
std::vector<double> default_calibration_grid();

// Classifies sim > tau as "same" for every candidate tau and picks the tau
// with the highest F1 (lowest tau on ties). Throws DegenerateInput when only
// one label is present.
CalibrationReport calibrate(std::span<const PairSample> samples, std::span<const double> grid);

OperatingPoint evaluate_threshold(std::span<const PairSample> samples, double tau);

// pairs.csv: header "sim,label", label in {same, different}.
std::vector<PairSample> read_pair_samples(const std::string& csv_text);
std::string calibration_to_json(const CalibrationReport& report);

}  // namespace iconometer
