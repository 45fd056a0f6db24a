#include "iconometer/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "iconometer/csv.hpp"
#include "iconometer/error.hpp"

namespace iconometer {
namespace {

constexpr int kHistogramBins = 40;  // 0.05 wide over [-1, 1]

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<double> default_calibration_grid() {
  std::vector<double> grid;
  for (int hundredths = 50; hundredths <= 90; hundredths += 5) grid.push_back(hundredths / 100.0);
  return grid;
}

OperatingPoint evaluate_threshold(std::span<const PairSample> samples, double tau) {
  OperatingPoint p;
  p.tau = tau;
  for (const auto& s : samples) {
    const bool predicted_same = s.sim > tau;
    if (s.label == PairLabel::kSame) {
      (predicted_same ? p.true_positive : p.false_negative)++;
    } else {
      (predicted_same ? p.false_positive : p.true_negative)++;
    }
  }
  p.precision = ratio(p.true_positive, p.true_positive + p.false_positive);
  p.recall = ratio(p.true_positive, p.true_positive + p.false_negative);
  p.fpr = ratio(p.false_positive, p.false_positive + p.true_negative);
  p.f1 = (p.precision + p.recall) > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
  return p;
}

CalibrationReport calibrate(std::span<const PairSample> samples, std::span<const double> grid) {
  if (grid.empty()) throw ContractViolation("calibration grid is empty");
  CalibrationReport report;
  double sum_same = 0.0, sum_diff = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.sim)) throw ContractViolation("non-finite similarity in calibration set");
    if (s.label == PairLabel::kSame) {
      ++report.n_same;
      sum_same += s.sim;
    } else {
      ++report.n_diff;
      sum_diff += s.sim;
    }
  }
  if (report.n_same == 0 || report.n_diff == 0) throw DegenerateInput("degenerate calibration set");
  report.mu_same = sum_same / static_cast<double>(report.n_same);
  report.mu_diff = sum_diff / static_cast<double>(report.n_diff);

  std::vector<double> taus(grid.begin(), grid.end());
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  for (double tau : taus) report.sweep.push_back(evaluate_threshold(samples, tau));

  // Ascending sweep + strict comparison keeps the lowest tau among ties.
  const OperatingPoint* best = &report.sweep.front();
  for (const auto& p : report.sweep) {
    if (p.f1 > best->f1) best = &p;
  }
  report.chosen_tau = best->tau;
  report.true_match_retention = best->recall;
  report.false_positive_rate = best->fpr;
  report.f1 = best->f1;

  report.histogram.resize(kHistogramBins);
  for (int b = 0; b < kHistogramBins; ++b) {
    report.histogram[b].lower = -1.0 + b / 20.0;
    report.histogram[b].upper = -1.0 + (b + 1) / 20.0;
  }
  for (const auto& s : samples) {
    const int b = std::clamp(static_cast<int>(std::floor((s.sim + 1.0) * 20.0)), 0, kHistogramBins - 1);
    (s.label == PairLabel::kSame ? report.histogram[b].same : report.histogram[b].different)++;
  }
  return report;
}

std::vector<PairSample> read_pair_samples(const std::string& csv_text) {
  const CsvTable table = parse_csv(csv_text);
  const auto sim_col = table.column("sim");
  const auto label_col = table.column("label");
  if (!sim_col || !label_col) throw FormatError("pairs.csv needs 'sim' and 'label' columns", 1, 0);
  std::vector<PairSample> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string& sim_text = row[*sim_col];
    char* end = nullptr;
    const double sim = std::strtod(sim_text.c_str(), &end);
    if (sim_text.empty() || end != sim_text.c_str() + sim_text.size() || !std::isfinite(sim)) {
      throw FormatError("bad similarity '" + sim_text + "'", r + 2, 0);
    }
    const std::string& label = row[*label_col];
    PairLabel parsed;
    if (label == "same") {
      parsed = PairLabel::kSame;
    } else if (label == "different") {
      parsed = PairLabel::kDifferent;
    } else {
      throw FormatError("bad label '" + label + "', expected same or different", r + 2, 0);
    }
    out.push_back({sim, parsed});
  }
  return out;
}

std::string calibration_to_json(const CalibrationReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["mu_same"] = report.mu_same;
  j["mu_diff"] = report.mu_diff;
  j["n_same"] = report.n_same;
  j["n_different"] = report.n_diff;
  j["chosen_tau"] = report.chosen_tau;
  j["true_match_retention"] = report.true_match_retention;
  j["false_positive_rate"] = report.false_positive_rate;
  j["f1"] = report.f1;
  ordered_json sweep = ordered_json::array();
  for (const auto& p : report.sweep) {
    sweep.push_back({{"tau", p.tau},
                     {"precision", p.precision},
                     {"recall", p.recall},
                     {"f1", p.f1},
                     {"fpr", p.fpr},
                     {"tp", p.true_positive},
                     {"fp", p.false_positive},
                     {"tn", p.true_negative},
                     {"fn", p.false_negative}});
  }
  j["sweep"] = std::move(sweep);
  ordered_json hist = ordered_json::array();
  for (const auto& b : report.histogram) {
    hist.push_back({{"lower", b.lower}, {"upper", b.upper}, {"same", b.same}, {"different", b.different}});
  }
  j["histogram"] = std::move(hist);
  return j.dump(2) + "\n";
}

}  // namespace iconometer
