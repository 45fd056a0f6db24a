#include <gtest/gtest.h>

#include "iconometer/error.hpp"
#include "iconometer/perturbation.hpp"

using namespace iconometer;

namespace {

ReferenceRecognition rec(const std::string& id, std::size_t aligned, Variant v = Variant::kOriginal) {
  ReferenceRecognition r;
  r.reference_id = id;
  r.model_name = "m";
  r.variant = v;
  r.n = 10;
  r.n_aligned = aligned;
  r.cra = static_cast<double>(aligned) / 10.0;
  return r;
}

ReferenceRealization real(const ReferenceRecognition& r, double crt) {
  ReferenceRealization out;
  out.reference_id = r.reference_id;
  out.model_name = r.model_name;
  out.variant = r.variant;
  out.cra = r.cra;
  out.n_aligned = r.n_aligned;
  out.crt = crt;
  return out;
}

}  // namespace

TEST(Retention, CountsRetainedAmongRecognized) {
  const std::vector<ReferenceRecognition> before{rec("a", 3), rec("b", 0), rec("c", 5), rec("d", 1)};
  const std::vector<ReferenceRecognition> after{rec("a", 1, Variant::kSynonym), rec("b", 4, Variant::kSynonym),
                                                rec("c", 0, Variant::kSynonym), rec("e", 2, Variant::kSynonym)};
  const auto o = retention(before, after);
  EXPECT_EQ(o.matched, 3u);
  EXPECT_EQ(o.recognized_before, 2u);
  EXPECT_EQ(o.retained, 1u);
  EXPECT_DOUBLE_EQ(*o.retention_rate, 0.5);
  EXPECT_EQ(o.unmatched_ids, (std::vector<std::string>{"d", "e"}));
  EXPECT_EQ(o.variant, Variant::kSynonym);
}

TEST(Retention, UndefinedWithoutRecognizedBaseline) {
  const std::vector<ReferenceRecognition> before{rec("a", 0)};
  const std::vector<ReferenceRecognition> after{rec("a", 3, Variant::kDescription)};
  EXPECT_FALSE(retention(before, after).retention_rate.has_value());
}

TEST(Retention, DuplicateReferencesRejected) {
  const std::vector<ReferenceRecognition> before{rec("a", 1), rec("a", 2)};
  EXPECT_THROW(retention(before, before), ContractViolation);
}

TEST(DeltaMetrics, MeansAndSeededIntervals) {
  std::vector<ReferenceRecognition> before, after;
  std::vector<ReferenceRealization> rb, ra;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "r" + std::to_string(i);
    before.push_back(rec(id, 6));
    after.push_back(rec(id, static_cast<std::size_t>(i % 3 == 0 ? 0 : 4), Variant::kSynonym));
    rb.push_back(real(before.back(), 0.5));
    ra.push_back(real(after.back(), after.back().recognized() ? 0.3 : 0.0));
  }
  const auto o = delta_metrics(before, after, rb, ra, 42, 1000);
  // 7 of 20 drop to zero aligned (i % 3 == 0), the rest go 6 -> 4.
  EXPECT_EQ(o.retained, 13u);
  EXPECT_NEAR(*o.delta_cra_mean, (7 * -0.6 + 13 * -0.2) / 20.0, 1e-12);
  EXPECT_EQ(o.n_delta_crt, 13u);
  EXPECT_NEAR(*o.delta_crt_retained_mean, -0.2, 1e-12);
  EXPECT_LE(o.delta_cra_ci95->lower, *o.delta_cra_mean);
  EXPECT_GE(o.delta_cra_ci95->upper, *o.delta_cra_mean);

  const auto again = delta_metrics(before, after, rb, ra, 42, 1000);
  EXPECT_EQ(again.delta_cra_ci95->lower, o.delta_cra_ci95->lower);
  EXPECT_EQ(again.delta_cra_ci95->upper, o.delta_cra_ci95->upper);
}

TEST(DeltaMetrics, RetainedReferenceNeedsRealization) {
  const std::vector<ReferenceRecognition> before{rec("a", 3)};
  const std::vector<ReferenceRecognition> after{rec("a", 2, Variant::kSynonym)};
  const std::vector<ReferenceRealization> none;
  EXPECT_THROW(delta_metrics(before, after, none, none, 1, 10), ContractViolation);
}
