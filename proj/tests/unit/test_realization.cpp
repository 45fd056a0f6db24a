#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "iconometer/error.hpp"
#include "iconometer/realization.hpp"
#include "iconometer/stats.hpp"
#include "test_support.hpp"

using namespace iconometer;
using namespace iconometer::testing_support;

namespace {

ReferenceRecognition recognition(const std::string& id, double cra, std::size_t n_aligned,
                                 Category category = Category::kStatic) {
  ReferenceRecognition r;
  r.reference_id = id;
  r.model_name = "m";
  r.category = category;
  r.cra = cra;
  r.n_aligned = n_aligned;
  r.n = 10;
  return r;
}

RealizationRecord record_with_vr(double vr) {
  RealizationRecord r;
  r.vr = vr;
  r.vi = 1.0 - vr;
  return r;
}

}  // namespace

TEST(PatchReuse, PlantedCellsCountExactly) {
  // Bank: e_0..e_15. Generated: cells 0..5 copy bank cells, the rest are e_16+.
  std::vector<std::size_t> bank_axes(16), gen_axes(16);
  std::iota(bank_axes.begin(), bank_axes.end(), 0);
  for (std::size_t c = 0; c < 16; ++c) gen_axes[c] = c < 6 ? 15 - c : 16 + c;
  const auto bank = basis_rows(bank_axes, 32, EmbeddingKind::kPatch);
  const auto gen = basis_rows(gen_axes, 32, EmbeddingKind::kPatch);
  const auto r = patch_reuse(gen, bank, Thresholds{});
  EXPECT_EQ(r.reused_count, 6u);
  EXPECT_EQ(r.vr, 6.0 / 16.0);
  EXPECT_EQ(r.vi, 1.0 - 6.0 / 16.0);
  for (std::size_t c = 0; c < 16; ++c) EXPECT_EQ(r.reuse_flags[c], c < 6 ? 1 : 0);
}

TEST(PatchReuse, MatchesBruteForceAndIgnoresPosition) {
  Rng rng(23);
  Thresholds t;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t images = 1 + uniform_index(rng, 3);
    const auto bank = random_rows(rng, 16 * images, 5, EmbeddingKind::kPatch);
    const auto gen = random_rows(rng, 16, 5, EmbeddingKind::kPatch);
    std::size_t reused = 0;
    for (std::size_t p = 0; p < 16; ++p) {
      double best = -2.0;
      for (std::size_t q = 0; q < bank.rows(); ++q) {
        double d = 0.0;
        for (std::size_t c = 0; c < 5; ++c) d += static_cast<double>(gen.row(p)[c]) * bank.row(q)[c];
        best = std::max(best, std::clamp(d, -1.0, 1.0));
      }
      if (best > t.tau_reuse) ++reused;
    }
    const auto got = patch_reuse(gen, bank, t);
    EXPECT_EQ(got.reused_count, reused);
    EXPECT_EQ(got.vr, static_cast<double>(reused) / 16.0);

    std::vector<std::size_t> order(bank.rows());
    std::iota(order.begin(), order.end(), 0);
    fisher_yates(std::span<std::size_t>(order), rng);
    EXPECT_EQ(patch_reuse(gen, bank.select_rows(order), t).reused_count, reused);
  }
}

TEST(PatchReuse, GridMismatch) {
  Rng rng(2);
  const auto bank = random_rows(rng, 16, 4, EmbeddingKind::kPatch);
  EXPECT_THROW(patch_reuse(random_rows(rng, 9, 4, EmbeddingKind::kPatch), bank, Thresholds{}), GridMismatch);
  EXPECT_THROW(patch_reuse(random_rows(rng, 16, 4, EmbeddingKind::kPatch), random_rows(rng, 20, 4), Thresholds{}),
               GridMismatch);
}

TEST(ComputeCrt, WorkedCases) {
  EXPECT_NEAR(compute_crt(0.9, 0.9), 0.81, 1e-15);
  EXPECT_NEAR(compute_crt(0.5, 0.8), 0.4, 1e-15);
  EXPECT_NEAR(compute_crt(0.9, 0.2), 0.18, 1e-15);
  EXPECT_THROW(compute_crt(1.1, 0.5), ContractViolation);
  EXPECT_THROW(compute_crt(0.5, -0.1), ContractViolation);
}

TEST(RealizeReference, FoldsAlignedRecords) {
  const auto rec = recognition("a", 0.3, 3);
  std::vector<RealizationRecord> records{record_with_vr(0.25), record_with_vr(0.5), record_with_vr(0.75)};
  const auto r = realize_reference(rec, records);
  EXPECT_DOUBLE_EQ(*r.vr_align_mean, 0.5);
  EXPECT_DOUBLE_EQ(*r.vr_align_sd, std::sqrt(0.125 / 3.0));
  EXPECT_DOUBLE_EQ(*r.vi_mean, 0.5);
  EXPECT_DOUBLE_EQ(r.crt, 0.15);
  EXPECT_THROW(realize_reference(recognition("a", 0.4, 4), records), ContractViolation);
}

TEST(RealizeReference, UnrecognizedHasZeroCrt) {
  const auto r = realize_reference(recognition("a", 0.0, 0), {});
  EXPECT_FALSE(r.vr_align_mean.has_value());
  EXPECT_EQ(r.crt, 0.0);
}

TEST(AggregateModel, MatchesOracleComposition) {
  std::vector<ReferenceRecognition> recs{recognition("a", 0.5, 5), recognition("b", 0.0, 0),
                                         recognition("c", 1.0, 10)};
  std::vector<ReferenceRealization> reals;
  reals.push_back(realize_reference(recs[0], std::vector<RealizationRecord>(5, record_with_vr(0.5))));
  reals.push_back(realize_reference(recs[1], {}));
  reals.push_back(realize_reference(recs[2], std::vector<RealizationRecord>(10, record_with_vr(0.25))));

  const auto s = aggregate_model(reals, recs);
  EXPECT_EQ(s.n_references, 3u);
  EXPECT_EQ(s.n_aligned_references, 2u);
  EXPECT_DOUBLE_EQ(s.cra_model, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*s.vr_align_mean, 0.375);
  EXPECT_DOUBLE_EQ(*s.crt_align_mean, (0.25 + 0.75) / 2.0);
  EXPECT_DOUBLE_EQ(s.crt_all_mean, (0.25 + 0.0 + 0.75) / 3.0);
  const std::vector<double> all{0.25, 0.0, 0.75};
  EXPECT_DOUBLE_EQ(s.crt_all_sd, population_sd(all));
  EXPECT_DOUBLE_EQ(*s.vi_align_mean, 0.625);
  EXPECT_DOUBLE_EQ(s.crt_model, 2.0 / 3.0 * 0.625);
  ASSERT_TRUE(s.category.has_value());

  recs[1].category = Category::kDynamic;
  reals[1].category = Category::kDynamic;
  EXPECT_FALSE(aggregate_model(reals, recs).category.has_value());
}

TEST(AggregateModel, RejectsMismatchedReferences) {
  std::vector<ReferenceRecognition> recs{recognition("a", 0.0, 0)};
  std::vector<ReferenceRealization> reals{realize_reference(recognition("b", 0.0, 0), {})};
  EXPECT_THROW(aggregate_model(reals, recs), ContractViolation);
}

TEST(VrHistogram, BinsByReusedCount) {
  std::vector<RealizationRecord> records;
  for (std::size_t c : {0, 2, 3, 5, 6, 10, 11, 16}) {
    RealizationRecord r;
    r.reused_count = c;
    records.push_back(r);
  }
  const auto h = vr_histogram(records);
  EXPECT_EQ(h[0], 2u);
  EXPECT_EQ(h[1], 2u);
  EXPECT_EQ(h[2], 2u);
}
