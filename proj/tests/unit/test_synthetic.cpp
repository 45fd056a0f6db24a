#include <gtest/gtest.h>

#include <set>

#include "iconometer/error.hpp"
#include "iconometer/random.hpp"
#include "iconometer/synthetic.hpp"
#include "test_support.hpp"

using namespace iconometer;
using namespace iconometer::testing_support;

namespace {

RasterImage noise_image(std::uint64_t seed, int w = 32, int h = 32) {
  Rng rng(seed);
  RasterImage img(w, h);
  for (auto& b : img.rgb) b = static_cast<std::uint8_t>(uniform_index(rng, 256));
  return img;
}

bool cell_equal(const RasterImage& a, int a_cell, const RasterImage& b, int b_cell, int g) {
  const int cw = a.width / g, ch = a.height / g;
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      const auto* pa = a.pixel((a_cell % g) * cw + x, (a_cell / g) * ch + y);
      const auto* pb = b.pixel((b_cell % g) * cw + x, (b_cell / g) * ch + y);
      if (!std::equal(pa, pa + 3, pb)) return false;
    }
  }
  return true;
}

}  // namespace

TEST(MakeComposite, ExactAndUnrelatedAreBitExact) {
  const auto a = noise_image(1), b = noise_image(2);
  EXPECT_EQ(make_composite(a, b, {OverlapKind::kExactCopy}, 9), a);
  EXPECT_EQ(make_composite(a, b, {OverlapKind::kUnrelated}, 9), b);
}

TEST(MakeComposite, HalfSpatialCopiesEightCellsInPlace) {
  const auto a = noise_image(3), b = noise_image(4);
  std::set<std::vector<int>> layouts;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto c = make_composite(a, b, {OverlapKind::kHalfSpatial}, seed);
    std::vector<int> from_source;
    for (int cell = 0; cell < 16; ++cell) {
      const bool src = cell_equal(c, cell, a, cell, 4);
      const bool tgt = cell_equal(c, cell, b, cell, 4);
      EXPECT_NE(src, tgt);
      if (src) from_source.push_back(cell);
    }
    EXPECT_EQ(from_source.size(), 8u);
    layouts.insert(from_source);
  }
  // top, bottom, left, right all occur over 40 seeds
  EXPECT_EQ(layouts.size(), 4u);
}

TEST(MakeComposite, QuarterLocalizedPlacesOneBlockOnFourByFour) {
  const auto a = noise_image(5), b = noise_image(6);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto plan = plan_composite(OverlapKind::kQuarterLocalized, 4, seed);
    ASSERT_EQ(plan.copied_cells(), 4u);
    std::vector<int> targets;
    for (int t = 0; t < 16; ++t) {
      if (plan.cell_source[t] >= 0) targets.push_back(t);
    }
    // one contiguous 2x2 block
    EXPECT_EQ(targets[1] - targets[0], 1);
    EXPECT_EQ(targets[2] - targets[0], 4);
    EXPECT_EQ(targets[3] - targets[0], 5);
    const auto c = apply_plan(a, b, plan);
    for (int t = 0; t < 16; ++t) {
      const int s = plan.cell_source[t];
      EXPECT_TRUE(s >= 0 ? cell_equal(c, t, a, s, 4) : cell_equal(c, t, b, t, 4));
    }
  }
}

TEST(MakeComposite, QuarterBlocksNeverOverlapOnLargerGrids) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto plan = plan_composite(OverlapKind::kQuarterLocalized, 8, seed);
    EXPECT_EQ(plan.copied_cells(), 16u);
    std::set<int> sources;
    for (int s : plan.cell_source) {
      if (s >= 0) EXPECT_TRUE(sources.insert(s).second);
    }
  }
}

TEST(MakeComposite, ContractChecks) {
  EXPECT_THROW(make_composite(noise_image(1, 32, 32), noise_image(2, 16, 16), {OverlapKind::kHalfSpatial}, 1),
               ContractViolation);
  EXPECT_THROW(make_composite(noise_image(1, 30, 30), noise_image(2, 30, 30), {OverlapKind::kHalfSpatial}, 1),
               ContractViolation);
  EXPECT_THROW(plan_composite(OverlapKind::kHalfSpatial, 3, 1), ContractViolation);
  EXPECT_THROW(plan_composite(OverlapKind::kQuarterLocalized, 6, 1), ContractViolation);
}

TEST(MakeComposite, SameSeedSameBytes) {
  const auto a = noise_image(7), b = noise_image(8);
  for (auto kind : kAllOverlapKinds) {
    EXPECT_EQ(make_composite(a, b, {kind}, 77), make_composite(a, b, {kind}, 77));
  }
}

TEST(Png, RoundTrip) {
  const auto dir = scratch_dir("png");
  const auto img = noise_image(9, 20, 12);
  write_png(dir / "x.png", img);
  EXPECT_EQ(read_png(dir / "x.png"), img);
  EXPECT_THROW(read_png(dir / "missing.png"), std::runtime_error);
}

TEST(PlanTrials, TargetsDifferFromSource) {
  const auto trials = plan_trials(12, 10, 4, 1);
  EXPECT_EQ(trials.size(), 12u * 10u * 4u);
  for (const auto& t : trials) {
    if (t.kind == OverlapKind::kExactCopy) {
      EXPECT_EQ(t.target, t.reference);
    } else {
      EXPECT_NE(t.target, t.reference);
    }
  }
  EXPECT_THROW(plan_trials(1, 10, 4, 1), ContractViolation);
}

TEST(RunValidation, PlantedFixtureRecoversOverlapFraction) {
  const auto trials = plan_trials(20, 5, 4, 3);
  const auto result = run_validation(trials, planted_patch_provider(4), Thresholds{});
  ASSERT_EQ(result.rows.size(), 4u);
  for (const auto& row : result.rows) {
    EXPECT_EQ(row.vr.mean, true_overlap_fraction(row.kind)) << to_string(row.kind);
    EXPECT_EQ(row.n_references, 20u);
    EXPECT_EQ(row.n_trials, 100u);
    EXPECT_LE(row.vr.min, row.vr.mean);
    EXPECT_LE(row.vr.mean, row.vr.max);
  }
}

TEST(RunValidation, MissingEmbeddingsBecomeGaps) {
  const auto trials = plan_trials(4, 2, 4, 3);
  const auto planted = planted_patch_provider(4);
  const PatchProvider patchy = [&](const SyntheticTrial& t) -> std::optional<TrialEmbeddings> {
    if (t.reference == 0) return std::nullopt;
    return planted(t);
  };
  const ScoreProvider scores = [](const SyntheticTrial& t) {
    return TrialScores{true_overlap_fraction(t.kind), std::nullopt};
  };
  const auto result = run_validation(trials, patchy, Thresholds{}, scores);
  EXPECT_EQ(result.gaps.size(), 8u);
  for (const auto& row : result.rows) {
    EXPECT_EQ(row.n_references, 3u);
    ASSERT_TRUE(row.sscd.has_value());
    EXPECT_EQ(row.sscd->mean, true_overlap_fraction(row.kind));
    EXPECT_FALSE(row.pdfe.has_value());
  }
}

TEST(CompositeName, Format) {
  SyntheticTrial t;
  t.kind = OverlapKind::kQuarterLocalized;
  t.pair = 3;
  EXPECT_EQ(composite_name(t, "ref07"), "ref07__quarter_localized__p03");
  EXPECT_EQ(parse_overlap_kind("half_spatial"), OverlapKind::kHalfSpatial);
  EXPECT_THROW(parse_overlap_kind("third"), ContractViolation);
}
