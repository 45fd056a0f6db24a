#include <gtest/gtest.h>

#include <cmath>

#include "iconometer/error.hpp"
#include "iconometer/recognition.hpp"
#include "test_support.hpp"

using namespace iconometer;
using namespace iconometer::testing_support;

namespace {

Reference make_reference(const std::string& id, Category category, std::size_t bank) {
  Reference r;
  r.id = id;
  r.category = category;
  for (std::size_t i = 0; i < bank; ++i) r.reference_image_ids.push_back(id + "_r" + std::to_string(i));
  return r;
}

GenerationSet make_set(const std::string& ref, std::size_t n) {
  GenerationSet g;
  g.reference_id = ref;
  g.model_name = "m";
  for (std::size_t i = 0; i < n; ++i) g.image_ids.push_back(ref + "_g" + std::to_string(i));
  return g;
}

EmbeddingMatrix rows_from_angles(const std::vector<double>& angles) {
  std::vector<float> data;
  for (double a : angles) {
    const auto v = at_angle(a);
    data.insert(data.end(), v.begin(), v.end());
  }
  return EmbeddingMatrix::normalized(angles.size(), 2, std::move(data));
}

}  // namespace

TEST(AlignOne, StrictThreshold) {
  const auto bank = rows_from_angles({0.0});
  const auto g = rows_from_angles({0.5});
  const double s = cosine(g.row(0), bank.row(0));
  Thresholds t;
  t.tau_align = s;
  EXPECT_FALSE(align_one(g.row(0), bank, t).aligned);
  t.tau_align = std::nextafter(s, 0.0);
  EXPECT_TRUE(align_one(g.row(0), bank, t).aligned);
}

TEST(ComputeCra, CountsAlignedShare) {
  std::vector<AlignmentRecord> recs(10);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].reference_id = "r";
    recs[i].aligned = i < 3;
  }
  EXPECT_EQ(compute_cra(recs), 0.3);
  recs[4].reference_id = "other";
  EXPECT_THROW(compute_cra(recs), ContractViolation);
  EXPECT_THROW(compute_cra(std::span<const AlignmentRecord>{}), ContractViolation);
}

TEST(ComputeCrc, StaticIsUndefined) {
  const ScoreMatrix s(1, 1, {0.9});
  try {
    compute_crc(s, 1, Category::kStatic, Thresholds{});
    FAIL();
  } catch (const DegenerateInput& e) {
    EXPECT_STREQ(e.what(), "CRC undefined for static");
  }
}

TEST(ComputeCrc, CoveredColumns) {
  // Column 0 covered, column 1 only reaches the threshold, column 2 covered twice.
  const ScoreMatrix s(2, 3, {0.9, 0.7, 0.8, 0.1, 0.2, 0.95});
  EXPECT_DOUBLE_EQ(compute_crc(s, 3, Category::kDynamic, Thresholds{}), 2.0 / 3.0);
  EXPECT_THROW(compute_crc(s, 4, Category::kDynamic, Thresholds{}), ContractViolation);
}

TEST(RecognizeReference, MatchesBruteForceOracle) {
  Rng rng(3);
  Thresholds t;
  for (int trial = 0; trial < 200; ++trial) {
    const bool dynamic = trial % 2 == 1;
    const std::size_t bank_size = dynamic ? 1 + uniform_index(rng, 5) : 1;
    const std::size_t n = 1 + uniform_index(rng, 12);
    const auto ref = make_reference("ref", dynamic ? Category::kDynamic : Category::kStatic, bank_size);
    const auto set = make_set("ref", n);

    std::vector<double> bank_angles, gen_angles;
    for (std::size_t i = 0; i < bank_size; ++i) bank_angles.push_back(uniform_unit(rng) * 3.0);
    for (std::size_t i = 0; i < n; ++i) gen_angles.push_back(uniform_unit(rng) * 3.0);
    const auto bank = rows_from_angles(bank_angles);
    const auto gens = rows_from_angles(gen_angles);

    const auto got = recognize_reference(ref, set, gens, bank, ref.reference_image_ids, t);

    std::size_t aligned = 0;
    std::vector<bool> covered(bank_size, false);
    for (std::size_t i = 0; i < n; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < bank_size; ++j) {
        double d = 0.0;
        for (std::size_t c = 0; c < 2; ++c) d += static_cast<double>(gens.row(i)[c]) * bank.row(j)[c];
        if (std::clamp(d, -1.0, 1.0) > t.tau_align) {
          any = true;
          covered[j] = true;
        }
      }
      if (any) ++aligned;
      EXPECT_EQ(got.records[i].aligned, any);
    }
    EXPECT_EQ(got.n_aligned, aligned);
    EXPECT_EQ(got.n, n);
    EXPECT_EQ(got.cra, static_cast<double>(aligned) / static_cast<double>(n));
    if (dynamic) {
      const auto c = static_cast<double>(std::count(covered.begin(), covered.end(), true));
      ASSERT_TRUE(got.crc.has_value());
      EXPECT_EQ(*got.crc, c / static_cast<double>(bank_size));
    } else {
      EXPECT_FALSE(got.crc.has_value());
    }
  }
}

TEST(RecognizeReference, RecordsNameBestBankImage) {
  const auto ref = make_reference("x", Category::kDynamic, 2);
  const auto set = make_set("x", 1);
  const auto bank = rows_from_angles({1.0, 0.0});
  const auto gens = rows_from_angles({0.05});
  const auto got = recognize_reference(ref, set, gens, bank, ref.reference_image_ids, Thresholds{});
  EXPECT_EQ(got.records[0].best_reference_image, "x_r1");
  EXPECT_EQ(got.records[0].image_id, "x_g0");
}

TEST(RecognizeReference, StaticBankMustBeSingleton) {
  const auto ref = make_reference("s", Category::kStatic, 2);
  const auto set = make_set("s", 1);
  const auto bank = rows_from_angles({0.0, 1.0});
  const auto gens = rows_from_angles({0.0});
  EXPECT_THROW(recognize_reference(ref, set, gens, bank, ref.reference_image_ids, Thresholds{}),
               ContractViolation);
}

TEST(ModelLevelCra, ShareOfRecognizedReferences) {
  std::vector<ReferenceRecognition> refs(4);
  refs[0].cra = 0.1;
  refs[2].cra = 1.0;
  EXPECT_EQ(model_level_cra(refs), 0.5);
  EXPECT_THROW(model_level_cra(std::span<const ReferenceRecognition>{}), ContractViolation);
}

TEST(Monotonicity, RaisingTauNeverRaisesCraOrCrc) {
  Rng rng(17);
  const auto ref = make_reference("d", Category::kDynamic, 3);
  const auto set = make_set("d", 10);
  for (int trial = 0; trial < 100; ++trial) {
    const auto bank = random_rows(rng, 3, 8);
    const auto gens = random_rows(rng, 10, 8);
    double prev_cra = 2.0, prev_crc = 2.0;
    for (int h = 50; h <= 90; h += 5) {
      Thresholds t;
      t.tau_align = h / 100.0;
      const auto r = recognize_reference(ref, set, gens, bank, ref.reference_image_ids, t);
      EXPECT_LE(r.cra, prev_cra);
      EXPECT_LE(*r.crc, prev_crc);
      prev_cra = r.cra;
      prev_crc = *r.crc;
    }
  }
}
