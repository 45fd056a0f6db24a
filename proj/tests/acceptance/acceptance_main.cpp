// Acceptance gate: one line per criterion, nonzero exit if any is red.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "demo/demo_dataset.hpp"
#include "iconometer/calibration.hpp"
#include "iconometer/correlation.hpp"
#include "iconometer/embedding.hpp"
#include "iconometer/perturbation.hpp"
#include "iconometer/pipeline.hpp"
#include "iconometer/random.hpp"
#include "iconometer/realization.hpp"
#include "iconometer/recognition.hpp"
#include "iconometer/synthetic.hpp"

using namespace iconometer;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool condition, const std::string& what) {
    if (!condition && ok) detail = what;
    ok = ok && condition;
  }
};

EmbeddingMatrix random_unit_rows(Rng& rng, std::size_t rows, std::size_t dim,
                                 EmbeddingKind kind = EmbeddingKind::kGlobal) {
  std::vector<float> data(rows * dim);
  for (float& x : data) x = static_cast<float>(2.0 * uniform_unit(rng) - 1.0);
  return EmbeddingMatrix::normalized(rows, dim, std::move(data), kind);
}

double dot(std::span<const float> a, std::span<const float> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return d;
}

// Brute-force VR: for each generated cell, does any bank cell exceed tau?
double brute_vr(const EmbeddingMatrix& gen, const EmbeddingMatrix& bank, double tau) {
  std::size_t reused = 0;
  for (std::size_t i = 0; i < gen.rows(); ++i) {
    bool any = false;
    for (std::size_t j = 0; j < bank.rows(); ++j) any = any || dot(gen.row(i), bank.row(j)) > tau;
    reused += any;
  }
  return static_cast<double>(reused) / static_cast<double>(gen.rows());
}

Check metric_exactness() {
  Check c;
  Rng rng(2024);
  Thresholds t;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 12);
    const auto bank = random_unit_rows(rng, 1 + uniform_index(rng, 4), 4);
    const auto gens = random_unit_rows(rng, n, 4);
    std::vector<AlignmentRecord> records;
    std::size_t aligned = 0;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back(align_one(gens.row(i), bank, t));
      bool hit = false;
      for (std::size_t j = 0; j < bank.rows(); ++j) hit = hit || dot(gens.row(i), bank.row(j)) > t.tau_align;
      aligned += hit;
    }
    c.expect(compute_cra(records) == static_cast<double>(aligned) / static_cast<double>(n), "CRA oracle");

    const auto gen_patches = random_unit_rows(rng, 16, 3, EmbeddingKind::kPatch);
    const auto bank_patches = random_unit_rows(rng, 16 * (1 + uniform_index(rng, 3)), 3, EmbeddingKind::kPatch);
    const auto rec = patch_reuse(gen_patches, bank_patches, t);
    c.expect(rec.vr == brute_vr(gen_patches, bank_patches, t.tau_reuse), "VR oracle");
    c.expect(rec.vi == 1.0 - rec.vr, "VI complement");

    const double cra = uniform_unit(rng), vi = uniform_unit(rng);
    c.expect(compute_crt(cra, vi) == cra * vi, "CRT product");
  }
  const double worked[3][3] = {{0.9, 0.9, 0.81}, {0.5, 0.8, 0.4}, {0.9, 0.2, 0.18}};
  for (const auto& w : worked) {
    c.expect(std::round(compute_crt(w[0], w[1]) * 100.0) / 100.0 == w[2], "worked CRT case");
  }
  return c;
}

Check synthetic_linearity() {
  Check c;
  const double expected[4] = {1.0, 0.5, 0.25, 0.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto trials = plan_trials(100, 10, 4, seed);
    const auto result = run_validation(trials, planted_patch_provider(4), Thresholds{});
    if (result.rows.size() != 4) {
      c.expect(false, "missing condition rows");
      continue;
    }
    for (std::size_t k = 0; k < 4; ++k) {
      c.expect(std::abs(result.rows[k].vr.mean - expected[k]) <= 0.0625,
               "seed " + std::to_string(seed) + " condition " + std::string(to_string(result.rows[k].kind)));
    }
    for (std::size_t k = 0; k + 1 < 4; ++k) {
      c.expect(result.rows[k].vr.mean > result.rows[k + 1].vr.mean, "ordering at seed " + std::to_string(seed));
    }
  }
  return c;
}

Check threshold_monotonicity() {
  Check c;
  Rng rng(7);
  const auto grid = default_calibration_grid();
  for (int fixture = 0; fixture < 1000; ++fixture) {
    const auto bank = random_unit_rows(rng, 2 + uniform_index(rng, 4), 6);
    const auto gens = random_unit_rows(rng, 1 + uniform_index(rng, 10), 6);
    const auto scores = ScoreMatrix::pairwise(gens, bank);
    const auto gen_patches = random_unit_rows(rng, 4, 3, EmbeddingKind::kPatch);
    const auto bank_patches = random_unit_rows(rng, 4 * bank.rows(), 3, EmbeddingKind::kPatch);
    double prev_cra = 2.0, prev_crc = 2.0, prev_vr = 2.0;
    for (double tau : grid) {
      Thresholds t;
      t.tau_align = tau;
      t.tau_reuse = tau;
      t.grid_side = 2;
      std::vector<AlignmentRecord> records;
      for (std::size_t i = 0; i < gens.rows(); ++i) records.push_back(align_one(gens.row(i), bank, t));
      const double cra = compute_cra(records);
      const double crc = compute_crc(scores, bank.rows(), Category::kDynamic, t);
      const double vr = patch_reuse(gen_patches, bank_patches, t).vr;
      c.expect(cra <= prev_cra, "CRA rose with tau");
      c.expect(crc <= prev_crc, "CRC rose with tau");
      c.expect(vr <= prev_vr, "VR rose with tau");
      prev_cra = cra;
      prev_crc = crc;
      prev_vr = vr;
    }
  }
  return c;
}

std::vector<double> mean_rank_oracle(const std::vector<double>& x) {
  std::vector<double> out;
  for (double v : x) {
    double less = 0, equal = 0;
    for (double w : x) {
      less += w < v;
      equal += w == v;
    }
    out.push_back(less + (equal + 1.0) / 2.0);
  }
  return out;
}

Check spearman_correctness() {
  Check c;
  std::vector<double> x, up, down;
  for (int i = 0; i < 30; ++i) {
    x.push_back(i);
    up.push_back(std::exp(0.2 * i));
    down.push_back(-i * i * 1.0);
  }
  c.expect(*spearman(x, up, 0).rho == 1.0, "monotone increasing");
  c.expect(*spearman(x, down, 0).rho == -1.0, "monotone decreasing");

  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(5 + uniform_index(rng, 40));
    for (double& e : v) e = static_cast<double>(uniform_index(rng, 5));
    c.expect(average_ranks(v) == mean_rank_oracle(v), "tied ranks");
  }

  for (int test = 0; test < 50; ++test) {
    std::vector<double> a(25), b(25);
    for (double& e : a) e = uniform_unit(rng);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = a[i] + 0.5 * uniform_unit(rng);
    const auto first = spearman(a, b, 10000, 42);
    const auto second = spearman(a, b, 10000, 42);
    c.expect(first.p_value.has_value() && first.p_value == second.p_value, "p-value reproducibility");
  }
  return c;
}

Check retention_arithmetic() {
  Check c;
  std::vector<ReferenceRecognition> before, after;
  for (std::size_t i = 0; i < 300; ++i) {
    ReferenceRecognition b;
    b.reference_id = "ref" + std::to_string(i);
    b.model_name = "m";
    b.n = 10;
    b.n_aligned = i < 233 ? 1 + i % 10 : 0;
    b.cra = static_cast<double>(b.n_aligned) / 10.0;
    ReferenceRecognition a = b;
    a.variant = Variant::kSynonym;
    a.n_aligned = i < 73 ? 1 : (i >= 280 ? 2 : 0);
    a.cra = static_cast<double>(a.n_aligned) / 10.0;
    before.push_back(b);
    after.push_back(a);
  }
  const auto r = retention(before, after);
  c.expect(r.recognized_before == 233, "recognized before");
  c.expect(r.retained == 73, "retained");
  c.expect(r.retention_rate.has_value() && std::abs(*r.retention_rate * 100.0 - 31.3) <= 0.05, "rate 31.3%");
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Check end_to_end_determinism() {
  Check c;
  const auto root = fs::temp_directory_path() / "iconometer_acceptance";
  fs::remove_all(root);
  demo::DemoOptions options;
  options.reference_pngs = false;
  const auto ds = demo::make_demo_dataset(root / "data", options);
  for (const char* run : {"a", "b"}) {
    RunConfig config;
    config.manifest_path = ds.manifest_path;
    config.features_path = ds.features_path;
    config.output_dir = root / run;
    std::ostringstream log;
    c.expect(run_pipeline(config, log) == kExitSuccess, std::string("run ") + run + " failed");
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    c.expect(slurp(entry.path()) == slurp(root / "b" / name), name.string() + " differs");
    compared += entry.path().extension() == ".csv";
  }
  c.expect(compared >= 9, "expected CSV artifacts");
  return c;
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Check()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"metric exactness (CRA, VR, CRT vs brute force; worked CRT cases)", 1.0, metric_exactness},
      {"synthetic VR linearity on planted fixtures, seeds 1..10", 10.0, synthetic_linearity},
      {"threshold monotonicity of CRA/CRC/VR over 1000 fixtures", 30.0, threshold_monotonicity},
      {"Spearman correctness and seeded permutation p-values", 60.0, spearman_correctness},
      {"retention arithmetic 73 of 233 -> 31.3%", 1.0, retention_arithmetic},
      {"end-to-end determinism of run_pipeline", 120.0, end_to_end_determinism},
  };
  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criterion.run();
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (check.ok && seconds >= criterion.limit_seconds) {
      check.ok = false;
      check.detail = "over time budget";
    }
    failures += !check.ok;
    std::printf("[%s] %s (%.3f s, limit %.0f s)%s%s\n", check.ok ? "PASS" : "FAIL", criterion.name, seconds,
                criterion.limit_seconds, check.ok ? "" : ": ", check.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
