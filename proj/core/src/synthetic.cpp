#include "iconometer/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>

#include "iconometer/error.hpp"
#include "iconometer/random.hpp"
#include "iconometer/realization.hpp"

namespace iconometer {
namespace {

constexpr int kMaxPlacementAttempts = 100000;

struct Block {
  int row;
  int col;
};

bool overlaps(const Block& a, const Block& b) {
  return std::abs(a.row - b.row) < 2 && std::abs(a.col - b.col) < 2;
}

// Rejection-samples `count` mutually non-overlapping 2x2 blocks.
std::vector<Block> place_blocks(int grid_side, std::size_t count, Rng& rng) {
  const auto span = static_cast<std::uint64_t>(grid_side - 1);
  std::vector<Block> blocks;
  int attempts = 0;
  while (blocks.size() < count) {
    if (++attempts > kMaxPlacementAttempts) throw DegenerateInput("cannot place 2x2 blocks without overlap");
    const Block candidate{static_cast<int>(uniform_index(rng, span)),
                          static_cast<int>(uniform_index(rng, span))};
    if (std::none_of(blocks.begin(), blocks.end(),
                     [&](const Block& b) { return overlaps(b, candidate); })) {
      blocks.push_back(candidate);
    }
  }
  return blocks;
}

void check_compatible(const RasterImage& source, const RasterImage& target, int grid_side) {
  if (grid_side < 1) throw ContractViolation("grid_side must be positive");
  if (source.width != target.width || source.height != target.height) {
    throw ContractViolation("source and target dimensions differ");
  }
  if (source.width % grid_side != 0 || source.height % grid_side != 0) {
    throw ContractViolation("image dimensions are not divisible by the grid");
  }
}

}  // namespace

std::string_view to_string(OverlapKind kind) {
  switch (kind) {
    case OverlapKind::kExactCopy:
      return "exact_copy";
    case OverlapKind::kHalfSpatial:
      return "half_spatial";
    case OverlapKind::kQuarterLocalized:
      return "quarter_localized";
    case OverlapKind::kUnrelated:
      return "unrelated";
  }
  return "exact_copy";
}

OverlapKind parse_overlap_kind(std::string_view text) {
  for (auto kind : kAllOverlapKinds) {
    if (to_string(kind) == text) return kind;
  }
  throw ContractViolation("unknown overlap condition '" + std::string(text) + "'");
}

double true_overlap_fraction(OverlapKind kind) {
  switch (kind) {
    case OverlapKind::kExactCopy:
      return 1.0;
    case OverlapKind::kHalfSpatial:
      return 0.5;
    case OverlapKind::kQuarterLocalized:
      return 0.25;
    case OverlapKind::kUnrelated:
      return 0.0;
  }
  return 0.0;
}

std::size_t CompositePlan::copied_cells() const {
  return static_cast<std::size_t>(
      std::count_if(cell_source.begin(), cell_source.end(), [](int s) { return s >= 0; }));
}

CompositePlan plan_composite(OverlapKind kind, int grid_side, std::uint64_t seed) {
  if (grid_side < 1) throw ContractViolation("grid_side must be positive");
  const int g = grid_side;
  CompositePlan plan;
  plan.grid_side = g;
  plan.cell_source.assign(static_cast<std::size_t>(g * g), -1);
  Rng rng(seed);

  switch (kind) {
    case OverlapKind::kExactCopy:
      std::iota(plan.cell_source.begin(), plan.cell_source.end(), 0);
      break;
    case OverlapKind::kUnrelated:
      break;
    case OverlapKind::kHalfSpatial: {
      if (g % 2 != 0) throw ContractViolation("half_spatial needs an even grid side");
      const auto side = uniform_index(rng, 4);  // top, bottom, left, right
      for (int r = 0; r < g; ++r) {
        for (int c = 0; c < g; ++c) {
          const bool copy = (side == 0 && r < g / 2) || (side == 1 && r >= g / 2) ||
                            (side == 2 && c < g / 2) || (side == 3 && c >= g / 2);
          if (copy) plan.cell_source[static_cast<std::size_t>(r * g + c)] = r * g + c;
        }
      }
      break;
    }
    case OverlapKind::kQuarterLocalized: {
      if (g % 4 != 0) throw ContractViolation("quarter_localized needs a grid side divisible by 4");
      const auto blocks = static_cast<std::size_t>((g / 4) * (g / 4));
      const auto sources = place_blocks(g, blocks, rng);
      const auto targets = place_blocks(g, blocks, rng);
      for (std::size_t b = 0; b < blocks; ++b) {
        for (int dr = 0; dr < 2; ++dr) {
          for (int dc = 0; dc < 2; ++dc) {
            const int t = (targets[b].row + dr) * g + targets[b].col + dc;
            const int s = (sources[b].row + dr) * g + sources[b].col + dc;
            plan.cell_source[static_cast<std::size_t>(t)] = s;
          }
        }
      }
      break;
    }
  }
  return plan;
}

RasterImage apply_plan(const RasterImage& source, const RasterImage& target, const CompositePlan& plan) {
  check_compatible(source, target, plan.grid_side);
  const int g = plan.grid_side;
  const int cw = source.width / g;
  const int ch = source.height / g;
  RasterImage out = target;
  for (int t = 0; t < g * g; ++t) {
    const int s = plan.cell_source[static_cast<std::size_t>(t)];
    if (s < 0) continue;
    const int tx = (t % g) * cw, ty = (t / g) * ch;
    const int sx = (s % g) * cw, sy = (s / g) * ch;
    for (int y = 0; y < ch; ++y) {
      std::copy_n(source.pixel(sx, sy + y), 3 * cw, out.pixel(tx, ty + y));
    }
  }
  return out;
}

RasterImage make_composite(const RasterImage& source, const RasterImage& target,
                           OverlapCondition condition, std::uint64_t seed, int grid_side) {
  check_compatible(source, target, grid_side);
  switch (condition.kind) {
    case OverlapKind::kExactCopy:
      return source;
    case OverlapKind::kUnrelated:
      return target;
    default:
      return apply_plan(source, target, plan_composite(condition.kind, grid_side, seed));
  }
}

std::vector<SyntheticTrial> plan_trials(std::size_t n_references, std::size_t pairs_per_reference,
                                        int grid_side, std::uint64_t seed) {
  if (n_references < 2) throw ContractViolation("synthetic validation needs at least two references");
  if (pairs_per_reference == 0) throw ContractViolation("pairs_per_reference must be positive");

  std::vector<SyntheticTrial> trials;
  trials.reserve(n_references * pairs_per_reference * kAllOverlapKinds.size());
  for (std::size_t r = 0; r < n_references; ++r) {
    std::vector<std::size_t> others;
    for (std::size_t o = 0; o < n_references; ++o) {
      if (o != r) others.push_back(o);
    }
    Rng target_rng(derive_seed(seed, r));
    fisher_yates(std::span<std::size_t>(others), target_rng);

    for (std::size_t k = 0; k < kAllOverlapKinds.size(); ++k) {
      const OverlapKind kind = kAllOverlapKinds[k];
      for (std::size_t p = 0; p < pairs_per_reference; ++p) {
        SyntheticTrial t;
        t.kind = kind;
        t.reference = r;
        t.pair = p;
        t.target = kind == OverlapKind::kExactCopy ? r : others[p % others.size()];
        const std::uint64_t stream = (std::uint64_t{1} << 40) + (r * pairs_per_reference + p) * 4 + k;
        t.plan = plan_composite(kind, grid_side, derive_seed(seed, stream));
        trials.push_back(std::move(t));
      }
    }
  }
  return trials;
}

PatchProvider planted_patch_provider(int grid_side) {
  const auto k = static_cast<std::size_t>(grid_side) * static_cast<std::size_t>(grid_side);
  const std::size_t dim = 2 * k;
  auto basis_rows = [k, dim](auto cell_to_axis) {
    std::vector<float> data(k * dim, 0.0f);
    for (std::size_t t = 0; t < k; ++t) data[t * dim + cell_to_axis(t)] = 1.0f;
    return EmbeddingMatrix(k, dim, std::move(data), EmbeddingKind::kPatch, "planted");
  };
  const EmbeddingMatrix source = basis_rows([](std::size_t t) { return t; });

  return [k, source, basis_rows](const SyntheticTrial& trial) -> std::optional<TrialEmbeddings> {
    if (trial.plan.cell_source.size() != k) throw GridMismatch("grid mismatch: plan does not match grid");
    EmbeddingMatrix composite = basis_rows([&](std::size_t t) {
      const int s = trial.plan.cell_source[t];
      return s >= 0 ? static_cast<std::size_t>(s) : k + t;
    });
    return TrialEmbeddings{source, std::move(composite)};
  };
}

ValidationResult run_validation(std::span<const SyntheticTrial> trials, const PatchProvider& patches,
                                const Thresholds& thresholds, const ScoreProvider& scores) {
  struct PerReference {
    std::vector<double> vr, sscd, pdfe;
  };
  std::map<std::pair<OverlapKind, std::size_t>, PerReference> groups;
  std::map<OverlapKind, std::size_t> trial_counts;

  ValidationResult result;
  for (const auto& trial : trials) {
    auto& group = groups[{trial.kind, trial.reference}];
    const auto embeddings = patches(trial);
    if (!embeddings) {
      char name[96];
      std::snprintf(name, sizeof name, "%s/ref%zu/p%zu", std::string(to_string(trial.kind)).c_str(),
                    trial.reference, trial.pair);
      result.gaps.emplace_back(name);
      continue;
    }
    ++trial_counts[trial.kind];
    group.vr.push_back(patch_reuse(embeddings->composite_patches, embeddings->reference_patches, thresholds).vr);
    if (scores) {
      const TrialScores s = scores(trial);
      if (s.sscd) group.sscd.push_back(*s.sscd);
      if (s.pdfe) group.pdfe.push_back(*s.pdfe);
    }
  }

  for (auto kind : kAllOverlapKinds) {
    std::vector<double> vr_means, sscd_means, pdfe_means;
    for (const auto& [key, group] : groups) {
      if (key.first != kind) continue;
      if (!group.vr.empty()) vr_means.push_back(mean(group.vr));
      if (!group.sscd.empty()) sscd_means.push_back(mean(group.sscd));
      if (!group.pdfe.empty()) pdfe_means.push_back(mean(group.pdfe));
    }
    ValidationRow row;
    row.kind = kind;
    row.n_references = vr_means.size();
    row.n_trials = trial_counts[kind];
    if (auto s = summarize(vr_means)) row.vr = *s;
    row.sscd = summarize(sscd_means);
    row.pdfe = summarize(pdfe_means);
    result.rows.push_back(row);
  }
  return result;
}

std::string composite_name(const SyntheticTrial& trial, std::string_view reference_stem) {
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, "__p%02zu", trial.pair);
  return std::string(reference_stem) + "__" + std::string(to_string(trial.kind)) + suffix;
}

}  // namespace iconometer
