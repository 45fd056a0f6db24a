#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "iconometer/correlation.hpp"
#include "iconometer/embedding.hpp"
#include "iconometer/level_variance.hpp"
#include "iconometer/perturbation.hpp"
#include "iconometer/realization.hpp"
#include "iconometer/recognition.hpp"
#include "iconometer/types.hpp"

namespace iconometer {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr double kDefaultFailThreshold = 0.10;

enum ExitCode : int { kExitSuccess = 0, kExitValidation = 1, kExitIo = 2 };

struct RunConfig {
  std::filesystem::path manifest_path;
  Thresholds thresholds;
  std::uint64_t seed = kDefaultSeed;
  std::filesystem::path output_dir;
  std::vector<std::string> models;  // empty: every model
  std::vector<Variant> variants;    // empty: every variant
  double fail_threshold = kDefaultFailThreshold;
  std::optional<std::filesystem::path> features_path;
  std::size_t permutations = kDefaultPermutations;
  std::size_t bootstrap_resamples = kDefaultBootstrapResamples;
};

struct CoherenceResult {
  EmbeddingMatrix bank;
  std::vector<std::size_t> kept;  // indices into the candidate bank, ascending
};

// Repeatedly drops every candidate whose best similarity to another remaining
// candidate is <= tau_coherence until nothing changes. A single candidate is
// kept as is. Throws DegenerateInput("no coherent reference bank") when
// everything is dropped.
CoherenceResult coherence_filter(const EmbeddingMatrix& candidates, const Thresholds& thresholds);

// Loads EMB1 files relative to a base directory, once each, and remembers the
// digest of every file it read.
class EmbeddingStore {
 public:
  EmbeddingStore(std::filesystem::path base_dir, int grid_side);

  const EmbeddingMatrix& load(const std::string& relative_path);
  std::span<const float> global_row(const ImageEntry& entry);
  const EmbeddingMatrix& patches(const ImageEntry& entry);

  const std::map<std::string, std::string>& digests() const noexcept { return digests_; }

 private:
  std::filesystem::path base_dir_;
  int grid_side_;
  std::map<std::string, EmbeddingMatrix> cache_;
  std::map<std::string, std::string> digests_;
};

struct ItemError {
  std::string item;
  std::string message;
};

struct Evaluation {
  Thresholds thresholds;
  // One entry per evaluated generation set, in manifest order; realizations
  // are index-aligned with recognitions.
  std::vector<ReferenceRecognition> recognitions;
  std::vector<ReferenceRealization> realizations;
  // Per reference: retained reference image ids after coherence filtering.
  std::map<std::string, std::vector<std::string>> reference_banks;
  std::vector<ItemError> errors;
  std::size_t items_total = 0;
  std::map<std::string, std::string> input_digests;

  double failure_rate() const;
};

// Recognition and realization for every generation set that passes the
// model/variant filters. Unresolvable items are collected in `errors`.
Evaluation evaluate(const Manifest& manifest, EmbeddingStore& store, const RunConfig& config);

// One summary per (model, variant, category), then a pooled row per
// (model, variant).
std::vector<ModelSummary> summarize_models(const Evaluation& evaluation);

std::vector<PerturbationOutcome> perturbation_table(const Evaluation& evaluation,
                                                    std::uint64_t seed,
                                                    std::size_t resamples);

struct ModelCorrelation {
  std::string model_name;
  CorrelationRow row;
};

struct ModelQuadrants {
  std::string model_name;
  Category category = Category::kStatic;
  std::string x_feature;
  std::size_t n_points = 0;
  QuadrantSummary summary;
};

struct CorrelationReport {
  std::vector<ModelCorrelation> rows;
  std::vector<ModelQuadrants> quadrants;
  std::vector<std::string> warnings;
};

// Uses per-reference CRA under the original prompt.
CorrelationReport correlation_report(const Evaluation& evaluation,
                                     std::vector<FeatureVector> features,
                                     std::size_t permutations, std::uint64_t seed);

// Joins original-prompt metrics with the per-reference mode of the ingested
// replication levels of that model's generations.
std::vector<LevelRecord> level_records(const Evaluation& evaluation, const Manifest& manifest);

// CSV/JSON renderers, exposed for golden tests.
std::string recognition_csv(const Evaluation& evaluation);
std::string realization_csv(const Evaluation& evaluation);
std::string model_summary_csv(std::span<const ModelSummary> summaries);
std::string perturbation_csv(std::span<const PerturbationOutcome> outcomes);
std::string correlations_csv(std::span<const ModelCorrelation> rows);
std::string quadrants_json(std::span<const ModelQuadrants> quadrants);
std::string level_variance_csv(std::span<const LevelStats> stats);
std::string cra_vr_scatter_csv(std::span<const ScatterRow> rows);
std::string cra_vr_summary_csv(std::span<const ScatterSummary> summaries);
std::string cra_crc_bins_csv(std::span<const CrcBin> bins);

enum Artifact : unsigned {
  kArtifactRecognition = 1u << 0,     // recognition.csv
  kArtifactRealization = 1u << 1,     // realization.csv, model_summary.csv
  kArtifactPerturbation = 1u << 2,    // perturbation.csv
  kArtifactCorrelation = 1u << 3,     // correlations.csv, quadrants.json
  kArtifactLevelVariance = 1u << 4,   // level_variance.csv, cra_vr_*.csv, cra_crc_bins.csv
  kArtifactAll = 0x1Fu,
};

// Loads and validates the manifest, evaluates it, writes the requested
// artifacts plus run_meta.json into config.output_dir and returns an ExitCode.
// Diagnostics go to `log`.
int run_pipeline(const RunConfig& config, std::ostream& log, unsigned artifacts = kArtifactAll);

std::string_view library_version();

}  // namespace iconometer
