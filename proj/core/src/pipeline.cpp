#include "iconometer/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "iconometer/csv.hpp"
#include "iconometer/digest.hpp"
#include "iconometer/error.hpp"
#include "iconometer/manifest.hpp"
#include "iconometer/random.hpp"

namespace iconometer {
namespace fs = std::filesystem;

namespace {

std::string item_name(const GenerationSet& set) {
  return set.reference_id + "/" + set.model_name + "/" + std::string(to_string(set.variant));
}

std::string format_bool(bool value) { return value ? "true" : "false"; }

std::string category_label(const std::optional<Category>& category) {
  return category ? std::string(to_string(*category)) : "all";
}

template <typename T>
bool selected(const std::vector<T>& filter, const T& value) {
  return filter.empty() || std::find(filter.begin(), filter.end(), value) != filter.end();
}

// Global and patch banks of one reference after coherence filtering.
struct ReferenceBank {
  EmbeddingMatrix global;
  std::vector<std::string> image_ids;
  std::optional<EmbeddingMatrix> patches;  // nullopt when a reference image has no patch file
};

ReferenceBank build_bank(const Reference& reference, const Manifest& manifest, EmbeddingStore& store,
                         const Thresholds& thresholds) {
  std::vector<float> data;
  std::size_t dim = 0;
  for (const auto& id : reference.reference_image_ids) {
    const auto row = store.global_row(manifest.image_registry.at(id));
    if (dim != 0 && row.size() != dim) throw EmbeddingFormatError("reference images differ in embedding dim");
    dim = row.size();
    data.insert(data.end(), row.begin(), row.end());
  }
  EmbeddingMatrix candidates(reference.reference_image_ids.size(), dim, std::move(data));

  ReferenceBank bank;
  std::vector<std::size_t> kept(candidates.rows());
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = i;
  if (reference.category == Category::kDynamic) {
    CoherenceResult coherent = coherence_filter(candidates, thresholds);
    bank.global = std::move(coherent.bank);
    kept = std::move(coherent.kept);
  } else {
    bank.global = std::move(candidates);
  }

  std::vector<EmbeddingMatrix> patch_parts;
  for (std::size_t i : kept) {
    const std::string& id = reference.reference_image_ids[i];
    bank.image_ids.push_back(id);
    const ImageEntry& entry = manifest.image_registry.at(id);
    if (entry.patch_path) patch_parts.push_back(store.patches(entry));
  }
  if (patch_parts.size() == kept.size()) bank.patches = EmbeddingMatrix::concat(patch_parts);
  return bank;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

CoherenceResult coherence_filter(const EmbeddingMatrix& candidates, const Thresholds& thresholds) {
  const std::size_t n = candidates.rows();
  if (n == 0) throw ContractViolation("coherence filter needs at least one candidate");
  std::vector<std::size_t> kept(n);
  for (std::size_t i = 0; i < n; ++i) kept[i] = i;
  if (n == 1) return {candidates, kept};

  std::vector<double> sim(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sim[i * n + j] = sim[j * n + i] = cosine(candidates.row(i), candidates.row(j));
    }
  }
  while (!kept.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : kept) {
      double best = -1.0;
      for (std::size_t j : kept) {
        if (j != i) best = std::max(best, sim[i * n + j]);
      }
      if (best > thresholds.tau_coherence) next.push_back(i);
    }
    if (next.size() == kept.size()) break;
    kept = std::move(next);
  }
  if (kept.empty()) throw DegenerateInput("no coherent reference bank");
  return {candidates.select_rows(kept), kept};
}

EmbeddingStore::EmbeddingStore(fs::path base_dir, int grid_side)
    : base_dir_(std::move(base_dir)), grid_side_(grid_side) {}

const EmbeddingMatrix& EmbeddingStore::load(const std::string& relative_path) {
  const auto it = cache_.find(relative_path);
  if (it != cache_.end()) return it->second;
  const fs::path path = base_dir_ / relative_path;
  EmbeddingMatrix matrix = read_embeddings(path);
  digests_[relative_path] = sha256_file(path);
  return cache_.emplace(relative_path, std::move(matrix)).first->second;
}

std::span<const float> EmbeddingStore::global_row(const ImageEntry& entry) {
  const EmbeddingMatrix& m = load(entry.global_path);
  if (m.kind() != EmbeddingKind::kGlobal) throw EmbeddingFormatError(entry.global_path + " is not a global file");
  if (entry.global_row >= m.rows()) {
    throw EmbeddingFormatError(entry.global_path + " has no row " + std::to_string(entry.global_row));
  }
  return m.row(entry.global_row);
}

const EmbeddingMatrix& EmbeddingStore::patches(const ImageEntry& entry) {
  if (!entry.patch_path) throw EmbeddingFormatError("no patch embeddings registered");
  const EmbeddingMatrix& m = load(*entry.patch_path);
  if (m.kind() != EmbeddingKind::kPatch) throw EmbeddingFormatError(*entry.patch_path + " is not a patch file");
  const auto k = static_cast<std::size_t>(grid_side_) * static_cast<std::size_t>(grid_side_);
  if (m.rows() != k) {
    throw GridMismatch("grid mismatch: " + *entry.patch_path + " has " + std::to_string(m.rows()) +
                       " patches, expected " + std::to_string(k));
  }
  return m;
}

double Evaluation::failure_rate() const {
  return items_total == 0 ? 0.0 : static_cast<double>(errors.size()) / static_cast<double>(items_total);
}

Evaluation evaluate(const Manifest& manifest, EmbeddingStore& store, const RunConfig& config) {
  config.thresholds.validate();
  Evaluation ev;
  ev.thresholds = config.thresholds;

  std::map<std::string, ReferenceBank> banks;
  std::map<std::string, std::string> bank_errors;
  for (const auto& reference : manifest.references) {
    try {
      ReferenceBank bank = build_bank(reference, manifest, store, config.thresholds);
      ev.reference_banks[reference.id] = bank.image_ids;
      banks.emplace(reference.id, std::move(bank));
    } catch (const std::runtime_error& e) {
      bank_errors[reference.id] = std::string("reference bank: ") + e.what();
    }
  }

  for (const auto& set : manifest.generation_sets) {
    if (!selected(config.models, set.model_name) || !selected(config.variants, set.variant)) continue;
    ++ev.items_total;
    const Reference* reference = manifest.find_reference(set.reference_id);
    if (reference == nullptr) {
      ev.errors.push_back({item_name(set), "unknown reference"});
      continue;
    }
    if (const auto failed = bank_errors.find(set.reference_id); failed != bank_errors.end()) {
      ev.errors.push_back({item_name(set), failed->second});
      continue;
    }
    const ReferenceBank& bank = banks.at(set.reference_id);
    try {
      std::vector<float> data;
      std::size_t dim = bank.global.dim();
      for (const auto& id : set.image_ids) {
        const auto row = store.global_row(manifest.image_registry.at(id));
        if (row.size() != dim) throw EmbeddingFormatError(id + ": embedding dim differs from reference bank");
        data.insert(data.end(), row.begin(), row.end());
      }
      const EmbeddingMatrix generations(set.image_ids.size(), dim, std::move(data));
      ReferenceRecognition recognition =
          recognize_reference(*reference, set, generations, bank.global, bank.image_ids, config.thresholds);

      std::vector<RealizationRecord> records;
      for (const auto& aligned : recognition.records) {
        if (!aligned.aligned) continue;
        if (!bank.patches) throw EmbeddingFormatError("reference bank has no patch embeddings");
        RealizationRecord rec = patch_reuse(store.patches(manifest.image_registry.at(aligned.image_id)),
                                            *bank.patches, config.thresholds);
        rec.image_id = aligned.image_id;
        rec.reference_id = aligned.reference_id;
        records.push_back(std::move(rec));
      }
      ReferenceRealization realization = realize_reference(recognition, std::move(records));
      ev.recognitions.push_back(std::move(recognition));
      ev.realizations.push_back(std::move(realization));
    } catch (const std::out_of_range&) {
      ev.errors.push_back({item_name(set), "generation image missing from the image registry"});
    } catch (const std::runtime_error& e) {
      ev.errors.push_back({item_name(set), e.what()});
    }
  }
  ev.input_digests = store.digests();
  return ev;
}

std::vector<ModelSummary> summarize_models(const Evaluation& ev) {
  // Category slot 2 holds the pooled row so it sorts after static and dynamic.
  std::map<std::tuple<std::string, Variant, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ev.recognitions.size(); ++i) {
    const auto& r = ev.recognitions[i];
    groups[{r.model_name, r.variant, static_cast<int>(r.category)}].push_back(i);
    groups[{r.model_name, r.variant, 2}].push_back(i);
  }
  std::vector<ModelSummary> out;
  for (const auto& [key, indices] : groups) {
    std::vector<ReferenceRecognition> rec;
    std::vector<ReferenceRealization> real;
    for (std::size_t i : indices) {
      rec.push_back(ev.recognitions[i]);
      real.push_back(ev.realizations[i]);
    }
    ModelSummary s = aggregate_model(real, rec);
    if (std::get<2>(key) == 2) s.category.reset();
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PerturbationOutcome> perturbation_table(const Evaluation& ev, std::uint64_t seed,
                                                    std::size_t resamples) {
  std::set<std::string> models;
  for (const auto& r : ev.recognitions) models.insert(r.model_name);

  std::vector<PerturbationOutcome> out;
  std::uint64_t stream = 0;
  for (const auto& model : models) {
    for (int slot = 0; slot < 3; ++slot) {  // static, dynamic, pooled
      for (Variant variant : {Variant::kSynonym, Variant::kDescription}) {
        std::vector<ReferenceRecognition> before, after;
        std::vector<ReferenceRealization> real_before, real_after;
        for (std::size_t i = 0; i < ev.recognitions.size(); ++i) {
          const auto& r = ev.recognitions[i];
          if (r.model_name != model) continue;
          if (slot < 2 && static_cast<int>(r.category) != slot) continue;
          if (r.variant == Variant::kOriginal) {
            before.push_back(r);
            real_before.push_back(ev.realizations[i]);
          } else if (r.variant == variant) {
            after.push_back(r);
            real_after.push_back(ev.realizations[i]);
          }
        }
        const std::uint64_t cell_seed = derive_seed(seed, stream++);
        if (before.empty() || after.empty()) continue;
        PerturbationOutcome o = delta_metrics(before, after, real_before, real_after, cell_seed, resamples);
        o.model_name = model;
        o.variant = variant;
        if (slot == 2) {
          o.category.reset();
        } else {
          o.category = static_cast<Category>(slot);
        }
        out.push_back(std::move(o));
      }
    }
  }
  return out;
}

CorrelationReport correlation_report(const Evaluation& ev, std::vector<FeatureVector> features,
                                     std::size_t permutations, std::uint64_t seed) {
  CorrelationReport report;
  report.warnings = sanitize_features(features);

  std::map<std::string, std::map<std::string, double>> cra_by_model;
  std::map<std::string, Category> category_by_reference;
  for (const auto& r : ev.recognitions) {
    if (r.variant != Variant::kOriginal) continue;
    cra_by_model[r.model_name][r.reference_id] = r.cra;
    category_by_reference[r.reference_id] = r.category;
  }

  std::uint64_t model_stream = 0;
  for (const auto& [model, cra] : cra_by_model) {
    const auto rows = correlation_table(features, cra, category_by_reference, permutations,
                                        derive_seed(seed, model_stream++));
    for (const auto& row : rows) report.rows.push_back({model, row});

    for (Category category : {Category::kStatic, Category::kDynamic}) {
      for (const auto& feature : kFeatureNames) {
        if (feature == "n_dedup_pairs") continue;
        std::vector<double> xs, ys, cs;
        for (const auto& fv : features) {
          const auto c = category_by_reference.find(fv.reference_id);
          const auto v = cra.find(fv.reference_id);
          if (c == category_by_reference.end() || c->second != category || v == cra.end()) continue;
          const auto x = fv.get(feature);
          const auto y = fv.get("n_dedup_pairs");
          if (!x || !y) continue;
          xs.push_back(*x);
          ys.push_back(*y);
          cs.push_back(v->second);
        }
        if (xs.size() < 4) continue;
        report.quadrants.push_back(
            {model, category, std::string(feature), xs.size(), quadrant_summary(xs, ys, cs)});
      }
    }
  }
  return report;
}

std::vector<LevelRecord> level_records(const Evaluation& ev, const Manifest& manifest) {
  std::vector<LevelRecord> out;
  for (std::size_t i = 0; i < ev.recognitions.size(); ++i) {
    const auto& r = ev.recognitions[i];
    if (r.variant != Variant::kOriginal) continue;
    std::vector<int> levels;
    for (const auto& record : r.records) {
      const auto it = manifest.external_scores.find({record.image_id, r.reference_id});
      if (it != manifest.external_scores.end() && it->second.pdfe_level) levels.push_back(*it->second.pdfe_level);
    }
    const auto level = mode_level(levels);
    if (!level) continue;
    const auto& real = ev.realizations[i];
    out.push_back({r.reference_id, r.model_name, r.category, *level, r.cra, real.vr_align_mean, real.crt});
  }
  return out;
}

std::string recognition_csv(const Evaluation& ev) {
  CsvWriter w({"reference_id", "model", "variant", "category", "cra", "crc", "n_aligned", "n"});
  for (const auto& r : ev.recognitions) {
    w.row({r.reference_id, r.model_name, std::string(to_string(r.variant)), std::string(to_string(r.category)),
           format_fixed(r.cra), format_fixed(r.crc), std::to_string(r.n_aligned), std::to_string(r.n)});
  }
  return w.str();
}

std::string realization_csv(const Evaluation& ev) {
  const std::size_t k = ev.thresholds.patches_per_image();
  std::vector<std::string> header{"image_id", "reference_id", "model", "variant", "vr", "vi", "reused_patch_count"};
  for (std::size_t p = 0; p < k; ++p) {
    char name[32];
    std::snprintf(name, sizeof name, "patch_max_%02zu", p);
    header.emplace_back(name);
  }
  CsvWriter w(header);
  for (const auto& real : ev.realizations) {
    for (const auto& rec : real.records) {
      std::vector<std::string> fields{rec.image_id,      real.reference_id, real.model_name,
                                      std::string(to_string(real.variant)), format_fixed(rec.vr),
                                      format_fixed(rec.vi), std::to_string(rec.reused_count)};
      for (std::size_t p = 0; p < k; ++p) {
        fields.push_back(p < rec.per_patch_max.size() ? format_fixed(rec.per_patch_max[p]) : "");
      }
      w.row(fields);
    }
  }
  return w.str();
}

std::string model_summary_csv(std::span<const ModelSummary> summaries) {
  CsvWriter w({"model", "variant", "category", "n_references", "n_aligned_references", "cra", "vr_align_mean",
               "vr_align_sd", "crt_align_mean", "crt_align_sd", "crt_all_mean", "crt_all_sd", "vi_align_mean",
               "crt_model"});
  for (const auto& s : summaries) {
    w.row({s.model_name, std::string(to_string(s.variant)), category_label(s.category),
           std::to_string(s.n_references), std::to_string(s.n_aligned_references), format_fixed(s.cra_model),
           format_fixed(s.vr_align_mean), format_fixed(s.vr_align_sd), format_fixed(s.crt_align_mean),
           format_fixed(s.crt_align_sd), format_fixed(s.crt_all_mean), format_fixed(s.crt_all_sd),
           format_fixed(s.vi_align_mean), format_fixed(s.crt_model)});
  }
  return w.str();
}

std::string perturbation_csv(std::span<const PerturbationOutcome> outcomes) {
  CsvWriter w({"model", "category", "variant", "matched", "recognized_before", "retained", "retention_rate",
               "delta_cra_mean", "delta_cra_ci_lower", "delta_cra_ci_upper", "n_delta_crt", "delta_crt_mean",
               "delta_crt_ci_lower", "delta_crt_ci_upper", "unmatched_ids"});
  auto lower = [](const std::optional<ConfidenceInterval>& ci) {
    return ci ? format_fixed(ci->lower) : std::string();
  };
  auto upper = [](const std::optional<ConfidenceInterval>& ci) {
    return ci ? format_fixed(ci->upper) : std::string();
  };
  for (const auto& o : outcomes) {
    std::string unmatched;
    for (const auto& id : o.unmatched_ids) unmatched += (unmatched.empty() ? "" : ";") + id;
    w.row({o.model_name, category_label(o.category), std::string(to_string(o.variant)), std::to_string(o.matched),
           std::to_string(o.recognized_before), std::to_string(o.retained), format_fixed(o.retention_rate),
           format_fixed(o.delta_cra_mean), lower(o.delta_cra_ci95), upper(o.delta_cra_ci95),
           std::to_string(o.n_delta_crt), format_fixed(o.delta_crt_retained_mean), lower(o.delta_crt_retained_ci95),
           upper(o.delta_crt_retained_ci95), unmatched});
  }
  return w.str();
}

std::string correlations_csv(std::span<const ModelCorrelation> rows) {
  CsvWriter w({"model", "feature", "category", "rho", "p_value", "n", "significant", "flag"});
  for (const auto& [model, r] : rows) {
    w.row({model, r.feature, std::string(to_string(r.category)), format_fixed(r.rho), format_fixed(r.p_value),
           std::to_string(r.n_used), format_bool(r.significant), r.flag});
  }
  return w.str();
}

std::string quadrants_json(std::span<const ModelQuadrants> quadrants) {
  using nlohmann::ordered_json;
  static constexpr const char* kNames[4] = {"low_x_low_y", "high_x_low_y", "low_x_high_y", "high_x_high_y"};
  ordered_json out = ordered_json::array();
  for (const auto& q : quadrants) {
    ordered_json j;
    j["model"] = q.model_name;
    j["category"] = std::string(to_string(q.category));
    j["x_feature"] = q.x_feature;
    j["y_feature"] = "n_dedup_pairs";
    j["n"] = q.n_points;
    j["median_x"] = q.summary.median_x;
    j["median_y"] = q.summary.median_y;
    j["degenerate_x"] = q.summary.degenerate_x;
    j["degenerate_y"] = q.summary.degenerate_y;
    ordered_json cells = ordered_json::object();
    for (std::size_t c = 0; c < 4; ++c) {
      const auto& quadrant = q.summary.quadrants[c];
      cells[kNames[c]] = {{"count", quadrant.count},
                          {"mean_cra", quadrant.mean_cra ? ordered_json(*quadrant.mean_cra) : ordered_json()}};
    }
    j["quadrants"] = std::move(cells);
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

std::string level_variance_csv(std::span<const LevelStats> stats) {
  CsvWriter w({"category", "pdfe_level", "metric", "mean", "sd", "min", "max", "n"});
  for (const auto& s : stats) {
    w.row({std::string(to_string(s.category)), std::to_string(s.level), std::string(to_string(s.metric)),
           format_fixed(s.mean), format_fixed(s.sd), format_fixed(s.min), format_fixed(s.max), std::to_string(s.n)});
  }
  return w.str();
}

std::string cra_vr_scatter_csv(std::span<const ScatterRow> rows) {
  CsvWriter w({"reference_id", "model", "variant", "category", "cra", "vr_mean", "crt", "high_crt"});
  for (const auto& r : rows) {
    w.row({r.reference_id, r.model_name, std::string(to_string(r.variant)), std::string(to_string(r.category)),
           format_fixed(r.cra), format_fixed(r.vr_mean), format_fixed(r.crt), format_bool(r.high_crt)});
  }
  return w.str();
}

std::string cra_vr_summary_csv(std::span<const ScatterSummary> summaries) {
  CsvWriter w({"model", "variant", "category", "n_aligned", "n_high_crt", "high_crt_share"});
  for (const auto& s : summaries) {
    w.row({s.model_name, std::string(to_string(s.variant)), std::string(to_string(s.category)),
           std::to_string(s.n_aligned), std::to_string(s.n_high_crt), format_fixed(s.high_crt_share)});
  }
  return w.str();
}

std::string cra_crc_bins_csv(std::span<const CrcBin> bins) {
  CsvWriter w({"model", "variant", "cra_bin", "mean_crc", "count"});
  for (const auto& b : bins) {
    w.row({b.model_name, std::string(to_string(b.variant)), format_fixed(b.bin), format_fixed(b.mean_crc),
           std::to_string(b.count)});
  }
  return w.str();
}

int run_pipeline(const RunConfig& config, std::ostream& log, unsigned artifacts) {
  if (const auto issues = config.thresholds.problems(); !issues.empty()) {
    for (const auto& issue : issues) log << "error: " << issue << "\n";
    return kExitValidation;
  }
  std::error_code ec;
  if (!fs::is_regular_file(config.manifest_path, ec)) {
    log << "error: cannot read manifest " << config.manifest_path.string() << "\n";
    return kExitIo;
  }

  Manifest manifest;
  try {
    manifest = load_manifest(config.manifest_path);
  } catch (const FormatError& e) {
    log << "error: " << config.manifest_path.string() << ":" << e.line() << ": " << e.what() << "\n";
    return kExitValidation;
  }
  const ValidationReport report = validate_manifest(manifest, config.thresholds);
  if (!report.ok()) {
    for (const auto& v : report.violations) log << "invalid: " << v.code << ": " << v.subject << ": " << v.detail << "\n";
    return kExitValidation;
  }

  std::vector<FeatureVector> features = features_from_manifest(manifest, config.thresholds);
  if ((artifacts & kArtifactCorrelation) && config.features_path) {
    std::ifstream in(*config.features_path, std::ios::binary);
    if (!in) {
      log << "error: cannot read features " << config.features_path->string() << "\n";
      return kExitIo;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
      // File values take precedence over manifest-derived ones.
      for (auto& extra : read_features_csv(text)) {
        auto it = std::find_if(features.begin(), features.end(),
                               [&](const FeatureVector& f) { return f.reference_id == extra.reference_id; });
        if (it == features.end()) {
          features.push_back(std::move(extra));
          continue;
        }
        for (auto& [name, value] : extra.values) it->values[name] = value;
      }
    } catch (const FormatError& e) {
      log << "error: " << config.features_path->string() << ":" << e.line() << ": " << e.what() << "\n";
      return kExitValidation;
    }
  }

  EmbeddingStore store(config.manifest_path.parent_path(), config.thresholds.grid_side);
  Evaluation ev = evaluate(manifest, store, config);
  for (const auto& e : ev.errors) log << "skipped: " << e.item << ": " << e.message << "\n";
  const bool failed = ev.failure_rate() > config.fail_threshold;
  if (failed) {
    log << "error: " << ev.errors.size() << " of " << ev.items_total << " items unresolvable, above fail threshold "
        << config.fail_threshold << "\n";
  }

  ev.input_digests["manifest"] = sha256_file(config.manifest_path);
  if (config.features_path && (artifacts & kArtifactCorrelation)) {
    ev.input_digests["features"] = sha256_file(*config.features_path);
  }

  try {
    fs::create_directories(config.output_dir);
    const fs::path& out = config.output_dir;
    std::vector<std::string> warnings;

    if (!failed) {
      if (artifacts & kArtifactRecognition) write_file(out / "recognition.csv", recognition_csv(ev));
      if (artifacts & kArtifactRealization) {
        write_file(out / "realization.csv", realization_csv(ev));
        write_file(out / "model_summary.csv", model_summary_csv(summarize_models(ev)));
      }
      if (artifacts & kArtifactPerturbation) {
        write_file(out / "perturbation.csv",
                   perturbation_csv(perturbation_table(ev, derive_seed(config.seed, 1), config.bootstrap_resamples)));
      }
      if (artifacts & kArtifactCorrelation) {
        const CorrelationReport corr =
            correlation_report(ev, features, config.permutations, derive_seed(config.seed, 2));
        write_file(out / "correlations.csv", correlations_csv(corr.rows));
        write_file(out / "quadrants.json", quadrants_json(corr.quadrants));
        warnings.insert(warnings.end(), corr.warnings.begin(), corr.warnings.end());
      }
      if (artifacts & kArtifactLevelVariance) {
        const auto records = level_records(ev, manifest);
        const LevelStatsResult levels = stats_by_level(records);
        write_file(out / "level_variance.csv", level_variance_csv(levels.stats));
        std::vector<ReferenceRealization> original;
        std::vector<ReferenceRecognition> original_rec;
        for (std::size_t i = 0; i < ev.recognitions.size(); ++i) {
          if (ev.recognitions[i].variant != Variant::kOriginal) continue;
          original.push_back(ev.realizations[i]);
          original_rec.push_back(ev.recognitions[i]);
        }
        const ScatterExport scatter = cra_vr_export(original);
        write_file(out / "cra_vr_scatter.csv", cra_vr_scatter_csv(scatter.rows));
        write_file(out / "cra_vr_summary.csv", cra_vr_summary_csv(scatter.summaries));
        const CrcBinResult bins = cra_crc_bins(original_rec);
        write_file(out / "cra_crc_bins.csv", cra_crc_bins_csv(bins.bins));
        warnings.insert(warnings.end(), levels.warnings.begin(), levels.warnings.end());
        warnings.insert(warnings.end(), bins.warnings.begin(), bins.warnings.end());
      }
    }
    for (const auto& w : warnings) log << "warning: " << w << "\n";

    nlohmann::ordered_json meta;
    meta["version"] = std::string(library_version());
    meta["seed"] = config.seed;
    meta["thresholds"] = {{"tau_align", config.thresholds.tau_align},
                          {"tau_reuse", config.thresholds.tau_reuse},
                          {"tau_coherence", config.thresholds.tau_coherence},
                          {"tau_dedup", config.thresholds.tau_dedup},
                          {"grid_side", config.thresholds.grid_side}};
    meta["fail_threshold"] = config.fail_threshold;
    meta["permutations"] = config.permutations;
    meta["bootstrap_resamples"] = config.bootstrap_resamples;
    nlohmann::ordered_json models = nlohmann::ordered_json::array();
    for (const auto& m : config.models) models.push_back(m);
    nlohmann::ordered_json variants = nlohmann::ordered_json::array();
    for (const auto v : config.variants) variants.push_back(std::string(to_string(v)));
    meta["models"] = std::move(models);
    meta["variants"] = std::move(variants);
    nlohmann::ordered_json digests = nlohmann::ordered_json::object();
    for (const auto& [name, digest] : ev.input_digests) digests[name] = "sha256:" + digest;
    meta["input_digests"] = std::move(digests);
    meta["items_total"] = ev.items_total;
    nlohmann::ordered_json errors = nlohmann::ordered_json::array();
    for (const auto& e : ev.errors) errors.push_back({{"item", e.item}, {"message", e.message}});
    meta["errors"] = std::move(errors);
    meta["warnings"] = warnings;
    meta["status"] = failed ? "failed" : "ok";
    write_file(out / "run_meta.json", meta.dump(2) + "\n");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return failed ? kExitIo : kExitSuccess;
}

std::string_view library_version() { return ICONOMETER_VERSION; }

}  // namespace iconometer
