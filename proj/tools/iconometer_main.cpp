// iconometer: command-line front end for the recognition/realization engine.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "demo/demo_dataset.hpp"
#include "iconometer/calibration.hpp"
#include "iconometer/csv.hpp"
#include "iconometer/embedding.hpp"
#include "iconometer/error.hpp"
#include "iconometer/manifest.hpp"
#include "iconometer/pipeline.hpp"
#include "iconometer/synthetic.hpp"

namespace fs = std::filesystem;
using namespace iconometer;

namespace {

struct PipelineFlags {
  RunConfig config;
  std::vector<std::string> variants;
  std::string features;
};

void add_threshold_flags(CLI::App* cmd, Thresholds& t) {
  cmd->add_option("--tau-align", t.tau_align, "alignment threshold on global cosine")->capture_default_str();
  cmd->add_option("--tau-reuse", t.tau_reuse, "patch reuse threshold")->capture_default_str();
  cmd->add_option("--tau-coherence", t.tau_coherence, "reference bank coherence threshold")->capture_default_str();
  cmd->add_option("--tau-dedup", t.tau_dedup, "training-match dedup threshold")->capture_default_str();
  cmd->add_option("--grid-side", t.grid_side, "patch grid side")->capture_default_str();
}

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--manifest", f.config.manifest_path, "manifest JSON")->required();
  cmd->add_option("--out", f.config.output_dir, "output directory")->required();
  add_threshold_flags(cmd, f.config.thresholds);
  cmd->add_option("--seed", f.config.seed, "master seed")->capture_default_str();
  cmd->add_option("--models", f.config.models, "comma-separated model filter")->delimiter(',');
  cmd->add_option("--variants", f.variants, "comma-separated variant filter")->delimiter(',');
  cmd->add_option("--fail-threshold", f.config.fail_threshold, "max share of unresolvable items")
      ->capture_default_str();
}

std::optional<std::string> read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int run_with(PipelineFlags& f, unsigned artifacts) {
  try {
    for (const auto& v : f.variants) f.config.variants.push_back(parse_variant(v));
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (!f.features.empty()) f.config.features_path = f.features;
  return run_pipeline(f.config, std::cerr, artifacts);
}

int inspect_emb(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    std::cerr << "error: cannot open " << path.string() << "\n";
    return kExitIo;
  }
  try {
    const EmbeddingHeader h = read_embedding_header(path);
    std::cout << "path: " << path.string() << "\n"
              << "magic: EMB1\n"
              << "version: " << h.version << "\n"
              << "rows: " << h.rows << "\n"
              << "dim: " << h.dim << "\n"
              << "kind: " << (h.kind == EmbeddingKind::kPatch ? "patch" : "global") << "\n";
    const EmbeddingMatrix m = read_embeddings(path);
    std::cout << "tag: " << m.source_tag() << "\n"
              << "status: ok\n";
  } catch (const EmbeddingFormatError& e) {
    std::cout << "status: invalid (" << e.what() << ")\n";
    return kExitValidation;
  }
  return kExitSuccess;
}

int validate(const fs::path& manifest_path, const Thresholds& thresholds) {
  if (!fs::is_regular_file(manifest_path)) {
    std::cerr << "error: cannot read manifest " << manifest_path.string() << "\n";
    return kExitIo;
  }
  try {
    const Manifest m = load_manifest(manifest_path);
    const ValidationReport report = validate_manifest(m, thresholds);
    for (const auto& v : report.violations) {
      std::cout << v.code << "\t" << v.subject << "\t" << v.detail << "\n";
    }
    if (!report.ok()) return kExitValidation;
    std::cout << "ok: " << m.references.size() << " references, " << m.generation_sets.size()
              << " generation sets, " << m.image_registry.size() << " images\n";
  } catch (const FormatError& e) {
    std::cerr << manifest_path.string() << ":" << e.line() << ": byte " << e.byte_offset() << ": " << e.what()
              << "\n";
    return kExitValidation;
  }
  return kExitSuccess;
}

int calibrate_cmd(const fs::path& pairs_path, const fs::path& out_dir, std::vector<double> grid) {
  const auto text = read_text(pairs_path);
  if (!text) {
    std::cerr << "error: cannot read " << pairs_path.string() << "\n";
    return kExitIo;
  }
  try {
    if (grid.empty()) grid = default_calibration_grid();
    const CalibrationReport report = calibrate(read_pair_samples(*text), grid);
    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "calibration.json", std::ios::binary);
    out << calibration_to_json(report);
    if (!out) {
      std::cerr << "error: cannot write " << (out_dir / "calibration.json").string() << "\n";
      return kExitIo;
    }
    std::cout << "chosen_tau " << format_fixed(report.chosen_tau) << " f1 " << format_fixed(report.f1)
              << " retention " << format_fixed(report.true_match_retention) << " fpr "
              << format_fixed(report.false_positive_rate) << "\n";
  } catch (const FormatError& e) {
    std::cerr << pairs_path.string() << ":" << e.line() << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const DegenerateInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitSuccess;
}

struct SyntheticFlags {
  fs::path refs;
  fs::path out;
  std::uint64_t seed = kDefaultSeed;
  std::optional<fs::path> embeddings;
  std::optional<fs::path> scores;
  std::size_t n_refs = 0;  // 0: every PNG in --refs
  std::size_t pairs = 10;
  Thresholds thresholds;
};

// scores CSV: composite, sscd, pdfe (blank cells allowed).
std::map<std::string, TrialScores> read_trial_scores(const std::string& text) {
  const CsvTable table = parse_csv(text);
  const auto name = table.column("composite");
  if (!name) throw FormatError("scores csv needs a composite column", 1, 0);
  const auto sscd = table.column("sscd");
  const auto pdfe = table.column("pdfe");
  auto number = [](const std::string& cell, std::size_t line) -> std::optional<double> {
    if (cell.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size()) throw FormatError("bad number '" + cell + "'", line, 0);
    return v;
  };
  std::map<std::string, TrialScores> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    TrialScores s;
    if (sscd) s.sscd = number(table.rows[r][*sscd], r + 2);
    if (pdfe) s.pdfe = number(table.rows[r][*pdfe], r + 2);
    out[table.rows[r][*name]] = s;
  }
  return out;
}

int validate_synthetic(const SyntheticFlags& f) {
  std::vector<fs::path> pngs;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(f.refs, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") pngs.push_back(entry.path());
  }
  if (ec) {
    std::cerr << "error: cannot list " << f.refs.string() << "\n";
    return kExitIo;
  }
  std::sort(pngs.begin(), pngs.end());
  if (f.n_refs > 0 && f.n_refs < pngs.size()) pngs.resize(f.n_refs);
  if (pngs.size() < 2) {
    std::cerr << "error: need at least two reference PNGs in " << f.refs.string() << "\n";
    return kExitValidation;
  }
  if (const auto issues = f.thresholds.problems(); !issues.empty()) {
    std::cerr << "error: " << issues.front() << "\n";
    return kExitValidation;
  }

  try {
    std::vector<RasterImage> images;
    std::vector<std::string> stems;
    for (const auto& p : pngs) {
      images.push_back(read_png(p));
      stems.push_back(p.stem().string());
    }
    const int g = f.thresholds.grid_side;
    const auto trials = plan_trials(images.size(), f.pairs, g, f.seed);

    CsvWriter manifest({"composite", "condition", "reference", "target", "copied_cells", "true_overlap"});
    std::map<const SyntheticTrial*, std::string> names;
    for (const auto& t : trials) {
      const std::string kind(to_string(t.kind));
      const std::string name = composite_name(t, stems[t.reference]);
      names[&t] = name;
      const fs::path dir = f.out / "composites" / kind;
      fs::create_directories(dir);
      write_png(dir / (name + ".png"), apply_plan(images[t.reference], images[t.target], t.plan));
      manifest.row({name, kind, stems[t.reference], stems[t.target], std::to_string(t.plan.copied_cells()),
                    format_fixed(true_overlap_fraction(t.kind))});
    }
    {
      std::ofstream out(f.out / "composites.csv", std::ios::binary);
      out << manifest.str();
    }

    PatchProvider patches;
    if (f.embeddings) {
      const fs::path root = *f.embeddings;
      patches = [&](const SyntheticTrial& t) -> std::optional<TrialEmbeddings> {
        const fs::path ref = root / "refs" / (stems[t.reference] + ".emb1");
        const fs::path comp = root / "composites" / std::string(to_string(t.kind)) / (names.at(&t) + ".emb1");
        if (!fs::is_regular_file(ref) || !fs::is_regular_file(comp)) return std::nullopt;
        return TrialEmbeddings{read_embeddings(ref, g), read_embeddings(comp, g)};
      };
    } else {
      patches = planted_patch_provider(g);
    }

    ScoreProvider scores;
    std::map<std::string, TrialScores> score_table;
    if (f.scores) {
      const auto text = read_text(*f.scores);
      if (!text) {
        std::cerr << "error: cannot read " << f.scores->string() << "\n";
        return kExitIo;
      }
      score_table = read_trial_scores(*text);
      scores = [&](const SyntheticTrial& t) {
        const auto it = score_table.find(names.at(&t));
        return it == score_table.end() ? TrialScores{} : it->second;
      };
    }

    const ValidationResult result = run_validation(trials, patches, f.thresholds, scores);
    const bool with_sscd = std::any_of(result.rows.begin(), result.rows.end(), [](const auto& r) { return r.sscd.has_value(); });
    const bool with_pdfe = std::any_of(result.rows.begin(), result.rows.end(), [](const auto& r) { return r.pdfe.has_value(); });
    std::vector<std::string> header{"condition", "true_overlap", "vr_mean", "vr_sd", "vr_min", "vr_max"};
    if (with_sscd) header.insert(header.end(), {"sscd_mean", "sscd_sd"});
    if (with_pdfe) header.insert(header.end(), {"pdfe_mean", "pdfe_sd"});
    header.insert(header.end(), {"n_references", "n_trials"});
    CsvWriter table(header);
    for (const auto& row : result.rows) {
      std::vector<std::string> fields{std::string(to_string(row.kind)), format_fixed(true_overlap_fraction(row.kind))};
      if (row.n_references > 0) {
        fields.insert(fields.end(), {format_fixed(row.vr.mean), format_fixed(row.vr.sd), format_fixed(row.vr.min),
                                     format_fixed(row.vr.max)});
      } else {
        fields.insert(fields.end(), 4, "");
      }
      auto opt = [](const std::optional<Summary>& s, bool sd) {
        return s ? format_fixed(sd ? s->sd : s->mean) : std::string();
      };
      if (with_sscd) fields.insert(fields.end(), {opt(row.sscd, false), opt(row.sscd, true)});
      if (with_pdfe) fields.insert(fields.end(), {opt(row.pdfe, false), opt(row.pdfe, true)});
      fields.insert(fields.end(), {std::to_string(row.n_references), std::to_string(row.n_trials)});
      table.row(fields);
    }
    {
      std::ofstream out(f.out / "validation_table.csv", std::ios::binary);
      out << table.str();
      if (!out) throw std::runtime_error("cannot write validation_table.csv");
    }
    for (const auto& gap : result.gaps) std::cerr << "gap: " << gap << "\n";
    std::cout << table.str();
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const GridMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iconometer: cultural reference recognition and realization metrics"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  fs::path emb_path;
  auto* inspect = app.add_subcommand("inspect-emb", "print the header of an EMB1 file and check its payload");
  inspect->add_option("path", emb_path, "EMB1 file")->required();

  fs::path validate_manifest_path;
  Thresholds validate_thresholds;
  auto* validate_cmd = app.add_subcommand("validate", "check a manifest against the ingest rules");
  validate_cmd->add_option("--manifest", validate_manifest_path, "manifest JSON")->required();
  add_threshold_flags(validate_cmd, validate_thresholds);

  fs::path pairs_path, calib_out;
  std::vector<double> grid;
  auto* calibrate = app.add_subcommand("calibrate", "sweep tau over labelled similarity pairs");
  calibrate->add_option("--pairs", pairs_path, "CSV with sim,label columns")->required();
  calibrate->add_option("--out", calib_out, "output directory for calibration.json")->required();
  calibrate->add_option("--grid", grid, "comma-separated tau grid")->delimiter(',');

  PipelineFlags eval_flags, perturb_flags, correlate_flags, report_flags;
  auto* evaluate = app.add_subcommand("evaluate", "recognition and realization tables");
  add_pipeline_flags(evaluate, eval_flags);

  auto* perturb = app.add_subcommand("perturb", "retention under synonym and description prompts");
  add_pipeline_flags(perturb, perturb_flags);
  perturb->add_option("--resamples", perturb_flags.config.bootstrap_resamples, "bootstrap resamples")
      ->capture_default_str();

  auto* correlate = app.add_subcommand("correlate", "Spearman correlations of features with CRA");
  add_pipeline_flags(correlate, correlate_flags);
  correlate->add_option("--features", correlate_flags.features, "features CSV");
  correlate->add_option("--permutations", correlate_flags.config.permutations, "permutations per test")
      ->capture_default_str();

  auto* report = app.add_subcommand("report", "run every analysis and write all artifacts");
  add_pipeline_flags(report, report_flags);
  report->add_option("--features", report_flags.features, "features CSV");
  report->add_option("--permutations", report_flags.config.permutations, "permutations per test")
      ->capture_default_str();
  report->add_option("--resamples", report_flags.config.bootstrap_resamples, "bootstrap resamples")
      ->capture_default_str();

  SyntheticFlags synth;
  std::string synth_embeddings, synth_scores;
  auto* synthetic = app.add_subcommand("validate-synthetic", "controlled-overlap composites and their VR");
  synthetic->add_option("--refs", synth.refs, "directory of reference PNGs")->required();
  synthetic->add_option("--seed", synth.seed, "composite seed")->capture_default_str();
  synthetic->add_option("--out", synth.out, "output directory")->required();
  synthetic->add_option("--embeddings", synth_embeddings,
                        "patch embeddings: refs/<stem>.emb1, composites/<condition>/<name>.emb1");
  synthetic->add_option("--scores", synth_scores, "CSV with composite,sscd,pdfe columns");
  synthetic->add_option("--n-refs", synth.n_refs, "use the first N references");
  synthetic->add_option("--pairs-per-reference", synth.pairs, "composites per reference and condition")
      ->capture_default_str();
  synthetic->add_option("--tau-reuse", synth.thresholds.tau_reuse, "patch reuse threshold")->capture_default_str();
  synthetic->add_option("--grid-side", synth.thresholds.grid_side, "patch grid side")->capture_default_str();

  fs::path demo_out;
  demo::DemoOptions demo_options;
  auto* make_demo = app.add_subcommand("make-demo", "write a small synthetic dataset");
  make_demo->add_option("--out", demo_out, "output directory")->required();
  make_demo->add_option("--seed", demo_options.seed, "dataset seed")->capture_default_str();
  make_demo->add_option("--references", demo_options.references, "number of references")->capture_default_str();
  make_demo->add_option("--models", demo_options.models, "comma-separated model names")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitValidation;
  }

  try {
    if (*inspect) return inspect_emb(emb_path);
    if (*validate_cmd) return validate(validate_manifest_path, validate_thresholds);
    if (*calibrate) return calibrate_cmd(pairs_path, calib_out, grid);
    if (*evaluate) return run_with(eval_flags, kArtifactRecognition | kArtifactRealization);
    if (*perturb) return run_with(perturb_flags, kArtifactPerturbation);
    if (*correlate) return run_with(correlate_flags, kArtifactCorrelation);
    if (*report) return run_with(report_flags, kArtifactAll);
    if (*synthetic) {
      if (!synth_embeddings.empty()) synth.embeddings = fs::path(synth_embeddings);
      if (!synth_scores.empty()) synth.scores = fs::path(synth_scores);
      return validate_synthetic(synth);
    }
    if (*make_demo) {
      const auto ds = demo::make_demo_dataset(demo_out, demo_options);
      std::cout << ds.manifest_path.string() << "\n";
      return kExitSuccess;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitSuccess;
}
