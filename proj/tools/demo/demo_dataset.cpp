#include "demo_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "iconometer/csv.hpp"
#include "iconometer/embedding.hpp"
#include "iconometer/error.hpp"
#include "iconometer/manifest.hpp"
#include "iconometer/random.hpp"
#include "iconometer/synthetic.hpp"

namespace iconometer::demo {
namespace fs = std::filesystem;

namespace {

using Vec = std::vector<double>;

constexpr double kUnrelatedGlobalLimit = 0.3;
constexpr double kUnrelatedPatchLimit = 0.45;

Vec random_unit(Rng& rng, std::size_t dim) {
  Vec v(dim);
  double norm = 0.0;
  while (norm < 1e-6) {
    norm = 0.0;
    for (double& x : v) {
      x = 2.0 * uniform_unit(rng) - 1.0;
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double dot(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Vec perturbed(const Vec& base, double scale, Rng& rng) {
  Vec v = random_unit(rng, base.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = base[i] + scale * v[i];
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

// Random unit vector whose cosine to every row of `avoid` stays at or below `limit`.
Vec unrelated(Rng& rng, std::size_t dim, const std::vector<Vec>& avoid, double limit) {
  for (;;) {
    Vec v = random_unit(rng, dim);
    if (std::all_of(avoid.begin(), avoid.end(), [&](const Vec& a) { return dot(a, v) <= limit; })) return v;
  }
}

EmbeddingMatrix to_matrix(const std::vector<Vec>& rows, EmbeddingKind kind, const std::string& tag) {
  const std::size_t dim = rows.front().size();
  std::vector<float> data;
  data.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    for (double x : r) data.push_back(static_cast<float>(x));
  }
  return EmbeddingMatrix::normalized(rows.size(), dim, std::move(data), kind, tag);
}

std::string two_digits(std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", n);
  return buf;
}

struct ReferenceState {
  std::vector<Vec> images;                    // global embeddings, all candidates
  std::vector<std::vector<Vec>> patches;      // per candidate image
  std::size_t coherent = 1;                   // leading candidates that stay on topic
  double difficulty = 0.0;
  double memorization = 0.0;
};

RasterImage reference_png(Rng& rng, int side, int grid_side) {
  RasterImage img(side, side);
  const int cell = side / grid_side;
  for (int cy = 0; cy < grid_side; ++cy) {
    for (int cx = 0; cx < grid_side; ++cx) {
      std::uint8_t base[3];
      for (auto& c : base) c = static_cast<std::uint8_t>(uniform_index(rng, 256));
      for (int y = 0; y < cell; ++y) {
        for (int x = 0; x < cell; ++x) {
          std::uint8_t* p = img.pixel(cx * cell + x, cy * cell + y);
          p[0] = base[0];
          p[1] = static_cast<std::uint8_t>((base[1] + 2 * x) & 0xFF);
          p[2] = static_cast<std::uint8_t>((base[2] + 2 * y) & 0xFF);
        }
      }
    }
  }
  return img;
}

}  // namespace

DemoDataset make_demo_dataset(const fs::path& dir, const DemoOptions& options) {
  if (options.references < 2) throw ContractViolation("demo dataset needs at least two references");
  if (options.models.empty() || options.generations == 0) throw ContractViolation("demo dataset needs generations");
  if (options.grid_side < 1 || options.png_side % options.grid_side != 0) {
    throw ContractViolation("png side must be divisible by the grid");
  }
  const std::size_t k = static_cast<std::size_t>(options.grid_side) * static_cast<std::size_t>(options.grid_side);
  const std::size_t dg = options.global_dim;
  const std::size_t dp = options.patch_dim;

  DemoDataset out;
  out.manifest_path = dir / "manifest.json";
  out.features_path = dir / "features.csv";
  out.refs_dir = dir / "refs";
  fs::create_directories(dir / "embeddings" / "refs");
  if (options.reference_pngs) fs::create_directories(out.refs_dir);

  Manifest& m = out.manifest;
  Rng rng(derive_seed(options.seed, 0));
  std::vector<ReferenceState> states;

  for (std::size_t i = 0; i < options.references; ++i) {
    Reference ref;
    ref.id = "ref" + two_digits(i);
    ref.title = "Reference " + std::to_string(i);
    ref.category = i % 2 == 0 ? Category::kStatic : Category::kDynamic;

    ReferenceState st;
    const Vec concept_vec = random_unit(rng, dg);
    if (ref.category == Category::kStatic) {
      st.images = {concept_vec};
    } else {
      for (int j = 0; j < 3; ++j) st.images.push_back(perturbed(concept_vec, 0.3, rng));
      st.coherent = 3;
      std::vector<Vec> avoid = st.images;
      avoid.push_back(concept_vec);
      st.images.push_back(unrelated(rng, dg, avoid, kUnrelatedGlobalLimit));
    }
    const std::string global_rel = "embeddings/refs/" + ref.id + ".global.emb1";
    write_embeddings(dir / global_rel, to_matrix(st.images, EmbeddingKind::kGlobal, "demo"));
    for (std::size_t j = 0; j < st.images.size(); ++j) {
      const std::string image_id = ref.id + "_img" + std::to_string(j);
      std::vector<Vec> cells;
      for (std::size_t c = 0; c < k; ++c) cells.push_back(random_unit(rng, dp));
      const std::string patch_rel = "embeddings/refs/" + image_id + ".patch.emb1";
      write_embeddings(dir / patch_rel, to_matrix(cells, EmbeddingKind::kPatch, "demo"));
      st.patches.push_back(std::move(cells));
      ref.reference_image_ids.push_back(image_id);
      m.image_registry[image_id] = ImageEntry{global_rel, j, patch_rel};
    }

    ref.sitelink_count = 21 + static_cast<std::int64_t>(uniform_index(rng, 480));
    ref.creation_year = 1400 + static_cast<int>(uniform_index(rng, 620));
    for (const char* name : {"text_uniqueness", "image_uniqueness", "image_memorability", "word_memorability",
                             "text_concreteness"}) {
      ref.features[name] = uniform_unit(rng);
    }
    std::vector<double> matches;
    for (int t = 0; t < 6; ++t) matches.push_back(uniform_unit(rng));
    ref.training_match_scores = std::move(matches);
    st.difficulty = uniform_unit(rng);
    st.memorization = uniform_unit(rng);

    if (options.reference_pngs) write_png(out.refs_dir / (ref.id + ".png"), reference_png(rng, options.png_side, options.grid_side));
    m.references.push_back(std::move(ref));
    states.push_back(std::move(st));
  }

  std::size_t set_index = 0;
  for (std::size_t mi = 0; mi < options.models.size(); ++mi) {
    const std::string& model = options.models[mi];
    const double strength = 1.0 - 0.25 * static_cast<double>(mi);
    for (Variant variant : {Variant::kOriginal, Variant::kSynonym, Variant::kDescription}) {
      const double penalty = variant == Variant::kOriginal ? 0.0 : variant == Variant::kSynonym ? 0.15 : 0.35;
      const std::string variant_name(to_string(variant));
      const fs::path gen_dir = fs::path("embeddings") / "gen" / model / variant_name;
      fs::create_directories(dir / gen_dir);

      for (std::size_t i = 0; i < options.references; ++i) {
        const Reference& ref = m.references[i];
        const ReferenceState& st = states[i];
        std::vector<Vec> bank_patches;
        for (std::size_t j = 0; j < st.coherent; ++j) {
          bank_patches.insert(bank_patches.end(), st.patches[j].begin(), st.patches[j].end());
        }
        const double p_align = std::clamp(strength - st.difficulty - penalty + 0.3, 0.0, 1.0);

        GenerationSet set;
        set.reference_id = ref.id;
        set.model_name = model;
        set.variant = variant;
        const std::string global_rel = (gen_dir / (ref.id + ".global.emb1")).generic_string();
        const bool write = set_index++ >= options.missing_generation_files;

        std::vector<Vec> globals;
        for (std::size_t g = 0; g < options.generations; ++g) {
          const std::string image_id = ref.id + "__" + model + "__" + variant_name + "__g" + two_digits(g);
          const bool aligned = uniform_unit(rng) < p_align;
          std::vector<Vec> cells;
          if (aligned) {
            const auto source = static_cast<std::size_t>(uniform_index(rng, st.coherent));
            globals.push_back(perturbed(st.images[source], 0.25, rng));
            for (std::size_t c = 0; c < k; ++c) {
              if (uniform_unit(rng) < st.memorization) {
                const auto pick = static_cast<std::size_t>(uniform_index(rng, bank_patches.size()));
                cells.push_back(perturbed(bank_patches[pick], 0.1, rng));
              } else {
                cells.push_back(unrelated(rng, dp, bank_patches, kUnrelatedPatchLimit));
              }
            }
          } else {
            globals.push_back(unrelated(rng, dg, st.images, kUnrelatedGlobalLimit));
            for (std::size_t c = 0; c < k; ++c) cells.push_back(unrelated(rng, dp, bank_patches, kUnrelatedPatchLimit));
          }
          const std::string patch_rel = (gen_dir / (image_id + ".patch.emb1")).generic_string();
          if (write) write_embeddings(dir / patch_rel, to_matrix(cells, EmbeddingKind::kPatch, "demo"));
          m.image_registry[image_id] = ImageEntry{global_rel, g, patch_rel};

          ExternalScore score;
          score.sscd = uniform_unit(rng);
          if (aligned) {
            const double jitter = uniform_unit(rng) - 0.5;
            score.pdfe_level = std::clamp(static_cast<int>(std::lround(st.memorization * 5.0 + jitter)), 0, 5);
          } else {
            score.pdfe_level = static_cast<int>(uniform_index(rng, 2));
          }
          m.external_scores[{image_id, ref.id}] = score;
          set.image_ids.push_back(image_id);
        }
        if (write) write_embeddings(dir / global_rel, to_matrix(globals, EmbeddingKind::kGlobal, "demo"));
        m.generation_sets.push_back(std::move(set));
      }
    }
  }

  {
    std::ofstream manifest(out.manifest_path, std::ios::binary);
    manifest << manifest_to_json(m);
    if (!manifest) throw std::runtime_error("cannot write " + out.manifest_path.string());
  }

  CsvWriter features({"reference_id", "image_memorability", "word_memorability"});
  for (std::size_t i = 0; i < m.references.size(); ++i) {
    // Every fifth word score is left blank to exercise missing values.
    features.row({m.references[i].id, format_fixed(uniform_unit(rng)),
                  i % 5 == 4 ? std::string() : format_fixed(uniform_unit(rng))});
  }
  std::ofstream csv(out.features_path, std::ios::binary);
  csv << features.str();
  if (!csv) throw std::runtime_error("cannot write " + out.features_path.string());
  return out;
}

}  // namespace iconometer::demo
