#include "iconometer/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "iconometer/error.hpp"

namespace iconometer {
namespace {

using nlohmann::json;

std::size_t line_of(std::string_view text, std::size_t byte) {
  const auto end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n'));
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw FormatError("manifest " + where + ": " + what, 0, 0);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing key '") + key + "'");
  return *it;
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) schema_error(where, "expected a string");
  return v.get<std::string>();
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) schema_error(where, "expected an integer");
  return v.get<std::int64_t>();
}

std::vector<std::string> as_string_list(const json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_string(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename Parse>
auto enum_field(const json& v, const std::string& where, Parse parse) {
  const auto text = as_string(v, where);
  try {
    return parse(text);
  } catch (const ContractViolation& e) {
    schema_error(where, e.what());
  }
}

Reference parse_reference(const json& j, const std::string& where) {
  if (!j.is_object()) schema_error(where, "expected an object");
  Reference r;
  r.id = as_string(require(j, "id", where), where + ".id");
  if (j.contains("title")) r.title = as_string(j["title"], where + ".title");
  r.category = enum_field(require(j, "category", where), where + ".category", parse_category);
  r.reference_image_ids =
      as_string_list(require(j, "reference_image_ids", where), where + ".reference_image_ids");
  if (j.contains("sitelink_count")) {
    r.sitelink_count = as_integer(j["sitelink_count"], where + ".sitelink_count");
  }
  if (j.contains("creation_year") && !j["creation_year"].is_null()) {
    r.creation_year = static_cast<int>(as_integer(j["creation_year"], where + ".creation_year"));
  }
  if (j.contains("features")) {
    const auto& f = j["features"];
    if (!f.is_object()) schema_error(where + ".features", "expected an object");
    for (const auto& [name, value] : f.items()) {
      if (value.is_null()) continue;
      r.features[name] = as_number(value, where + ".features." + name);
    }
  }
  if (j.contains("training_match_scores")) {
    const auto& s = j["training_match_scores"];
    if (!s.is_array()) schema_error(where + ".training_match_scores", "expected an array");
    std::vector<double> scores;
    for (std::size_t i = 0; i < s.size(); ++i) {
      scores.push_back(as_number(s[i], where + ".training_match_scores[" + std::to_string(i) + "]"));
    }
    r.training_match_scores = std::move(scores);
  }
  return r;
}

GenerationSet parse_generation_set(const json& j, const std::string& where) {
  if (!j.is_object()) schema_error(where, "expected an object");
  GenerationSet g;
  g.reference_id = as_string(require(j, "reference_id", where), where + ".reference_id");
  g.model_name = as_string(require(j, "model_name", where), where + ".model_name");
  if (j.contains("variant")) g.variant = enum_field(j["variant"], where + ".variant", parse_variant);
  g.image_ids = as_string_list(require(j, "image_ids", where), where + ".image_ids");
  return g;
}

ImageEntry parse_image_entry(const json& j, const std::string& where) {
  ImageEntry e;
  if (j.is_string()) {
    e.global_path = j.get<std::string>();
    return e;
  }
  if (!j.is_object()) schema_error(where, "expected a path string or an object");
  e.global_path = as_string(require(j, "global", where), where + ".global");
  if (j.contains("row")) {
    const auto row = as_integer(j["row"], where + ".row");
    if (row < 0) schema_error(where + ".row", "must be nonnegative");
    e.global_row = static_cast<std::size_t>(row);
  }
  if (j.contains("patch") && !j["patch"].is_null()) e.patch_path = as_string(j["patch"], where + ".patch");
  return e;
}

}  // namespace

Manifest parse_manifest(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw FormatError("manifest is not valid JSON: " + std::string(e.what()),
                      line_of(json_text, byte), byte);
  }
  if (!root.is_object()) schema_error("root", "expected an object");

  Manifest m;
  if (root.contains("compliance_mode")) {
    if (!root["compliance_mode"].is_boolean()) schema_error("compliance_mode", "expected a boolean");
    m.compliance_mode = root["compliance_mode"].get<bool>();
  }
  const auto& refs = require(root, "references", "root");
  if (!refs.is_array()) schema_error("references", "expected an array");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    m.references.push_back(parse_reference(refs[i], "references[" + std::to_string(i) + "]"));
  }
  const auto& sets = require(root, "generation_sets", "root");
  if (!sets.is_array()) schema_error("generation_sets", "expected an array");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    m.generation_sets.push_back(
        parse_generation_set(sets[i], "generation_sets[" + std::to_string(i) + "]"));
  }
  const auto& registry = require(root, "image_registry", "root");
  if (!registry.is_object()) schema_error("image_registry", "expected an object");
  for (const auto& [id, entry] : registry.items()) {
    m.image_registry[id] = parse_image_entry(entry, "image_registry." + id);
  }
  if (root.contains("external_scores") && !root["external_scores"].is_null()) {
    const auto& scores = root["external_scores"];
    if (!scores.is_array()) schema_error("external_scores", "expected an array");
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const std::string where = "external_scores[" + std::to_string(i) + "]";
      const auto& s = scores[i];
      if (!s.is_object()) schema_error(where, "expected an object");
      ScoreKey key{as_string(require(s, "image_id", where), where + ".image_id"),
                   as_string(require(s, "reference_id", where), where + ".reference_id")};
      ExternalScore score;
      if (s.contains("sscd") && !s["sscd"].is_null()) score.sscd = as_number(s["sscd"], where + ".sscd");
      if (s.contains("pdfe_level") && !s["pdfe_level"].is_null()) {
        score.pdfe_level = static_cast<int>(as_integer(s["pdfe_level"], where + ".pdfe_level"));
      }
      m.external_scores[key] = score;
    }
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open manifest " + path.string(), 0, 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str());
}

std::string manifest_to_json(const Manifest& manifest) {
  json root = json::object();
  root["compliance_mode"] = manifest.compliance_mode;
  json refs = json::array();
  for (const auto& r : manifest.references) {
    json j = {{"id", r.id},
              {"title", r.title},
              {"category", std::string(to_string(r.category))},
              {"reference_image_ids", r.reference_image_ids},
              {"sitelink_count", r.sitelink_count}};
    if (r.creation_year) j["creation_year"] = *r.creation_year;
    if (!r.features.empty()) j["features"] = r.features;
    if (r.training_match_scores) j["training_match_scores"] = *r.training_match_scores;
    refs.push_back(std::move(j));
  }
  root["references"] = std::move(refs);
  json sets = json::array();
  for (const auto& g : manifest.generation_sets) {
    sets.push_back({{"reference_id", g.reference_id},
                    {"model_name", g.model_name},
                    {"variant", std::string(to_string(g.variant))},
                    {"image_ids", g.image_ids}});
  }
  root["generation_sets"] = std::move(sets);
  json registry = json::object();
  for (const auto& [id, e] : manifest.image_registry) {
    json j = {{"global", e.global_path}};
    if (e.global_row != 0) j["row"] = e.global_row;
    if (e.patch_path) j["patch"] = *e.patch_path;
    registry[id] = std::move(j);
  }
  root["image_registry"] = std::move(registry);
  json scores = json::array();
  for (const auto& [key, s] : manifest.external_scores) {
    json j = {{"image_id", key.first}, {"reference_id", key.second}};
    if (s.sscd) j["sscd"] = *s.sscd;
    if (s.pdfe_level) j["pdfe_level"] = *s.pdfe_level;
    scores.push_back(std::move(j));
  }
  root["external_scores"] = std::move(scores);
  return root.dump(2) + "\n";
}

ValidationReport validate_manifest(const Manifest& manifest, const Thresholds& thresholds) {
  std::vector<Violation> out;
  auto add = [&](std::string code, std::string subject, std::string detail) {
    out.push_back({std::move(code), std::move(subject), std::move(detail)});
  };

  for (const auto& problem : thresholds.problems()) add("threshold range", "thresholds", problem);

  std::set<std::string> reference_ids;
  for (const auto& r : manifest.references) {
    if (!reference_ids.insert(r.id).second) add("duplicate reference", r.id, "reference id appears more than once");
    const auto bank = r.reference_image_ids.size();
    if (r.category == Category::kStatic && bank != 1) {
      add("static cardinality", r.id,
          "static reference has " + std::to_string(bank) + " reference images, expected 1");
    }
    if (r.category == Category::kDynamic && bank == 0) {
      add("empty reference bank", r.id, "dynamic reference has no reference images");
    }
    if (r.sitelink_count < 0) add("sitelink count", r.id, "negative sitelink count");
    if (manifest.compliance_mode && r.sitelink_count <= kComplianceSitelinkFloor) {
      add("sitelink threshold", r.id,
          "sitelink_count " + std::to_string(r.sitelink_count) + " is not above " +
              std::to_string(kComplianceSitelinkFloor));
    }
    for (const auto& id : r.reference_image_ids) {
      if (!manifest.image_registry.contains(id)) {
        add("unresolved image", id, "reference image of " + r.id + " is not in image_registry");
      }
    }
    if (r.training_match_scores) {
      for (double s : *r.training_match_scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
          add("score range", r.id, "training match score outside [0, 1]");
          break;
        }
      }
    }
  }

  std::set<std::tuple<std::string, std::string, Variant>> cells;
  for (const auto& g : manifest.generation_sets) {
    const std::string subject = g.reference_id + "/" + g.model_name + "/" + std::string(to_string(g.variant));
    if (!reference_ids.contains(g.reference_id)) {
      add("dangling reference", g.reference_id, "generation set " + subject + " names an unknown reference");
    }
    if (g.image_ids.empty()) add("empty generation set", subject, "generation set has no images");
    if (!cells.insert({g.reference_id, g.model_name, g.variant}).second) {
      add("duplicate generation set", subject, "more than one generation set for this cell");
    }
    for (const auto& id : g.image_ids) {
      if (!manifest.image_registry.contains(id)) {
        add("unresolved image", id, "generated image of " + subject + " is not in image_registry");
      }
    }
  }

  for (const auto& [key, score] : manifest.external_scores) {
    const auto& [image_id, reference_id] = key;
    if (!reference_ids.contains(reference_id)) {
      add("dangling reference", reference_id, "external score for image " + image_id + " names an unknown reference");
    }
    if (!manifest.image_registry.contains(image_id)) {
      add("unresolved image", image_id, "external score names an image missing from image_registry");
    }
    if (score.pdfe_level && (*score.pdfe_level < 0 || *score.pdfe_level > 5)) {
      add("pdfe level", image_id + "@" + reference_id,
          "pdfe_level " + std::to_string(*score.pdfe_level) + " outside 0-5");
    }
    if (score.sscd && !std::isfinite(*score.sscd)) {
      add("score range", image_id + "@" + reference_id, "non-finite sscd score");
    }
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return {std::move(out)};
}

}  // namespace iconometer
