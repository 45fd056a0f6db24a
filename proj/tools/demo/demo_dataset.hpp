#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iconometer/types.hpp"

namespace iconometer::demo {

// Knobs for the generated dataset. Even-indexed references are static, odd
// ones dynamic with an off-topic candidate that the coherence filter drops.
struct DemoOptions {
  std::size_t references = 12;
  std::vector<std::string> models{"model-a", "model-b"};
  std::size_t generations = kDefaultGenerationsPerReference;
  std::uint64_t seed = 42;
  int grid_side = 4;
  std::size_t global_dim = 32;
  std::size_t patch_dim = 24;
  // Generation sets (in manifest order) whose embedding files are not written.
  std::size_t missing_generation_files = 0;
  bool reference_pngs = true;
  int png_side = 64;
};

struct DemoDataset {
  std::filesystem::path manifest_path;
  std::filesystem::path features_path;
  std::filesystem::path refs_dir;  // one PNG per reference, when requested
  Manifest manifest;
};

// Writes manifest.json, features.csv, embeddings/ and refs/ under `dir`.
// Output depends only on the options.
DemoDataset make_demo_dataset(const std::filesystem::path& dir, const DemoOptions& options = {});

}  // namespace iconometer::demo
