#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "iconometer/embedding.hpp"
#include "iconometer/random.hpp"

namespace iconometer::testing_support {

// Rows e_{axes[i]} in `dim` dimensions.
inline EmbeddingMatrix basis_rows(const std::vector<std::size_t>& axes, std::size_t dim,
                                  EmbeddingKind kind = EmbeddingKind::kGlobal) {
  std::vector<float> data(axes.size() * dim, 0.0f);
  for (std::size_t i = 0; i < axes.size(); ++i) data[i * dim + axes[i]] = 1.0f;
  return EmbeddingMatrix(axes.size(), dim, std::move(data), kind);
}

inline EmbeddingMatrix random_rows(Rng& rng, std::size_t rows, std::size_t dim,
                                   EmbeddingKind kind = EmbeddingKind::kGlobal) {
  std::vector<float> data(rows * dim);
  for (float& x : data) x = static_cast<float>(2.0 * uniform_unit(rng) - 1.0);
  return EmbeddingMatrix::normalized(rows, dim, std::move(data), kind);
}

// Unit vector at `angle` radians from e_0 inside the (e_0, e_1) plane, in 2D.
inline std::vector<float> at_angle(double angle) {
  return {static_cast<float>(std::cos(angle)), static_cast<float>(std::sin(angle))};
}

// Fresh, empty scratch directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "iconometer_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace iconometer::testing_support
