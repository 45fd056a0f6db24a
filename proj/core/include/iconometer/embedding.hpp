#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iconometer {

enum class EmbeddingKind : std::uint8_t { kGlobal = 0, kPatch = 1 };

// Row-major matrix of L2-normalized float32 vectors.
//
// Every row is unit-norm (within kNormTolerance) for the lifetime of the
// object: the checked constructor rejects anything else and `normalized`
// rescales raw encoder output. Patch matrices hold one image's grid cells in
// row-major order, top-left first; a reference patch bank concatenates the
// cells of several images.
class EmbeddingMatrix {
 public:
  static constexpr double kNormTolerance = 1e-4;

  EmbeddingMatrix() = default;

  // Throws EmbeddingFormatError on non-finite values or unnormalized rows,
  // ContractViolation if data.size() != rows * dim.
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                  EmbeddingKind kind = EmbeddingKind::kGlobal, std::string source_tag = {});

  // L2-normalizes each row (accumulating in double) before construction.
  // Zero rows are rejected.
  static EmbeddingMatrix normalized(std::size_t rows, std::size_t dim, std::vector<float> data,
                                    EmbeddingKind kind = EmbeddingKind::kGlobal,
                                    std::string source_tag = {});

  // Concatenates rows of matrices with equal dim. The result takes the kind of
  // the first part.
  static EmbeddingMatrix concat(std::span<const EmbeddingMatrix> parts);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }
  EmbeddingKind kind() const noexcept { return kind_; }
  const std::string& source_tag() const noexcept { return source_tag_; }
  std::span<const float> data() const noexcept { return data_; }

  std::span<const float> row(std::size_t i) const;

  // New matrix holding the selected rows, in the given order.
  EmbeddingMatrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  EmbeddingKind kind_ = EmbeddingKind::kGlobal;
  std::string source_tag_;
};

// EMB1 header as stored on disk.
struct EmbeddingHeader {
  std::uint32_t version = 1;
  std::uint32_t rows = 0;
  std::uint32_t dim = 0;
  EmbeddingKind kind = EmbeddingKind::kGlobal;
};

inline constexpr std::size_t kEmb1HeaderBytes = 20;

// EMB1 layout (little-endian): "EMB1", u32 version=1, u32 rows, u32 dim,
// u8 kind, 3 zero bytes, rows*dim float32, then u16 tag length + UTF-8 tag.
// A file that ends right after the payload has an empty tag.
std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes);

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix);

// Reads and fully validates an EMB1 file. When `grid_side` is given, patch
// files must hold exactly grid_side^2 rows.
EmbeddingMatrix read_embeddings(const std::filesystem::path& path,
                                std::optional<int> grid_side = std::nullopt);

// Header only; does not validate the payload.
EmbeddingHeader read_embedding_header(const std::filesystem::path& path);

// Dot product of unit vectors, accumulated in double and clamped to [-1, 1].
double cosine(std::span<const float> u, std::span<const float> v);

struct BestMatch {
  double score = -1.0;
  std::size_t row = 0;
};

// Highest cosine between `query` and any bank row; ties go to the lowest row.
BestMatch max_similarity(std::span<const float> query, const EmbeddingMatrix& bank);

}  // namespace iconometer
