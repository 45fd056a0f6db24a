#include "iconometer/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "iconometer/error.hpp"

namespace iconometer {
namespace {

constexpr std::uint8_t kMagic[4] = {0x45, 0x4D, 0x42, 0x31};  // "EMB1"
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

double row_norm(std::span<const float> row) {
  double acc = 0.0;
  for (float x : row) acc += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(acc);
}

EmbeddingHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw EmbeddingFormatError("not an embedding file");
  }
  if (bytes.size() < kEmb1HeaderBytes) {
    throw EmbeddingFormatError("short read, expected " + std::to_string(kEmb1HeaderBytes) +
                               " header bytes");
  }
  EmbeddingHeader h;
  h.version = get_u32(bytes, 4);
  h.rows = get_u32(bytes, 8);
  h.dim = get_u32(bytes, 12);
  const std::uint8_t kind = bytes[16];
  if (h.version != kVersion) {
    throw EmbeddingFormatError("unsupported EMB1 version " + std::to_string(h.version));
  }
  if (kind > 1) throw EmbeddingFormatError("unknown embedding kind " + std::to_string(kind));
  if (bytes[17] != 0 || bytes[18] != 0 || bytes[19] != 0) {
    throw EmbeddingFormatError("nonzero header padding");
  }
  if (h.dim == 0) throw EmbeddingFormatError("embedding dim must be positive");
  h.kind = static_cast<EmbeddingKind>(kind);
  return h;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbeddingFormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data,
                                 EmbeddingKind kind, std::string source_tag)
    : rows_(rows), dim_(dim), data_(std::move(data)), kind_(kind), source_tag_(std::move(source_tag)) {
  if (dim_ == 0) throw ContractViolation("embedding dim must be positive");
  if (data_.size() != rows_ * dim_) {
    throw ContractViolation("embedding data has " + std::to_string(data_.size()) +
                            " values, expected " + std::to_string(rows_ * dim_));
  }
  for (float x : data_) {
    if (!std::isfinite(x)) throw EmbeddingFormatError("non-finite value");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (std::abs(row_norm(row(i)) - 1.0) > kNormTolerance) {
      throw EmbeddingFormatError("unnormalized row " + std::to_string(i));
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::normalized(std::size_t rows, std::size_t dim,
                                            std::vector<float> data, EmbeddingKind kind,
                                            std::string source_tag) {
  if (dim == 0 || data.size() != rows * dim) {
    throw ContractViolation("embedding data does not match rows x dim");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    std::span<float> r(data.data() + i * dim, dim);
    for (float x : r) {
      if (!std::isfinite(x)) throw EmbeddingFormatError("non-finite value");
    }
    const double norm = row_norm(r);
    if (norm == 0.0) throw EmbeddingFormatError("zero row " + std::to_string(i));
    for (float& x : r) x = static_cast<float>(static_cast<double>(x) / norm);
  }
  return EmbeddingMatrix(rows, dim, std::move(data), kind, std::move(source_tag));
}

EmbeddingMatrix EmbeddingMatrix::concat(std::span<const EmbeddingMatrix> parts) {
  if (parts.empty()) throw ContractViolation("concat of zero matrices");
  const std::size_t dim = parts.front().dim();
  std::size_t rows = 0;
  std::vector<float> data;
  for (const auto& part : parts) {
    if (part.dim() != dim) throw ContractViolation("concat of matrices with different dims");
    rows += part.rows();
    data.insert(data.end(), part.data_.begin(), part.data_.end());
  }
  EmbeddingMatrix out;
  out.rows_ = rows;
  out.dim_ = dim;
  out.data_ = std::move(data);
  out.kind_ = parts.front().kind();
  out.source_tag_ = parts.front().source_tag();
  return out;
}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
  if (i >= rows_) throw ContractViolation("row " + std::to_string(i) + " out of range");
  return {data_.data() + i * dim_, dim_};
}

EmbeddingMatrix EmbeddingMatrix::select_rows(std::span<const std::size_t> indices) const {
  EmbeddingMatrix out;
  out.rows_ = indices.size();
  out.dim_ = dim_;
  out.kind_ = kind_;
  out.source_tag_ = source_tag_;
  out.data_.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    const auto r = row(i);
    out.data_.insert(out.data_.end(), r.begin(), r.end());
  }
  return out;
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix) {
  if (matrix.source_tag().size() > 0xFFFF) throw ContractViolation("source tag longer than 65535 bytes");
  std::vector<std::uint8_t> out;
  out.reserve(kEmb1HeaderBytes + matrix.data().size() * 4 + 2 + matrix.source_tag().size());
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(matrix.rows()));
  put_u32(out, static_cast<std::uint32_t>(matrix.dim()));
  out.push_back(static_cast<std::uint8_t>(matrix.kind()));
  out.insert(out.end(), 3, 0);
  for (float x : matrix.data()) put_u32(out, std::bit_cast<std::uint32_t>(x));
  const auto tag_len = static_cast<std::uint16_t>(matrix.source_tag().size());
  out.push_back(static_cast<std::uint8_t>(tag_len & 0xFF));
  out.push_back(static_cast<std::uint8_t>(tag_len >> 8));
  out.insert(out.end(), matrix.source_tag().begin(), matrix.source_tag().end());
  return out;
}

EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes) {
  const EmbeddingHeader h = parse_header(bytes);
  const std::size_t payload = static_cast<std::size_t>(h.rows) * h.dim * 4;
  if (bytes.size() < kEmb1HeaderBytes + payload) {
    throw EmbeddingFormatError("short read, expected " + std::to_string(payload) +
                               " payload bytes, got " +
                               std::to_string(bytes.size() - kEmb1HeaderBytes));
  }
  std::vector<float> data(static_cast<std::size_t>(h.rows) * h.dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes, kEmb1HeaderBytes + 4 * i));
  }

  std::string tag;
  std::size_t at = kEmb1HeaderBytes + payload;
  if (at < bytes.size()) {
    if (bytes.size() - at < 2) throw EmbeddingFormatError("short read, expected 2 tag length bytes");
    const std::size_t len = bytes[at] | (static_cast<std::size_t>(bytes[at + 1]) << 8);
    at += 2;
    if (bytes.size() - at < len) {
      throw EmbeddingFormatError("short read, expected " + std::to_string(len) + " tag bytes");
    }
    tag.assign(reinterpret_cast<const char*>(bytes.data() + at), len);
    at += len;
    if (at != bytes.size()) throw EmbeddingFormatError("trailing bytes after source tag");
  }
  return EmbeddingMatrix(h.rows, h.dim, std::move(data), h.kind, std::move(tag));
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix) {
  const auto bytes = encode_embeddings(matrix);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EmbeddingFormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw EmbeddingFormatError("write failed for " + path.string());
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path, std::optional<int> grid_side) {
  const auto bytes = slurp(path);
  EmbeddingMatrix m = decode_embeddings(bytes);
  if (grid_side && m.kind() == EmbeddingKind::kPatch) {
    const auto k = static_cast<std::size_t>(*grid_side) * static_cast<std::size_t>(*grid_side);
    if (m.rows() != k) {
      throw GridMismatch("grid mismatch: " + path.string() + " has " + std::to_string(m.rows()) +
                         " patch rows, expected " + std::to_string(k));
    }
  }
  return m;
}

EmbeddingHeader read_embedding_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbeddingFormatError("cannot open " + path.string());
  std::vector<std::uint8_t> head(kEmb1HeaderBytes);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  return parse_header(head);
}

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw ContractViolation("cosine of vectors with dims " + std::to_string(u.size()) + " and " +
                            std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  }
  return std::clamp(acc, -1.0, 1.0);
}

BestMatch max_similarity(std::span<const float> query, const EmbeddingMatrix& bank) {
  if (bank.empty()) throw ContractViolation("max_similarity over an empty bank");
  BestMatch best{cosine(query, bank.row(0)), 0};
  for (std::size_t j = 1; j < bank.rows(); ++j) {
    const double s = cosine(query, bank.row(j));
    if (s > best.score) best = {s, j};
  }
  return best;
}

}  // namespace iconometer
