#include "scichat/embedding/vector_cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <system_error>

#include "scichat/common/error.hpp"

namespace scichat {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const char* data) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<std::uint8_t>(data[i])) << (8 * i);
  }
  return value;
}

void write_payload(std::ofstream& out, std::span<const float> data) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size_bytes()));
  } else {
    std::string buffer;
    buffer.reserve(data.size_bytes());
    for (const float x : data) put_le(buffer, std::bit_cast<std::uint32_t>(x));
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
}

}  // namespace

std::size_t write_vector_block(const std::filesystem::path& path, const std::string& model_id,
                               std::size_t dim, std::span<const float> data) {
  if (dim == 0 ? !data.empty() : data.size() % dim != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "vector data is not a whole number of rows");
  }
  VectorCacheHeader header;
  header.dim = static_cast<std::uint32_t>(dim);
  header.count = dim == 0 ? 0 : data.size() / dim;
  header.model_id = model_id;

  std::string encoded;
  encoded.append(kVectorCacheMagic.data(), kVectorCacheMagic.size());
  put_le(encoded, header.version);
  put_le(encoded, header.dim);
  put_le(encoded, header.count);
  put_le(encoded, static_cast<std::uint32_t>(model_id.size()));
  encoded += model_id;

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(encoded.data(), static_cast<std::streamsize>(encoded.size()));
    write_payload(out, data);
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot publish " + path.string() + ": " + ec.message());
  return header.encoded_size() + header.payload_size();
}

std::size_t write_vector_cache(const std::filesystem::path& path,
                               std::span<const EmbeddingVector> vectors) {
  if (vectors.empty()) return write_vector_block(path, "", 0, {});
  const std::size_t dim = vectors.front().dim();
  const std::string& model_id = vectors.front().model_id;
  std::vector<float> data;
  data.reserve(vectors.size() * dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dim() != dim || vectors[i].model_id != model_id) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "vector " + std::to_string(i) + " differs in dim or model_id from vector 0");
    }
    data.insert(data.end(), vectors[i].values.begin(), vectors[i].values.end());
  }
  return write_vector_block(path, model_id, dim, data);
}

VectorBlock read_vector_block(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  constexpr std::size_t kFixed = 8 + 4 + 4 + 8 + 4;
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kVectorCacheMagic.data(), 8) != 0) {
    throw Error(ErrorCode::kFormat, path.string() + " is not a vector cache (bad magic)");
  }
  if (bytes.size() < kFixed) throw Error(ErrorCode::kLength, path.string() + ": truncated header");

  VectorBlock block;
  auto& header = block.header;
  header.version = get_le<std::uint32_t>(bytes.data() + 8);
  if (header.version != kVectorCacheVersion) {
    throw Error(ErrorCode::kFormat,
                path.string() + ": unsupported cache version " + std::to_string(header.version));
  }
  header.dim = get_le<std::uint32_t>(bytes.data() + 12);
  header.count = get_le<std::uint64_t>(bytes.data() + 16);
  const auto id_len = get_le<std::uint32_t>(bytes.data() + 24);
  if (bytes.size() < kFixed + id_len) {
    throw Error(ErrorCode::kLength, path.string() + ": truncated header");
  }
  header.model_id = bytes.substr(kFixed, id_len);

  const std::uint64_t expected = header.encoded_size() + header.payload_size();
  if (header.dim != 0 && header.count > (bytes.size() / header.dim)) {
    throw Error(ErrorCode::kLength, path.string() + ": file shorter than declared payload");
  }
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kLength, path.string() + ": file is " + std::to_string(bytes.size()) +
                                        " bytes, header declares " + std::to_string(expected));
  }

  block.data.resize(header.count * header.dim);
  const char* payload = bytes.data() + header.encoded_size();
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(block.data.data(), payload, block.data.size() * sizeof(float));
  } else {
    for (std::size_t i = 0; i < block.data.size(); ++i) {
      block.data[i] = std::bit_cast<float>(get_le<std::uint32_t>(payload + 4 * i));
    }
  }
  return block;
}

std::vector<EmbeddingVector> read_vector_cache(const std::filesystem::path& path) {
  auto block = read_vector_block(path);
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(block.header.count);
  const std::size_t dim = block.header.dim;
  for (std::size_t row = 0; row < block.header.count; ++row) {
    const auto first = block.data.begin() + static_cast<std::ptrdiff_t>(row * dim);
    vectors.push_back({std::vector<float>(first, first + static_cast<std::ptrdiff_t>(dim)),
                       block.header.model_id});
  }
  return vectors;
}

}  // namespace scichat
