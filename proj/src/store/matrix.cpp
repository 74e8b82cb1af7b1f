#include "scichat/store/matrix.hpp"

#include <fstream>
#include <string>

#include "scichat/common/error.hpp"
#include "scichat/embedding/vector_cache.hpp"

namespace scichat {

std::filesystem::path ids_sidecar_path(const std::filesystem::path& vecs_path) {
  auto path = vecs_path;
  path.replace_extension(".ids");
  return path;
}

std::string model_file_stem(const std::string& model_id) {
  std::string stem;
  for (const char ch : model_id) {
    const bool safe = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                      (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' || ch == '.';
    stem.push_back(safe ? ch : '_');
  }
  return stem.empty() ? "model" : stem;
}

std::size_t save_matrix(const EmbeddingMatrix& matrix, const std::filesystem::path& vecs_path) {
  if (matrix.data.size() != matrix.rows() * matrix.dim) {
    throw Error(ErrorCode::kIntegrity, "matrix data does not match rows * dim");
  }
  const auto ids_path = ids_sidecar_path(vecs_path);
  auto tmp = ids_path;
  tmp += ".tmp";
  std::size_t bytes = 0;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    for (const auto id : matrix.row_ids) {
      const auto line = std::to_string(id) + "\n";
      out << line;
      bytes += line.size();
    }
  }
  bytes += write_vector_block(vecs_path, matrix.model_id, matrix.dim, matrix.data);
  std::filesystem::rename(tmp, ids_path);
  return bytes;
}

EmbeddingMatrix load_matrix(const std::filesystem::path& vecs_path) {
  auto block = read_vector_block(vecs_path);
  EmbeddingMatrix matrix;
  matrix.dim = block.header.dim;
  matrix.model_id = block.header.model_id;
  matrix.data = std::move(block.data);

  const auto ids_path = ids_sidecar_path(vecs_path);
  std::ifstream in(ids_path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + ids_path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      matrix.row_ids.push_back(std::stoll(line));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormat, ids_path.string() + ": bad row id '" + line + "'");
    }
  }
  if (matrix.row_ids.size() != block.header.count) {
    throw Error(ErrorCode::kIntegrity, ids_path.string() + " lists " +
                                           std::to_string(matrix.row_ids.size()) + " ids for " +
                                           std::to_string(block.header.count) + " vectors");
  }
  return matrix;
}

}  // namespace scichat
