#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace scichat {

struct EmbeddingVector {
  std::vector<float> values;
  std::string model_id;

  std::size_t dim() const { return values.size(); }

  // Throws Error(kDomain) for an empty vector or any NaN/Inf component.
  void validate() const;

  bool operator==(const EmbeddingVector&) const = default;
};

double l2_norm(const EmbeddingVector& v);

}  // namespace scichat
