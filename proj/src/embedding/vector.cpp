#include "scichat/embedding/vector.hpp"

#include <cmath>

#include "scichat/common/error.hpp"

namespace scichat {

void EmbeddingVector::validate() const {
  if (values.empty()) throw Error(ErrorCode::kDomain, "embedding vector is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kDomain, "embedding component " + std::to_string(i) + " is not finite");
    }
  }
}

double l2_norm(const EmbeddingVector& v) {
  double sum = 0.0;
  for (const float x : v.values) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

}  // namespace scichat
