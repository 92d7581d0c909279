#include "cqre/schema.hpp"

namespace cqre {

int feature_index(std::string_view name) {
  for (int i = 0; i < kFeatureCount; ++i)
    if (kFeatureNames[static_cast<std::size_t>(i)] == name) return i;
  return -1;
}

}  // namespace cqre
