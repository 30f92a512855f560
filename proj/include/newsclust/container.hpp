#pragma once

// Binary container for dense float matrices.
//
// Layout (all integers little-endian):
//   bytes 0..7    magic "NCLSTMX1"
//   bytes 8..15   u64 length of the JSON header in bytes
//   header        UTF-8 JSON object: {"meta": {...}, "matrices": [{"name", "rows", "cols"}, ...]}
//   payload       each matrix in header order, row-major, IEEE-754 binary32
//
// The reader rejects files whose size disagrees with the header.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "newsclust/matrix.hpp"

namespace newsclust {

struct NamedMatrix {
  std::string name;
  Matrix<float> values;
};

struct Container {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedMatrix> matrices;

  const Matrix<float>& matrix(const std::string& name) const;
};

void write_container(const std::filesystem::path& path, const Container& container);
Container read_container(const std::filesystem::path& path);

}  // namespace newsclust
