#include "newsclust/container.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "newsclust/error.hpp"

namespace newsclust {
namespace {

constexpr std::array<char, 8> kMagic = {'N', 'C', 'L', 'S', 'T', 'M', 'X', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

const Matrix<float>& Container::matrix(const std::string& name) const {
  for (const auto& m : matrices) {
    if (m.name == name) return m.values;
  }
  throw LookupError("container has no matrix named '" + name + "'");
}

void write_container(const std::filesystem::path& path, const Container& container) {
  nlohmann::json header;
  header["meta"] = container.meta;
  header["matrices"] = nlohmann::json::array();
  for (const auto& m : container.matrices) {
    header["matrices"].push_back({{"name", m.name}, {"rows", m.values.rows()}, {"cols", m.values.cols()}});
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot open '" + path.string() + "' for writing");
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  std::vector<char> buffer;
  for (const auto& m : container.matrices) {
    const auto values = m.values.values();
    buffer.resize(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(values[i]);
      for (int b = 0; b < 4; ++b) buffer[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw LoadError("write to '" + path.string() + "' failed");
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";

  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw LoadError(where + "not a matrix container (bad magic)");
  }
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (header_len > bytes.size() - 16) throw LoadError(where + "header length exceeds file size");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(where + "malformed header: " + e.what());
  }
  if (!header.is_object() || !header.contains("matrices") || !header["matrices"].is_array()) {
    throw LoadError(where + "header lacks a 'matrices' array");
  }

  Container container;
  container.meta = header.value("meta", nlohmann::json::object());

  std::uint64_t expected = 16 + header_len;
  for (const auto& desc : header["matrices"]) {
    if (!desc.contains("rows") || !desc.contains("cols") || !desc["rows"].is_number_unsigned() ||
        !desc["cols"].is_number_unsigned()) {
      throw LoadError(where + "matrix descriptor lacks unsigned rows/cols");
    }
    expected += desc["rows"].get<std::uint64_t>() * desc["cols"].get<std::uint64_t>() * 4;
  }
  if (expected != bytes.size()) {
    throw LoadError(where + "payload size " + std::to_string(bytes.size()) + " disagrees with header (expected " +
                    std::to_string(expected) + " bytes)");
  }

  std::size_t offset = 16 + header_len;
  for (const auto& desc : header["matrices"]) {
    const auto rows = desc["rows"].get<std::size_t>();
    const auto cols = desc["cols"].get<std::size_t>();
    std::vector<float> values(rows * cols);
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[offset + 4 * i + b]) << (8 * b);
      values[i] = std::bit_cast<float>(bits);
    }
    offset += values.size() * 4;
    container.matrices.push_back({desc.value("name", std::string{}), Matrix<float>(rows, cols, std::move(values))});
  }
  return container;
}

}  // namespace newsclust
