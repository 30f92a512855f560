#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace newsclust {

enum class CategoryLabel : std::uint8_t {
  LithuanianNews,
  WorldNews,
  Crime,
  Business,
  Cars,
  Sports,
  Technologies,
  Opinions,
  Entertainment,
  Life,
  Culture,
  Other,
};

inline constexpr std::size_t kCategoryCount = 12;

inline constexpr std::array<CategoryLabel, kCategoryCount> kAllCategories = {
    CategoryLabel::LithuanianNews, CategoryLabel::WorldNews, CategoryLabel::Crime,   CategoryLabel::Business,
    CategoryLabel::Cars,           CategoryLabel::Sports,    CategoryLabel::Technologies, CategoryLabel::Opinions,
    CategoryLabel::Entertainment,  CategoryLabel::Life,      CategoryLabel::Culture, CategoryLabel::Other,
};

// Articles shorter than this many characters are dropped at load time.
inline constexpr std::size_t kDefaultMinChars = 200;

std::string_view category_name(CategoryLabel label);
std::optional<CategoryLabel> parse_category(std::string_view name);

struct Document {
  std::string id;
  std::string source;
  std::string raw_category;
  CategoryLabel category = CategoryLabel::Other;
  std::string text;
  std::size_t char_count = 0;  // Unicode scalar values in text
};

// raw category string (as found in URLs or metadata) -> unified label
using CategoryMapping = std::unordered_map<std::string, CategoryLabel>;

CategoryMapping parse_category_mapping(std::string_view json_text);
CategoryMapping load_category_mapping(const std::filesystem::path& path);

// Total: unmapped strings fall into Other.
CategoryLabel map_category(std::string_view raw, const CategoryMapping& mapping);

class Corpus {
 public:
  Corpus() = default;
  // Throws LoadError on duplicate or empty ids.
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const { return documents_; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  const Document* find(std::string_view id) const;
  const Document& at(std::string_view id) const;

  const std::array<std::size_t, kCategoryCount>& category_counts() const { return counts_; }
  std::size_t count(CategoryLabel label) const { return counts_[static_cast<std::size_t>(label)]; }

 private:
  std::vector<Document> documents_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::array<std::size_t, kCategoryCount> counts_{};
};

struct CorpusLoadStats {
  std::size_t records = 0;
  std::size_t dropped_short = 0;
};

// Reads line-delimited JSON records with required string fields "id" and
// "text" and optional "source" and "raw_category". A record may also carry a
// "category" field holding one of the twelve label names; it then takes
// precedence over the mapping (this is what write_corpus emits).
Corpus read_corpus(std::istream& in, std::size_t min_chars, const CategoryMapping& mapping,
                   std::string_view source_name = "<stream>", CorpusLoadStats* stats = nullptr);
Corpus load_corpus(const std::filesystem::path& path, std::size_t min_chars, const CategoryMapping& mapping,
                   CorpusLoadStats* stats = nullptr);

void write_corpus(std::ostream& out, const Corpus& corpus);

}  // namespace newsclust
