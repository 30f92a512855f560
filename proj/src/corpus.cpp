#include "newsclust/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "newsclust/error.hpp"
#include "newsclust/text.hpp"

namespace newsclust {
namespace {

constexpr std::array<std::string_view, kCategoryCount> kNames = {
    "LithuanianNews", "WorldNews", "Crime", "Business",      "Cars", "Sports",
    "Technologies",   "Opinions",  "Entertainment", "Life", "Culture", "Other",
};

std::string optional_string(const nlohmann::json& record, const char* key, const std::string& where) {
  if (!record.contains(key) || record[key].is_null()) return {};
  if (!record[key].is_string()) throw LoadError(where + "field '" + key + "' is not a string");
  return record[key].get<std::string>();
}

}  // namespace

std::string_view category_name(CategoryLabel label) { return kNames[static_cast<std::size_t>(label)]; }

std::optional<CategoryLabel> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryCount; ++i) {
    if (kNames[i] == name) return static_cast<CategoryLabel>(i);
  }
  return std::nullopt;
}

CategoryMapping parse_category_mapping(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("category mapping: ") + e.what());
  }
  if (!doc.is_object()) throw LoadError("category mapping: expected a JSON object");
  CategoryMapping mapping;
  for (const auto& [raw, value] : doc.items()) {
    if (!value.is_string()) throw LoadError("category mapping: value for '" + raw + "' is not a string");
    const auto label = parse_category(value.get<std::string>());
    if (!label) throw LoadError("category mapping: unknown category '" + value.get<std::string>() + "' for '" + raw + "'");
    mapping.emplace(raw, *label);
  }
  return mapping;
}

CategoryMapping load_category_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open category mapping '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_category_mapping(text);
}

CategoryLabel map_category(std::string_view raw, const CategoryMapping& mapping) {
  const auto it = mapping.find(std::string(raw));
  return it == mapping.end() ? CategoryLabel::Other : it->second;
}

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  by_id_.reserve(documents_.size());
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& doc = documents_[i];
    if (doc.id.empty()) throw LoadError("document at position " + std::to_string(i) + " has an empty id");
    if (!by_id_.emplace(doc.id, i).second) throw LoadError("duplicate document id '" + doc.id + "'");
    ++counts_[static_cast<std::size_t>(doc.category)];
  }
}

const Document* Corpus::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &documents_[it->second];
}

const Document& Corpus::at(std::string_view id) const {
  if (const auto* doc = find(id)) return *doc;
  throw LookupError("unknown document id '" + std::string(id) + "'");
}

Corpus read_corpus(std::istream& in, std::size_t min_chars, const CategoryMapping& mapping,
                   std::string_view source_name, CorpusLoadStats* stats) {
  CorpusLoadStats local;
  std::vector<Document> kept;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no) + ": ";
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(where + "malformed record: " + e.what());
    }
    if (!record.is_object()) throw LoadError(where + "record is not a JSON object");
    for (const char* key : {"id", "text"}) {
      if (!record.contains(key) || !record[key].is_string()) {
        throw LoadError(where + "missing required string field '" + key + "'");
      }
    }

    Document doc;
    doc.id = record["id"].get<std::string>();
    if (doc.id.empty()) throw LoadError(where + "empty id");
    if (!seen.insert(doc.id).second) throw LoadError(where + "duplicate id '" + doc.id + "'");
    doc.text = record["text"].get<std::string>();
    doc.source = optional_string(record, "source", where);
    doc.raw_category = optional_string(record, "raw_category", where);
    doc.char_count = count_scalar_values(doc.text);

    const std::string explicit_label = optional_string(record, "category", where);
    if (!explicit_label.empty()) {
      const auto label = parse_category(explicit_label);
      if (!label) throw LoadError(where + "unknown category '" + explicit_label + "'");
      doc.category = *label;
    } else {
      doc.category = map_category(doc.raw_category, mapping);
    }

    ++local.records;
    if (doc.char_count >= min_chars) {
      kept.push_back(std::move(doc));
    } else {
      ++local.dropped_short;
    }
  }
  if (in.bad()) throw LoadError(std::string(source_name) + ": read error");
  if (stats) *stats = local;
  return Corpus(std::move(kept));
}

Corpus load_corpus(const std::filesystem::path& path, std::size_t min_chars, const CategoryMapping& mapping,
                   CorpusLoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open corpus '" + path.string() + "'");
  return read_corpus(in, min_chars, mapping, path.string(), stats);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.documents()) {
    nlohmann::ordered_json record;
    record["id"] = doc.id;
    record["source"] = doc.source;
    record["raw_category"] = doc.raw_category;
    record["category"] = category_name(doc.category);
    record["text"] = doc.text;
    out << record.dump() << '\n';
  }
}

}  // namespace newsclust
