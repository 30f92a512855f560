#include "newsclust/text.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "newsclust/error.hpp"

namespace newsclust {

std::size_t count_scalar_values(std::string_view utf8) {
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  std::size_t count = 0;
  for (int32_t i = 0; i < length;) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    ++count;
  }
  return count;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  for (int32_t i = 0; i < length;) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c >= 0) c = u_foldCase(c, U_FOLD_CASE_DEFAULT);
    if (c >= 0 && u_isalnum(c)) {
      char buf[U8_MAX_LENGTH];
      int32_t n = 0;
      U8_APPEND_UNSAFE(buf, n, c);
      current.append(buf, static_cast<std::size_t>(n));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary::Vocabulary(std::vector<VocabEntry> entries, std::uint64_t n_documents, std::uint64_t min_count)
    : entries_(std::move(entries)), n_documents_(n_documents), min_count_(min_count) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.id != i) throw LoadError("vocabulary: token ids are not dense at position " + std::to_string(i));
    if (e.document_frequency < 1 || e.document_frequency > n_documents_ || e.corpus_frequency < e.document_frequency) {
      throw LoadError("vocabulary: inconsistent frequencies for '" + e.token + "'");
    }
    if (!index_.emplace(e.token, e.id).second) throw LoadError("vocabulary: duplicate token '" + e.token + "'");
  }
}

std::optional<TokenId> Vocabulary::find(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (const auto id = find(t)) ids.push_back(*id);
  }
  return ids;
}

Vocabulary build_vocabulary(std::span<const TokenizedDocument> docs, std::uint64_t min_count) {
  if (docs.empty()) throw DomainError("build_vocabulary: empty document list");
  if (min_count < 1) throw DomainError("build_vocabulary: min_count must be positive");

  struct Counts {
    std::uint64_t cf = 0;
    std::uint64_t df = 0;
    std::size_t last_doc = SIZE_MAX;
  };
  std::unordered_map<std::string, Counts> counts;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& token : docs[d].tokens) {
      auto& c = counts[token];
      ++c.cf;
      if (c.last_doc != d) {
        ++c.df;
        c.last_doc = d;
      }
    }
  }

  std::vector<VocabEntry> entries;
  for (auto& [token, c] : counts) {
    if (c.cf >= min_count) entries.push_back({token, 0, c.cf, c.df});
  }
  std::sort(entries.begin(), entries.end(), [](const VocabEntry& a, const VocabEntry& b) {
    if (a.corpus_frequency != b.corpus_frequency) return a.corpus_frequency > b.corpus_frequency;
    return a.token < b.token;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].id = static_cast<TokenId>(i);
  return Vocabulary(std::move(entries), docs.size(), min_count);
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  nlohmann::ordered_json header;
  header["n_documents"] = vocab.n_documents();
  header["min_count"] = vocab.min_count();
  header["size"] = vocab.size();
  out << header.dump() << '\n';
  for (const auto& e : vocab.entries()) {
    nlohmann::ordered_json line;
    line["token"] = e.token;
    line["token_id"] = e.id;
    line["corpus_frequency"] = e.corpus_frequency;
    line["document_frequency"] = e.document_frequency;
    out << line.dump() << '\n';
  }
}

Vocabulary read_vocabulary(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw LoadError("vocabulary: missing header line");
  std::uint64_t n_documents = 0;
  std::uint64_t min_count = 0;
  std::uint64_t size = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    n_documents = header.at("n_documents").get<std::uint64_t>();
    min_count = header.at("min_count").get<std::uint64_t>();
    size = header.at("size").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("vocabulary header: ") + e.what());
  }

  std::vector<VocabEntry> entries;
  entries.reserve(size);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      entries.push_back({j.at("token").get<std::string>(), j.at("token_id").get<TokenId>(),
                         j.at("corpus_frequency").get<std::uint64_t>(), j.at("document_frequency").get<std::uint64_t>()});
    } catch (const nlohmann::json::exception& e) {
      throw LoadError("vocabulary line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (entries.size() != size) throw LoadError("vocabulary: header size disagrees with entry count");
  return Vocabulary(std::move(entries), n_documents, min_count);
}

}  // namespace newsclust
