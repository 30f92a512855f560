#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace newsclust {

using TokenId = std::uint32_t;

// Number of Unicode scalar values in a UTF-8 string. Ill-formed sequences
// count one per maximal invalid subpart.
std::size_t count_scalar_values(std::string_view utf8);

// Simple case folding followed by a split into maximal runs of letters and
// decimal digits. Everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

struct TokenizedDocument {
  std::string doc_id;
  std::vector<std::string> tokens;
};

struct VocabEntry {
  std::string token;
  TokenId id = 0;
  std::uint64_t corpus_frequency = 0;
  std::uint64_t document_frequency = 0;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  // entries must be indexed by id (entries[i].id == i); checked.
  Vocabulary(std::vector<VocabEntry> entries, std::uint64_t n_documents, std::uint64_t min_count);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::uint64_t n_documents() const { return n_documents_; }
  std::uint64_t min_count() const { return min_count_; }

  const std::vector<VocabEntry>& entries() const { return entries_; }
  const VocabEntry& entry(TokenId id) const { return entries_.at(id); }
  std::optional<TokenId> find(const std::string& token) const;

  // In-vocabulary token ids of a token list, in order; OOV tokens dropped.
  std::vector<TokenId> encode(std::span<const std::string> tokens) const;

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, TokenId> index_;
  std::uint64_t n_documents_ = 0;
  std::uint64_t min_count_ = 1;
};

// Ids are dense and assigned by descending corpus frequency, ties broken by
// byte-wise token order. Throws DomainError on an empty document list.
Vocabulary build_vocabulary(std::span<const TokenizedDocument> docs, std::uint64_t min_count);

// Line-delimited JSON: a header {"n_documents", "min_count", "size"} followed
// by one {"token", "token_id", "corpus_frequency", "document_frequency"} per line.
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocabulary(std::istream& in);

}  // namespace newsclust
