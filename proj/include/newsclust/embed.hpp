#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "newsclust/matrix.hpp"
#include "newsclust/text.hpp"
#include "newsclust/weighting.hpp"

namespace newsclust {

struct DocumentEmbedding {
  std::string doc_id;
  std::vector<double> vector;
  std::string method_tag;
};

// Static word vectors, e.g. GloVe.
struct WordVectorTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;

  const std::vector<double>* find(const std::string& token) const;
};

// Whitespace-separated text: a token followed by its components, one token
// per line. The first line fixes the dimension.
WordVectorTable read_word_vectors(std::istream& in, std::string_view source_name = "<stream>");
WordVectorTable load_word_vectors(const std::filesystem::path& path);

enum class WordVectorStrategy { Mean, SoftmaxTfIdf, TopKTfIdf };

struct WordVectorAggregation {
  WordVectorStrategy strategy = WordVectorStrategy::Mean;
  std::size_t k = 20;  // TopKTfIdf only

  std::string tag() const;
};

// Occurrence accounting for the word-vector route.
struct SkipStats {
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// Mean averages every in-table occurrence. SoftmaxTfIdf weights each
// occurrence by the softmax of its type's tf-idf (softmax taken over the
// document's in-table, in-vocabulary types). TopKTfIdf averages the vectors of
// the k highest-weighted in-table types, once per type.
//
// Tokens that cannot contribute are skipped and counted in stats. Throws
// EmptyEmbedding when nothing contributes.
DocumentEmbedding embed_from_word_vectors(const TokenizedDocument& doc, const WordVectorTable& table,
                                          const Vocabulary& vocab, const TfIdfWeights& weights,
                                          const WordVectorAggregation& aggregation, SkipStats* stats = nullptr);

// Per-occurrence weights used by SoftmaxTfIdf, in token order; zero for
// occurrences that do not contribute. Contributing weights sum to one.
std::vector<double> softmax_tf_idf_occurrence_weights(const TokenizedDocument& doc, const WordVectorTable& table,
                                                      const Vocabulary& vocab, const TfIdfWeights& weights);

// Contextual token vectors exported from a sequence model.
struct TokenVectorSequence {
  std::string doc_id;
  std::string model_tag;
  bool special_first = false;  // position 0 is a sentence-level vector
  Matrix<double> vectors;      // one row per position
};

// Parses one interchange record:
//   {"doc_id": str, "model_tag": str, "special_first": bool, "vectors": [[float, ...], ...]}
TokenVectorSequence parse_token_vector_record(std::string_view line, std::string_view where = "<record>");

// Streams records from a line-delimited JSON file, optionally gzip-compressed
// (detected from the magic bytes).
class TokenVectorReader {
 public:
  explicit TokenVectorReader(const std::filesystem::path& path);
  ~TokenVectorReader();
  TokenVectorReader(const TokenVectorReader&) = delete;
  TokenVectorReader& operator=(const TokenVectorReader&) = delete;

  std::optional<TokenVectorSequence> next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<TokenVectorSequence> load_token_vectors(const std::filesystem::path& path);

enum class ContextualMode { FirstVector, PrefixMean };

struct ContextualAggregation {
  ContextualMode mode = ContextualMode::PrefixMean;
  std::size_t n = 144;  // PrefixMean only

  std::string tag() const;
};

// FirstVector returns position 0. PrefixMean(n) averages the first n content
// vectors; position 0 is not content when special_first is set.
DocumentEmbedding aggregate_contextual(const TokenVectorSequence& seq, const ContextualAggregation& aggregation);

// A method's embeddings for many documents, row-aligned with doc_ids.
struct EmbeddingSet {
  std::string method_tag;
  std::vector<std::string> doc_ids;
  Matrix<double> vectors;

  static EmbeddingSet from_embeddings(const std::vector<DocumentEmbedding>& embeddings);
  std::unordered_map<std::string, DocumentEmbedding> by_id() const;
};

// Stored in the matrix container as 32-bit floats.
void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);
EmbeddingSet load_embeddings(const std::filesystem::path& path);

}  // namespace newsclust
