#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "newsclust/text.hpp"

namespace newsclust {

// tf * ln(n_docs / df). Throws DomainError unless 1 <= df <= n_docs.
double tf_idf_weight(std::uint64_t tf, std::uint64_t df, std::uint64_t n_docs);

struct TfIdfWeights {
  std::string doc_id;
  std::map<TokenId, double> weights;
  std::map<TokenId, std::uint64_t> tf;
};

// Only in-vocabulary tokens are counted.
TfIdfWeights document_tf_idf(const TokenizedDocument& doc, const Vocabulary& vocab);

// Max-shifted softmax. Throws DomainError on empty or non-finite input.
std::vector<double> softmax_weights(std::span<const double> weights);

// Up to k token ids by descending weight, ties by ascending id.
std::vector<TokenId> top_k_tokens(const std::map<TokenId, double>& weights, std::size_t k);
std::vector<TokenId> top_k_tokens(const TfIdfWeights& weights, std::size_t k);

}  // namespace newsclust
