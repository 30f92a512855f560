#include "newsclust/weighting.hpp"

#include <algorithm>
#include <cmath>

#include "newsclust/error.hpp"

namespace newsclust {

double tf_idf_weight(std::uint64_t tf, std::uint64_t df, std::uint64_t n_docs) {
  if (df == 0 || df > n_docs) {
    throw DomainError("tf_idf_weight: need 1 <= df <= n_docs (df=" + std::to_string(df) +
                      ", n_docs=" + std::to_string(n_docs) + ")");
  }
  if (tf == 0 || df == n_docs) return 0.0;
  return static_cast<double>(tf) * std::log(static_cast<double>(n_docs) / static_cast<double>(df));
}

TfIdfWeights document_tf_idf(const TokenizedDocument& doc, const Vocabulary& vocab) {
  TfIdfWeights result;
  result.doc_id = doc.doc_id;
  for (const TokenId id : vocab.encode(doc.tokens)) ++result.tf[id];
  for (const auto& [id, tf] : result.tf) {
    result.weights.emplace(id, tf_idf_weight(tf, vocab.entry(id).document_frequency, vocab.n_documents()));
  }
  return result;
}

std::vector<double> softmax_weights(std::span<const double> weights) {
  if (weights.empty()) throw DomainError("softmax_weights: empty input");
  double max = weights[0];
  for (const double w : weights) {
    if (!std::isfinite(w)) throw DomainError("softmax_weights: non-finite input");
    max = std::max(max, w);
  }
  std::vector<double> out(weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = std::exp(weights[i] - max);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<TokenId> top_k_tokens(const std::map<TokenId, double>& weights, std::size_t k) {
  std::vector<std::pair<TokenId, double>> ranked(weights.begin(), weights.end());
  const auto take = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(),
                    [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  std::vector<TokenId> ids;
  ids.reserve(take);
  for (std::size_t i = 0; i < take; ++i) ids.push_back(ranked[i].first);
  return ids;
}

std::vector<TokenId> top_k_tokens(const TfIdfWeights& weights, std::size_t k) {
  return top_k_tokens(weights.weights, k);
}

}  // namespace newsclust
