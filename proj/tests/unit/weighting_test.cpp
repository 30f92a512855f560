#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "newsclust/error.hpp"
#include "newsclust/weighting.hpp"

using namespace newsclust;

TEST(TfIdf, Examples) {
  EXPECT_DOUBLE_EQ(tf_idf_weight(2, 1, 2), 2.0 * std::log(2.0));
  EXPECT_EQ(tf_idf_weight(5, 10, 10), 0.0);
  EXPECT_EQ(tf_idf_weight(0, 1, 10), 0.0);
}

TEST(TfIdf, DomainErrors) {
  EXPECT_THROW(tf_idf_weight(1, 0, 10), DomainError);
  EXPECT_THROW(tf_idf_weight(1, 11, 10), DomainError);
  EXPECT_THROW(tf_idf_weight(1, 0, 0), DomainError);
}

TEST(TfIdf, LinearInTermFrequency) {
  for (std::uint64_t tf = 1; tf < 20; ++tf)
    EXPECT_NEAR(tf_idf_weight(tf, 3, 17), static_cast<double>(tf) * tf_idf_weight(1, 3, 17), 1e-12);
}

TEST(TfIdf, NonNegativeAndDecreasingInDf) {
  for (std::uint64_t df = 1; df < 50; ++df) {
    EXPECT_GE(tf_idf_weight(3, df, 50), 0.0);
    EXPECT_GE(tf_idf_weight(3, df, 50), tf_idf_weight(3, df + 1, 50));
  }
}

TEST(DocumentTfIdf, SmallExample) {
  const std::vector<TokenizedDocument> docs = {{"d0", {"a", "a", "b"}}, {"d1", {"b"}}};
  const Vocabulary v = build_vocabulary(docs, 1);
  const TfIdfWeights w = document_tf_idf(docs[0], v);
  const TokenId a = *v.find("a");
  const TokenId b = *v.find("b");
  EXPECT_EQ(w.doc_id, "d0");
  EXPECT_EQ(w.tf.at(a), 2u);
  EXPECT_EQ(w.tf.at(b), 1u);
  EXPECT_DOUBLE_EQ(w.weights.at(a), 2.0 * std::log(2.0));
  EXPECT_EQ(w.weights.at(b), 0.0);
}

TEST(DocumentTfIdf, OutOfVocabularyIgnored) {
  const std::vector<TokenizedDocument> docs = {{"d0", {"a"}}, {"d1", {"a"}}};
  const Vocabulary v = build_vocabulary(docs, 1);
  const TfIdfWeights w = document_tf_idf({"x", {"zz", "yy"}}, v);
  EXPECT_TRUE(w.weights.empty());
  EXPECT_TRUE(w.tf.empty());
}

TEST(Softmax, Uniform) {
  const std::vector<double> in = {1, 1, 1};
  for (double p : softmax_weights(in)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LogTwo) {
  const std::vector<double> in = {0.0, std::log(2.0)};
  const auto p = softmax_weights(in);
  EXPECT_NEAR(p[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 3.0, 1e-15);
}

TEST(Softmax, Errors) {
  EXPECT_THROW(softmax_weights(std::vector<double>{}), DomainError);
  EXPECT_THROW(softmax_weights(std::vector<double>{1.0, NAN}), DomainError);
  EXPECT_THROW(softmax_weights(std::vector<double>{INFINITY}), DomainError);
}

TEST(Softmax, LargeInputsStayFinite) {
  const auto p = softmax_weights(std::vector<double>{1000.0, 1000.0, -1000.0});
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[2], 0.0, 1e-15);
}

TEST(SoftmaxProperty, SumsToOneAndShiftInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-30.0, 30.0);
  std::uniform_int_distribution<int> len(1, 40);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(len(rng)));
    for (auto& x : w) x = val(rng);
    const double c = val(rng);
    std::vector<double> shifted = w;
    for (auto& x : shifted) x += c;
    const auto p = softmax_weights(w);
    const auto q = softmax_weights(shifted);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_GE(p[i], 0.0);
      EXPECT_NEAR(p[i], q[i], 1e-12);
      sum += p[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(TopK, OrdersByWeightThenId) {
  const std::map<TokenId, double> w = {{0, 1.0}, {1, 3.0}, {2, 3.0}, {3, 2.0}};
  EXPECT_EQ(top_k_tokens(w, 2), (std::vector<TokenId>{1, 2}));
  EXPECT_EQ(top_k_tokens(w, 3), (std::vector<TokenId>{1, 2, 3}));
  EXPECT_EQ(top_k_tokens(w, 10), (std::vector<TokenId>{1, 2, 3, 0}));
  EXPECT_TRUE(top_k_tokens(w, 0).empty());
}

TEST(TopKProperty, PrefixMonotone) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> val(0, 5);
  std::map<TokenId, double> w;
  for (TokenId i = 0; i < 60; ++i) w[i] = val(rng) * 0.5;
  const auto all = top_k_tokens(w, w.size());
  for (std::size_t k = 0; k <= w.size(); ++k) {
    const auto part = top_k_tokens(w, k);
    ASSERT_EQ(part.size(), k);
    EXPECT_TRUE(std::equal(part.begin(), part.end(), all.begin()));
  }
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_GE(w[all[i - 1]], w[all[i]]);
}
