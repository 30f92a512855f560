#include "support/synthetic.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace newsclust::testing {

TopicCorpus make_topic_corpus(std::size_t n_docs, std::size_t n_topics, std::size_t words_per_topic,
                              std::size_t doc_length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> word(0, words_per_topic - 1);
  TopicCorpus tc;
  for (std::size_t d = 0; d < n_docs; ++d) {
    const std::size_t topic = d % n_topics;
    TokenizedDocument doc{"doc" + std::to_string(d), {}};
    for (std::size_t i = 0; i < doc_length; ++i) {
      doc.tokens.push_back("t" + std::to_string(topic) + "w" + std::to_string(word(rng)));
    }
    tc.docs.push_back(std::move(doc));
    tc.topics.push_back(static_cast<std::uint32_t>(topic));
  }
  return tc;
}

Corpus topic_corpus_as_corpus(const TopicCorpus& tc) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < tc.docs.size(); ++i) {
    Document doc;
    doc.id = tc.docs[i].doc_id;
    doc.source = "synthetic";
    doc.category = kAllCategories.at(tc.topics[i]);
    doc.raw_category = std::string(category_name(doc.category));
    for (const auto& t : tc.docs[i].tokens) doc.text += (doc.text.empty() ? "" : " ") + t;
    doc.char_count = count_scalar_values(doc.text);
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

Blobs make_blobs(std::size_t n_blobs, std::size_t per_blob, std::size_t dim, double separation, std::uint64_t seed) {
  if (dim < n_blobs) throw std::invalid_argument("make_blobs: dim must be >= n_blobs");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double radius = separation / std::sqrt(2.0);
  Blobs b;
  b.points = Matrix<double>(n_blobs * per_blob, dim);
  std::size_t r = 0;
  for (std::size_t c = 0; c < n_blobs; ++c) {
    for (std::size_t i = 0; i < per_blob; ++i, ++r) {
      for (std::size_t j = 0; j < dim; ++j) b.points(r, j) = (j == c ? radius : 0.0) + noise(rng);
      b.labels.push_back(static_cast<std::uint32_t>(c));
    }
  }
  return b;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("newsclust-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace newsclust::testing
