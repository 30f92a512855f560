#include "newsclust/embed.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

#include "newsclust/container.hpp"
#include "newsclust/error.hpp"

namespace newsclust {
namespace {

bool parse_double(std::string_view field, double& out) {
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

void check_finite(const std::vector<double>& v, const std::string& what) {
  for (const double x : v) {
    if (!std::isfinite(x)) throw DomainError(what + ": non-finite embedding component");
  }
}

std::vector<double> mean_of_rows(const Matrix<double>& m, std::size_t begin, std::size_t end) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = begin; r < end; ++r) {
    const auto row = m.row(r);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j];
  }
  const auto count = static_cast<double>(end - begin);
  for (double& x : out) x /= count;
  return out;
}

}  // namespace

const std::vector<double>* WordVectorTable::find(const std::string& token) const {
  const auto it = vectors.find(token);
  return it == vectors.end() ? nullptr : &it->second;
}

WordVectorTable read_word_vectors(std::istream& in, std::string_view source_name) {
  WordVectorTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no) + ": ";
    if (fields.size() < 2) throw LoadError(where + "expected a token followed by at least one number");
    if (table.dim == 0) table.dim = fields.size() - 1;
    if (fields.size() - 1 != table.dim) {
      throw LoadError(where + "expected " + std::to_string(table.dim) + " components, found " +
                      std::to_string(fields.size() - 1));
    }
    std::vector<double> vec(table.dim);
    for (std::size_t j = 0; j < table.dim; ++j) {
      if (!parse_double(fields[j + 1], vec[j]) || !std::isfinite(vec[j])) {
        throw LoadError(where + "non-numeric component '" + std::string(fields[j + 1]) + "'");
      }
    }
    std::string token(fields[0]);
    if (!table.vectors.emplace(token, std::move(vec)).second) throw LoadError(where + "duplicate token '" + token + "'");
  }
  if (in.bad()) throw LoadError(std::string(source_name) + ": read error");
  return table;
}

WordVectorTable load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open word vectors '" + path.string() + "'");
  return read_word_vectors(in, path.string());
}

std::string WordVectorAggregation::tag() const {
  switch (strategy) {
    case WordVectorStrategy::Mean:
      return "wordvec-mean";
    case WordVectorStrategy::SoftmaxTfIdf:
      return "wordvec-softmax-tfidf";
    case WordVectorStrategy::TopKTfIdf:
      return "wordvec-top" + std::to_string(k) + "-tfidf";
  }
  return "wordvec";
}

std::vector<double> softmax_tf_idf_occurrence_weights(const TokenizedDocument& doc, const WordVectorTable& table,
                                                      const Vocabulary& vocab, const TfIdfWeights& weights) {
  // Contributing types, in token-id order.
  std::vector<TokenId> types;
  std::vector<double> type_weights;
  for (const auto& [id, w] : weights.weights) {
    if (table.find(vocab.entry(id).token)) {
      types.push_back(id);
      type_weights.push_back(w);
    }
  }
  std::vector<double> out(doc.tokens.size(), 0.0);
  if (types.empty()) return out;

  const auto softmax = softmax_weights(type_weights);
  std::unordered_map<TokenId, double> per_type;
  double total = 0.0;
  for (std::size_t i = 0; i < types.size(); ++i) {
    per_type.emplace(types[i], softmax[i]);
    total += softmax[i] * static_cast<double>(weights.tf.at(types[i]));
  }
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const auto id = vocab.find(doc.tokens[i]);
    if (!id) continue;
    const auto it = per_type.find(*id);
    if (it != per_type.end()) out[i] = it->second / total;
  }
  return out;
}

DocumentEmbedding embed_from_word_vectors(const TokenizedDocument& doc, const WordVectorTable& table,
                                          const Vocabulary& vocab, const TfIdfWeights& weights,
                                          const WordVectorAggregation& aggregation, SkipStats* stats) {
  DocumentEmbedding result{doc.doc_id, std::vector<double>(table.dim, 0.0), aggregation.tag()};
  std::size_t used = 0;

  switch (aggregation.strategy) {
    case WordVectorStrategy::Mean: {
      for (const auto& token : doc.tokens) {
        const auto* v = table.find(token);
        if (!v) continue;
        for (std::size_t j = 0; j < table.dim; ++j) result.vector[j] += (*v)[j];
        ++used;
      }
      if (used > 0) {
        for (double& x : result.vector) x /= static_cast<double>(used);
      }
      break;
    }
    case WordVectorStrategy::SoftmaxTfIdf: {
      const auto occ = softmax_tf_idf_occurrence_weights(doc, table, vocab, weights);
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        if (occ[i] <= 0.0) continue;
        const auto* v = table.find(doc.tokens[i]);
        for (std::size_t j = 0; j < table.dim; ++j) result.vector[j] += occ[i] * (*v)[j];
        ++used;
      }
      break;
    }
    case WordVectorStrategy::TopKTfIdf: {
      if (aggregation.k < 1) throw DomainError("TopKTfIdf requires k >= 1");
      std::map<TokenId, double> in_table;
      for (const auto& [id, w] : weights.weights) {
        if (table.find(vocab.entry(id).token)) in_table.emplace(id, w);
      }
      const auto top = top_k_tokens(in_table, aggregation.k);
      for (const TokenId id : top) {
        const auto& v = *table.find(vocab.entry(id).token);
        for (std::size_t j = 0; j < table.dim; ++j) result.vector[j] += v[j];
      }
      if (!top.empty()) {
        for (double& x : result.vector) x /= static_cast<double>(top.size());
      }
      for (const auto& token : doc.tokens) {
        const auto id = vocab.find(token);
        if (id && in_table.count(*id)) ++used;
      }
      break;
    }
  }

  if (stats) {
    stats->used += used;
    stats->skipped += doc.tokens.size() - used;
  }
  if (used == 0) throw EmptyEmbedding("document '" + doc.doc_id + "' has no tokens in the word-vector table");
  check_finite(result.vector, doc.doc_id);
  return result;
}

TokenVectorSequence parse_token_vector_record(std::string_view line, std::string_view where) {
  const std::string prefix = std::string(where) + ": ";
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(prefix + "malformed record: " + e.what());
  }
  if (!record.is_object()) throw LoadError(prefix + "record is not a JSON object");
  if (!record.contains("doc_id") || !record["doc_id"].is_string()) throw LoadError(prefix + "missing string 'doc_id'");
  if (!record.contains("model_tag") || !record["model_tag"].is_string()) {
    throw LoadError(prefix + "missing string 'model_tag'");
  }
  if (!record.contains("special_first") || !record["special_first"].is_boolean()) {
    throw LoadError(prefix + "missing boolean 'special_first'");
  }
  if (!record.contains("vectors") || !record["vectors"].is_array()) throw LoadError(prefix + "missing array 'vectors'");

  const auto& vectors = record["vectors"];
  if (vectors.empty()) throw LoadError(prefix + "empty 'vectors'");
  if (!vectors[0].is_array() || vectors[0].empty()) throw LoadError(prefix + "vector 0 is not a non-empty array");
  const std::size_t dim = vectors[0].size();

  TokenVectorSequence seq;
  seq.doc_id = record["doc_id"].get<std::string>();
  seq.model_tag = record["model_tag"].get<std::string>();
  seq.special_first = record["special_first"].get<bool>();
  seq.vectors = Matrix<double>(vectors.size(), dim);
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    const auto& v = vectors[r];
    if (!v.is_array() || v.size() != dim) {
      throw LoadError(prefix + "vector " + std::to_string(r) + " has dimension " +
                      std::to_string(v.is_array() ? v.size() : 0) + ", expected " + std::to_string(dim));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      if (!v[j].is_number()) throw LoadError(prefix + "non-numeric component in vector " + std::to_string(r));
      seq.vectors(r, j) = v[j].get<double>();
    }
  }
  return seq;
}

struct TokenVectorReader::Impl {
  gzFile file = nullptr;
  std::string name;
  std::size_t line_no = 0;
  std::vector<char> buffer = std::vector<char>(1 << 16);

  // Reads one full line (without the newline). False at end of file.
  bool read_line(std::string& line) {
    line.clear();
    while (true) {
      if (gzgets(file, buffer.data(), static_cast<int>(buffer.size())) == nullptr) {
        int err = Z_OK;
        const char* msg = gzerror(file, &err);
        if (err != Z_OK && err != Z_BUF_ERROR) throw LoadError(name + ": decompression error: " + msg);
        return !line.empty();
      }
      line.append(buffer.data());
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        return true;
      }
    }
  }
};

TokenVectorReader::TokenVectorReader(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->name = path.string();
  impl_->file = gzopen(impl_->name.c_str(), "rb");
  if (!impl_->file) throw LoadError("cannot open token vectors '" + impl_->name + "'");
}

TokenVectorReader::~TokenVectorReader() {
  if (impl_ && impl_->file) gzclose(impl_->file);
}

std::optional<TokenVectorSequence> TokenVectorReader::next() {
  std::string line;
  while (impl_->read_line(line)) {
    ++impl_->line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    return parse_token_vector_record(line, impl_->name + ":" + std::to_string(impl_->line_no));
  }
  return std::nullopt;
}

std::vector<TokenVectorSequence> load_token_vectors(const std::filesystem::path& path) {
  TokenVectorReader reader(path);
  std::vector<TokenVectorSequence> out;
  while (auto seq = reader.next()) out.push_back(std::move(*seq));
  return out;
}

std::string ContextualAggregation::tag() const {
  return mode == ContextualMode::FirstVector ? "first-vector" : "prefix-mean-" + std::to_string(n);
}

DocumentEmbedding aggregate_contextual(const TokenVectorSequence& seq, const ContextualAggregation& aggregation) {
  if (seq.vectors.rows() == 0) throw EmptyEmbedding("document '" + seq.doc_id + "' has no token vectors");
  const std::string tag = seq.model_tag.empty() ? aggregation.tag() : seq.model_tag + "/" + aggregation.tag();
  DocumentEmbedding result{seq.doc_id, {}, tag};

  if (aggregation.mode == ContextualMode::FirstVector) {
    const auto row = seq.vectors.row(0);
    result.vector.assign(row.begin(), row.end());
  } else {
    if (aggregation.n < 1) throw DomainError("PrefixMean requires n >= 1");
    const std::size_t begin = seq.special_first ? 1 : 0;
    const std::size_t available = seq.vectors.rows() - begin;
    if (available == 0) throw EmptyEmbedding("document '" + seq.doc_id + "' has no content vectors");
    result.vector = mean_of_rows(seq.vectors, begin, begin + std::min(aggregation.n, available));
  }
  check_finite(result.vector, seq.doc_id);
  return result;
}

EmbeddingSet EmbeddingSet::from_embeddings(const std::vector<DocumentEmbedding>& embeddings) {
  EmbeddingSet set;
  if (embeddings.empty()) return set;
  set.method_tag = embeddings.front().method_tag;
  const std::size_t dim = embeddings.front().vector.size();
  set.vectors = Matrix<double>(embeddings.size(), dim);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto& e = embeddings[i];
    if (e.vector.size() != dim) throw DomainError("embedding '" + e.doc_id + "' has a different dimension");
    if (e.method_tag != set.method_tag) throw DomainError("embedding '" + e.doc_id + "' has a different method tag");
    set.doc_ids.push_back(e.doc_id);
    std::copy(e.vector.begin(), e.vector.end(), set.vectors.row(i).begin());
  }
  return set;
}

std::unordered_map<std::string, DocumentEmbedding> EmbeddingSet::by_id() const {
  std::unordered_map<std::string, DocumentEmbedding> out;
  out.reserve(doc_ids.size());
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    const auto row = vectors.row(i);
    out.emplace(doc_ids[i], DocumentEmbedding{doc_ids[i], {row.begin(), row.end()}, method_tag});
  }
  return out;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  Container c;
  c.meta["kind"] = "embeddings";
  c.meta["method_tag"] = set.method_tag;
  c.meta["dim"] = set.vectors.cols();
  c.meta["count"] = set.doc_ids.size();
  c.meta["doc_ids"] = set.doc_ids;
  Matrix<float> values(set.vectors.rows(), set.vectors.cols());
  for (std::size_t i = 0; i < values.values().size(); ++i) values.values()[i] = static_cast<float>(set.vectors.values()[i]);
  c.matrices.push_back({"embeddings", std::move(values)});
  write_container(path, c);
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  const Container c = read_container(path);
  const std::string where = path.string() + ": ";
  if (c.meta.value("kind", std::string{}) != "embeddings") throw LoadError(where + "not an embeddings container");
  EmbeddingSet set;
  try {
    set.method_tag = c.meta.at("method_tag").get<std::string>();
    set.doc_ids = c.meta.at("doc_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(where + "malformed header: " + e.what());
  }
  const auto& m = c.matrix("embeddings");
  if (m.rows() != set.doc_ids.size()) throw LoadError(where + "row count disagrees with doc_ids");
  set.vectors = Matrix<double>(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.values().size(); ++i) set.vectors.values()[i] = m.values()[i];
  return set;
}

}  // namespace newsclust
