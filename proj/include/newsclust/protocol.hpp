#pragma once

// Repeated stratified-sample clustering experiments.
//
// Run r uses seed base_seed + r both for drawing its stratified sample and for
// seeding k-means, so every method evaluated under the same base seed sees
// the same documents and the same initialisation stream.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "newsclust/cluster.hpp"
#include "newsclust/corpus.hpp"
#include "newsclust/embed.hpp"
#include "newsclust/random.hpp"

namespace newsclust {

// Describes where a method's embeddings came from; only used for labelling.
struct MethodSpec {
  std::string source;       // e.g. "pvdbow", "wordvec", "contextual"
  std::string aggregation;  // e.g. "softmax-tfidf", "prefix-mean-144"
  std::string tag_override;

  std::string tag() const;
};

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  std::size_t per_category = 125;
  std::size_t runs = 50;
  std::size_t k = 12;
  std::uint64_t base_seed = 0;
  MethodSpec method;
  KMeansConfig kmeans;  // k and seed are overwritten per run
  std::vector<CategoryLabel> categories{kAllCategories.begin(), kAllCategories.end()};
  unsigned threads = 1;         // runs executed concurrently
  bool record_samples = false;  // keep each run's sampled ids in the result

  void validate() const;
};

// Parses the experiment config file. base_seed is required.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct RunRecord {
  std::size_t run_index = 0;
  double mcc = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  std::string experiment_id;
  std::string method_tag;
  std::vector<RunRecord> per_run;
  double mean_mcc = 0.0;
  double std_mcc = 0.0;  // sample standard deviation; 0 for a single run
  std::size_t excluded_documents = 0;  // in-scope documents without an embedding
  std::vector<std::vector<std::string>> samples;  // filled when record_samples is set
};

// Draws per_category ids without replacement from each category, categories
// in enum order, result category-major. Documents rejected by `eligible` are
// not drawn. Throws SamplingError naming the first short category.
std::vector<std::string> stratified_sample(const Corpus& corpus, std::size_t per_category, Rng& rng,
                                           std::span<const CategoryLabel> categories = kAllCategories,
                                           const std::function<bool(const Document&)>& eligible = {});

ExperimentResult run_experiment(const Corpus& corpus, const std::unordered_map<std::string, DocumentEmbedding>& embeddings,
                                const ExperimentConfig& config);

// Mean and sample standard deviation.
std::pair<double, double> mean_and_std(std::span<const double> values);

struct SummaryRow {
  std::string method_tag;
  double mean_mcc = 0.0;
  double std_mcc = 0.0;
  std::size_t runs = 0;
};

struct Report {
  std::vector<SummaryRow> rows;  // descending mean, ties by method tag

  std::string csv() const;    // method_tag,mean_mcc,std_mcc,runs
  std::string table() const;  // aligned text
};

Report summarize(std::span<const ExperimentResult> results);

// experiment_id,method_tag,run_index,seed,mcc
void write_runs_csv(std::ostream& out, std::span<const ExperimentResult> results);
// Groups rows by (experiment_id, method_tag) and recomputes mean/std.
std::vector<ExperimentResult> read_runs_csv(std::istream& in);

}  // namespace newsclust
