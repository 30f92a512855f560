#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "newsclust/error.hpp"
#include "newsclust/protocol.hpp"
#include "support/synthetic.hpp"

using namespace newsclust;

namespace {

Corpus toy_corpus(std::size_t per_category, std::size_t n_categories = kCategoryCount) {
  std::vector<Document> docs;
  for (std::size_t c = 0; c < n_categories; ++c)
    for (std::size_t i = 0; i < per_category; ++i) {
      Document d;
      d.id = "c" + std::to_string(c) + "d" + std::to_string(i);
      d.category = kAllCategories[c];
      d.text = "x";
      docs.push_back(d);
    }
  return Corpus(std::move(docs));
}

// Noisy one-hot embeddings per category.
std::unordered_map<std::string, DocumentEmbedding> noisy_embeddings(const Corpus& corpus, double noise, std::uint64_t seed) {
  Rng rng(seed);
  std::unordered_map<std::string, DocumentEmbedding> out;
  for (const auto& doc : corpus.documents()) {
    std::vector<double> v(kCategoryCount);
    for (auto& x : v) x = noise * (rng.uniform() - 0.5);
    v[static_cast<std::size_t>(doc.category)] += 1.0;
    out[doc.id] = {doc.id, v, "synthetic"};
  }
  return out;
}

ExperimentConfig three_category_config() {
  ExperimentConfig c;
  c.categories = {CategoryLabel::LithuanianNews, CategoryLabel::WorldNews, CategoryLabel::Crime};
  c.k = 3;
  c.per_category = 10;
  c.runs = 6;
  c.base_seed = 1000;
  c.record_samples = true;
  return c;
}

}  // namespace

TEST(StratifiedSample, FullScale) {
  const Corpus corpus = toy_corpus(130);
  Rng rng(0);
  const auto ids = stratified_sample(corpus, 125, rng);
  EXPECT_EQ(ids.size(), 1500u);
}

TEST(StratifiedSample, CategoryMajorWithoutReplacement) {
  const Corpus corpus = toy_corpus(5);
  Rng rng(1);
  const auto ids = stratified_sample(corpus, 2, rng);
  ASSERT_EQ(ids.size(), 24u);
  for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(corpus.at(ids[i]).category, kAllCategories[i / 2]);
  for (std::size_t c = 0; c < 12; ++c) EXPECT_NE(ids[2 * c], ids[2 * c + 1]);
}

TEST(StratifiedSample, ShortCategoryNamed) {
  std::vector<Document> docs = toy_corpus(2).documents();
  docs.erase(std::remove_if(docs.begin(), docs.end(), [](const Document& d) { return d.id == "c4d1"; }), docs.end());
  const Corpus corpus(docs);
  Rng rng(1);
  try {
    stratified_sample(corpus, 2, rng);
    FAIL();
  } catch (const SamplingError& e) {
    EXPECT_NE(std::string(e.what()).find("Cars"), std::string::npos) << e.what();
  }
}

TEST(StratifiedSample, RespectsEligibility) {
  const Corpus corpus = toy_corpus(4, 2);
  const std::vector<CategoryLabel> cats = {CategoryLabel::WorldNews, CategoryLabel::LithuanianNews};
  Rng rng(3);
  const auto ids = stratified_sample(corpus, 3, rng, cats, [](const Document& d) { return d.id.back() != '0'; });
  ASSERT_EQ(ids.size(), 6u);
  for (const auto& id : ids) EXPECT_NE(id.back(), '0');
  EXPECT_EQ(corpus.at(ids[0]).category, CategoryLabel::LithuanianNews);  // enum order regardless of input order
}

TEST(StratifiedSample, SeededDraws) {
  const Corpus corpus = toy_corpus(20);
  Rng a(5), b(5), c(6);
  const auto x = stratified_sample(corpus, 4, a);
  EXPECT_EQ(x, stratified_sample(corpus, 4, b));
  EXPECT_NE(x, stratified_sample(corpus, 4, c));
}

TEST(MeanAndStd, SampleDeviation) {
  const std::vector<double> v = {0.2, 0.3};
  const auto [mean, sd] = mean_and_std(v);
  EXPECT_NEAR(mean, 0.25, 1e-15);
  EXPECT_NEAR(sd, 0.070710678118654752, 1e-12);
  const std::vector<double> one = {0.4};
  EXPECT_EQ(mean_and_std(one).second, 0.0);
}

TEST(ExperimentConfig, Validation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.k = 3;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.runs = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.per_category = 0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(ExperimentConfig, FromJson) {
  const auto j = nlohmann::json::parse(R"({
    "experiment_id": "toy", "per_category": 7, "runs": 3, "base_seed": 42,
    "categories": ["Crime", "Sports"],
    "method_spec": {"source": "wordvec", "aggregation": "softmax-tfidf"},
    "kmeans": {"max_iters": 50, "tol": 0.001, "metric": "euclidean"}
  })");
  const auto c = experiment_config_from_json(j);
  EXPECT_EQ(c.experiment_id, "toy");
  EXPECT_EQ(c.per_category, 7u);
  EXPECT_EQ(c.runs, 3u);
  EXPECT_EQ(c.base_seed, 42u);
  EXPECT_EQ(c.k, 2u);
  EXPECT_EQ(c.method.tag(), "wordvec/softmax-tfidf");
  EXPECT_EQ(c.kmeans.max_iters, 50u);
  EXPECT_EQ(c.kmeans.metric, Metric::Euclidean);
  const auto d = experiment_config_from_json(nlohmann::json::parse(R"({"base_seed": 1})"));
  EXPECT_EQ(d.per_category, 125u);
  EXPECT_EQ(d.runs, 50u);
  EXPECT_EQ(d.k, 12u);
  EXPECT_EQ(d.kmeans.metric, Metric::Spherical);
  EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"runs": 1})")), LoadError);
  EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"base_seed": 1, "categories": ["Nope"]})")),
               LoadError);
  EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"base_seed": 1, "k": 5})")), DomainError);
}

TEST(RunExperiment, DeterministicWithPerRunSeeds) {
  const Corpus corpus = toy_corpus(30, 3);
  const auto emb = noisy_embeddings(corpus, 0.3, 2);
  const auto cfg = three_category_config();
  const auto a = run_experiment(corpus, emb, cfg);
  const auto b = run_experiment(corpus, emb, cfg);
  ASSERT_EQ(a.per_run.size(), 6u);
  for (std::size_t r = 0; r < 6; ++r) {
    EXPECT_EQ(a.per_run[r].run_index, r);
    EXPECT_EQ(a.per_run[r].seed, 1000 + r);
    EXPECT_EQ(a.per_run[r].mcc, b.per_run[r].mcc);
    EXPECT_GT(a.per_run[r].mcc, 0.9);
  }
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.method_tag, "synthetic");
  EXPECT_EQ(a.mean_mcc, b.mean_mcc);
  EXPECT_EQ(a.std_mcc, b.std_mcc);
  auto parallel = cfg;
  parallel.threads = 4;
  const auto p = run_experiment(corpus, emb, parallel);
  for (std::size_t r = 0; r < 6; ++r) EXPECT_EQ(p.per_run[r].mcc, a.per_run[r].mcc);
  EXPECT_EQ(p.samples, a.samples);
}

TEST(RunExperiment, SamplesBalancedAndSharedAcrossMethods) {
  const Corpus corpus = toy_corpus(30, 3);
  const auto cfg = three_category_config();
  const auto a = run_experiment(corpus, noisy_embeddings(corpus, 0.3, 2), cfg);
  const auto b = run_experiment(corpus, noisy_embeddings(corpus, 5.0, 9), cfg);
  EXPECT_EQ(a.samples, b.samples);
  for (const auto& sample : a.samples) {
    std::map<CategoryLabel, std::size_t> counts;
    for (const auto& id : sample) ++counts[corpus.at(id).category];
    ASSERT_EQ(counts.size(), 3u);
    for (const auto& [label, n] : counts) EXPECT_EQ(n, 10u);
  }
  std::vector<double> values;
  for (const auto& r : a.per_run) values.push_back(r.mcc);
  double mean = 0;
  for (double v : values) mean += v / values.size();
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(a.mean_mcc, mean, 1e-12);
  EXPECT_NEAR(a.std_mcc, std::sqrt(ss / (values.size() - 1)), 1e-12);
}

TEST(RunExperiment, MissingEmbeddingsExcluded) {
  const Corpus corpus = toy_corpus(12, 3);
  auto emb = noisy_embeddings(corpus, 0.3, 2);
  emb.erase("c0d0");
  emb.erase("c1d3");
  const auto r = run_experiment(corpus, emb, three_category_config());
  EXPECT_EQ(r.excluded_documents, 2u);
  for (const auto& s : r.samples) {
    EXPECT_EQ(std::count(s.begin(), s.end(), "c0d0"), 0);
    EXPECT_EQ(std::count(s.begin(), s.end(), "c1d3"), 0);
  }
  emb.erase("c2d0");
  emb.erase("c2d1");
  emb.erase("c2d2");
  try {
    run_experiment(corpus, emb, three_category_config());
    FAIL();
  } catch (const SamplingError& e) {
    EXPECT_NE(std::string(e.what()).find("run 0"), std::string::npos) << e.what();
  }
}

TEST(RunExperiment, DefaultRunCount) {
  const Corpus corpus = toy_corpus(13);
  ExperimentConfig cfg;
  cfg.per_category = 12;
  cfg.base_seed = 7;
  const auto r = run_experiment(corpus, noisy_embeddings(corpus, 0.2, 1), cfg);
  EXPECT_EQ(r.per_run.size(), 50u);
}

TEST(Summarize, OrdersByMeanThenTag) {
  std::vector<ExperimentResult> results(3);
  results[0].method_tag = "glove";
  results[0].mean_mcc = 0.264;
  results[1].method_tag = "pvdbow";
  results[1].mean_mcc = 0.442;
  results[2].method_tag = "bert";
  results[2].mean_mcc = 0.264;
  const auto report = summarize(results);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].method_tag, "pvdbow");
  EXPECT_EQ(report.rows[1].method_tag, "bert");
  EXPECT_EQ(report.rows[2].method_tag, "glove");
  EXPECT_EQ(report.csv().substr(0, report.csv().find('\n')), "method_tag,mean_mcc,std_mcc,runs");
  EXPECT_NE(report.table().find("0.442"), std::string::npos);

  const auto single = summarize(std::span<const ExperimentResult>(results.data(), 1));
  EXPECT_EQ(single.rows.size(), 1u);
}

TEST(RunsCsv, RoundTrip) {
  const Corpus corpus = toy_corpus(20, 3);
  auto cfg = three_category_config();
  cfg.experiment_id = "exp,1";
  std::vector<ExperimentResult> results = {run_experiment(corpus, noisy_embeddings(corpus, 2.0, 4), cfg)};
  std::stringstream ss;
  write_runs_csv(ss, results);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "experiment_id,method_tag,run_index,seed,mcc");
  const auto back = read_runs_csv(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].experiment_id, "exp,1");
  ASSERT_EQ(back[0].per_run.size(), results[0].per_run.size());
  for (std::size_t r = 0; r < back[0].per_run.size(); ++r) {
    EXPECT_EQ(back[0].per_run[r].mcc, results[0].per_run[r].mcc);
    EXPECT_EQ(back[0].per_run[r].seed, results[0].per_run[r].seed);
  }
  EXPECT_EQ(back[0].mean_mcc, results[0].mean_mcc);
  std::istringstream bad("experiment_id,method_tag,run_index,seed,mcc\na,b,0,x,0.5\n");
  EXPECT_THROW(read_runs_csv(bad), LoadError);
}
