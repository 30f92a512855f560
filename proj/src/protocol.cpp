#include "newsclust/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "newsclust/csv.hpp"
#include "newsclust/error.hpp"
#include "newsclust/eval.hpp"

namespace newsclust {
namespace {

std::vector<CategoryLabel> enum_ordered(std::span<const CategoryLabel> categories) {
  std::vector<CategoryLabel> out(categories.begin(), categories.end());
  std::sort(out.begin(), out.end());
  return out;
}

struct RunOutput {
  RunRecord record;
  std::vector<std::string> sample;
};

RunOutput run_once(const Corpus& corpus, const std::unordered_map<std::string, DocumentEmbedding>& embeddings,
                   const ExperimentConfig& config, const std::vector<CategoryLabel>& categories,
                   const std::function<bool(const Document&)>& eligible, std::size_t dim, std::size_t run_index) {
  const std::uint64_t seed = config.base_seed + run_index;
  Rng rng(seed);
  auto ids = stratified_sample(corpus, config.per_category, rng, categories, eligible);

  Matrix<double> points(ids.size(), dim);
  std::vector<std::uint32_t> labels(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& vec = embeddings.at(ids[i]).vector;
    std::copy(vec.begin(), vec.end(), points.row(i).begin());
    labels[i] = static_cast<std::uint32_t>(corpus.at(ids[i]).category);
  }

  KMeansConfig kcfg = config.kmeans;
  kcfg.k = config.k;
  kcfg.seed = seed;
  if (config.threads > 1) kcfg.threads = 1;
  const auto clustering = kmeans(points, kcfg);

  RunOutput out;
  out.record = {run_index, mcc(pair_confusion(labels, clustering.assignments)), seed};
  if (config.record_samples) out.sample = std::move(ids);
  return out;
}

}  // namespace

std::string MethodSpec::tag() const {
  if (!tag_override.empty()) return tag_override;
  if (aggregation.empty()) return source.empty() ? "unnamed" : source;
  return source + "/" + aggregation;
}

void ExperimentConfig::validate() const {
  if (per_category < 1) throw DomainError("experiment: per_category must be >= 1");
  if (runs < 1) throw DomainError("experiment: runs must be >= 1");
  if (categories.empty()) throw DomainError("experiment: no categories");
  auto sorted = enum_ordered(categories);
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("experiment: duplicate category");
  }
  if (k != categories.size()) {
    throw DomainError("experiment: k (" + std::to_string(k) + ") must equal the number of categories (" +
                      std::to_string(categories.size()) + ")");
  }
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw LoadError("experiment config: expected a JSON object");
  ExperimentConfig c;
  try {
    if (!j.contains("base_seed")) throw LoadError("experiment config: 'base_seed' is required");
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    c.experiment_id = j.value("experiment_id", c.experiment_id);
    c.per_category = j.value("per_category", c.per_category);
    c.runs = j.value("runs", c.runs);
    c.threads = j.value("threads", c.threads);
    if (j.contains("categories")) {
      c.categories.clear();
      for (const auto& name : j.at("categories")) {
        const auto label = parse_category(name.get<std::string>());
        if (!label) throw LoadError("experiment config: unknown category '" + name.get<std::string>() + "'");
        c.categories.push_back(*label);
      }
    }
    c.k = j.value("k", c.categories.size());
    if (j.contains("method_spec")) {
      const auto& m = j.at("method_spec");
      if (m.is_string()) {
        c.method.tag_override = m.get<std::string>();
      } else {
        c.method.source = m.value("source", std::string{});
        c.method.aggregation = m.value("aggregation", std::string{});
        c.method.tag_override = m.value("tag", std::string{});
      }
    }
    if (j.contains("kmeans")) {
      const auto& km = j.at("kmeans");
      c.kmeans.max_iters = km.value("max_iters", c.kmeans.max_iters);
      c.kmeans.tol = km.value("tol", c.kmeans.tol);
      if (km.contains("metric")) c.kmeans.metric = parse_metric(km.at("metric").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<std::string> stratified_sample(const Corpus& corpus, std::size_t per_category, Rng& rng,
                                           std::span<const CategoryLabel> categories,
                                           const std::function<bool(const Document&)>& eligible) {
  std::vector<std::string> ids;
  ids.reserve(per_category * categories.size());
  for (const CategoryLabel label : enum_ordered(categories)) {
    std::vector<const Document*> pool;
    for (const auto& doc : corpus.documents()) {
      if (doc.category == label && (!eligible || eligible(doc))) pool.push_back(&doc);
    }
    if (pool.size() < per_category) {
      throw SamplingError("category " + std::string(category_name(label)) + " has " + std::to_string(pool.size()) +
                          " eligible documents, " + std::to_string(per_category) + " required");
    }
    for (std::size_t i = 0; i < per_category; ++i) {
      const std::size_t j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      ids.push_back(pool[i]->id);
    }
  }
  return ids;
}

std::pair<double, double> mean_and_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

ExperimentResult run_experiment(const Corpus& corpus, const std::unordered_map<std::string, DocumentEmbedding>& embeddings,
                                const ExperimentConfig& config) {
  config.validate();
  const auto categories = enum_ordered(config.categories);

  ExperimentResult result;
  result.experiment_id = config.experiment_id;
  result.method_tag = config.method.tag();

  std::size_t dim = 0;
  for (const auto& doc : corpus.documents()) {
    if (!std::binary_search(categories.begin(), categories.end(), doc.category)) continue;
    const auto it = embeddings.find(doc.id);
    if (it == embeddings.end()) {
      ++result.excluded_documents;
      continue;
    }
    if (dim == 0) dim = it->second.vector.size();
    if (it->second.vector.size() != dim) throw DomainError("embedding for '" + doc.id + "' has a different dimension");
    if (config.method.tag_override.empty() && config.method.source.empty() && !it->second.method_tag.empty()) {
      result.method_tag = it->second.method_tag;
    }
  }
  const auto eligible = [&embeddings](const Document& doc) { return embeddings.count(doc.id) > 0; };

  std::vector<RunOutput> outputs(config.runs);
  auto run_checked = [&](std::size_t r) {
    try {
      outputs[r] = run_once(corpus, embeddings, config, categories, eligible, dim, r);
    } catch (const SamplingError& e) {
      throw SamplingError("run " + std::to_string(r) + ": " + e.what());
    } catch (const ClusteringError& e) {
      throw ClusteringError("run " + std::to_string(r) + ": " + e.what());
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.runs)));
  if (workers == 1) {
    for (std::size_t r = 0; r < config.runs; ++r) run_checked(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = next++; r < config.runs; r = next++) run_checked(r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<double> values;
  for (auto& out : outputs) {
    result.per_run.push_back(out.record);
    values.push_back(out.record.mcc);
    if (config.record_samples) result.samples.push_back(std::move(out.sample));
  }
  std::tie(result.mean_mcc, result.std_mcc) = mean_and_std(values);
  return result;
}

std::string Report::csv() const {
  std::ostringstream out;
  out << "method_tag,mean_mcc,std_mcc,runs\n";
  for (const auto& r : rows) {
    out << csv_field(r.method_tag) << ',' << format_double(r.mean_mcc) << ',' << format_double(r.std_mcc) << ','
        << r.runs << '\n';
  }
  return out.str();
}

std::string Report::table() const {
  std::size_t width = std::string_view("Method").size();
  for (const auto& r : rows) width = std::max(width, r.method_tag.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "Method" << "  " << std::right << std::setw(7) << "Mean"
      << "  " << std::setw(7) << "Std" << "  " << std::setw(5) << "Runs" << '\n';
  out << std::string(width + 2 + 7 + 2 + 7 + 2 + 5, '-') << '\n';
  out << std::fixed << std::setprecision(3);
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.method_tag << "  " << std::right << std::setw(7)
        << r.mean_mcc << "  " << std::setw(7) << r.std_mcc << "  " << std::setw(5) << r.runs << '\n';
  }
  return out.str();
}

Report summarize(std::span<const ExperimentResult> results) {
  Report report;
  for (const auto& r : results) report.rows.push_back({r.method_tag, r.mean_mcc, r.std_mcc, r.per_run.size()});
  std::sort(report.rows.begin(), report.rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    if (a.mean_mcc != b.mean_mcc) return a.mean_mcc > b.mean_mcc;
    return a.method_tag < b.method_tag;
  });
  return report;
}

void write_runs_csv(std::ostream& out, std::span<const ExperimentResult> results) {
  out << "experiment_id,method_tag,run_index,seed,mcc\n";
  for (const auto& r : results) {
    for (const auto& run : r.per_run) {
      out << csv_field(r.experiment_id) << ',' << csv_field(r.method_tag) << ',' << run.run_index << ',' << run.seed
          << ',' << format_double(run.mcc) << '\n';
    }
  }
}

std::vector<ExperimentResult> read_runs_csv(std::istream& in) {
  std::vector<ExperimentResult> results;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = parse_csv_line(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "experiment_id") continue;
    if (fields.size() != 5) throw LoadError("runs csv line " + std::to_string(line_no) + ": expected 5 fields");
    RunRecord run;
    try {
      run.run_index = std::stoull(fields[2]);
      run.seed = std::stoull(fields[3]);
      run.mcc = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw LoadError("runs csv line " + std::to_string(line_no) + ": malformed number");
    }
    const auto key = std::make_pair(fields[0], fields[1]);
    auto [it, inserted] = index.emplace(key, results.size());
    if (inserted) {
      results.emplace_back();
      results.back().experiment_id = fields[0];
      results.back().method_tag = fields[1];
    }
    results[it->second].per_run.push_back(run);
  }
  for (auto& r : results) {
    std::vector<double> values;
    for (const auto& run : r.per_run) values.push_back(run.mcc);
    std::tie(r.mean_mcc, r.std_mcc) = mean_and_std(values);
  }
  return results;
}

}  // namespace newsclust
