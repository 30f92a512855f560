#include "newsclust/cli.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "newsclust/cluster.hpp"
#include "newsclust/corpus.hpp"
#include "newsclust/csv.hpp"
#include "newsclust/embed.hpp"
#include "newsclust/error.hpp"
#include "newsclust/eval.hpp"
#include "newsclust/protocol.hpp"
#include "newsclust/pvdbow.hpp"
#include "newsclust/text.hpp"
#include "newsclust/weighting.hpp"

namespace newsclust::cli {
namespace {

using Json = nlohmann::ordered_json;

// Invalid flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path + "'");
  return in;
}

CategoryMapping mapping_from(const std::string& path) {
  return path.empty() ? CategoryMapping{} : load_category_mapping(path);
}

std::vector<TokenizedDocument> tokenize_corpus(const Corpus& corpus) {
  std::vector<TokenizedDocument> docs;
  docs.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) docs.push_back({doc.id, tokenize(doc.text)});
  return docs;
}

Json category_counts_json(const Corpus& corpus) {
  Json counts = Json::object();
  for (const auto label : kAllCategories) counts[std::string(category_name(label))] = corpus.count(label);
  return counts;
}

// doc_id -> value column of a two-column CSV with an optional doc_id header.
std::vector<std::pair<std::string, std::string>> read_two_column_csv(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = parse_csv_line(line);
    if (line_no == 1 && fields[0] == "doc_id") continue;
    if (fields.size() != 2) throw LoadError(path + ":" + std::to_string(line_no) + ": expected 2 fields");
    if (!seen.emplace(fields[0], rows.size()).second) {
      throw LoadError(path + ":" + std::to_string(line_no) + ": duplicate doc_id '" + fields[0] + "'");
    }
    rows.emplace_back(fields[0], fields[1]);
  }
  return rows;
}

struct Options {
  // shared
  std::string corpus;
  std::string mapping;
  std::size_t min_chars = kDefaultMinChars;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  // ingest
  std::string input;
  std::string labels_out;

  // vocab / train-pvdbow / embed
  std::uint64_t min_count = 4;
  std::uint64_t embed_min_count = 1;
  PvDbowConfig pvdbow;
  std::string embeddings_out;

  // embed
  std::string method;
  std::string model;
  std::string word_vectors;
  std::string token_vectors;
  std::size_t top_k = 20;
  std::size_t prefix_n = 144;

  // cluster
  std::string embeddings;
  std::size_t k = 12;
  std::string metric = "spherical";
  std::size_t max_iters = 300;
  double tol = 1e-6;

  // eval
  std::string labels;
  std::string assignments;

  // experiment / report
  std::string config;
  std::vector<std::string> embedding_files;
  std::string summary_out;
  std::vector<std::string> runs;
  std::string table_out;
};

Json run_ingest(const Options& o) {
  CorpusLoadStats stats;
  const Corpus corpus = load_corpus(o.input, o.min_chars, mapping_from(o.mapping), &stats);
  if (!o.out.empty()) {
    auto out = open_output(o.out);
    write_corpus(out, corpus);
  }
  if (!o.labels_out.empty()) {
    auto out = open_output(o.labels_out);
    out << "doc_id,label\n";
    for (const auto& doc : corpus.documents()) out << csv_field(doc.id) << ',' << category_name(doc.category) << '\n';
  }
  Json j;
  j["records"] = stats.records;
  j["documents"] = corpus.size();
  j["dropped_short"] = stats.dropped_short;
  j["min_chars"] = o.min_chars;
  j["category_counts"] = category_counts_json(corpus);
  return j;
}

Json run_vocab(const Options& o) {
  const Corpus corpus = load_corpus(o.corpus, o.min_chars, mapping_from(o.mapping));
  const auto docs = tokenize_corpus(corpus);
  const Vocabulary vocab = build_vocabulary(docs, o.min_count);
  auto out = open_output(o.out);
  write_vocabulary(out, vocab);
  Json j;
  j["n_documents"] = vocab.n_documents();
  j["min_count"] = vocab.min_count();
  j["size"] = vocab.size();
  return j;
}

Json run_train(const Options& o) {
  const Corpus corpus = load_corpus(o.corpus, o.min_chars, mapping_from(o.mapping));
  const auto docs = tokenize_corpus(corpus);
  PvDbowConfig cfg = o.pvdbow;
  cfg.seed = *o.seed;
  cfg.threads = o.threads;
  const PvDbowModel model = train_pvdbow<float>(docs, cfg);
  save_pvdbow_model(o.out, model);
  if (!o.embeddings_out.empty()) {
    EmbeddingSet set;
    set.method_tag = "pvdbow";
    set.doc_ids = model.doc_ids;
    set.vectors = Matrix<double>(model.doc_vectors.rows(), model.doc_vectors.cols());
    for (std::size_t i = 0; i < set.vectors.values().size(); ++i) set.vectors.values()[i] = model.doc_vectors.values()[i];
    save_embeddings(o.embeddings_out, set);
  }
  Json j;
  j["documents"] = model.doc_ids.size();
  j["vocab_size"] = model.vocab.size();
  j["dim"] = cfg.dim;
  j["epochs"] = cfg.epochs;
  j["seed"] = cfg.seed;
  j["epoch_losses"] = model.epoch_losses;
  return j;
}

Json run_embed(const Options& o) {
  std::vector<DocumentEmbedding> embeddings;
  Json j;
  j["method"] = o.method;
  std::size_t skipped_docs = 0;

  const bool word_method = o.method == "mean" || o.method == "softmax-tfidf" || o.method == "topk-tfidf";
  const bool contextual = o.method == "first-vector" || o.method == "prefix-mean";

  if (o.method == "pvdbow") {
    if (o.model.empty() || o.corpus.empty()) throw UsageError("--method pvdbow requires --model and --corpus");
    const Corpus corpus = load_corpus(o.corpus, o.min_chars, mapping_from(o.mapping));
    const PvDbowModel model = load_pvdbow_model(o.model);
    for (const auto& doc : corpus.documents()) {
      const auto it = model.doc_index.find(doc.id);
      if (it == model.doc_index.end()) {
        ++skipped_docs;
        continue;
      }
      const auto row = model.doc_vectors.row(it->second);
      embeddings.push_back({doc.id, {row.begin(), row.end()}, "pvdbow"});
    }
  } else if (word_method) {
    if (o.word_vectors.empty() || o.corpus.empty()) {
      throw UsageError("--method " + o.method + " requires --word-vectors and --corpus");
    }
    const Corpus corpus = load_corpus(o.corpus, o.min_chars, mapping_from(o.mapping));
    const auto docs = tokenize_corpus(corpus);
    const Vocabulary vocab = build_vocabulary(docs, o.embed_min_count);
    const WordVectorTable table = load_word_vectors(o.word_vectors);
    WordVectorAggregation agg;
    agg.strategy = o.method == "mean"            ? WordVectorStrategy::Mean
                   : o.method == "softmax-tfidf" ? WordVectorStrategy::SoftmaxTfIdf
                                                 : WordVectorStrategy::TopKTfIdf;
    agg.k = o.top_k;
    SkipStats stats;
    for (const auto& doc : docs) {
      try {
        embeddings.push_back(embed_from_word_vectors(doc, table, vocab, document_tf_idf(doc, vocab), agg, &stats));
      } catch (const EmptyEmbedding&) {
        ++skipped_docs;
      }
    }
    j["tokens_used"] = stats.used;
    j["tokens_skipped"] = stats.skipped;
  } else if (contextual) {
    if (o.token_vectors.empty()) throw UsageError("--method " + o.method + " requires --token-vectors");
    std::optional<Corpus> corpus;
    if (!o.corpus.empty()) corpus = load_corpus(o.corpus, o.min_chars, mapping_from(o.mapping));
    ContextualAggregation agg;
    agg.mode = o.method == "first-vector" ? ContextualMode::FirstVector : ContextualMode::PrefixMean;
    agg.n = o.prefix_n;
    TokenVectorReader reader(o.token_vectors);
    std::unordered_map<std::string, bool> seen;
    while (auto seq = reader.next()) {
      if (!seen.emplace(seq->doc_id, true).second) throw LoadError("duplicate doc_id '" + seq->doc_id + "' in token vectors");
      if (corpus && !corpus->find(seq->doc_id)) {
        ++skipped_docs;
        continue;
      }
      try {
        embeddings.push_back(aggregate_contextual(*seq, agg));
      } catch (const EmptyEmbedding&) {
        ++skipped_docs;
      }
    }
  } else {
    throw UsageError("unknown --method '" + o.method + "'");
  }

  const auto set = EmbeddingSet::from_embeddings(embeddings);
  save_embeddings(o.out, set);
  j["method_tag"] = set.method_tag;
  j["embedded"] = set.doc_ids.size();
  j["skipped_documents"] = skipped_docs;
  j["dim"] = set.vectors.cols();
  return j;
}

Json run_cluster(const Options& o) {
  const EmbeddingSet set = load_embeddings(o.embeddings);
  KMeansConfig cfg;
  cfg.k = o.k;
  cfg.seed = *o.seed;
  cfg.metric = parse_metric(o.metric);
  cfg.max_iters = o.max_iters;
  cfg.tol = o.tol;
  cfg.threads = o.threads;
  const auto result = kmeans(set.vectors, cfg);
  auto out = open_output(o.out);
  write_assignments_csv(out, set.doc_ids, result.assignments);

  std::vector<std::size_t> sizes(cfg.k, 0);
  for (const auto a : result.assignments) ++sizes[a];
  Json j;
  j["documents"] = set.doc_ids.size();
  j["k"] = cfg.k;
  j["metric"] = metric_name(cfg.metric);
  j["seed"] = cfg.seed;
  j["inertia"] = result.inertia;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["cluster_sizes"] = sizes;
  return j;
}

Json run_eval(const Options& o) {
  const auto labels = read_two_column_csv(o.labels);
  const auto clusters = read_two_column_csv(o.assignments);
  std::unordered_map<std::string, std::string> cluster_of(clusters.begin(), clusters.end());

  std::map<std::string, std::uint32_t> label_codes;
  std::map<std::string, std::uint32_t> cluster_codes;
  std::vector<std::uint32_t> l;
  std::vector<std::uint32_t> c;
  std::size_t unmatched = 0;
  for (const auto& [id, label] : labels) {
    const auto it = cluster_of.find(id);
    if (it == cluster_of.end()) {
      ++unmatched;
      continue;
    }
    l.push_back(label_codes.emplace(label, static_cast<std::uint32_t>(label_codes.size())).first->second);
    c.push_back(cluster_codes.emplace(it->second, static_cast<std::uint32_t>(cluster_codes.size())).first->second);
  }
  const PairConfusion pc = pair_confusion(l, c);
  Json j;
  j["n"] = l.size();
  j["unmatched_labels"] = unmatched;
  j["unmatched_assignments"] = clusters.size() - l.size();
  j["tp"] = pc.tp;
  j["tn"] = pc.tn;
  j["fp"] = pc.fp;
  j["fn"] = pc.fn;
  j["mcc"] = mcc(pc);
  return j;
}

Json run_experiment_cmd(const Options& o, std::ostream& err) {
  const Corpus corpus = load_corpus(o.corpus, o.min_chars, mapping_from(o.mapping));
  auto config_in = open_input(o.config);
  nlohmann::json raw;
  try {
    raw = nlohmann::json::parse(config_in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(o.config + ": " + e.what());
  }
  ExperimentConfig config = experiment_config_from_json(raw);
  if (o.seed) config.base_seed = *o.seed;
  config.threads = o.threads;
  if (o.embedding_files.size() > 1) config.method = MethodSpec{};

  std::vector<ExperimentResult> results;
  for (const auto& path : o.embedding_files) {
    const EmbeddingSet set = load_embeddings(path);
    results.push_back(run_experiment(corpus, set.by_id(), config));
    for (std::size_t i = 0; i + 1 < results.size(); ++i) {
      if (results[i].method_tag == results.back().method_tag)
        throw UsageError("embeddings files " + o.embedding_files[i] + " and " + path + " share method tag '" +
                         results.back().method_tag + "'");
    }
    if (results.back().excluded_documents > 0) {
      err << "warning: " << results.back().excluded_documents << " documents have no embedding in " << path
          << " and were excluded from sampling\n";
    }
  }

  {
    auto out = open_output(o.out);
    write_runs_csv(out, results);
  }
  const Report report = summarize(results);
  if (!o.summary_out.empty()) {
    auto out = open_output(o.summary_out);
    out << report.csv();
  }

  Json j;
  j["experiment_id"] = config.experiment_id;
  j["base_seed"] = config.base_seed;
  j["runs"] = config.runs;
  j["per_category"] = config.per_category;
  j["results"] = Json::array();
  for (const auto& r : results) {
    j["results"].push_back({{"method_tag", r.method_tag},
                            {"mean_mcc", r.mean_mcc},
                            {"std_mcc", r.std_mcc},
                            {"runs", r.per_run.size()},
                            {"excluded_documents", r.excluded_documents}});
  }
  return j;
}

Json run_report(const Options& o, std::ostream& err) {
  std::vector<ExperimentResult> results;
  for (const auto& path : o.runs) {
    auto in = open_input(path);
    auto part = read_runs_csv(in);
    results.insert(results.end(), part.begin(), part.end());
  }
  if (results.empty()) throw LoadError("no runs found in the given files");
  const Report report = summarize(results);
  if (!o.out.empty()) {
    auto out = open_output(o.out);
    out << report.csv();
  }
  if (!o.table_out.empty()) {
    auto out = open_output(o.table_out);
    out << report.table();
  }
  err << report.table();

  Json j;
  j["rows"] = Json::array();
  for (const auto& row : report.rows) {
    j["rows"].push_back({{"method_tag", row.method_tag}, {"mean_mcc", row.mean_mcc}, {"std_mcc", row.std_mcc}, {"runs", row.runs}});
  }
  return j;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Document-embedding clustering benchmark toolkit", "newsclust"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  auto add_corpus = [&o](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--corpus", o.corpus, "Corpus file (line-delimited JSON)");
    if (required) opt->required();
    sub->add_option("--mapping", o.mapping, "Raw-category mapping (JSON object)");
    sub->add_option("--min-chars", o.min_chars, "Drop documents shorter than this")->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "Validate and categorise a raw corpus");
  ingest->add_option("--input", o.input, "Raw corpus (line-delimited JSON)")->required();
  ingest->add_option("--mapping", o.mapping, "Raw-category mapping (JSON object)");
  ingest->add_option("--min-chars", o.min_chars, "Drop documents shorter than this")->capture_default_str();
  ingest->add_option("--out", o.out, "Write the categorised corpus here");
  ingest->add_option("--labels-out", o.labels_out, "Write doc_id,label CSV here");

  auto* vocab = app.add_subcommand("vocab", "Build a vocabulary with document frequencies");
  add_corpus(vocab, true);
  vocab->add_option("--min-count", o.min_count, "Minimum corpus frequency")->capture_default_str();
  vocab->add_option("--out", o.out, "Vocabulary output (line-delimited JSON)")->required();

  auto* train = app.add_subcommand("train-pvdbow", "Train PV-DBOW document vectors");
  add_corpus(train, true);
  train->add_option("--seed", o.seed, "Random seed")->required();
  train->add_option("--dim", o.pvdbow.dim)->capture_default_str();
  train->add_option("--epochs", o.pvdbow.epochs)->capture_default_str();
  train->add_option("--min-count", o.pvdbow.min_count)->capture_default_str();
  train->add_option("--negative", o.pvdbow.negative)->capture_default_str();
  train->add_option("--initial-lr", o.pvdbow.initial_lr)->capture_default_str();
  train->add_option("--final-lr", o.pvdbow.final_lr)->capture_default_str();
  train->add_option("--noise-exponent", o.pvdbow.noise_exponent)->capture_default_str();
  train->add_option("--threads", o.threads, "Workers; 1 is deterministic")->capture_default_str();
  train->add_option("--out", o.out, "Model output")->required();
  train->add_option("--embeddings-out", o.embeddings_out, "Also write document vectors as an embeddings file");

  auto* embed = app.add_subcommand("embed", "Produce one vector per document");
  add_corpus(embed, false);
  embed->add_option("--method", o.method, "pvdbow | mean | softmax-tfidf | topk-tfidf | first-vector | prefix-mean")
      ->required();
  embed->add_option("--model", o.model, "PV-DBOW model (pvdbow)");
  embed->add_option("--word-vectors", o.word_vectors, "Word-vector text file (mean, softmax-tfidf, topk-tfidf)");
  embed->add_option("--token-vectors", o.token_vectors, "Token-vector records (first-vector, prefix-mean)");
  embed->add_option("--k", o.top_k, "Tokens kept by topk-tfidf")->capture_default_str();
  embed->add_option("--n", o.prefix_n, "Content vectors averaged by prefix-mean")->capture_default_str();
  embed->add_option("--min-count", o.embed_min_count, "Vocabulary threshold for tf-idf statistics")->capture_default_str();
  embed->add_option("--out", o.out, "Embeddings output")->required();

  auto* cluster = app.add_subcommand("cluster", "Run k-means over an embeddings file");
  cluster->add_option("--embeddings", o.embeddings, "Embeddings file")->required();
  cluster->add_option("--k", o.k, "Number of clusters")->required();
  cluster->add_option("--seed", o.seed, "Random seed")->required();
  cluster->add_option("--metric", o.metric, "spherical | euclidean")->capture_default_str();
  cluster->add_option("--max-iters", o.max_iters)->capture_default_str();
  cluster->add_option("--tol", o.tol)->capture_default_str();
  cluster->add_option("--threads", o.threads)->capture_default_str();
  cluster->add_option("--out", o.out, "Assignments CSV (doc_id,cluster_id)")->required();

  auto* eval = app.add_subcommand("eval", "Score assignments against labels with pair-confusion MCC");
  eval->add_option("--labels", o.labels, "CSV doc_id,label")->required();
  eval->add_option("--assignments", o.assignments, "CSV doc_id,cluster_id")->required();

  auto* experiment = app.add_subcommand("experiment", "Repeated stratified sampling, clustering and scoring");
  experiment->add_option("--config", o.config, "Experiment config (JSON)")->required();
  add_corpus(experiment, true);
  experiment->add_option("--embeddings", o.embedding_files, "One or more embeddings files")->required();
  experiment->add_option("--out", o.out, "Per-run CSV")->required();
  experiment->add_option("--summary-out", o.summary_out, "Summary CSV");
  experiment->add_option("--seed", o.seed, "Override the config's base_seed");
  experiment->add_option("--threads", o.threads, "Runs executed concurrently")->capture_default_str();

  auto* report = app.add_subcommand("report", "Summarise per-run CSV files");
  report->add_option("--runs", o.runs, "Per-run CSV files")->required();
  report->add_option("--out", o.out, "Summary CSV");
  report->add_option("--table-out", o.table_out, "Aligned text table");

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("newsclust");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << sub->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n" << sub->help();
    return kExitUsage;
  }

  try {
    Json summary;
    if (ingest->parsed()) {
      summary = run_ingest(o);
    } else if (vocab->parsed()) {
      summary = run_vocab(o);
    } else if (train->parsed()) {
      summary = run_train(o);
    } else if (embed->parsed()) {
      summary = run_embed(o);
    } else if (cluster->parsed()) {
      summary = run_cluster(o);
    } else if (eval->parsed()) {
      summary = run_eval(o);
    } else if (experiment->parsed()) {
      summary = run_experiment_cmd(o, err);
    } else if (report->parsed()) {
      summary = run_report(o, err);
    }
    out << summary.dump() << '\n';
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.get_subcommands().front()->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace newsclust::cli
