#include "newsclust/pvdbow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "newsclust/container.hpp"
#include "newsclust/error.hpp"

namespace newsclust {
namespace {

template <typename Real>
Real dot(std::span<const Real> a, std::span<const Real> b) {
  Real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// -ln sigmoid(x), stable for large |x|.
template <typename Real>
Real neg_log_sigmoid(Real x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(-x, Real(0));
}

// Shared kernel. rows[0] is the positive word's output row, rows[1..] the
// negatives. Fills coeff with dL/d(v.u_i) and returns the loss.
template <typename Real>
Real coefficients(std::span<const Real> doc_vec, std::span<const std::span<Real>> rows, std::span<Real> coeff) {
  Real loss = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Real score = dot<Real>(doc_vec, rows[i]);
    if (i == 0) {
      coeff[i] = sigmoid(score) - Real(1);
      loss += neg_log_sigmoid(score);
    } else {
      coeff[i] = sigmoid(score);
      loss += neg_log_sigmoid(-score);
    }
  }
  return loss;
}

// Applies -lr * gradient. Output rows are left alone when update_rows is false.
template <typename Real>
Real apply_step(std::span<Real> doc_vec, std::span<const std::span<Real>> rows, Real lr, bool update_rows,
                std::vector<Real>& coeff, std::vector<Real>& doc_grad) {
  coeff.resize(rows.size());
  doc_grad.assign(doc_vec.size(), Real(0));
  const Real loss = coefficients<Real>(doc_vec, rows, coeff);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < doc_vec.size(); ++j) doc_grad[j] += coeff[i] * rows[i][j];
  }
  if (update_rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Real scale = lr * coeff[i];
      for (std::size_t j = 0; j < doc_vec.size(); ++j) rows[i][j] -= scale * doc_vec[j];
    }
  }
  for (std::size_t j = 0; j < doc_vec.size(); ++j) doc_vec[j] -= lr * doc_grad[j];
  return loss;
}

template <typename Real>
bool all_finite(std::span<const Real> values) {
  return std::all_of(values.begin(), values.end(), [](Real v) { return std::isfinite(v); });
}

TokenId draw_negative(const NoiseTable& noise, Rng& rng, TokenId positive) {
  TokenId t = noise.sample(rng);
  if (t == positive) t = noise.sample(rng);
  return t;
}

double scheduled_lr(const PvDbowConfig& c, std::uint64_t step, std::uint64_t total) {
  const double progress = total == 0 ? 0.0 : static_cast<double>(step) / static_cast<double>(total);
  return c.initial_lr - (c.initial_lr - c.final_lr) * std::min(progress, 1.0);
}

template <typename Real>
struct Workspace {
  std::vector<TokenId> negatives;
  std::vector<std::span<Real>> rows;
  std::vector<Real> coeff;
  std::vector<Real> doc_grad;
  std::vector<Real> gathered;  // racy mode only
};

// Deterministic single-worker epoch. Returns summed loss.
template <typename Real>
double run_epoch_serial(BasicPvDbowModel<Real>& model, const std::vector<std::vector<TokenId>>& encoded,
                        const NoiseTable& noise, Rng& rng, std::uint64_t& step, std::uint64_t total_steps) {
  const auto& cfg = model.config;
  Workspace<Real> ws;
  ws.negatives.resize(cfg.negative);
  double loss = 0.0;
  for (std::size_t d = 0; d < encoded.size(); ++d) {
    auto doc_vec = model.doc_vectors.row(d);
    for (const TokenId w : encoded[d]) {
      for (auto& n : ws.negatives) n = draw_negative(noise, rng, w);
      ws.rows.clear();
      ws.rows.push_back(model.out_vectors.row(w));
      for (const TokenId n : ws.negatives) ws.rows.push_back(model.out_vectors.row(n));
      const auto lr = static_cast<Real>(scheduled_lr(cfg, step, total_steps));
      loss += static_cast<double>(apply_step<Real>(doc_vec, ws.rows, lr, true, ws.coeff, ws.doc_grad));
      ++step;
    }
  }
  return loss;
}

// Multi-worker epoch. Documents are split into contiguous blocks, so each
// document row has a single writer; output rows are read and written through
// relaxed atomic references with no further synchronisation.
template <typename Real>
double run_epoch_racy(BasicPvDbowModel<Real>& model, const std::vector<std::vector<TokenId>>& encoded,
                      const NoiseTable& noise, std::size_t epoch, std::uint64_t& step, std::uint64_t total_steps) {
  const auto& cfg = model.config;
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(encoded.size())));
  const std::size_t dim = cfg.dim;
  std::atomic<std::uint64_t> progress{step};
  std::vector<double> losses(workers, 0.0);
  std::vector<std::thread> pool;

  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      Rng rng(cfg.seed + 0x9e3779b97f4a7c15ULL * (epoch * workers + w + 1));
      Workspace<Real> ws;
      ws.negatives.resize(cfg.negative);
      ws.gathered.resize((cfg.negative + 1) * dim);
      const std::size_t begin = encoded.size() * w / workers;
      const std::size_t end = encoded.size() * (w + 1) / workers;
      std::uint64_t local = 0;
      for (std::size_t d = begin; d < end; ++d) {
        auto doc_vec = model.doc_vectors.row(d);
        for (const TokenId t : encoded[d]) {
          for (auto& n : ws.negatives) n = draw_negative(noise, rng, t);
          ws.rows.clear();
          for (std::size_t i = 0; i <= cfg.negative; ++i) {
            const TokenId id = i == 0 ? t : ws.negatives[i - 1];
            std::span<Real> buf(ws.gathered.data() + i * dim, dim);
            auto src = model.out_vectors.row(id);
            for (std::size_t j = 0; j < dim; ++j) buf[j] = std::atomic_ref<Real>(src[j]).load(std::memory_order_relaxed);
            ws.rows.push_back(buf);
          }
          const auto lr = static_cast<Real>(scheduled_lr(cfg, progress.load(std::memory_order_relaxed), total_steps));
          losses[w] += static_cast<double>(apply_step<Real>(doc_vec, ws.rows, lr, true, ws.coeff, ws.doc_grad));
          for (std::size_t i = 0; i <= cfg.negative; ++i) {
            const TokenId id = i == 0 ? t : ws.negatives[i - 1];
            auto dst = model.out_vectors.row(id);
            for (std::size_t j = 0; j < dim; ++j) {
              std::atomic_ref<Real>(dst[j]).store(ws.rows[i][j], std::memory_order_relaxed);
            }
          }
          if (++local % 1024 == 0) progress.fetch_add(1024, std::memory_order_relaxed);
        }
      }
      progress.fetch_add(local % 1024, std::memory_order_relaxed);
    });
  }
  for (auto& t : pool) t.join();

  std::uint64_t epoch_steps = 0;
  for (const auto& tokens : encoded) epoch_steps += tokens.size();
  step += epoch_steps;
  double loss = 0.0;
  for (const double l : losses) loss += l;
  return loss;
}

}  // namespace

void PvDbowConfig::validate() const {
  if (dim < 1) throw DomainError("pvdbow: dim must be >= 1");
  if (epochs < 1) throw DomainError("pvdbow: epochs must be >= 1");
  if (min_count < 1) throw DomainError("pvdbow: min_count must be >= 1");
  if (negative < 1) throw DomainError("pvdbow: negative must be >= 1");
  if (!(final_lr > 0.0) || !(final_lr <= initial_lr)) throw DomainError("pvdbow: need 0 < final_lr <= initial_lr");
  if (!std::isfinite(noise_exponent)) throw DomainError("pvdbow: noise_exponent must be finite");
  if (threads < 1) throw DomainError("pvdbow: threads must be >= 1");
}

NoiseTable::NoiseTable(const Vocabulary& vocab, double exponent) {
  if (vocab.empty()) throw DomainError("noise table: empty vocabulary");
  cumulative_.resize(vocab.size());
  double total = 0.0;
  for (const auto& e : vocab.entries()) {
    total += std::pow(static_cast<double>(e.corpus_frequency), exponent);
    cumulative_[e.id] = total;
  }
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
}

double NoiseTable::probability(TokenId id) const {
  return id == 0 ? cumulative_[0] : cumulative_.at(id) - cumulative_[id - 1];
}

TokenId NoiseTable::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
  return static_cast<TokenId>(std::min(idx, cumulative_.size() - 1));
}

template <typename Real>
Real sigmoid(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

template <typename Real>
Real pvdbow_loss(std::span<const Real> doc_vec, TokenId positive, std::span<const TokenId> negatives,
                 const Matrix<Real>& out_vectors) {
  Real loss = neg_log_sigmoid(dot<Real>(doc_vec, out_vectors.row(positive)));
  for (const TokenId n : negatives) loss += neg_log_sigmoid(-dot<Real>(doc_vec, out_vectors.row(n)));
  return loss;
}

template <typename Real>
void pvdbow_gradient(std::span<const Real> doc_vec, TokenId positive, std::span<const TokenId> negatives,
                     const Matrix<Real>& out_vectors, std::span<Real> grad_doc, Matrix<Real>& grad_out) {
  const std::size_t dim = doc_vec.size();
  grad_out = Matrix<Real>(negatives.size() + 1, dim);
  std::fill(grad_doc.begin(), grad_doc.end(), Real(0));
  for (std::size_t i = 0; i <= negatives.size(); ++i) {
    const auto u = out_vectors.row(i == 0 ? positive : negatives[i - 1]);
    const Real s = sigmoid(dot<Real>(doc_vec, u));
    const Real g = i == 0 ? s - Real(1) : s;
    for (std::size_t j = 0; j < dim; ++j) {
      grad_doc[j] += g * u[j];
      grad_out(i, j) = g * doc_vec[j];
    }
  }
}

template <typename Real>
Real pvdbow_step(std::span<Real> doc_vec, TokenId positive, std::span<const TokenId> negatives,
                 Matrix<Real>& out_vectors, Real lr) {
  std::vector<std::span<Real>> rows;
  rows.reserve(negatives.size() + 1);
  rows.push_back(out_vectors.row(positive));
  for (const TokenId n : negatives) rows.push_back(out_vectors.row(n));
  std::vector<Real> coeff;
  std::vector<Real> doc_grad;
  return apply_step<Real>(doc_vec, rows, lr, true, coeff, doc_grad);
}

template <typename Real>
BasicPvDbowModel<Real> train_pvdbow(std::span<const TokenizedDocument> docs, const PvDbowConfig& config) {
  config.validate();
  if (docs.empty()) throw TrainingError("pvdbow: empty document list");

  BasicPvDbowModel<Real> model;
  model.config = config;
  model.vocab = build_vocabulary(docs, config.min_count);
  if (model.vocab.empty()) throw TrainingError("pvdbow: no token reaches min_count " + std::to_string(config.min_count));

  std::vector<std::vector<TokenId>> encoded;
  encoded.reserve(docs.size());
  std::uint64_t tokens_per_epoch = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (!model.doc_index.emplace(docs[d].doc_id, d).second) {
      throw TrainingError("pvdbow: duplicate document id '" + docs[d].doc_id + "'");
    }
    model.doc_ids.push_back(docs[d].doc_id);
    encoded.push_back(model.vocab.encode(docs[d].tokens));
    tokens_per_epoch += encoded.back().size();
  }

  Rng rng(config.seed);
  model.doc_vectors = Matrix<Real>(docs.size(), config.dim);
  for (Real& v : model.doc_vectors.values()) {
    v = static_cast<Real>((rng.uniform() - 0.5) / static_cast<double>(config.dim));
  }
  model.out_vectors = Matrix<Real>(model.vocab.size(), config.dim, Real(0));

  const NoiseTable noise(model.vocab, config.noise_exponent);
  const std::uint64_t total_steps = tokens_per_epoch * config.epochs;
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = config.threads == 1
                            ? run_epoch_serial(model, encoded, noise, rng, step, total_steps)
                            : run_epoch_racy(model, encoded, noise, epoch, step, total_steps);
    if (!std::isfinite(loss) || !all_finite<Real>(model.doc_vectors.values()) ||
        !all_finite<Real>(model.out_vectors.values())) {
      throw TrainingError("pvdbow: training diverged in epoch " + std::to_string(epoch));
    }
    model.epoch_losses.push_back(loss / static_cast<double>(tokens_per_epoch));
  }
  return model;
}

template <typename Real>
std::span<const Real> doc_vector(const BasicPvDbowModel<Real>& model, const std::string& doc_id) {
  const auto it = model.doc_index.find(doc_id);
  if (it == model.doc_index.end()) throw LookupError("pvdbow: document '" + doc_id + "' was not in the training set");
  return model.doc_vectors.row(it->second);
}

template <typename Real>
std::vector<Real> infer_vector(const BasicPvDbowModel<Real>& model, std::span<const std::string> tokens,
                               std::size_t passes, LrSchedule schedule, std::uint64_t seed) {
  const auto ids = model.vocab.encode(tokens);
  if (ids.empty()) throw DomainError("infer_vector: no in-vocabulary tokens");
  const std::size_t dim = model.config.dim;

  Rng rng(seed);
  std::vector<Real> vec(dim);
  for (Real& v : vec) v = static_cast<Real>((rng.uniform() - 0.5) / static_cast<double>(dim));

  PvDbowConfig sched = model.config;
  sched.initial_lr = schedule.initial;
  sched.final_lr = schedule.final;
  const NoiseTable noise(model.vocab, model.config.noise_exponent);
  const std::uint64_t total = static_cast<std::uint64_t>(passes) * ids.size();
  std::uint64_t step = 0;

  Workspace<Real> ws;
  ws.negatives.resize(model.config.negative);
  ws.gathered.resize((model.config.negative + 1) * dim);
  for (std::size_t p = 0; p < passes; ++p) {
    for (const TokenId w : ids) {
      for (auto& n : ws.negatives) n = draw_negative(noise, rng, w);
      ws.rows.clear();
      for (std::size_t i = 0; i <= ws.negatives.size(); ++i) {
        const auto src = model.out_vectors.row(i == 0 ? w : ws.negatives[i - 1]);
        std::span<Real> buf(ws.gathered.data() + i * dim, dim);
        std::copy(src.begin(), src.end(), buf.begin());
        ws.rows.push_back(buf);
      }
      const auto lr = static_cast<Real>(scheduled_lr(sched, step++, total));
      apply_step<Real>(vec, ws.rows, lr, false, ws.coeff, ws.doc_grad);
    }
  }
  return vec;
}

void save_pvdbow_model(const std::filesystem::path& path, const PvDbowModel& model) {
  Container c;
  const auto& cfg = model.config;
  c.meta["kind"] = "pvdbow";
  c.meta["dim"] = cfg.dim;
  c.meta["n_docs"] = model.doc_vectors.rows();
  c.meta["vocab_size"] = model.vocab.size();
  c.meta["seed"] = cfg.seed;
  c.meta["config"] = {{"dim", cfg.dim},           {"epochs", cfg.epochs},
                      {"min_count", cfg.min_count}, {"negative", cfg.negative},
                      {"initial_lr", cfg.initial_lr}, {"final_lr", cfg.final_lr},
                      {"noise_exponent", cfg.noise_exponent}, {"seed", cfg.seed}, {"threads", cfg.threads}};
  c.meta["doc_ids"] = model.doc_ids;
  c.meta["epoch_losses"] = model.epoch_losses;
  nlohmann::json tokens = nlohmann::json::array();
  nlohmann::json cf = nlohmann::json::array();
  nlohmann::json df = nlohmann::json::array();
  for (const auto& e : model.vocab.entries()) {
    tokens.push_back(e.token);
    cf.push_back(e.corpus_frequency);
    df.push_back(e.document_frequency);
  }
  c.meta["vocab"] = {{"n_documents", model.vocab.n_documents()},
                     {"min_count", model.vocab.min_count()},
                     {"tokens", tokens},
                     {"corpus_frequency", cf},
                     {"document_frequency", df}};
  c.matrices.push_back({"doc_vectors", model.doc_vectors});
  c.matrices.push_back({"out_vectors", model.out_vectors});
  write_container(path, c);
}

PvDbowModel load_pvdbow_model(const std::filesystem::path& path) {
  const Container c = read_container(path);
  const std::string where = path.string() + ": ";
  if (c.meta.value("kind", std::string{}) != "pvdbow") throw LoadError(where + "not a PV-DBOW model container");

  PvDbowModel model;
  try {
    const auto& cfg = c.meta.at("config");
    model.config.dim = cfg.at("dim").get<std::size_t>();
    model.config.epochs = cfg.at("epochs").get<std::size_t>();
    model.config.min_count = cfg.at("min_count").get<std::uint64_t>();
    model.config.negative = cfg.at("negative").get<std::size_t>();
    model.config.initial_lr = cfg.at("initial_lr").get<double>();
    model.config.final_lr = cfg.at("final_lr").get<double>();
    model.config.noise_exponent = cfg.at("noise_exponent").get<double>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.config.threads = cfg.value("threads", 1u);
    model.doc_ids = c.meta.at("doc_ids").get<std::vector<std::string>>();
    model.epoch_losses = c.meta.value("epoch_losses", std::vector<double>{});

    const auto& v = c.meta.at("vocab");
    const auto tokens = v.at("tokens").get<std::vector<std::string>>();
    const auto cf = v.at("corpus_frequency").get<std::vector<std::uint64_t>>();
    const auto df = v.at("document_frequency").get<std::vector<std::uint64_t>>();
    if (cf.size() != tokens.size() || df.size() != tokens.size()) throw LoadError(where + "vocabulary arrays differ in length");
    std::vector<VocabEntry> entries;
    for (std::size_t i = 0; i < tokens.size(); ++i) entries.push_back({tokens[i], static_cast<TokenId>(i), cf[i], df[i]});
    model.vocab = Vocabulary(std::move(entries), v.at("n_documents").get<std::uint64_t>(), v.at("min_count").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(where + "malformed model header: " + e.what());
  }

  model.doc_vectors = c.matrix("doc_vectors");
  model.out_vectors = c.matrix("out_vectors");
  if (model.doc_vectors.rows() != model.doc_ids.size() || model.doc_vectors.cols() != model.config.dim ||
      model.out_vectors.rows() != model.vocab.size() || model.out_vectors.cols() != model.config.dim) {
    throw LoadError(where + "matrix shapes disagree with header");
  }
  for (std::size_t i = 0; i < model.doc_ids.size(); ++i) {
    if (!model.doc_index.emplace(model.doc_ids[i], i).second) throw LoadError(where + "duplicate document id");
  }
  return model;
}

#define NEWSCLUST_INSTANTIATE(Real)                                                                              \
  template Real sigmoid<Real>(Real);                                                                             \
  template Real pvdbow_loss<Real>(std::span<const Real>, TokenId, std::span<const TokenId>, const Matrix<Real>&); \
  template void pvdbow_gradient<Real>(std::span<const Real>, TokenId, std::span<const TokenId>,                  \
                                      const Matrix<Real>&, std::span<Real>, Matrix<Real>&);                      \
  template Real pvdbow_step<Real>(std::span<Real>, TokenId, std::span<const TokenId>, Matrix<Real>&, Real);      \
  template BasicPvDbowModel<Real> train_pvdbow<Real>(std::span<const TokenizedDocument>, const PvDbowConfig&);  \
  template std::span<const Real> doc_vector<Real>(const BasicPvDbowModel<Real>&, const std::string&);           \
  template std::vector<Real> infer_vector<Real>(const BasicPvDbowModel<Real>&, std::span<const std::string>,    \
                                                std::size_t, LrSchedule, std::uint64_t);

NEWSCLUST_INSTANTIATE(float)
NEWSCLUST_INSTANTIATE(double)

#undef NEWSCLUST_INSTANTIATE

}  // namespace newsclust
