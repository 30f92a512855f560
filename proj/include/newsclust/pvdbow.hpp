#pragma once

// Distributed bag-of-words paragraph vectors trained with negative sampling.
//
// Each document d owns a vector v_d; each vocabulary word w owns an output
// vector u_w. For every token occurrence w of d plus a set of noise words n,
// one SGD step lowers
//
//   L = -ln sigmoid(v_d . u_w) - sum_n ln sigmoid(-v_d . u_n).
//
// There is no input word matrix and no context window.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsclust/matrix.hpp"
#include "newsclust/random.hpp"
#include "newsclust/text.hpp"

namespace newsclust {

struct PvDbowConfig {
  std::size_t dim = 100;
  std::size_t epochs = 10;
  std::uint64_t min_count = 4;
  std::size_t negative = 5;
  double initial_lr = 0.025;
  double final_lr = 1e-4;
  double noise_exponent = 0.75;
  std::uint64_t seed = 0;
  // 1 = deterministic. More workers train with unsynchronised updates to the
  // shared output matrix and give up run-to-run reproducibility.
  unsigned threads = 1;

  // Throws DomainError when a field is out of range.
  void validate() const;
};

// Unigram^exponent noise distribution over vocabulary ids.
class NoiseTable {
 public:
  NoiseTable(const Vocabulary& vocab, double exponent);

  std::size_t size() const { return cumulative_.size(); }
  double probability(TokenId id) const;
  TokenId sample(Rng& rng) const;

 private:
  std::vector<double> cumulative_;
};

template <typename Real>
struct BasicPvDbowModel {
  Matrix<Real> doc_vectors;  // one row per training document
  Matrix<Real> out_vectors;  // one row per vocabulary entry
  Vocabulary vocab;
  PvDbowConfig config;
  std::vector<std::string> doc_ids;  // row order
  std::unordered_map<std::string, std::size_t> doc_index;
  std::vector<double> epoch_losses;  // mean loss per positive example
};

using PvDbowModel = BasicPvDbowModel<float>;

template <typename Real>
Real sigmoid(Real x);

// Loss of one (document, positive, negatives) example at the current point.
template <typename Real>
Real pvdbow_loss(std::span<const Real> doc_vec, TokenId positive, std::span<const TokenId> negatives,
                 const Matrix<Real>& out_vectors);

// Analytic gradient of pvdbow_loss. grad_doc has dim entries; grad_out has one
// row per touched word (positive first, then negatives in order).
template <typename Real>
void pvdbow_gradient(std::span<const Real> doc_vec, TokenId positive, std::span<const TokenId> negatives,
                     const Matrix<Real>& out_vectors, std::span<Real> grad_doc, Matrix<Real>& grad_out);

// One SGD step on the loss above. Every coefficient is computed from the
// pre-update values, so the step is exactly -lr times the gradient even when
// a word repeats among the negatives. Returns the pre-update loss.
template <typename Real>
Real pvdbow_step(std::span<Real> doc_vec, TokenId positive, std::span<const TokenId> negatives,
                 Matrix<Real>& out_vectors, Real lr);

// Throws TrainingError on an empty effective corpus or divergence.
template <typename Real = float>
BasicPvDbowModel<Real> train_pvdbow(std::span<const TokenizedDocument> docs, const PvDbowConfig& config);

// Stored row; throws LookupError for ids absent from training.
template <typename Real>
std::span<const Real> doc_vector(const BasicPvDbowModel<Real>& model, const std::string& doc_id);

struct LrSchedule {
  double initial = 0.025;
  double final = 1e-4;
};

// Fits a fresh vector against the frozen output matrix with `passes` passes
// over the tokens. Throws DomainError if no token is in the vocabulary.
template <typename Real>
std::vector<Real> infer_vector(const BasicPvDbowModel<Real>& model, std::span<const std::string> tokens,
                               std::size_t passes, LrSchedule schedule, std::uint64_t seed);

void save_pvdbow_model(const std::filesystem::path& path, const PvDbowModel& model);
PvDbowModel load_pvdbow_model(const std::filesystem::path& path);

}  // namespace newsclust
