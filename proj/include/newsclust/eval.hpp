#pragma once

#include <cstdint>
#include <span>

namespace newsclust {

// Confusion counts over unordered pairs of documents:
//   tp  same label, same cluster       tn  different label, different cluster
//   fp  different label, same cluster  fn  same label, different cluster
struct PairConfusion {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const PairConfusion&) const = default;
};

// Linear-time counts from the cluster x label contingency table. Labels and
// cluster ids are arbitrary integers. Throws DomainError on a length mismatch
// or fewer than two documents.
PairConfusion pair_confusion(std::span<const std::uint32_t> labels, std::span<const std::uint32_t> clusters);

// Same contract, by explicit enumeration of every pair.
PairConfusion pair_confusion_bruteforce(std::span<const std::uint32_t> labels, std::span<const std::uint32_t> clusters);

// Matthews correlation over pair counts, in [-1, 1]. Returns 0 when any of the
// four marginal sums is zero.
double mcc(const PairConfusion& c);

}  // namespace newsclust
