#include "newsclust/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsclust/error.hpp"

namespace newsclust {
namespace {

__extension__ using Int128 = __int128;

void check_inputs(std::span<const std::uint32_t> labels, std::span<const std::uint32_t> clusters) {
  if (labels.size() != clusters.size()) {
    throw DomainError("labels and clusters differ in length (" + std::to_string(labels.size()) + " vs " +
                      std::to_string(clusters.size()) + ")");
  }
  if (labels.size() < 2) throw DomainError("pair confusion needs at least two documents");
}

std::uint64_t choose2(std::uint64_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

// Dense 0-based codes in order of first appearance.
std::vector<std::size_t> compact(std::span<const std::uint32_t> ids, std::size_t& distinct) {
  std::unordered_map<std::uint32_t, std::size_t> codes;
  std::vector<std::size_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = codes.emplace(ids[i], codes.size()).first->second;
  distinct = codes.size();
  return out;
}

}  // namespace

PairConfusion pair_confusion(std::span<const std::uint32_t> labels, std::span<const std::uint32_t> clusters) {
  check_inputs(labels, clusters);
  std::size_t n_labels = 0;
  std::size_t n_clusters = 0;
  const auto l = compact(labels, n_labels);
  const auto c = compact(clusters, n_clusters);

  std::vector<std::uint64_t> table(n_clusters * n_labels, 0);
  std::vector<std::uint64_t> row_sums(n_clusters, 0);
  std::vector<std::uint64_t> col_sums(n_labels, 0);
  for (std::size_t i = 0; i < l.size(); ++i) {
    ++table[c[i] * n_labels + l[i]];
    ++row_sums[c[i]];
    ++col_sums[l[i]];
  }

  std::uint64_t tp = 0;
  for (const auto m : table) tp += choose2(m);
  std::uint64_t same_cluster = 0;
  for (const auto m : row_sums) same_cluster += choose2(m);
  std::uint64_t same_label = 0;
  for (const auto m : col_sums) same_label += choose2(m);

  PairConfusion out;
  out.tp = tp;
  out.fp = same_cluster - tp;
  out.fn = same_label - tp;
  out.tn = choose2(labels.size()) - tp - out.fp - out.fn;
  return out;
}

PairConfusion pair_confusion_bruteforce(std::span<const std::uint32_t> labels, std::span<const std::uint32_t> clusters) {
  check_inputs(labels, clusters);
  PairConfusion out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      const bool same_label = labels[i] == labels[j];
      const bool same_cluster = clusters[i] == clusters[j];
      if (same_label && same_cluster) {
        ++out.tp;
      } else if (!same_label && !same_cluster) {
        ++out.tn;
      } else if (same_cluster) {
        ++out.fp;
      } else {
        ++out.fn;
      }
    }
  }
  return out;
}

double mcc(const PairConfusion& c) {
  const std::uint64_t a = c.tp + c.fp;
  const std::uint64_t b = c.tp + c.fn;
  const std::uint64_t d1 = c.tn + c.fp;
  const std::uint64_t d2 = c.tn + c.fn;
  if (a == 0 || b == 0 || d1 == 0 || d2 == 0) return 0.0;
  // Exact identities: numerator equals +/- the denominator.
  if (c.fp == 0 && c.fn == 0) return 1.0;
  if (c.tp == 0 && c.tn == 0) return -1.0;

  const Int128 num = static_cast<Int128>(c.tp) * c.tn - static_cast<Int128>(c.fp) * c.fn;
  constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 52;
  double den = 0.0;
  if (std::max({a, b, d1, d2}) > kExactLimit) {
    den = std::exp(0.5 * (std::log(static_cast<double>(a)) + std::log(static_cast<double>(b)) +
                          std::log(static_cast<double>(d1)) + std::log(static_cast<double>(d2))));
  } else {
    den = std::sqrt(static_cast<double>(a) * static_cast<double>(b)) *
          std::sqrt(static_cast<double>(d1) * static_cast<double>(d2));
  }
  return std::clamp(static_cast<double>(num) / den, -1.0, 1.0);
}

}  // namespace newsclust
