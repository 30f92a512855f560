#include "newsclust/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "newsclust/csv.hpp"
#include "newsclust/error.hpp"

namespace newsclust {
namespace {

constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();

struct Lloyd {
  const Matrix<double>& data;
  Matrix<double>& centroids;
  std::vector<std::uint32_t>& assignments;
  std::vector<double> distances;  // squared distance to assigned centroid
  unsigned threads;

  // Nearest centroid per point; a point keeps its current cluster on ties.
  void assign_range(std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto x = data.row(i);
      std::uint32_t best = assignments[i];
      double best_d = best == kUnassigned ? std::numeric_limits<double>::infinity()
                                          : squared_distance(x, centroids.row(best));
      for (std::uint32_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(x, centroids.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignments[i] = best;
      distances[i] = best_d;
    }
  }

  void assign() {
    const std::size_t n = data.rows();
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers == 1) {
      assign_range(0, n);
      return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([this, w, n, workers] { assign_range(n * w / workers, n * (w + 1) / workers); });
    }
    for (auto& t : pool) t.join();
  }

  // Gives each empty cluster the point farthest from its centroid, taken from
  // a cluster that can spare it. Returns true if anything moved.
  bool repair_empty() {
    std::vector<std::size_t> counts(centroids.rows(), 0);
    for (const auto a : assignments) ++counts[a];
    bool repaired = false;
    for (std::uint32_t c = 0; c < centroids.rows(); ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = SIZE_MAX;
      for (std::size_t i = 0; i < data.rows(); ++i) {
        if (counts[assignments[i]] < 2) continue;
        if (far == SIZE_MAX || distances[i] > distances[far]) far = i;
      }
      if (far == SIZE_MAX) break;  // unreachable while n >= k
      --counts[assignments[far]];
      ++counts[c];
      assignments[far] = c;
      distances[far] = 0.0;
      const auto src = data.row(far);
      std::copy(src.begin(), src.end(), centroids.row(c).begin());
      repaired = true;
    }
    return repaired;
  }

  // Assignment followed by repairs until every cluster is populated.
  double assignment_phase() {
    assign();
    for (std::size_t guard = 0; repair_empty() && guard <= data.rows(); ++guard) assign();
    double inertia = 0.0;
    for (const double d : distances) inertia += d;
    return inertia;
  }

  void update(bool spherical) {
    const std::size_t k = centroids.rows();
    const std::size_t dim = data.cols();
    Matrix<double> sums(k, dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const auto x = data.row(i);
      auto s = sums.row(assignments[i]);
      for (std::size_t j = 0; j < dim; ++j) s[j] += x[j];
      ++counts[assignments[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto s = sums.row(c);
      if (spherical) {
        double norm = 0.0;
        for (const double v : s) norm += v * v;
        norm = std::sqrt(norm);
        // Members cancel out; every unit vector is then equally good.
        if (norm == 0.0) continue;
        for (std::size_t j = 0; j < dim; ++j) centroids(c, j) = s[j] / norm;
      } else {
        for (std::size_t j = 0; j < dim; ++j) centroids(c, j) = s[j] / static_cast<double>(counts[c]);
      }
    }
  }
};

}  // namespace

std::string_view metric_name(Metric metric) { return metric == Metric::Spherical ? "spherical" : "euclidean"; }

Metric parse_metric(std::string_view name) {
  if (name == "spherical" || name == "cosine") return Metric::Spherical;
  if (name == "euclidean") return Metric::Euclidean;
  throw DomainError("unknown metric '" + std::string(name) + "'");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Matrix<double> normalize_rows(const Matrix<double>& points) {
  Matrix<double> out = points;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    double norm = 0.0;
    for (const double v : row) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw ClusteringError("row " + std::to_string(i) + " has zero norm");
    for (double& v : row) v /= norm;
  }
  return out;
}

Matrix<double> kmeans_pp_init(const Matrix<double>& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  if (k < 1) throw ClusteringError("k must be >= 1");
  if (n < k) throw ClusteringError("need at least k points (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");

  Matrix<double> centroids(k, points.cols());
  auto place = [&](std::size_t c, std::size_t i) {
    const auto src = points.row(i);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
  };
  place(0, rng.below(n));

  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points.row(i), centroids.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (const double d : nearest) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = SIZE_MAX;
      std::size_t last_positive = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        last_positive = i;
        acc += nearest[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
      if (pick == SIZE_MAX) pick = last_positive;
    } else {
      pick = rng.below(n);
    }
    place(c, pick);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centroids.row(c)));
  }
  return centroids;
}

ClusteringResult kmeans(const Matrix<double>& points, const KMeansConfig& config) {
  if (config.k < 1) throw ClusteringError("k must be >= 1");
  if (config.max_iters < 1) throw ClusteringError("max_iters must be >= 1");
  if (!(config.tol >= 0.0)) throw ClusteringError("tol must be >= 0");
  if (points.rows() < config.k) {
    throw ClusteringError("need at least k points (n=" + std::to_string(points.rows()) + ", k=" + std::to_string(config.k) + ")");
  }
  if (points.cols() == 0) throw ClusteringError("points have zero dimension");
  for (const double v : points.values()) {
    if (!std::isfinite(v)) throw ClusteringError("non-finite input");
  }

  const bool spherical = config.metric == Metric::Spherical;
  const Matrix<double> data = spherical ? normalize_rows(points) : points;

  Rng rng(config.seed);
  ClusteringResult result;
  result.centroids = kmeans_pp_init(data, config.k, rng);
  result.assignments.assign(data.rows(), kUnassigned);

  Lloyd lloyd{data, result.centroids, result.assignments, std::vector<double>(data.rows(), 0.0), config.threads};
  double inertia = lloyd.assignment_phase();
  result.inertia_history.push_back(inertia);

  for (std::size_t it = 0; it < config.max_iters; ++it) {
    const auto before = result.assignments;
    lloyd.update(spherical);
    const double next = lloyd.assignment_phase();
    result.inertia_history.push_back(next);
    ++result.iterations;
    const double improvement = inertia > 0.0 ? (inertia - next) / inertia : 0.0;
    inertia = next;
    if (result.assignments == before || improvement < config.tol) {
      result.converged = true;
      break;
    }
  }
  result.inertia = inertia;
  return result;
}

void write_assignments_csv(std::ostream& out, std::span<const std::string> doc_ids,
                           std::span<const std::uint32_t> assignments) {
  if (doc_ids.size() != assignments.size()) throw DomainError("doc_ids and assignments differ in length");
  out << "doc_id,cluster_id\n";
  for (std::size_t i = 0; i < doc_ids.size(); ++i) out << csv_field(doc_ids[i]) << ',' << assignments[i] << '\n';
}

}  // namespace newsclust
