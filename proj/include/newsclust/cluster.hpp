#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "newsclust/matrix.hpp"
#include "newsclust/random.hpp"

namespace newsclust {

enum class Metric { Euclidean, Spherical };

std::string_view metric_name(Metric metric);
Metric parse_metric(std::string_view name);

struct KMeansConfig {
  std::size_t k = 12;
  std::size_t max_iters = 300;
  double tol = 1e-6;  // stop once the relative inertia improvement drops below this
  Metric metric = Metric::Spherical;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // assignment workers; results do not depend on it
};

struct ClusteringResult {
  std::vector<std::uint32_t> assignments;
  Matrix<double> centroids;
  double inertia = 0.0;  // squared distances to assigned centroids (of normalised rows in spherical mode)
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> inertia_history;  // one entry per assignment pass
};

// k-means++ seeding. Throws ClusteringError when n < k.
Matrix<double> kmeans_pp_init(const Matrix<double>& points, std::size_t k, Rng& rng);

// Lloyd's iterations from a seeded k-means++ start. Spherical mode
// L2-normalises rows and keeps centroids on the unit sphere. Clusters that
// empty out are reseeded with the point farthest from its centroid, so every
// cluster has at least one member on return.
ClusteringResult kmeans(const Matrix<double>& points, const KMeansConfig& config);

// Unit-norm copy of points. Throws ClusteringError on a zero row.
Matrix<double> normalize_rows(const Matrix<double>& points);

double squared_distance(std::span<const double> a, std::span<const double> b);

// CSV with header "doc_id,cluster_id".
void write_assignments_csv(std::ostream& out, std::span<const std::string> doc_ids,
                           std::span<const std::uint32_t> assignments);

}  // namespace newsclust
