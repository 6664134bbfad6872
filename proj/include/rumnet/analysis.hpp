#pragma once

// Post-fit interpretation: K-means customer types and single-attribute
// probability sweeps.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "rumnet/choice_event.hpp"
#include "rumnet/models.hpp"
#include "rumnet/random.hpp"

namespace rumnet {

using Points = std::vector<std::vector<double>>;

struct KMeansResult {
  Points centroids;
  std::vector<std::size_t> labels;
  // Within-cluster SSE after each Lloyd iteration.
  std::vector<double> sse_history;
  std::size_t iterations = 0;

  double sse() const { return sse_history.empty() ? 0.0 : sse_history.back(); }
};

// Lloyd iterations from k-means++ seeding (squared Euclidean distance). Stops
// at a label fixpoint or after max_iter iterations. Empty clusters are
// re-seeded at the point farthest from its centroid; ties go to the lowest
// centroid index.
KMeansResult kmeans(const Points& points, std::size_t k, Rng& rng, std::size_t max_iter = 100);

double within_cluster_sse(const Points& points, const Points& centroids,
                          const std::vector<std::size_t>& labels);

// Per-feature z-scoring (features with zero spread are only centred).
Points standardize(const Points& points);

void write_centroids_csv(std::ostream& os, const Points& centroids);

struct SweepSpec {
  ChoiceEvent base_event;
  std::size_t target_alternative = 0;
  std::size_t target_feature = 0;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t steps = 2;
};

struct SweepRow {
  double value = 0.0;
  std::vector<double> probabilities;
};

// Overwrites products[target_alternative][target_feature] with each grid
// value in turn and records the model's probabilities.
std::vector<SweepRow> sweep(const ChoiceModel& model, const SweepSpec& spec);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace rumnet
