#include "rumnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "rumnet/text_io.hpp"

namespace rumnet {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

std::size_t nearest(const std::vector<double>& p, const Points& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Points seed_plus_plus(const Points& points, std::size_t k, Rng& rng) {
  Points centroids;
  centroids.push_back(points[uniform_index(rng, points.size())]);
  std::vector<double> d2(points.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = squared_distance(points[i], centroids[nearest(points[i], centroids)]);
      total += d2[i];
    }
    // total > 0 while fewer than k distinct points are covered.
    const double target = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t pick = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (d2[i] == 0.0) continue;
      pick = i;
      acc += d2[i];
      if (target < acc) break;
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

}  // namespace

double within_cluster_sse(const Points& points, const Points& centroids,
                          const std::vector<std::size_t>& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    s += squared_distance(points[i], centroids[labels[i]]);
  }
  return s;
}

KMeansResult kmeans(const Points& points, std::size_t k, Rng& rng, std::size_t max_iter) {
  if (points.empty()) throw std::invalid_argument("kmeans: empty input");
  if (k < 1) throw std::invalid_argument("kmeans: k must be at least 1");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw DimensionError("kmeans point dimension", dim, p.size());
  }
  const std::set<std::vector<double>> distinct(points.begin(), points.end());
  if (k > distinct.size()) {
    throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(distinct.size()) + " distinct points");
  }

  KMeansResult r;
  r.centroids = seed_plus_plus(points, k, rng);
  r.labels.assign(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) r.labels[i] = nearest(points[i], r.centroids);

  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Update step.
    Points sums(k, std::vector<double>(dim, 0.0));
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++counts[r.labels[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[r.labels[i]][j] += points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) {
        r.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = squared_distance(points[i], r.centroids[r.labels[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      r.centroids[c] = points[far];
      r.labels[far] = c;
    }
    // Assignment step.
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = nearest(points[i], r.centroids);
      if (c != r.labels[i]) {
        r.labels[i] = c;
        changed = true;
      }
    }
    r.sse_history.push_back(within_cluster_sse(points, r.centroids, r.labels));
    r.iterations = iter + 1;
    if (!changed) break;
  }
  return r;
}

Points standardize(const Points& points) {
  if (points.empty()) return {};
  const std::size_t dim = points.front().size();
  const auto n = static_cast<double>(points.size());
  std::vector<double> mean(dim, 0.0);
  std::vector<double> sd(dim, 0.0);
  for (const auto& p : points) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += p[j] / n;
  }
  for (const auto& p : points) {
    for (std::size_t j = 0; j < dim; ++j) sd[j] += (p[j] - mean[j]) * (p[j] - mean[j]) / n;
  }
  Points out = points;
  for (auto& p : out) {
    for (std::size_t j = 0; j < dim; ++j) {
      p[j] -= mean[j];
      if (sd[j] > 0.0) p[j] /= std::sqrt(sd[j]);
    }
  }
  return out;
}

void write_centroids_csv(std::ostream& os, const Points& centroids) {
  os << "cluster";
  const std::size_t dim = centroids.empty() ? 0 : centroids.front().size();
  for (std::size_t j = 0; j < dim; ++j) os << ",z_" << (j + 1);
  os << '\n';
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    os << c;
    for (double v : centroids[c]) os << ',' << format_double(v);
    os << '\n';
  }
}

std::vector<SweepRow> sweep(const ChoiceModel& model, const SweepSpec& spec) {
  const ChoiceEvent& base = spec.base_event;
  if (spec.steps < 2) throw std::invalid_argument("sweep: steps must be at least 2");
  if (spec.target_alternative >= base.size()) {
    throw std::out_of_range("sweep: target alternative " + std::to_string(spec.target_alternative) +
                            " out of range (" + std::to_string(base.size()) + " alternatives)");
  }
  if (spec.target_feature >= base.product_dim()) {
    throw std::out_of_range("sweep: target feature " + std::to_string(spec.target_feature) +
                            " out of range (d_x = " + std::to_string(base.product_dim()) + ")");
  }
  ChoiceEvent event = base;
  ChoiceEvaluator ev(model);
  std::vector<SweepRow> rows;
  rows.reserve(spec.steps);
  for (std::size_t j = 0; j < spec.steps; ++j) {
    const double value = j + 1 == spec.steps
                             ? spec.hi
                             : spec.lo + (spec.hi - spec.lo) * static_cast<double>(j) /
                                             static_cast<double>(spec.steps - 1);
    event.product(spec.target_alternative)[spec.target_feature] = value;
    rows.push_back({value, ev.forward(event)});
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "value";
  const std::size_t n = rows.empty() ? 0 : rows.front().probabilities.size();
  for (std::size_t i = 0; i < n; ++i) os << ",p_" << (i + 1);
  os << '\n';
  for (const auto& row : rows) {
    os << format_double(row.value);
    for (double p : row.probabilities) os << ',' << format_double(p);
    os << '\n';
  }
}

}  // namespace rumnet
