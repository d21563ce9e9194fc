#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "intentforge/geometry.hpp"

namespace intentforge {

struct KMeansConfig {
  int k = 64;
  int max_iterations = 100;
  double tolerance = 1e-6;  // meters of centroid movement
  std::uint64_t seed = 0;

  void validate() const;
};

struct WeightedPoint {
  Vec2 point;
  double weight = 1.0;
};

struct KMeansTrace {
  std::vector<double> objective;  // weighted SSE after each assignment step
  int iterations = 0;
  bool converged = false;
};

/// Deterministic weighted Lloyd's algorithm with greedy k-means++ seeding.
///
/// Coincident inputs are merged first by summing their weights, so integer
/// weights and replicated unit-weight inputs produce bit-identical output.
/// When fewer than k distinct points exist, all of them are returned, padded
/// by cycling through the heaviest points (ties in (x, y) order). The result
/// is sorted lexicographically by (x, y). Throws std::invalid_argument for
/// empty input or non-positive weights.
std::vector<Vec2> weighted_kmeans(std::span<const WeightedPoint> points,
                                  const KMeansConfig& cfg,
                                  KMeansTrace* trace = nullptr);

}  // namespace intentforge
