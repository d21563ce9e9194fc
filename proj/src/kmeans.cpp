#include "intentforge/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "intentforge/kernels.hpp"

namespace intentforge {

namespace {

bool lex_less(Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; }

// Portable [0, 1) draw; std::uniform_real_distribution differs across
// standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index i with probability mass[i] / sum(mass); zero-mass entries are never
// chosen.
std::size_t sample_index(std::span<const double> mass, double total, std::mt19937_64& rng) {
  const double target = uniform01(rng) * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0) continue;
    cum += mass[i];
    last_positive = i;
    if (cum > target) return i;
  }
  return last_positive;
}

struct Collapsed {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
};

Collapsed collapse(std::span<const WeightedPoint> points) {
  std::vector<WeightedPoint> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const WeightedPoint& a, const WeightedPoint& b) {
    return lex_less(a.point, b.point);
  });
  Collapsed c;
  for (const auto& p : sorted) {
    if (!c.x.empty() && c.x.back() == p.point.x && c.y.back() == p.point.y) {
      c.w.back() += p.weight;
    } else {
      c.x.push_back(p.point.x);
      c.y.push_back(p.point.y);
      c.w.push_back(p.weight);
    }
  }
  return c;
}

std::vector<Vec2> pad_distinct(const Collapsed& c, std::size_t k) {
  const std::size_t m = c.x.size();
  std::vector<Vec2> out;
  out.reserve(k);
  for (std::size_t i = 0; i < m; ++i) out.push_back({c.x[i], c.y[i]});
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  // c is already in (x, y) order, so a stable sort by weight keeps that as the
  // tie-break.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c.w[a] > c.w[b]; });
  for (std::size_t i = 0; out.size() < k; ++i) {
    const std::size_t j = order[i % m];
    out.push_back({c.x[j], c.y[j]});
  }
  return out;
}

double weighted_objective(const Collapsed& c, std::span<const double> d2) {
  double sum = 0.0;
  for (std::size_t i = 0; i < c.w.size(); ++i) sum += c.w[i] * d2[i];
  return sum;
}

}  // namespace

void KMeansConfig::validate() const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
}

std::vector<Vec2> weighted_kmeans(std::span<const WeightedPoint> points,
                                  const KMeansConfig& cfg, KMeansTrace* trace) {
  cfg.validate();
  if (points.empty()) throw std::invalid_argument("weighted_kmeans: empty input");
  for (const auto& p : points) {
    if (!(p.weight > 0.0) || !std::isfinite(p.weight)) {
      throw std::invalid_argument("weighted_kmeans: weights must be positive and finite");
    }
    if (!std::isfinite(p.point.x) || !std::isfinite(p.point.y)) {
      throw std::invalid_argument("weighted_kmeans: non-finite point");
    }
  }
  const auto k = static_cast<std::size_t>(cfg.k);
  const Collapsed c = collapse(points);
  const std::size_t m = c.x.size();
  if (trace) *trace = {};

  std::vector<Vec2> result;
  if (m <= k) {
    result = pad_distinct(c, k);
    if (trace) trace->converged = true;
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::vector<double> cx;
    std::vector<double> cy;
    cx.reserve(k);
    cy.reserve(k);

    // Greedy k-means++: each step draws several D^2 candidates (weighted)
    // and keeps the one that lowers the potential most.
    const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
    std::vector<double> d2(m, std::numeric_limits<double>::infinity());
    std::vector<double> mass(c.w);
    std::vector<double> trial_d2(m);
    std::vector<double> best_d2(m);
    double total = 0.0;
    for (double w : c.w) total += w;
    while (cx.size() < k) {
      const int draws = cx.empty() ? 1 : trials;
      std::size_t best = 0;
      double best_potential = std::numeric_limits<double>::infinity();
      for (int t = 0; t < draws; ++t) {
        const std::size_t pick = sample_index(mass, total, rng);
        std::copy(d2.begin(), d2.end(), trial_d2.begin());
        kernels::update_min_d2(c.x, c.y, c.x[pick], c.y[pick], trial_d2);
        const double potential = weighted_objective(c, trial_d2);
        if (potential < best_potential) {
          best_potential = potential;
          best = pick;
          best_d2.swap(trial_d2);
        }
      }
      cx.push_back(c.x[best]);
      cy.push_back(c.y[best]);
      d2.swap(best_d2);
      total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        mass[i] = c.w[i] * d2[i];
        total += mass[i];
      }
      if (!(total > 0.0)) break;  // unreachable while m > k
    }

    std::vector<std::uint32_t> labels(m);
    std::vector<double> sx(k), sy(k), sw(k);
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
      kernels::assign_nearest(c.x, c.y, cx, cy, labels, d2);
      if (trace) trace->objective.push_back(weighted_objective(c, d2));
      std::fill(sx.begin(), sx.end(), 0.0);
      std::fill(sy.begin(), sy.end(), 0.0);
      std::fill(sw.begin(), sw.end(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        sx[labels[i]] += c.w[i] * c.x[i];
        sy[labels[i]] += c.w[i] * c.y[i];
        sw[labels[i]] += c.w[i];
      }
      double shift = 0.0;
      for (std::size_t j = 0; j < cx.size(); ++j) {
        if (sw[j] == 0.0) continue;  // empty cluster keeps its centroid
        const Vec2 next{sx[j] / sw[j], sy[j] / sw[j]};
        shift = std::max(shift, distance(next, {cx[j], cy[j]}));
        cx[j] = next.x;
        cy[j] = next.y;
      }
      if (trace) trace->iterations = iter + 1;
      if (shift < cfg.tolerance) {
        if (trace) trace->converged = true;
        break;
      }
    }
    if (trace) {
      kernels::assign_nearest(c.x, c.y, cx, cy, labels, d2);
      trace->objective.push_back(weighted_objective(c, d2));
    }
    for (std::size_t j = 0; j < cx.size(); ++j) result.push_back({cx[j], cy[j]});
  }
  std::sort(result.begin(), result.end(), lex_less);
  return result;
}

}  // namespace intentforge
