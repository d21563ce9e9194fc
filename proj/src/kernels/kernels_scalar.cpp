#include "intentforge/kernels.hpp"

#include <limits>

namespace intentforge::kernels::scalar {

void assign_nearest(const double* px, const double* py, std::size_t n,
                    const double* cx, const double* cy, std::size_t k,
                    std::uint32_t* labels, double* d2) {
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_j = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double dx = px[i] - cx[j];
      const double dy = py[i] - cy[j];
      const double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        best_j = static_cast<std::uint32_t>(j);
      }
    }
    labels[i] = best_j;
    d2[i] = best;
  }
}

Nearest nearest_point(double qx, double qy, const double* xs, const double* ys,
                      std::size_t n) {
  Nearest out{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double d = dx * dx + dy * dy;
    if (d < out.squared_distance) {
      out = {i, d};
    }
  }
  return out;
}

void update_min_d2(const double* px, const double* py, std::size_t n, double cx,
                   double cy, double* d2) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = px[i] - cx;
    const double dy = py[i] - cy;
    const double d = dx * dx + dy * dy;
    if (d < d2[i]) d2[i] = d;
  }
}

}  // namespace intentforge::kernels::scalar
