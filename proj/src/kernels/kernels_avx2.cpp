#include "intentforge/kernels.hpp"

#if defined(INTENTFORGE_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <limits>

// Compiled via target attributes rather than -mavx2 so inline library code in
// this translation unit stays baseline x86-64.
#define IF_AVX2 __attribute__((target("avx2")))

namespace intentforge::kernels::avx2 {

IF_AVX2 void assign_nearest(const double* px, const double* py, std::size_t n,
                            const double* cx, const double* cy, std::size_t k,
                            std::uint32_t* labels, double* d2) {
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(px + i);
    const __m256d y = _mm256_loadu_pd(py + i);
    __m256d best = inf;
    __m256d best_j = _mm256_setzero_pd();
    for (std::size_t j = 0; j < k; ++j) {
      const __m256d dx = _mm256_sub_pd(x, _mm256_set1_pd(cx[j]));
      const __m256d dy = _mm256_sub_pd(y, _mm256_set1_pd(cy[j]));
      const __m256d d =
          _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
      const __m256d lt = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
      best = _mm256_blendv_pd(best, d, lt);
      best_j = _mm256_blendv_pd(best_j, _mm256_set1_pd(static_cast<double>(j)), lt);
    }
    _mm256_storeu_pd(d2 + i, best);
    alignas(32) double idx[4];
    _mm256_store_pd(idx, best_j);
    for (int l = 0; l < 4; ++l) labels[i + l] = static_cast<std::uint32_t>(idx[l]);
  }
  if (i < n) scalar::assign_nearest(px + i, py + i, n - i, cx, cy, k, labels + i, d2 + i);
}

IF_AVX2 Nearest nearest_point(double qx, double qy, const double* xs,
                              const double* ys, std::size_t n) {
  const __m256d qxv = _mm256_set1_pd(qx);
  const __m256d qyv = _mm256_set1_pd(qy);
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  __m256d best_i = _mm256_setzero_pd();
  __m256d lane_i = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d four = _mm256_set1_pd(4.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), qxv);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), qyv);
    const __m256d d = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d lt = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
    best = _mm256_blendv_pd(best, d, lt);
    best_i = _mm256_blendv_pd(best_i, lane_i, lt);
    lane_i = _mm256_add_pd(lane_i, four);
  }
  alignas(32) double bd[4];
  alignas(32) double bi[4];
  _mm256_store_pd(bd, best);
  _mm256_store_pd(bi, best_i);
  Nearest out{0, std::numeric_limits<double>::infinity()};
  for (int l = 0; l < 4; ++l) {
    const auto idx = static_cast<std::size_t>(bi[l]);
    if (bd[l] < out.squared_distance ||
        (bd[l] == out.squared_distance && idx < out.index)) {
      out = {idx, bd[l]};
    }
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double d = dx * dx + dy * dy;
    if (d < out.squared_distance) out = {i, d};
  }
  return out;
}

IF_AVX2 void update_min_d2(const double* px, const double* py, std::size_t n,
                           double cx, double cy, double* d2) {
  const __m256d cxv = _mm256_set1_pd(cx);
  const __m256d cyv = _mm256_set1_pd(cy);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(px + i), cxv);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(py + i), cyv);
    const __m256d d = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d cur = _mm256_loadu_pd(d2 + i);
    const __m256d lt = _mm256_cmp_pd(d, cur, _CMP_LT_OQ);
    _mm256_storeu_pd(d2 + i, _mm256_blendv_pd(cur, d, lt));
  }
  if (i < n) scalar::update_min_d2(px + i, py + i, n - i, cx, cy, d2 + i);
}

}  // namespace intentforge::kernels::avx2

#endif
