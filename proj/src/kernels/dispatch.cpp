#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "intentforge/kernels.hpp"

namespace intentforge::kernels {

namespace {

Isa initial_isa() {
  if (const char* env = std::getenv("INTENTFORGE_ISA")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return detected_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
#if defined(INTENTFORGE_HAVE_AVX2_KERNELS)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  active().store(isa, std::memory_order_relaxed);
}

void assign_nearest(std::span<const double> px, std::span<const double> py,
                    std::span<const double> cx, std::span<const double> cy,
                    std::span<std::uint32_t> labels, std::span<double> d2) {
  if (cx.empty() || cx.size() != cy.size()) {
    throw std::invalid_argument("assign_nearest: need matching non-empty centers");
  }
  if (px.size() != py.size() || labels.size() < px.size() || d2.size() < px.size()) {
    throw std::invalid_argument("assign_nearest: size mismatch");
  }
#if defined(INTENTFORGE_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    avx2::assign_nearest(px.data(), py.data(), px.size(), cx.data(), cy.data(),
                         cx.size(), labels.data(), d2.data());
    return;
  }
#endif
  scalar::assign_nearest(px.data(), py.data(), px.size(), cx.data(), cy.data(),
                         cx.size(), labels.data(), d2.data());
}

Nearest nearest_point(double qx, double qy, std::span<const double> xs,
                      std::span<const double> ys) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw std::invalid_argument("nearest_point: need matching non-empty point set");
  }
#if defined(INTENTFORGE_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    return avx2::nearest_point(qx, qy, xs.data(), ys.data(), xs.size());
  }
#endif
  return scalar::nearest_point(qx, qy, xs.data(), ys.data(), xs.size());
}

void update_min_d2(std::span<const double> px, std::span<const double> py,
                   double cx, double cy, std::span<double> d2) {
  if (px.size() != py.size() || d2.size() < px.size()) {
    throw std::invalid_argument("update_min_d2: size mismatch");
  }
#if defined(INTENTFORGE_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    avx2::update_min_d2(px.data(), py.data(), px.size(), cx, cy, d2.data());
    return;
  }
#endif
  scalar::update_min_d2(px.data(), py.data(), px.size(), cx, cy, d2.data());
}

}  // namespace intentforge::kernels
