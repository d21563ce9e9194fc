#pragma once

// Data-parallel distance kernels over structure-of-arrays 2-D point sets.
//
// Every kernel has a scalar reference implementation and an AVX2 variant.
// Both evaluate dx*dx + dy*dy with the same operation order and break ties
// toward the lowest index, so their results are bit-identical; the dispatcher
// only changes speed, never output.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace intentforge::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best ISA supported by the running CPU.
Isa detected_isa();

/// ISA used by the dispatching entry points. Defaults to detected_isa(),
/// unless INTENTFORGE_ISA=scalar is set in the environment.
Isa active_isa();

/// Forces an ISA (tests and benchmarks). Requesting an unsupported ISA falls
/// back to scalar.
void set_active_isa(Isa isa);

struct Nearest {
  std::size_t index = 0;
  double squared_distance = 0.0;
};

/// For each point i, writes the index of the nearest center (lowest index on
/// ties) to labels[i] and the squared distance to d2[i].
/// Requires at least one center.
void assign_nearest(std::span<const double> px, std::span<const double> py,
                    std::span<const double> cx, std::span<const double> cy,
                    std::span<std::uint32_t> labels, std::span<double> d2);

/// Nearest point of (xs, ys) to the query. Requires a non-empty set.
Nearest nearest_point(double qx, double qy, std::span<const double> xs,
                      std::span<const double> ys);

/// d2[i] = min(d2[i], squared distance of point i to (cx, cy)).
void update_min_d2(std::span<const double> px, std::span<const double> py,
                   double cx, double cy, std::span<double> d2);

namespace scalar {
void assign_nearest(const double* px, const double* py, std::size_t n,
                    const double* cx, const double* cy, std::size_t k,
                    std::uint32_t* labels, double* d2);
Nearest nearest_point(double qx, double qy, const double* xs, const double* ys,
                      std::size_t n);
void update_min_d2(const double* px, const double* py, std::size_t n, double cx,
                   double cy, double* d2);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define INTENTFORGE_HAVE_AVX2_KERNELS 1
namespace avx2 {
void assign_nearest(const double* px, const double* py, std::size_t n,
                    const double* cx, const double* cy, std::size_t k,
                    std::uint32_t* labels, double* d2);
Nearest nearest_point(double qx, double qy, const double* xs, const double* ys,
                      std::size_t n);
void update_min_d2(const double* px, const double* py, std::size_t n, double cx,
                   double cy, double* d2);
}  // namespace avx2
#endif

}  // namespace intentforge::kernels
