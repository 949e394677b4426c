#pragma once

// Dense double-precision inner-loop kernels.
//
// Every kernel has a scalar reference implementation plus vectorized
// variants (AVX2+FMA on x86-64, NEON on AArch64). The active variant is
// picked once per process from the running CPU; `SPECMAP_ISA=scalar` in the
// environment forces the reference path. Vector variants reassociate sums,
// so results agree with the scalar path to rounding, not bit-for-bit.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace specmap::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // sum_i (x_i - y_i)^2
  double (*squared_distance)(const double* x, const double* y, std::size_t n);
};

std::string_view isa_name(Isa isa);

/// True when the variant is compiled in and the running CPU supports it.
bool isa_available(Isa isa);

/// Variants usable on this machine, scalar first.
std::vector<Isa> available_isas();

const KernelTable& table(Isa isa);

/// The variant selected for this process.
Isa active_isa();
const KernelTable& active();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}

inline double squared_distance(std::span<const double> x, std::span<const double> y) {
  return active().squared_distance(x.data(), y.data(), x.size());
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(SPECMAP_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(SPECMAP_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace specmap::kernels
