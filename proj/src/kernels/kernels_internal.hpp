#pragma once

#include <cstddef>

// Per-backend kernel tables. Each backend translation unit fills one of these;
// dispatch.cpp picks the table at runtime.

namespace safetext::kernels::detail {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*vadd)(const double*, const double*, double*, std::size_t);
  void (*vsub)(const double*, const double*, double*, std::size_t);
  void (*vmul)(const double*, const double*, double*, std::size_t);
  double (*vsum)(const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  void (*gemm)(bool, bool, std::size_t, std::size_t, std::size_t, double,
               const double*, std::size_t, const double*, std::size_t, double,
               double*, std::size_t);
};

const KernelTable& scalar_table();

// Null when the build target does not include the backend.
const KernelTable* avx2_table();
const KernelTable* neon_table();

bool cpu_has_avx2();

}  // namespace safetext::kernels::detail
