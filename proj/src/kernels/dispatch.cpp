#include "safetext/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "kernels_internal.hpp"

namespace safetext::kernels {

namespace detail {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

struct Active {
  const KernelTable* table;
  Backend backend;
};

Backend detect() {
  if (const char* env = std::getenv("SAFETEXT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_table() && cpu_has_avx2())
      return Backend::avx2;
    if (std::strcmp(env, "neon") == 0 && neon_table()) return Backend::neon;
    // Unknown or unavailable request falls through to autodetection.
  }
  if (avx2_table() && cpu_has_avx2()) return Backend::avx2;
  if (neon_table()) return Backend::neon;
  return Backend::scalar;
}

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::avx2:
      return avx2_table();
    case Backend::neon:
      return neon_table();
    case Backend::scalar:
      return &scalar_table();
  }
  return nullptr;
}

Active& active() {
  static Active a = [] {
    Backend b = detect();
    return Active{table_for(b), b};
  }();
  return a;
}

}  // namespace
}  // namespace detail

Backend active_backend() { return detail::active().backend; }

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return detail::avx2_table() != nullptr && detail::cpu_has_avx2();
    case Backend::neon:
      return detail::neon_table() != nullptr;
  }
  return false;
}

void force_backend(Backend b) {
  if (!backend_available(b))
    throw std::invalid_argument(std::string("kernel backend unavailable: ") +
                                backend_name(b));
  detail::active() = {detail::table_for(b), b};
}

void reset_backend() {
  Backend b = detail::detect();
  detail::active() = {detail::table_for(b), b};
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "?";
}

double dot(const double* a, const double* b, std::size_t n) {
  return detail::active().table->dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  detail::active().table->axpy(alpha, x, y, n);
}
void scale(double alpha, double* x, std::size_t n) {
  detail::active().table->scale(alpha, x, n);
}
void vadd(const double* a, const double* b, double* out, std::size_t n) {
  detail::active().table->vadd(a, b, out, n);
}
void vsub(const double* a, const double* b, double* out, std::size_t n) {
  detail::active().table->vsub(a, b, out, n);
}
void vmul(const double* a, const double* b, double* out, std::size_t n) {
  detail::active().table->vmul(a, b, out, n);
}
double vsum(const double* x, std::size_t n) {
  return detail::active().table->vsum(x, n);
}
double sumsq(const double* x, std::size_t n) {
  return detail::active().table->sumsq(x, n);
}
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, double alpha, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double beta, double* c,
          std::size_t ldc) {
  detail::active().table->gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb,
                               beta, c, ldc);
}

}  // namespace safetext::kernels
