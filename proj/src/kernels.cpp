#include "diachron/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace diachron::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

void adam_ascent(double* param, const double* grad, double* m, double* v,
                 std::size_t n, const AdamCoeffs& c) {
  const double one_m_b1 = 1.0 - c.beta1;
  const double one_m_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_m_b1 * g;
    v[i] = c.beta2 * v[i] + one_m_b2 * (g * g);
    param[i] += c.step_size * m[i] / (std::sqrt(v[i] * c.v_correction) + c.epsilon);
  }
}

}  // namespace scalar

namespace {

constexpr KernelTable kScalarTable{Backend::scalar, scalar::dot, scalar::axpy,
                                   scalar::squared_distance, scalar::adam_ascent};

#if defined(DIACHRON_HAVE_AVX2_TU)
constexpr KernelTable kAvx2Table{Backend::avx2, avx2::dot, avx2::axpy,
                                 avx2::squared_distance, avx2::adam_ascent};
#endif

const KernelTable* initial_table() {
  Backend want = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
  if (const char* env = std::getenv("DIACHRON_SIMD"); env != nullptr && *env) {
    const Backend requested = parse_backend(env);
    if (backend_available(requested)) want = requested;
  }
  return &table(want);
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> t{initial_table()};
  return t;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(DIACHRON_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return has;
#else
  return false;
#endif
}

bool backend_available(Backend b) {
  return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

const KernelTable& table(Backend b) {
#if defined(DIACHRON_HAVE_AVX2_TU)
  if (b == Backend::avx2) {
    if (!cpu_has_avx2()) throw std::invalid_argument("AVX2 kernels not supported on this CPU");
    return kAvx2Table;
  }
#else
  if (b == Backend::avx2) throw std::invalid_argument("AVX2 kernels not compiled in");
#endif
  return kScalarTable;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void set_backend(Backend b) { current().store(&table(b), std::memory_order_relaxed); }

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  throw std::invalid_argument("unknown SIMD backend: " + std::string(name));
}

std::string_view backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace diachron::kernels
