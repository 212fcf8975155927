#pragma once

// Dense double-precision inner loops shared by every trainer.
//
// Each kernel exists as a portable scalar reference and, on x86-64, an
// AVX2+FMA variant. The active table is picked once at startup from CPUID and
// can be overridden with DIACHRON_SIMD=scalar|avx2 or set_backend(). Results
// of the reductions (dot, squared_distance) differ from the scalar reference
// only by summation order; the elementwise kernels are bit-identical.

#include <cstddef>
#include <span>
#include <string_view>

namespace diachron::kernels {

enum class Backend { scalar, avx2 };

struct AdamCoeffs {
  double beta1;
  double beta2;
  double epsilon;
  double step_size;      // learning_rate / (1 - beta1^t)
  double v_correction;   // 1 / (1 - beta2^t)
};

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
using SqDistFn = double (*)(const double*, const double*, std::size_t);
using AdamFn = void (*)(double*, const double*, double*, double*, std::size_t,
                        const AdamCoeffs&);

struct KernelTable {
  Backend backend;
  DotFn dot;
  AxpyFn axpy;
  SqDistFn squared_distance;
  AdamFn adam_ascent;
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void adam_ascent(double* param, const double* grad, double* m, double* v,
                 std::size_t n, const AdamCoeffs& c);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void adam_ascent(double* param, const double* grad, double* m, double* v,
                 std::size_t n, const AdamCoeffs& c);
}  // namespace avx2
#endif

bool cpu_has_avx2();
bool backend_available(Backend b);

const KernelTable& table(Backend b);
const KernelTable& active();

// Throws std::invalid_argument when the backend is not available on this CPU.
void set_backend(Backend b);
Backend parse_backend(std::string_view name);
std::string_view backend_name(Backend b);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace diachron::kernels
