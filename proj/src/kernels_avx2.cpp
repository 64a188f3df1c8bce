// AVX2+FMA kernel variants.  This is the only translation unit compiled with
// vector ISA flags; the runtime dispatcher in kernels.cpp is the sole gate, so
// nothing here may be reached on a machine without AVX2.

#include "hyperforge/kernels.hpp"

#ifdef HYPERFORGE_HAVE_AVX2_TU
#include <immintrin.h>
#endif

namespace hf::kernels::avx2 {

#ifdef HYPERFORGE_HAVE_AVX2_TU

bool compiled() { return true; }

bool available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  // Horizontal reduction in the same order as the scalar reference:
  // (lane0+lane1) + (lane2+lane3), then the <4 element tail.
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sumsq(const double* x, std::size_t n) { return dot(x, x, n); }

void cmuladd(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  const __m256d var = _mm256_set1_pd(ar);
  const __m256d vai = _mm256_set1_pd(ai);
  const double* xd = reinterpret_cast<const double*>(x);
  double* yd = reinterpret_cast<double*>(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {  // two complex values per 256-bit vector
    const __m256d vx = _mm256_loadu_pd(xd + 2 * i);
    const __m256d vxs = _mm256_permute_pd(vx, 0b0101);  // swap re/im pairs
    // even lanes: ar*xr - ai*xi, odd lanes: ar*xi + ai*xr
    const __m256d prod = _mm256_fmaddsub_pd(var, vx, _mm256_mul_pd(vai, vxs));
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double xr = xd[2 * i], xi = xd[2 * i + 1];
    yd[2 * i] += ar * xr - ai * xi;
    yd[2 * i + 1] += ar * xi + ai * xr;
  }
}

cplx cdot(const cplx* x, const cplx* y, std::size_t n) {
  const double* xd = reinterpret_cast<const double*>(x);
  const double* yd = reinterpret_cast<const double*>(y);
  // acc_re lanes hold {x0r*y0r, x0i*y0i, x1r*y1r, x1i*y1i}; summed pairwise
  // they give the real parts of two products, matching the scalar two-way
  // partial sums.  acc_im likewise with one operand swapped.
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(xd + 2 * i);
    const __m256d vy = _mm256_loadu_pd(yd + 2 * i);
    const __m256d vxs = _mm256_permute_pd(vx, 0b0101);
    acc_re = _mm256_fmadd_pd(vx, vy, acc_re);
    acc_im = _mm256_fmadd_pd(vxs, vy, acc_im);
  }
  alignas(32) double lr[4], li[4];
  _mm256_store_pd(lr, acc_re);
  _mm256_store_pd(li, acc_im);
  // scalar reference: re0 += xr*yr + xi*yi; im0 += xi*yr - xr*yi (per complex)
  double re = (lr[0] + lr[1]) + (lr[2] + lr[3]);
  double im = (li[0] - li[1]) + (li[2] - li[3]);
  for (; i < n; ++i) {
    re += xd[2 * i] * yd[2 * i] + xd[2 * i + 1] * yd[2 * i + 1];
    im += xd[2 * i + 1] * yd[2 * i] - xd[2 * i] * yd[2 * i + 1];
  }
  return {re, im};
}

#else  // translation unit built without AVX2 flags: unreachable stubs

bool compiled() { return false; }
bool available() { return false; }
void axpy(double a, const double* x, double* y, std::size_t n) {
  scalar::axpy(a, x, y, n);
}
void scal(double a, double* x, std::size_t n) { scalar::scal(a, x, n); }
double dot(const double* x, const double* y, std::size_t n) {
  return scalar::dot(x, y, n);
}
double sumsq(const double* x, std::size_t n) { return scalar::sumsq(x, n); }
void cmuladd(cplx a, const cplx* x, cplx* y, std::size_t n) {
  scalar::cmuladd(a, x, y, n);
}
cplx cdot(const cplx* x, const cplx* y, std::size_t n) {
  return scalar::cdot(x, y, n);
}

#endif

}  // namespace hf::kernels::avx2
