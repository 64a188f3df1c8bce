#include "hyperforge/kernels.hpp"

#include <cstring>
#include <string>

#include "hyperforge/errors.hpp"

namespace hf::kernels {

namespace scalar {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

// Reductions run in four interleaved partial sums combined in a fixed order,
// mirroring the AVX2 lane layout so the two variants agree to rounding.
double dot(const double* x, const double* y, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sumsq(const double* x, std::size_t n) { return dot(x, x, n); }

void cmuladd(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  const double* xd = reinterpret_cast<const double*>(x);
  double* yd = reinterpret_cast<double*>(y);
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = xd[2 * i], xi = xd[2 * i + 1];
    yd[2 * i] += ar * xr - ai * xi;
    yd[2 * i + 1] += ar * xi + ai * xr;
  }
}

cplx cdot(const cplx* x, const cplx* y, std::size_t n) {
  const double* xd = reinterpret_cast<const double*>(x);
  const double* yd = reinterpret_cast<const double*>(y);
  double re0 = 0, re1 = 0, im0 = 0, im1 = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    re0 += xd[2 * i] * yd[2 * i] + xd[2 * i + 1] * yd[2 * i + 1];
    im0 += xd[2 * i + 1] * yd[2 * i] - xd[2 * i] * yd[2 * i + 1];
    re1 += xd[2 * i + 2] * yd[2 * i + 2] + xd[2 * i + 3] * yd[2 * i + 3];
    im1 += xd[2 * i + 3] * yd[2 * i + 2] - xd[2 * i + 2] * yd[2 * i + 3];
  }
  double re = re0 + re1, im = im0 + im1;
  for (; i < n; ++i) {
    re += xd[2 * i] * yd[2 * i] + xd[2 * i + 1] * yd[2 * i + 1];
    im += xd[2 * i + 1] * yd[2 * i] - xd[2 * i] * yd[2 * i + 1];
  }
  return {re, im};
}

}  // namespace scalar

void (*axpy)(double, const double*, double*, std::size_t) = nullptr;
void (*scal)(double, double*, std::size_t) = nullptr;
double (*dot)(const double*, const double*, std::size_t) = nullptr;
double (*sumsq)(const double*, std::size_t) = nullptr;
void (*cmuladd)(cplx, const cplx*, cplx*, std::size_t) = nullptr;
cplx (*cdot)(const cplx*, const cplx*, std::size_t) = nullptr;

namespace {

const char* g_active = "unbound";

void bind_scalar() {
  axpy = &scalar::axpy;
  scal = &scalar::scal;
  dot = &scalar::dot;
  sumsq = &scalar::sumsq;
  cmuladd = &scalar::cmuladd;
  cdot = &scalar::cdot;
  g_active = "scalar";
}

void bind_avx2() {
  axpy = &avx2::axpy;
  scal = &avx2::scal;
  dot = &avx2::dot;
  sumsq = &avx2::sumsq;
  cmuladd = &avx2::cmuladd;
  cdot = &avx2::cdot;
  g_active = "avx2";
}

struct AutoBind {
  AutoBind() {
    if (avx2::available())
      bind_avx2();
    else
      bind_scalar();
  }
} g_autobind;

}  // namespace

const char* active_isa() { return g_active; }

void force_isa(const char* name) {
  const std::string s = name ? name : "";
  if (s == "scalar") {
    bind_scalar();
  } else if (s == "avx2") {
    if (!avx2::available())
      throw domain_error("kernels: avx2 not available on this machine");
    bind_avx2();
  } else if (s == "auto") {
    if (avx2::available())
      bind_avx2();
    else
      bind_scalar();
  } else {
    throw structural_error("kernels: unknown isa '" + s + "'");
  }
}

}  // namespace hf::kernels
