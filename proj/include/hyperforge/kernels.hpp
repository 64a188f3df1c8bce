#pragma once

#include <complex>
#include <cstddef>

// Flat array kernels used by the lattice module: axpy/scal/dot/sumsq over
// doubles and multiply-accumulate / dot over interleaved complex doubles.
//
// Two implementations share one set of semantics:
//   scalar::  portable reference code, always available
//   avx2::    AVX2+FMA variants, compiled in their own translation unit
//
// The dispatched entry points (hf::kernels::axpy etc.) are bound once, at
// first use, to the widest implementation the CPU supports.  Reductions use
// a fixed lane-then-tail summation order in both variants, so results are
// deterministic per implementation; scalar and AVX2 agree to rounding.

namespace hf::kernels {

using cplx = std::complex<double>;

namespace scalar {
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
void cmuladd(cplx a, const cplx* x, cplx* y, std::size_t n);
cplx cdot(const cplx* x, const cplx* y, std::size_t n);  // sum x[i]*conj(y[i])
}  // namespace scalar

namespace avx2 {
bool compiled();   // translation unit built with AVX2+FMA flags
bool available();  // compiled() and the CPU reports avx2+fma
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sumsq(const double* x, std::size_t n);
void cmuladd(cplx a, const cplx* x, cplx* y, std::size_t n);
cplx cdot(const cplx* x, const cplx* y, std::size_t n);
}  // namespace avx2

// Dispatched entry points.
extern void (*axpy)(double, const double*, double*, std::size_t);
extern void (*scal)(double, double*, std::size_t);
extern double (*dot)(const double*, const double*, std::size_t);
extern double (*sumsq)(const double*, std::size_t);
extern void (*cmuladd)(cplx, const cplx*, cplx*, std::size_t);
extern cplx (*cdot)(const cplx*, const cplx*, std::size_t);

// Name of the implementation currently bound: "scalar" or "avx2".
const char* active_isa();

// Rebind the dispatch table.  name is "scalar", "avx2" or "auto"; requesting
// "avx2" on a machine without it is an error.  Intended for equivalence tests.
void force_isa(const char* name);

}  // namespace hf::kernels
