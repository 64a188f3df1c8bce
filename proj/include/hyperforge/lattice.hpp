#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hyperforge/exterior.hpp"
#include "hyperforge/hyperherm.hpp"
#include "hyperforge/instanton.hpp"

// Periodic-lattice calculus on the flat torus [0, 2pi)^N: spectral exterior
// derivative / codifferential, abelian and small-matrix connections with a
// constant harmonic curvature part, quadrature of the curvature energy
// identities, and gradient descent on the Omega-deformed Yang-Mills
// functional.
//
// All differentiation is spectral (dense DFT per axis): ordinary derivatives
// of band-limited fields, d(d(.)) = 0, and the mean-zero property of exact
// parts hold to roundoff rather than to a discretization order.  Nyquist
// modes (frequency P/2) carry no unambiguous derivative on P points and are
// treated as constants: they differentiate to zero.
//
// Reductions (quadrature sums, norms, functional values) always run in a
// fixed site order, chunked by lattice_threads(); results are bit-stable
// across runs at equal thread counts.

namespace hf {

using cplx = std::complex<double>;

// Number of worker threads for site-parallel loops: the HYPERFORGE_THREADS
// environment variable clamped to [1, 16]; 1 when unset or unparsable.
int lattice_threads();

// ---------------------------------------------------------------------------
// Grid

// Uniform periodic grid on [0, 2pi)^N with P points per axis.  N must be a
// positive multiple of 4 with N <= 8; P must be a power of two with P >= 4,
// and the total site count P^N is capped at 2^22 as a memory guard
// (structural errors otherwise).  Site indices are flat, axis 0 fastest.
struct PeriodicGrid {
    int dimension = 0;  // N
    int points = 0;     // P

    PeriodicGrid() = default;
    PeriodicGrid(int dimension, int points);

    std::size_t size() const;        // P^N sites
    double spacing() const;          // 2 pi / P
    double volume() const;           // (2 pi)^N
    double site_weight() const;      // spacing()^N, the uniform quadrature weight
    std::size_t stride(int axis) const;          // P^axis
    int coord(std::size_t site, int axis) const; // integer coordinate on axis
    double point(std::size_t site, int axis) const;  // coord * spacing
    // site with coordinate on `axis` shifted by delta (periodically).
    std::size_t shift(std::size_t site, int axis, int delta) const;
};

bool same_grid(const PeriodicGrid& a, const PeriodicGrid& b);

// Real-valued (imaginary parts zero) scalar field with independent normal
// Fourier amplitudes on all modes whose frequencies satisfy |k_axis| <= band
// on every axis.  Requires 1 <= band <= P/2 - 1 (domain error otherwise).
// Deterministic in (grid, band, seed).
std::vector<cplx> random_band_limited_field(const PeriodicGrid& grid, int band,
                                            std::uint64_t seed);

// ---------------------------------------------------------------------------
// Fields

// A degree-k form field with rank x rank matrix coefficients: one plane of
// P^N complex values per (matrix entry, form component).  Form components
// are ordered by degree_masks(N, degree); entry (p, q) of the matrix sits at
// plane index (p*rank + q)*components() + c.
struct LatticeField {
    PeriodicGrid grid;
    int degree = 0;
    int rank = 1;
    std::vector<std::vector<cplx>> planes;

    int components() const;  // choose(N, degree)
    std::vector<cplx>& plane(int comp, int p = 0, int q = 0);
    const std::vector<cplx>& plane(int comp, int p = 0, int q = 0) const;

    Form site_form(std::size_t site, int p = 0, int q = 0) const;
    void set_site_form(std::size_t site, const Form& f, int p = 0, int q = 0);
};

LatticeField zero_field(const PeriodicGrid& grid, int degree, int rank = 1);

// Spectral exterior derivative (degree k -> k+1) and its L2 adjoint, the
// codifferential (degree k -> k-1).  <lattice_d(a), b> = <a,
// lattice_codifferential(b)> holds to roundoff for band-limited fields, and
// lattice_d(lattice_d(f)) vanishes identically.
LatticeField lattice_d(const LatticeField& f);
LatticeField lattice_codifferential(const LatticeField& f);

// sqrt( sum over sites of weight * (Hermitian norm of all entries)^2 ).
double field_l2_norm(const LatticeField& f);

// Quadrature mean of one matrix entry: (1/volume) * sum weight * F(x).
Form field_mean(const LatticeField& f, int p = 0, int q = 0);

// ---------------------------------------------------------------------------
// Connections

// Connection data on the grid: a per-site, per-axis potential a with
// rank x rank skew-Hermitian coefficients (rank 1 or 2; rank 1 means purely
// imaginary scalars) and an optional constant harmonic 2-form part, also
// with skew-Hermitian matrix coefficients, representing the topological
// class of the curvature.  The curvature is F = harmonic + d(a); the exact
// part d(a) integrates to zero componentwise, so harmonic alone determines
// every period of F.
struct LatticeConnection {
    PeriodicGrid grid;
    int rank = 1;
    // potential planes, indexed (axis*rank + p)*rank + q; each of size P^N.
    std::vector<std::vector<cplx>> a;
    // rank*rank degree-2 forms, harmonic[p*rank + q]; empty means zero.
    std::vector<Form> harmonic;

    std::vector<cplx>& potential(int axis, int p = 0, int q = 0);
    const std::vector<cplx>& potential(int axis, int p = 0, int q = 0) const;
};

// Zero potential, zero harmonic part.
LatticeConnection zero_connection(const PeriodicGrid& grid, int rank = 1);

// Connection with a random band-limited potential (each entry's planes drawn
// via random_band_limited_field, made skew-Hermitian) and zero harmonic
// part.  Deterministic in (grid, rank, band, seed).
LatticeConnection random_band_limited_connection(const PeriodicGrid& grid, int rank,
                                                 int band, std::uint64_t seed);

// Shift the potential by the exact 1-form d(phi): phi holds rank*rank planes
// (index p*rank + q), skew-Hermitian at every site.  The curvature is
// unchanged to roundoff.
LatticeConnection gauge_transform(const LatticeConnection& conn,
                                  const std::vector<std::vector<cplx>>& phi);

// F = harmonic + d(a) as a degree-2 field.  Spectral differentiation; the
// discrete second exterior derivative of F vanishes identically and the
// exact part has mean zero componentwise.
LatticeField curvature(const LatticeConnection& conn);

// ---------------------------------------------------------------------------
// Energy-weight constants

// Weights lambda = (l1, l2, l3) with l1 + l2 + l3 = 0 and
// l1 - 2 l2 - 2 l3 > 0, together with the derived energy-weight constants
//   a_L = lambda_L - (sum of the other two)
//   b_L = (1-2n) lambda_L - (sum of the other two)
// that appear in the quadratic curvature identities below.
struct PhiLambdaParams {
    int n = 1;
    std::array<double, 3> lambda{};
    std::array<double, 3> a{};
    std::array<double, 3> b{};
};

// Validates the lambda conditions (domain error otherwise) and fills in the
// derived constants for quaternionic dimension n.
PhiLambdaParams ab_constants(const std::array<double, 3>& lambda, int n);

// ---------------------------------------------------------------------------
// Energy identities

// Verifies, by uniform-weight quadrature with pointwise type decompositions,
// the two quadratic curvature identities on the 4n-torus (k = 2n):
//
//   int tr(F ^ F) ^ omega_I^{k-2}/(k-2)!
//       = int [ ||F11_0||^2 - ||F20||^2 - ||F02||^2 - (k-1) ||F_omega||^2 ]
//
//   int tr(F ^ F) ^ Phi_lambda
//       = int [ sum_L a_L ||F_L||^2 + 2n sum_L b_L |mu_L|^2 ]
//
// where F11_0 is the omega_I-trace-free (1,1) part, F_L = u_L the three
// quaternionic 2-plane parts, mu_L the omega_L-traces, and the pointwise
// norms are Hermitian, summed over matrix entries.  Neither right side
// involves the w-part of F: both identities, hence the reported values, are
// topological (unchanged under any change of the exact potential).
//
// Residual entries, in order: "hym_value" and "phi_value" (the common values
// of the two identities; informational, possibly negative), "hym_residual"
// and "phi_residual" (absolute LHS-RHS gaps; these two alone gate pass),
// "total_energy" (informational, int ||F||^2).  The effective tolerance is
// tol * max(1, total_energy).
//
// Preconditions: conn on a 4n-dimensional grid matching structure.dim(),
// params.n == structure.n, params consistent with ab_constants (structural /
// domain errors).
ConditionReport energy_identities(const LatticeConnection& conn,
                                  const HyperHermitianStructure& structure,
                                  const PhiLambdaParams& params, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Compactness experiment

// Torus experiment behind the compactness mechanism: for a fixed harmonic
// class whose only pieces are u_I and w (purely imaginary coefficients;
// domain error otherwise), the Phi_lambda pairing of any representative is
// topological and equals a_I ||F_I||^2 for every primitive-(1,1)
// representative; when the class has no u_I piece, every such representative
// therefore has vanishing u_I curvature energy.
//
// The experiment family is seeded: three gauge representatives (potential =
// d of a random band-limited function, curvature identically equal to the
// class) and three randomly perturbed non-representative configurations used
// to confirm topological invariance of the pairing.
//
// Residual entries, in order: "class_u_J", "class_u_K", "class_trace"
// (informational validation magnitudes), "gauge_invariance" (sup-norm
// curvature deviation across the gauge family), "topological_invariance"
// (max Phi-pairing spread across perturbed configurations),
// "phym_energy_match" (max |a_I ||F_I||^2 - Phi pairing| across the gauge
// family), "f_I_l2" (max L2 norm of the u_I curvature part across the gauge
// family; gates pass only when the class has no u_I piece), "phi_integral"
// (informational: the Phi pairing of the class).  pass gates the three
// quadratic residuals at tol * max(1, volume * ||class||^2) and the linear
// ones at tol * max(1, sqrt(volume) * ||class||).
ConditionReport lewis_experiment(const PeriodicGrid& grid, const Form& harmonic_class,
                                 std::uint64_t seed, const PhiLambdaParams& params,
                                 double tol = 1e-8);

// ---------------------------------------------------------------------------
// Omega-deformed Yang-Mills

// YM_Omega(conn) = int ||F||^2 vol - int tr(F ^ F) ^ Omega for a constant
// real form Omega of degree N-4.  The second term depends only on the
// harmonic part of the curvature.  For N = 4 and Omega = 1, the value is 0
// exactly when F is anti-self-dual and 2 int ||F||^2 when F is self-dual.
double ym_functional(const LatticeConnection& conn, const Form& Omega);

struct FlowResult {
    LatticeConnection connection;
    ConditionReport report;
    // functional value at step 0, then after each accepted step; shorter
    // than steps+1 when the gradient norm converges early.
    std::vector<double> trace;
};

// Gradient descent for YM_Omega on the exact potential of an abelian
// (rank 1) connection; the harmonic part is fixed (it is the topological
// class) and the Omega-term is constant in the potential, so the descent
// direction is the codifferential of the curvature.  step_size == 0 selects
// the default 0.1 / ||discrete Laplacian|| = 0.1 / (N (P/2-1)^2); any step
// that increases the functional aborts with a domain error advising a
// smaller step (the stable range is below 2 / ||discrete Laplacian||).
// Descent stops early once ||d*F|| <= 0.25 * tol * max(1, ||F||).
//
// Report entries, in order: "codifferential" (L2 norm of d*F at the final
// state; gates pass at tol * max(1, ||F||)), "omega_asd" (informational:
// ||*F + Omega ^ F|| / ||F||, the instanton residual -- approximately 2 for
// a self-dual class on the 4-torus), "monotone" (largest functional
// increase observed, 0 for an accepted run; gated), "trace_consistency"
// (gap between the in-flow functional and an independent recomputation at
// the final state; gated), "functional_initial" / "functional_final"
// (informational).
FlowResult ym_gradient_flow(const LatticeConnection& conn, const Form& Omega, int steps,
                            double step_size = 0.0, double tol = 1e-8);

}  // namespace hf
