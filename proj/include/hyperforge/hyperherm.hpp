// Hyper-Hermitian linear algebra on R^{4n}: quaternionic triples of complex
// structures, their Kaehler 2-forms, the irreducible decomposition of 2-forms,
// complex (p,q)-type splitting, distinguished calibration forms, and spectra
// of calibration operators.
//
// Conventions
//   * A structure carries orthogonal matrices I, J, K with I^2 = J^2 = K^2 = -Id
//     and IJ = K; the metric is the identity in the chosen frame.
//   * omega_L(X, Y) = <L X, Y>; equivalently the antisymmetric matrix of
//     omega_L is L^T.  Each omega_L has |omega_L|^2 = 2n.
//   * l_star(L, beta)(X, Y) = beta(L X, L Y) -- pullback of a 2-form along L.
//   * decompose2 splits a 2-form as u_I + u_J + u_K + w + sum_L mu_L omega_L
//     where w is invariant under all three l_star actions (the sp(n) part),
//     u_L is invariant under l_star(L, .) only, and mu_L are the omega_L
//     coefficients.
//   * Calibration spectra: for a (4n-4)-form Omega the operator
//     S(beta) = *(beta ^ Omega) is symmetric on 2-forms.  Two reporting
//     conventions are supported: the literal eigenvalues of S, or the
//     "calibration" constants lambda in *beta = lambda beta ^ Omega (the
//     reciprocals of the former; undefined when S is singular).

#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hyperforge/exterior.hpp"

namespace hf {

struct HyperHermitianStructure {
    int n = 0;  // real dimension is 4n
    Eigen::MatrixXd I, J, K;
    Form omega_I, omega_J, omega_K;

    int dim() const { return 4 * n; }
    const Eigen::MatrixXd& structure(int which) const;  // 0 -> I, 1 -> J, 2 -> K
    const Form& kaehler(int which) const;
};

// Product-coordinate model: coordinates ordered (x^1..x^n, y^1..y^n,
// u^1..u^n, v^1..v^n) with I dx = dy-type action:
//   I: x -> y,  u -> v;   J: x -> u,  v -> y;   K: x -> v,  y -> u.
// Requires 1 <= n <= 4.
HyperHermitianStructure standard_structure(int n);

// Quaternion-coordinate model on H^m = R^{4m}: per-coordinate basis ordered
// (1, i, j, k); I, J, K act by left multiplication by i, j, k.
// Requires 1 <= m <= 4.
HyperHermitianStructure quaternion_structure(int m);

// The 2-form omega(X, Y) = <L X, Y> of an orthogonal matrix L with
// L^2 = -Id (such L are antisymmetric), as a Form.
Form kaehler_form(const Eigen::MatrixXd& L);

// Pullback of a degree-2 form along L: result(X, Y) = beta(L X, L Y).
// Uses a signed-permutation fast path when L is one; involutive when
// L^2 = +/-Id.
Form l_star(const Eigen::MatrixXd& L, const Form& beta);

// T = l_star(I,.) + l_star(J,.) + l_star(K,.); symmetric with eigenvalues
// 3 (on the sp(n) part) and -1 (on everything else).
Form operator_T(const HyperHermitianStructure& s, const Form& beta);

struct Form2Decomposition {
    Form u_I, u_J, u_K, w;
    std::complex<double> mu_I{0.0, 0.0}, mu_J{0.0, 0.0}, mu_K{0.0, 0.0};

    // u_I + u_J + u_K + w + mu_I omega_I + mu_J omega_J + mu_K omega_K.
    Form reconstruct(const HyperHermitianStructure& s) const;
};

// Orthogonal decomposition of a degree-2 form.  The omega-coefficients are
// removed first (mu_L = <beta, omega_L> / 2n, bilinear pairing), then the four
// averaging projectors (1/4)(1 +/- I* +/- J* +/- K*) are applied on the
// remainder.  Complex input is handled componentwise; mu_L are then complex.
Form2Decomposition decompose2(const HyperHermitianStructure& s, const Form& beta);

struct ComplexTypeSplit {
    Form f20, f11, f02;  // beta = f20 + f11 + f02
};

// Split a complex-valued 2-form into (2,0) + (1,1) + (0,2) parts with respect
// to the complex structure L (one of s.I / s.J / s.K, or any orthogonal
// matrix with L^2 = -Id).  f11 = (beta + l_star(L, beta)) / 2, and for real
// beta, f20 = conj(f02).
ComplexTypeSplit complex_type_split(const Eigen::MatrixXd& L, const Form& beta);
ComplexTypeSplit complex_type_split(const HyperHermitianStructure& s,
                                    const Eigen::MatrixXd& L, const Form& beta);

// Distinguished forms of the structure:
//   pi_k      = (1/(2k+1)!) (omega_I^2 + omega_J^2 + omega_K^2)^k   (degree 4k)
//   phi_lambda= (1/(2n-2)!) (l1 omega_I^{2n-2} + l2 omega_J^{2n-2}
//                            + l3 omega_K^{2n-2})                   (degree 4n-4)
//   upsilon   = (1/n!) (omega_J + i omega_K)^n                      (type (2n,0) w.r.t. I)
Form pi_form(const HyperHermitianStructure& s, int k);
Form phi_lambda(const HyperHermitianStructure& s, const std::array<double, 3>& lambda);
Form upsilon(const HyperHermitianStructure& s);

struct FundamentalForms {
    Form pi_k, phi_lambda, upsilon_I;
};

// Bundles the three distinguished forms.  The weights must satisfy
// l1 + l2 + l3 = 0 and l1 - 2 l2 - 2 l3 > 0; otherwise a domain error is
// thrown (phi_lambda alone enforces the same).
FundamentalForms fundamental_forms(const HyperHermitianStructure& s, int k,
                                   const std::array<double, 3>& lambda);

// Energy-weight constants attached to the weights lambda:
//   a_L = lambda_L - (sum of the other two)
//   b_L = (1-2n) lambda_L - (sum of the other two)
// The lambda conditions are exactly a_I > 0 (with a_I = 2 l1 when the sum
// vanishes).
std::array<double, 3> a_constants(const std::array<double, 3>& lambda);
std::array<double, 3> b_constants(const std::array<double, 3>& lambda, int n);

enum class SpectralConvention {
    operator_eigenvalues,  // literal spectrum of beta |-> *(beta ^ Omega)
    calibration,           // constants lambda in *beta = lambda beta ^ Omega
};

struct SpectrumReport {
    struct Cluster {
        double val = 0.0;
        int mult = 0;
        std::vector<Form> eigenbasis;
    };
    std::vector<Cluster> eigs;  // sorted ascending by val
    int domain_dim = 0;
};

// Spectrum of a symmetric operator compressed to span(domain): the domain
// basis is orthonormalized, the Gram matrix <f_a, op(f_b)> is eigensolved,
// and eigenvalues are clustered at absolute tolerance 1e-8.
SpectrumReport operator_spectrum(const std::function<Form(const Form&)>& op,
                                 const std::vector<Form>& domain);

// Spectrum of beta |-> *(beta ^ Omega) on the given domain of real 2-forms.
// Omega must have degree N-4.  In calibration convention the operator must be
// nonsingular (domain error otherwise) and the reported values are the
// reciprocals of the operator eigenvalues.
SpectrumReport spectrum_of_calibration(const Form& Omega, const std::vector<Form>& domain,
                                       SpectralConvention conv = SpectralConvention::calibration);

// Same, with domain = all of Lambda^2(R^{4n}).
SpectrumReport spectrum_of_calibration(const HyperHermitianStructure& s, const Form& Omega,
                                       SpectralConvention conv = SpectralConvention::calibration);

// Orthonormal basis of degree-k coordinate forms on R^N.
std::vector<Form> two_form_basis(int N);

// Ranks of the seven projectors (U_I, U_J, U_K, W, R omega_I, R omega_J,
// R omega_K) computed by eigensolving each projector matrix and counting
// eigenvalues within 1e-8 of 1; throws invariant_violation if any eigenvalue
// is not within 1e-8 of 0 or 1.
std::array<int, 7> projector_ranks(const HyperHermitianStructure& s);

}  // namespace hf
