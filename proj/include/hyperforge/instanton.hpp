// Pointwise instanton condition checkers with residual reporting: primitive
// Hermitian Yang-Mills, the quaternionic (sp(n)) instanton condition in all
// of its equivalent formulations, generic calibrated anti-self-duality,
// deformed Hermitian Yang-Mills, and the mixed-form criterion for curvature
// on a product splitting.
//
// Curvature values are skew-Hermitian: a scalar ("line bundle") curvature is
// a purely imaginary-valued 2-form F = iG; a matrix curvature is a sum of
// (2-form) x (r x r coefficient matrix) terms whose assembled entry forms
// F_pq satisfy F_qp = -conj(F_pq), with r <= 4.
//
// Every checker returns raw residual magnitudes and compares them against an
// effective tolerance tol * |F| (conditions are linear in F, so residuals are
// absolutely homogeneous and this makes a verdict scale-invariant).

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hyperforge/exterior.hpp"
#include "hyperforge/hyperherm.hpp"

namespace hf {

struct ConditionReport {
    std::vector<std::pair<std::string, double>> residuals;  // insertion-ordered
    bool pass = false;
    double tol = 0.0;  // effective tolerance the residuals were compared against

    void add(std::string name, double value);
    double residual(const std::string& name) const;  // structural error if absent
    double max_residual() const;
    // pass <=> every residual <= tol; recomputed after all residuals are added
    void finalize();
};

struct MatrixCurvature {
    int rank = 1;
    std::vector<std::pair<Form, Eigen::MatrixXcd>> terms;

    static MatrixCurvature scalar(const Form& F);  // rank-1 wrapper
};

// Assembled entry forms F_pq in row-major order (r^2 of them); validates the
// shape and the skew-Hermiticity F_qp = -conj(F_pq) of the assembled entries
// (domain error otherwise).
std::vector<Form> curvature_entries(const MatrixCurvature& F);

// sqrt(sum_pq |F_pq|^2)
double curvature_norm(const MatrixCurvature& F);

// tr(F ^ F) = sum_pq F_pq ^ F_qp; real-valued for skew-Hermitian F.
Form tr_ff(const MatrixCurvature& F);

// Primitive Hermitian Yang-Mills with respect to the complex structure L of s
// (which = 0, 1, 2 for I, J, K): residuals "f02" = |F^{0,2}_L| and
// "primitive" = |F ^ omega_L^{m-1}| with m = 2n.  Scalar F must be purely
// imaginary-valued (domain error).
ConditionReport check_phym(const HyperHermitianStructure& s, int which, const Form& F,
                           double tol = 1e-9);
ConditionReport check_phym(const HyperHermitianStructure& s, int which,
                           const MatrixCurvature& F, double tol = 1e-9);

// All equivalent formulations of the quaternionic instanton condition:
//   (i)   "w_distance": |F - P_W F|
//   (ii)  "omega_asd": |*F + Pi_{n-1} ^ F|
//   (iii) "omega_asd_I/J/K": |*F + (omega_L^{2n-2}/(2n-2)!) ^ F|
//   (iv)  "phym_02_I/J/K" and "phym_primitive_I/J/K"
//   (v)   scalar input only: "type02_J", "type02_K"
// The per-formulation verdicts must agree; disagreement is an invariant
// violation (this is the executable content of the equivalence).
ConditionReport check_spn_report(const HyperHermitianStructure& s, const Form& F,
                                 double tol = 1e-9);
ConditionReport check_spn_report(const HyperHermitianStructure& s, const MatrixCurvature& F,
                                 double tol = 1e-9);

// Calibrated anti-self-duality *F = -Omega ^ F: residual "omega_asd".
// Omega must have degree dim-4.
ConditionReport check_omega_asd(const Form& F, const Form& Omega, double tol = 1e-9);
ConditionReport check_omega_asd(const MatrixCurvature& F, const Form& Omega,
                                double tol = 1e-9);

// Deformed Hermitian Yang-Mills (phase 1) for a scalar curvature F = iG on
// R^{2m} with Kaehler structure (L, omega): residuals "f02" = |F^{0,2}| and
// "im_part" = |Im((omega + F)^m)|, the latter evaluated through the binomial
// expansion sum_k (-1)^{k+1} C(m, 2k-1) omega^{m-2k+1} ^ G^{2k-1}.
ConditionReport check_dhym(const Eigen::MatrixXd& L, const Form& omega, const Form& F,
                           double tol = 1e-9);
ConditionReport check_dhym(const HyperHermitianStructure& s, const Form& F,
                           double tol = 1e-9);  // L = I, omega = omega_I

// Mixed-form criterion for an orthogonal splitting R^N = B + F given by the
// complementary orthogonal projectors (base, fiber): residuals "pure_base" =
// |G(P_B ., P_B .)| and "pure_fiber" = |G(P_F ., P_F .)|.
ConditionReport check_mixed(const Eigen::MatrixXd& base, const Eigen::MatrixXd& fiber,
                            const Form& G, double tol = 1e-9);

}  // namespace hf
