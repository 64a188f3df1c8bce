// Pointwise linear algebra of the cone / link / twistor / quaternionic-base
// tower.  The ambient space R^{4n+4} carries the flat quaternionic structure;
// a unit base point p on the sphere link S^{4n+3} induces the contact triple
// alpha_1..3 (duals of the Reeb vectors I p, J p, K p), the restricted
// 2-forms sigma_i, and their horizontal parts kappa_i on the 4n-dimensional
// quaternionic slice.  On top of the link sit the twistor model V + H
// (dim 4n+2) and the quaternionic base model R^{4n}.
//
// The module builds the degree-(dim-4) instanton forms of each level
// (contact, tri-contact, twistor, quaternionic), computes their wedge-star
// spectra, extends link forms homogeneously to the cone, and checks the
// lift/reduction equivalences between the levels as residual agreements.
//
// Link model coordinates: e_1, e_2, e_3 are the Reeb directions xi_1..3 and
// e_4 .. e_{4n+3} the horizontal quads; the model volume form is the one
// induced by contracting the radial direction into the cone volume.

#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "hyperforge/exterior.hpp"
#include "hyperforge/hyperherm.hpp"
#include "hyperforge/instanton.hpp"

namespace hf {

struct ConeLinkFrame {
    int n = 0;
    Eigen::VectorXd p;             // unit base point in R^{4n+4}
    HyperHermitianStructure ambient;  // flat quaternionic structure on R^{4n+4}
    // Orthonormal columns (xi_1, xi_2, xi_3, horizontal quads) spanning the
    // link tangent space p^perp; positively oriented together with p.
    Eigen::MatrixXd frame;
    std::array<Eigen::VectorXd, 3> xi;  // Reeb vectors in model coordinates
    std::array<Form, 3> alpha;          // contact 1-forms (duals of xi_i)
    std::array<Form, 3> sigma;          // restrictions of the ambient Kaehler forms
    std::array<Form, 3> kappa;          // horizontal parts of sigma_i

    int link_dim() const { return 4 * n + 3; }
};

// Frame at p with a seeded random orthonormal quad basis (h, Ih, Jh, Kh) of
// the horizontal space.  Non-unit p is a domain error; the constructed frame
// must satisfy sigma_1 = alpha_2^alpha_3 + kappa_1 (and cyclic), an
// orthonormal Gram matrix, and positive orientation, else invariant_violation.
ConeLinkFrame link_frame(int n, const Eigen::VectorXd& p, std::uint64_t seed);

// Frame at p = e_1 whose horizontal basis is the coordinate quads; fully
// deterministic (used by the canonical reduction models).
ConeLinkFrame canonical_link_frame(int n);

// The twistor-space model: R^{4n+2} = V + H with V = span(f_1, f_2) and the
// quaternionic block structure on H; omega_V = f^1^f^2, omega_H the Kaehler
// form of I_H, xi_tw = omega_{J,H}^2 + omega_{K,H}^2, gamma the complex
// 3-form (f^1 - i f^2)^(omega_{J,H} + i omega_{K,H}), and the Kaehler form
// omega_KE = omega_V + omega_H of the block complex structure I_Z.
struct TwistorModel {
    int n = 0;
    Eigen::MatrixXd I_Z;  // rotation f_1 -> f_2 on V plus I_H on H
    Form omega_V, omega_H, omega_J_H, omega_K_H, xi_tw, omega_KE, gamma;

    int dim() const { return 4 * n + 2; }
};

TwistorModel twistor_model(int n);

// Reindex a form onto a larger space by shifting every coordinate index up
// by `shift`; the new leading coordinates are unused.
Form shift_embed(const Form& f, int shift, int new_dim);

// Hodge star of the slice orthogonal to the first coordinate, for forms with
// no first-coordinate component (the transverse star of the link); the slice
// orientation is induced by vol = e^1 ^ vol_slice.  A form with a
// first-coordinate component is a domain error.  When the ambient dimension
// is odd (every link model space is), hodge_star(beta) =
// transverse_star(beta) ^ e^1 in every degree.
Form transverse_star(const Form& beta);

// Generic contact instanton form (1/(m-2)!) alpha ^ sigma^{m-2} on R^{2m+1};
// m < 2 is a domain error.
Form contact_instanton_form(const Form& alpha, const Form& sigma);

enum class InstantonKind {
    contact,      // (1/(2n-1)!) alpha_w ^ sigma_w^{2n-1}      on the link
    tricontact,   // (1/(2n-1)!) alpha_123 ^ (sum kappa^2)^{n-1} on the link
    twistor_spn,  // (1/(2n-1)!) omega_V ^ (omega_H^2 + xi)^{n-1} on the twistor model
    qk,           // Pi_{n-1} on the quaternionic base R^{4n}
};

// Instanton form of the requested kind; `which` selects the Reeb direction
// for the contact kind (1, 2, or 3).  The twistor and qk kinds return forms
// on their own model spaces (dims 4n+2 and 4n).
Form instanton_form(const ConeLinkFrame& frame, InstantonKind kind, int which = 1);
Form instanton_form(const TwistorModel& model);  // the twistor_spn form
Form qk_instanton_form(int n);                   // Pi_{n-1} on R^{4n}

// Spectrum of beta |-> *(beta ^ Omega) on all real 2-forms of the model
// space of the kind (literal operator eigenvalues, zeros kept).
SpectrumReport link_spectra(const ConeLinkFrame& frame, InstantonKind kind,
                            int which = 1);

// Homogeneous extension of a horizontal link 2-form to the cone, evaluated
// at radius r in flat ambient coordinates.
Form cone_extension(const ConeLinkFrame& frame, const Form& F_link, double r);

// Checks, for a horizontal (all alpha_i- and xi_i-transverse) 2-form F on
// the link model:
//   "expansion_r1", "expansion_r2", "expansion_rhalf"
//       relative residuals of the radial expansion
//       omega_C^N/N! = r^{2N-1} dr^alpha^sigma^{N-1}/(N-1)!
//                      + r^{2N} sigma^N/N!  at N = 2n
//   "link_contact"   |*(F^Omega_contact) + F|
//   "cone_phym"      worst pHYM residual of the extension i*F at r = 1
//   "link_tricontact"|*(F^Omega_tricontact) + F|
//   "cone_spn"       worst quaternionic-instanton residual of the extension
//   "transverse_hodge" |*F - (*_D F)^alpha_1|
// The contact verdict must agree with the pHYM verdict and the tri-contact
// verdict with the quaternionic verdict at every sampled radius (r = 1, 2,
// 1/2); disagreement raises invariant_violation.  Non-transverse or complex
// input is a domain error.  pass reflects the structural identities
// (expansion, transverse Hodge); the instanton residuals are informational
// and do not gate it, so non-instanton forms still produce passing reports.
ConditionReport cone_lift_check(const ConeLinkFrame& frame, const Form& F_link,
                                double tol = 1e-9);

// Residuals of the five submersion pullback identities between the twistor
// model and the link frame, under the model differential that kills xi_1 and
// maps (xi_2, xi_3, horizontal) to (f_1, f_2, H):
//   "omega_V"   p*(omega_V) - alpha_2^alpha_3
//   "omega_H"   p*(omega_H) - kappa_1
//   "xi"        p*(xi_tw) - (kappa_2^2 + kappa_3^2)
//   "gamma"     p*(gamma) - (alpha_2 - i alpha_3)^(kappa_2 + i kappa_3)
//   "omega_KE"  p*(omega_KE) - (alpha_2^alpha_3 + kappa_1)
ConditionReport twistor_model_check(int n, const ConeLinkFrame& frame,
                                    double tol = 1e-9);

enum class ReductionLevel { z_to_m, q_to_z, q_to_m, ke_to_m };

// Equivalence of the instanton condition on a base model with the lifted
// condition along the canonical submersions (twistor Z -> link M quotients
// xi_1; base Q -> Z quotients the twistor fiber V):
//   z_to_m:  twistor instanton on Z        <=> tri-contact instanton on M
//   q_to_z:  quaternionic instanton on Q   <=> twistor instanton on Z
//   q_to_m:  quaternionic instanton on Q   <=> tri-contact instanton on M
//   ke_to_m: pHYM on the Kaehler model (I_Z, omega_KE) <=> contact instanton
//            on M ("base_02", "base_primitive" instead of "base")
// Residuals "base" and "lift"; verdict disagreement raises
// invariant_violation.  F_base must be a real 2-form of the level's model
// dimension.
ConditionReport reduction_check(int n, const Form& F_base, ReductionLevel level,
                                double tol = 1e-9);

}  // namespace hf
