// Graph correspondence between sections of a torus fibration and unitary
// line-bundle connections: first-order jets of a section h = (f, g), the
// tangent frame of its graph, the restricted symplectic forms, the
// transformed curvature 2-form, and the equivalence
//
//   graph of h is complex Lagrangian  <=>  curvature is a quaternionic
//   instanton  <=>  explicit first-order system in the jet blocks,
//
// evaluated by three independent routes that are required to agree.
//
// Coordinates on R^{4n} are ordered (x^1..x^n, y^1..y^n, u^1..u^n, v^1..v^n)
// to match standard_structure(n): x, y span the base, u, v the fiber.

#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "hyperforge/exterior.hpp"
#include "hyperforge/instanton.hpp"
#include "hyperforge/random.hpp"

namespace hf {

// First-order data of a section h = (f^1..f^n, g^1..g^n) at one base point:
// the value h (a point of the 2n-torus) and the four n x n derivative blocks
//   A_{aj} = df^a/dx^j,  B_{aj} = df^a/dy^j,
//   C_{aj} = dg^a/dx^j,  G_{aj} = dg^a/dy^j.
// Generic blocks are allowed; nothing is symmetrized on construction.  The
// value h enters no differential condition; it is kept for the connection
// 1-form output.
struct GraphJet {
    int n = 0;
    Eigen::VectorXd h;        // 2n values (f^1..f^n, g^1..g^n)
    Eigen::MatrixXd A, B, C, G;
};

GraphJet zero_jet(int n);
// Normal derivative blocks, uniform torus value in [0, 2 pi).
GraphJet random_jet(int n, Rng& rng);

// Tangent frame of the graph as the columns (X_1..X_n, Y_1..Y_n) of a
// 4n x 2n matrix:
//   X_j = d/dx^j + sum_a A_{aj} d/du^a + sum_a C_{aj} d/dv^a,
//   Y_j = d/dy^j + sum_a B_{aj} d/du^a + sum_a G_{aj} d/dv^a.
Eigen::MatrixXd graph_frame(const GraphJet& jet);

struct RestrictedSymplectic {
    Eigen::MatrixXd M_J;  // Gram matrix of omega_J on (X_1..X_n, Y_1..Y_n)
    Eigen::MatrixXd M_K;  // Gram matrix of omega_K on the same frame
};

// Gram matrices of omega_J and omega_K restricted to the graph tangent
// space.  Two routes are evaluated: the closed entry formulas
//   M_J: (XX) A_{ij} - A_{ji}, (YY) G_{ji} - G_{ij}, (XY) B_{ij} + C_{ji},
//   M_K: (XX) C_{ij} - C_{ji}, (YY) B_{ij} - B_{ji}, (XY) G_{ij} - A_{ji},
// and the direct pullback of omega_J / omega_K along graph_frame.  A
// disagreement beyond 1e-12 raises invariant_violation.
RestrictedSymplectic restricted_symplectic(const GraphJet& jet);

// Transformed curvature
//   F = i sum_{a,j} (A_{aj} dx^j^du^a + B_{aj} dy^j^du^a
//                    + C_{aj} dx^j^dv^a + G_{aj} dy^j^dv^a),
// an imaginary-valued 2-form on R^{4n} that is always mixed (one base and
// one fiber index in every term).
Form rfm_curvature(const GraphJet& jet);

// Connection 1-form i (sum_a f^a du^a + sum_a g^a dv^a); its exterior
// derivative in the linear model is rfm_curvature(jet).
Form rfm_connection(const GraphJet& jet);

// Inverse of rfm_curvature: recover the derivative blocks from a curvature
// form of the model shape (imaginary-valued, only base^fiber components of
// the four block types).  The torus value is set to zero.  A form not of
// this shape raises domain_error.
GraphJet jet_from_curvature(int n, const Form& F);

// Three independent routes to the same first-order condition:
//   "lagrangian"            |M_J|_F + |M_K|_F               (graph route)
//   "instanton"             max residual of check_spn_report (curvature route)
//   "system_A_sym"          |A - A^T|_F                      (entrywise system)
//   "system_G_sym"          |G - G^T|_F
//   "system_B_plus_Ct"      |B + C^T|_F
//   "system_C_sym"          |C - C^T|_F
//   "system_B_sym"          |B - B^T|_F
//   "system_G_minus_At"     |G - A^T|_F
// Verdicts are taken against the effective tolerance tol * |F|; the three
// routes must agree, otherwise invariant_violation is raised.
ConditionReport rfm_theorem_check(const GraphJet& jet, double tol = 1e-9);

// First-order conditions for the two partial (single complex structure)
// cases, cross-validated against the antiholomorphic parts of the curvature:
//   "j_A_sym", "j_G_sym", "j_B_plus_Ct"    J conditions
//   "f02_J"                                |F^{0,2}| w.r.t. J
//   "k_B_sym", "k_C_sym", "k_A_minus_Gt"   K conditions (certified set)
//   "f02_K"                                |F^{0,2}| w.r.t. K
//   "k_alt_C_minus_Gt"                     distinguishing condition of the
//                                          alternative K set {B sym,
//                                          C = G^T, A = G^T}; exposed for
//                                          inspection, never enforced
// The certified K set is {B symmetric, C symmetric, A = G^T}: it is the one
// equivalent to F^{0,2}_K = 0 (see k_type_oracle).  pass reflects the J and
// certified-K conditions only.  If either matrix verdict disagrees with the
// corresponding antiholomorphic residual verdict, invariant_violation is
// raised.
ConditionReport k_type_conditions(const GraphJet& jet, double tol = 1e-9);
// Same check starting from a curvature form of the model shape.
ConditionReport k_type_conditions(int n, const Form& F, double tol = 1e-9);

// Decides which K condition set is equivalent to F^{0,2}_K = 0 by sampling
// jets that satisfy each candidate set exactly and measuring the relative
// antiholomorphic residual |F^{0,2}_K| / |F|:
//   certified set  {B symmetric, C symmetric, A = G^T}
//   alternative    {B symmetric, C = G^T,     A = G^T}
// A set is consistent when its worst sampled residual stays below tol.
struct KTypeOracleVerdict {
    int n = 0;
    int samples = 0;
    double certified_max_residual = 0.0;
    double alternative_max_residual = 0.0;
    bool certified_consistent = false;
    bool alternative_consistent = false;
};
KTypeOracleVerdict k_type_oracle(int n, int samples, std::uint64_t seed,
                                 double tol = 1e-10);

}  // namespace hf
