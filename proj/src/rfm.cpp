#include "hyperforge/rfm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hyperforge/errors.hpp"
#include "hyperforge/hyperherm.hpp"

namespace hf {
namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_jet(const GraphJet& jet) {
    if (jet.n < 1 || 4 * jet.n > kMaxDim)
        throw structural_error("rfm: jet size n must satisfy 1 <= n <= " +
                               std::to_string(kMaxDim / 4));
    if (jet.h.size() != 2 * jet.n)
        throw structural_error("rfm: jet value must have 2n entries");
    const auto bad = [&](const Eigen::MatrixXd& M) {
        return M.rows() != jet.n || M.cols() != jet.n;
    };
    if (bad(jet.A) || bad(jet.B) || bad(jet.C) || bad(jet.G))
        throw structural_error("rfm: jet derivative blocks must be n x n");
}

std::uint32_t pair_mask(int p, int q) { return (1u << p) | (1u << q); }

// Coordinate slots in R^{4n}: x^j -> j, y^j -> n+j, u^a -> 2n+a, v^a -> 3n+a
// (0-based j, a), matching standard_structure.

Eigen::MatrixXd gram_from_pullback(const Eigen::MatrixXd& frame, const Form& omega) {
    const Form pulled = pullback(frame, omega);
    const int m = static_cast<int>(frame.cols());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const double val = pulled.coeff(pair_mask(i, j)).real();
            M(i, j) = val;
            M(j, i) = -val;
        }
    }
    return M;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& M) {
    return (M + M.transpose()) / 2.0;
}

}  // namespace

GraphJet zero_jet(int n) {
    GraphJet jet;
    jet.n = n;
    if (n >= 1) {
        jet.h = Eigen::VectorXd::Zero(2 * n);
        jet.A = Eigen::MatrixXd::Zero(n, n);
        jet.B = Eigen::MatrixXd::Zero(n, n);
        jet.C = Eigen::MatrixXd::Zero(n, n);
        jet.G = Eigen::MatrixXd::Zero(n, n);
    }
    validate_jet(jet);
    return jet;
}

GraphJet random_jet(int n, Rng& rng) {
    GraphJet jet = zero_jet(n);
    for (int i = 0; i < 2 * n; ++i) jet.h(i) = 2.0 * kPi * rng.uniform();
    jet.A = rng.normal_matrix(n, n);
    jet.B = rng.normal_matrix(n, n);
    jet.C = rng.normal_matrix(n, n);
    jet.G = rng.normal_matrix(n, n);
    return jet;
}

Eigen::MatrixXd graph_frame(const GraphJet& jet) {
    validate_jet(jet);
    const int n = jet.n;
    Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(4 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        frame(j, j) = 1.0;          // X_j along d/dx^j
        frame(n + j, n + j) = 1.0;  // Y_j along d/dy^j
        for (int a = 0; a < n; ++a) {
            frame(2 * n + a, j) = jet.A(a, j);
            frame(3 * n + a, j) = jet.C(a, j);
            frame(2 * n + a, n + j) = jet.B(a, j);
            frame(3 * n + a, n + j) = jet.G(a, j);
        }
    }
    return frame;
}

RestrictedSymplectic restricted_symplectic(const GraphJet& jet) {
    validate_jet(jet);
    const int n = jet.n;
    RestrictedSymplectic rs;
    rs.M_J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    rs.M_K = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            rs.M_J(i, j) = jet.A(i, j) - jet.A(j, i);
            rs.M_J(n + i, n + j) = jet.G(j, i) - jet.G(i, j);
            rs.M_K(i, j) = jet.C(i, j) - jet.C(j, i);
            rs.M_K(n + i, n + j) = jet.B(i, j) - jet.B(j, i);
            const double mj = jet.B(i, j) + jet.C(j, i);
            const double mk = jet.G(i, j) - jet.A(j, i);
            rs.M_J(i, n + j) = mj;
            rs.M_J(n + j, i) = -mj;
            rs.M_K(i, n + j) = mk;
            rs.M_K(n + j, i) = -mk;
        }
    }

    const HyperHermitianStructure s = standard_structure(n);
    const Eigen::MatrixXd frame = graph_frame(jet);
    const double scale = std::max(
        {1.0, jet.A.cwiseAbs().maxCoeff(), jet.B.cwiseAbs().maxCoeff(),
         jet.C.cwiseAbs().maxCoeff(), jet.G.cwiseAbs().maxCoeff()});
    const double mismatch =
        std::max((rs.M_J - gram_from_pullback(frame, s.omega_J)).cwiseAbs().maxCoeff(),
                 (rs.M_K - gram_from_pullback(frame, s.omega_K)).cwiseAbs().maxCoeff());
    if (mismatch > 1e-12 * scale)
        throw invariant_violation(
            "restricted_symplectic: closed formulas disagree with the direct pullback");
    return rs;
}

Form rfm_curvature(const GraphJet& jet) {
    validate_jet(jet);
    const int n = jet.n;
    Form F(4 * n, 2);
    for (int a = 0; a < n; ++a) {
        for (int j = 0; j < n; ++j) {
            F.add_coeff(pair_mask(j, 2 * n + a), cplx{0.0, jet.A(a, j)});
            F.add_coeff(pair_mask(n + j, 2 * n + a), cplx{0.0, jet.B(a, j)});
            F.add_coeff(pair_mask(j, 3 * n + a), cplx{0.0, jet.C(a, j)});
            F.add_coeff(pair_mask(n + j, 3 * n + a), cplx{0.0, jet.G(a, j)});
        }
    }
    return F;
}

Form rfm_connection(const GraphJet& jet) {
    validate_jet(jet);
    const int n = jet.n;
    Form conn(4 * n, 1);
    for (int a = 0; a < n; ++a) {
        conn.add_coeff(1u << (2 * n + a), cplx{0.0, jet.h(a)});
        conn.add_coeff(1u << (3 * n + a), cplx{0.0, jet.h(n + a)});
    }
    return conn;
}

GraphJet jet_from_curvature(int n, const Form& F) {
    GraphJet jet = zero_jet(n);
    if (F.dim() != 4 * n || F.degree() != 2)
        throw structural_error("jet_from_curvature: need a degree-2 form on R^{4n}");
    for (int a = 0; a < n; ++a) {
        for (int j = 0; j < n; ++j) {
            jet.A(a, j) = F.coeff(pair_mask(j, 2 * n + a)).imag();
            jet.B(a, j) = F.coeff(pair_mask(n + j, 2 * n + a)).imag();
            jet.C(a, j) = F.coeff(pair_mask(j, 3 * n + a)).imag();
            jet.G(a, j) = F.coeff(pair_mask(n + j, 3 * n + a)).imag();
        }
    }
    const Form resid = F - rfm_curvature(jet);
    if (resid.norm() > 1e-12 * std::max(1.0, F.norm()))
        throw domain_error(
            "jet_from_curvature: form is not of the transformed-curvature shape");
    return jet;
}

ConditionReport rfm_theorem_check(const GraphJet& jet, double tol) {
    validate_jet(jet);
    const HyperHermitianStructure s = standard_structure(jet.n);
    const Form F = rfm_curvature(jet);
    const double tol_eff = tol * F.norm();

    const RestrictedSymplectic rs = restricted_symplectic(jet);
    const double lagrangian = rs.M_J.norm() + rs.M_K.norm();

    const ConditionReport spn = check_spn_report(s, F, tol);

    const double sys_a = (jet.A - jet.A.transpose()).norm();
    const double sys_g = (jet.G - jet.G.transpose()).norm();
    const double sys_bc = (jet.B + jet.C.transpose()).norm();
    const double sys_c = (jet.C - jet.C.transpose()).norm();
    const double sys_b = (jet.B - jet.B.transpose()).norm();
    const double sys_ga = (jet.G - jet.A.transpose()).norm();

    const bool graph_verdict = lagrangian <= tol_eff;
    const bool curvature_verdict = spn.pass;
    const bool system_verdict = sys_a <= tol_eff && sys_g <= tol_eff &&
                                sys_bc <= tol_eff && sys_c <= tol_eff &&
                                sys_b <= tol_eff && sys_ga <= tol_eff;
    if (graph_verdict != curvature_verdict || curvature_verdict != system_verdict)
        throw invariant_violation(
            "rfm_theorem_check: the graph, curvature, and system routes returned "
            "different verdicts");

    ConditionReport r;
    r.add("lagrangian", lagrangian);
    r.add("instanton", spn.max_residual());
    r.add("system_A_sym", sys_a);
    r.add("system_G_sym", sys_g);
    r.add("system_B_plus_Ct", sys_bc);
    r.add("system_C_sym", sys_c);
    r.add("system_B_sym", sys_b);
    r.add("system_G_minus_At", sys_ga);
    r.tol = tol_eff;
    r.pass = graph_verdict;
    return r;
}

ConditionReport k_type_conditions(const GraphJet& jet, double tol) {
    validate_jet(jet);
    const HyperHermitianStructure s = standard_structure(jet.n);
    const Form F = rfm_curvature(jet);
    const double tol_eff = tol * F.norm();

    const double j_a = (jet.A - jet.A.transpose()).norm();
    const double j_g = (jet.G - jet.G.transpose()).norm();
    const double j_bc = (jet.B + jet.C.transpose()).norm();
    const double k_b = (jet.B - jet.B.transpose()).norm();
    const double k_c = (jet.C - jet.C.transpose()).norm();
    const double k_ag = (jet.A - jet.G.transpose()).norm();
    const double k_alt = (jet.C - jet.G.transpose()).norm();

    const double f02_j = complex_type_split(s, s.J, F).f02.norm();
    const double f02_k = complex_type_split(s, s.K, F).f02.norm();

    const bool j_matrix = j_a <= tol_eff && j_g <= tol_eff && j_bc <= tol_eff;
    const bool j_oracle = f02_j <= tol_eff;
    const bool k_matrix = k_b <= tol_eff && k_c <= tol_eff && k_ag <= tol_eff;
    const bool k_oracle = f02_k <= tol_eff;
    if (j_matrix != j_oracle || k_matrix != k_oracle)
        throw invariant_violation(
            "k_type_conditions: matrix conditions disagree with the antiholomorphic "
            "residuals");

    ConditionReport r;
    r.add("j_A_sym", j_a);
    r.add("j_G_sym", j_g);
    r.add("j_B_plus_Ct", j_bc);
    r.add("f02_J", f02_j);
    r.add("k_B_sym", k_b);
    r.add("k_C_sym", k_c);
    r.add("k_A_minus_Gt", k_ag);
    r.add("f02_K", f02_k);
    r.add("k_alt_C_minus_Gt", k_alt);
    r.tol = tol_eff;
    r.pass = j_matrix && k_matrix;
    return r;
}

ConditionReport k_type_conditions(int n, const Form& F, double tol) {
    return k_type_conditions(jet_from_curvature(n, F), tol);
}

KTypeOracleVerdict k_type_oracle(int n, int samples, std::uint64_t seed, double tol) {
    if (samples < 1) throw structural_error("k_type_oracle: samples must be positive");
    Rng rng(seed);
    const HyperHermitianStructure s = standard_structure(n);

    KTypeOracleVerdict v;
    v.n = n;
    v.samples = samples;
    const auto relative_f02_k = [&](const GraphJet& jet) {
        const Form F = rfm_curvature(jet);
        return complex_type_split(s, s.K, F).f02.norm() / std::max(F.norm(), 1e-300);
    };
    for (int t = 0; t < samples; ++t) {
        GraphJet certified = random_jet(n, rng);
        certified.B = symmetrized(certified.B);
        certified.C = symmetrized(certified.C);
        certified.A = certified.G.transpose();
        v.certified_max_residual =
            std::max(v.certified_max_residual, relative_f02_k(certified));

        GraphJet alternative = random_jet(n, rng);
        alternative.B = symmetrized(alternative.B);
        alternative.A = alternative.G.transpose();
        alternative.C = alternative.G.transpose();
        v.alternative_max_residual =
            std::max(v.alternative_max_residual, relative_f02_k(alternative));
    }
    v.certified_consistent = v.certified_max_residual <= tol;
    v.alternative_consistent = v.alternative_max_residual <= tol;
    return v;
}

}  // namespace hf
