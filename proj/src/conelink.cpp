#include "hyperforge/conelink.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "hyperforge/errors.hpp"
#include "hyperforge/random.hpp"

namespace hf {
namespace {

constexpr std::uint32_t kVerticalMask = 0x7u;  // link model indices 1, 2, 3

void validate_level_n(int n, const char* where) {
    if (n < 1 || 4 * (n + 1) > kMaxDim)
        throw structural_error(std::string(where) +
                               ": n must satisfy 1 <= n <= 3 (ambient dimension 4n+4 <= 16)");
}

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= static_cast<double>(i);
    return f;
}

// Terms not touching the three Reeb coordinates.
Form drop_vertical(const Form& f) {
    Form out(f.dim(), f.degree());
    const auto& masks = degree_masks(f.dim(), f.degree());
    for (std::size_t i = 0; i < masks.size(); ++i)
        if ((masks[i] & kVerticalMask) == 0u)
            out[static_cast<int>(i)] = f[static_cast<int>(i)];
    return out;
}

// Populates the derived fields from (n, p, frame) and checks the frame
// invariants: orthonormality of [p | frame], positive orientation, and the
// splitting sigma_i = alpha_j ^ alpha_k + kappa_i.
ConeLinkFrame finish_frame(int n, const Eigen::VectorXd& p, Eigen::MatrixXd frame) {
    ConeLinkFrame out;
    out.n = n;
    out.p = p;
    out.ambient = quaternion_structure(n + 1);
    out.frame = std::move(frame);

    const int N = 4 * n + 4;
    const int d = 4 * n + 3;
    Eigen::MatrixXd full(N, N);
    full.col(0) = out.p;
    full.rightCols(d) = out.frame;
    if ((full.transpose() * full - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff() >
        1e-10)
        throw invariant_violation("link_frame: frame is not orthonormal");
    if (full.determinant() <= 0.0)
        throw invariant_violation("link_frame: frame is negatively oriented");

    for (int i = 0; i < 3; ++i) {
        out.xi[i] = Eigen::VectorXd::Unit(d, i);
        out.alpha[i] = Form::basis(d, {i + 1});
        out.sigma[i] = pullback(out.frame, out.ambient.kaehler(i));
        out.kappa[i] = drop_vertical(out.sigma[i]);
    }
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        const int k = (i + 2) % 3;
        const Form res = out.sigma[i] - wedge(out.alpha[j], out.alpha[k]) - out.kappa[i];
        if (res.norm() > 1e-10)
            throw invariant_violation(
                "link_frame: restricted Kaehler forms do not split as alpha^alpha + kappa");
    }
    return out;
}

// Differential of the model submersion link -> twistor space: kills xi_1 and
// maps (xi_2, xi_3, horizontal quads) to (f_1, f_2, H) in order.
Eigen::MatrixXd twistor_projection(int n) {
    Eigen::MatrixXd dp = Eigen::MatrixXd::Zero(4 * n + 2, 4 * n + 3);
    dp(0, 1) = 1.0;
    dp(1, 2) = 1.0;
    for (int i = 0; i < 4 * n; ++i) dp(2 + i, 3 + i) = 1.0;
    return dp;
}

// Differential of the twistor fibration twistor space -> quaternionic base:
// kills the vertical plane V = span(f_1, f_2).
Eigen::MatrixXd base_projection(int n) {
    Eigen::MatrixXd dtau = Eigen::MatrixXd::Zero(4 * n, 4 * n + 2);
    for (int i = 0; i < 4 * n; ++i) dtau(i, 2 + i) = 1.0;
    return dtau;
}

}  // namespace

ConeLinkFrame link_frame(int n, const Eigen::VectorXd& p, std::uint64_t seed) {
    validate_level_n(n, "link_frame");
    const int N = 4 * n + 4;
    if (p.size() != N)
        throw structural_error("link_frame: base point must have dimension 4n+4");
    if (std::abs(p.norm() - 1.0) > 1e-9)
        throw domain_error("link_frame: base point must lie on the unit sphere");

    const HyperHermitianStructure amb = quaternion_structure(n + 1);
    Eigen::MatrixXd cols(N, N);
    cols.col(0) = p / p.norm();
    for (int i = 0; i < 3; ++i) cols.col(1 + i) = amb.structure(i) * cols.col(0);

    Rng rng(seed);
    int filled = 4;
    while (filled < N) {
        Eigen::VectorXd v;
        double nrm = 0.0;
        for (int attempt = 0; attempt < 64 && nrm <= 1e-6; ++attempt) {
            v = rng.normal_vector(N);
            const auto basis = cols.leftCols(filled);
            v -= basis * (basis.transpose() * v);
            v -= basis * (basis.transpose() * v);
            nrm = v.norm();
        }
        if (nrm <= 1e-6)
            throw invariant_violation("link_frame: failed to sample a horizontal direction");
        v /= nrm;
        cols.col(filled) = v;
        for (int i = 0; i < 3; ++i) cols.col(filled + 1 + i) = amb.structure(i) * v;
        filled += 4;
    }
    return finish_frame(n, cols.col(0), cols.rightCols(N - 1));
}

ConeLinkFrame canonical_link_frame(int n) {
    validate_level_n(n, "canonical_link_frame");
    const int N = 4 * n + 4;
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(N, N - 1);
    for (int i = 0; i + 1 < N; ++i) E(i + 1, i) = 1.0;
    return finish_frame(n, Eigen::VectorXd::Unit(N, 0), std::move(E));
}

TwistorModel twistor_model(int n) {
    validate_level_n(n, "twistor_model");
    TwistorModel tm;
    tm.n = n;
    const int D = 4 * n + 2;
    const HyperHermitianStructure q = quaternion_structure(n);
    tm.omega_V = Form::basis(D, {1, 2});
    tm.omega_H = shift_embed(q.omega_I, 2, D);
    tm.omega_J_H = shift_embed(q.omega_J, 2, D);
    tm.omega_K_H = shift_embed(q.omega_K, 2, D);
    tm.xi_tw = wedge(tm.omega_J_H, tm.omega_J_H) + wedge(tm.omega_K_H, tm.omega_K_H);
    tm.omega_KE = tm.omega_V + tm.omega_H;
    const cplx im(0.0, 1.0);
    tm.gamma = wedge(Form::basis(D, {1}) - Form::basis(D, {2}) * im,
                     tm.omega_J_H + tm.omega_K_H * im);
    tm.I_Z = Eigen::MatrixXd::Zero(D, D);
    tm.I_Z(1, 0) = 1.0;
    tm.I_Z(0, 1) = -1.0;
    tm.I_Z.block(2, 2, 4 * n, 4 * n) = q.I;
    if ((tm.omega_KE - kaehler_form(tm.I_Z)).norm() > 1e-12)
        throw invariant_violation(
            "twistor_model: omega_KE does not match the Kaehler form of I_Z");
    return tm;
}

Form shift_embed(const Form& f, int shift, int new_dim) {
    if (shift < 0 || new_dim > kMaxDim || f.dim() + shift > new_dim)
        throw structural_error("shift_embed: target dimension cannot hold the shifted form");
    Form out(new_dim, f.degree());
    const auto& masks = degree_masks(f.dim(), f.degree());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const cplx v = f[static_cast<int>(i)];
        if (v != cplx(0.0, 0.0)) out.set_coeff(masks[i] << shift, v);
    }
    return out;
}

Form transverse_star(const Form& beta) {
    const int N = beta.dim();
    if (N < 1 || beta.degree() < 0 || beta.degree() > N - 1)
        throw structural_error(
            "transverse_star: needs a form of degree < dim on R^dim, dim >= 1");
    const auto& masks = degree_masks(N, beta.degree());
    double vert = 0.0;
    for (std::size_t i = 0; i < masks.size(); ++i)
        if (masks[i] & 1u) vert = std::max(vert, std::abs(beta[static_cast<int>(i)]));
    if (vert > 1e-12 * std::max(1.0, beta.norm()))
        throw domain_error("transverse_star: form has a component along the first coordinate");
    Form sliced(N - 1, beta.degree());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const cplx v = beta[static_cast<int>(i)];
        if ((masks[i] & 1u) == 0u && v != cplx(0.0, 0.0)) sliced.set_coeff(masks[i] >> 1, v);
    }
    return shift_embed(hodge_star(sliced), 1, N);
}

Form contact_instanton_form(const Form& alpha, const Form& sigma) {
    if (alpha.degree() != 1 || sigma.degree() != 2 || alpha.dim() != sigma.dim())
        throw structural_error(
            "contact_instanton_form: needs a 1-form and a 2-form on the same space");
    const int N = alpha.dim();
    if (N % 2 == 0)
        throw structural_error("contact_instanton_form: ambient dimension must be odd (2m+1)");
    const int m = (N - 1) / 2;
    if (m < 2)
        throw domain_error("contact_instanton_form: needs ambient dimension >= 5");
    return wedge(alpha, wedge_power(sigma, m - 2)) * cplx(1.0 / factorial(m - 2), 0.0);
}

Form instanton_form(const ConeLinkFrame& frame, InstantonKind kind, int which) {
    if (which < 1 || which > 3)
        throw structural_error("instanton_form: which must be 1, 2, or 3");
    switch (kind) {
        case InstantonKind::contact:
            return contact_instanton_form(frame.alpha[which - 1], frame.sigma[which - 1]);
        case InstantonKind::tricontact: {
            Form sum2(frame.link_dim(), 4);
            for (int i = 0; i < 3; ++i) sum2 += wedge(frame.kappa[i], frame.kappa[i]);
            const Form vertical = wedge(wedge(frame.alpha[0], frame.alpha[1]), frame.alpha[2]);
            return wedge(vertical, wedge_power(sum2, frame.n - 1)) *
                   cplx(1.0 / factorial(2 * frame.n - 1), 0.0);
        }
        case InstantonKind::twistor_spn:
            return instanton_form(twistor_model(frame.n));
        case InstantonKind::qk:
            return qk_instanton_form(frame.n);
    }
    throw structural_error("instanton_form: unknown kind");
}

Form instanton_form(const TwistorModel& model) {
    const Form s2 = wedge(model.omega_H, model.omega_H) + model.xi_tw;
    return wedge(model.omega_V, wedge_power(s2, model.n - 1)) *
           cplx(1.0 / factorial(2 * model.n - 1), 0.0);
}

Form qk_instanton_form(int n) {
    validate_level_n(n, "qk_instanton_form");
    return pi_form(quaternion_structure(n), n - 1);
}

SpectrumReport link_spectra(const ConeLinkFrame& frame, InstantonKind kind, int which) {
    const Form Omega = instanton_form(frame, kind, which);
    return spectrum_of_calibration(Omega, two_form_basis(Omega.dim()),
                                   SpectralConvention::operator_eigenvalues);
}

Form cone_extension(const ConeLinkFrame& frame, const Form& F_link, double r) {
    if (F_link.dim() != frame.link_dim())
        throw structural_error("cone_extension: form does not live on the link model space");
    if (!std::isfinite(r) || r <= 0.0)
        throw domain_error("cone_extension: radius must be positive");
    return pullback((1.0 / r) * frame.frame.transpose(), F_link);
}

ConditionReport cone_lift_check(const ConeLinkFrame& frame, const Form& F_link, double tol) {
    if (F_link.dim() != frame.link_dim() || F_link.degree() != 2)
        throw structural_error("cone_lift_check: needs a 2-form on the link model space");
    const double fn = F_link.norm();
    if (F_link.imag_part().norm() > 1e-12 * std::max(1.0, fn))
        throw domain_error("cone_lift_check: needs a real-valued 2-form");
    for (int i = 0; i < 3; ++i)
        if (interior_product(frame.xi[i], F_link).norm() > 1e-10 * std::max(1.0, fn))
            throw domain_error(
                "cone_lift_check: form must be transverse to the Reeb directions");

    const double tol_eff = tol * fn;
    ConditionReport r;
    r.tol = tol_eff;

    // Radial expansion of the Kaehler power at the pHYM calibration degree
    // N = 2n:  omega^N/N! = r^{2N-1} dr^pa^ps^{N-1}/(N-1)! + r^{2N} ps^N/N!
    // with pa, ps the radius-r pullbacks of alpha_1, sigma_1.
    const int N = 2 * frame.n;
    const Form lhs =
        wedge_power(frame.ambient.omega_I, N) * cplx(1.0 / factorial(N), 0.0);
    Form dr(4 * frame.n + 4, 1);
    for (int i = 0; i < dr.dim(); ++i) dr.set_coeff(1u << i, cplx(frame.p(i), 0.0));
    const double radii[3] = {1.0, 2.0, 0.5};
    const char* expansion_names[3] = {"expansion_r1", "expansion_r2", "expansion_rhalf"};
    for (int t = 0; t < 3; ++t) {
        const double rad = radii[t];
        const Eigen::MatrixXd T = (1.0 / rad) * frame.frame.transpose();
        const Form pa = pullback(T, frame.alpha[0]);
        const Form ps = pullback(T, frame.sigma[0]);
        const Form rhs =
            wedge(dr, wedge(pa, wedge_power(ps, N - 1))) *
                cplx(std::pow(rad, 2 * N - 1) / factorial(N - 1), 0.0) +
            wedge_power(ps, N) * cplx(std::pow(rad, 2 * N) / factorial(N), 0.0);
        r.add(expansion_names[t], (lhs - rhs).norm() / lhs.norm());
    }

    // Instanton residuals on the link and on the cone, with the per-family
    // verdicts compared at every radius.
    const Form omega_c = instanton_form(frame, InstantonKind::contact, 1);
    const Form omega_t = instanton_form(frame, InstantonKind::tricontact, 1);
    const double rc = (hodge_star(wedge(F_link, omega_c)) + F_link).norm();
    const double rt = (hodge_star(wedge(F_link, omega_t)) + F_link).norm();
    const bool link_contact_pass = rc <= tol_eff;
    const bool link_tri_pass = rt <= tol_eff;
    double cone_phym_res = 0.0;
    double cone_spn_res = 0.0;
    for (int t = 0; t < 3; ++t) {
        const Form Fc = cone_extension(frame, F_link, radii[t]) * cplx(0.0, 1.0);
        const ConditionReport phym = check_phym(frame.ambient, 0, Fc, tol);
        const ConditionReport spn = check_spn_report(frame.ambient, Fc, tol);
        if (t == 0) {
            cone_phym_res = phym.max_residual();
            cone_spn_res = spn.max_residual();
        }
        if (phym.pass != link_contact_pass)
            throw invariant_violation(
                "cone_lift_check: contact and cone pHYM verdicts disagree");
        if (spn.pass != link_tri_pass)
            throw invariant_violation(
                "cone_lift_check: tri-contact and cone quaternionic verdicts disagree");
    }
    r.add("link_contact", rc);
    r.add("cone_phym", cone_phym_res);
    r.add("link_tricontact", rt);
    r.add("cone_spn", cone_spn_res);

    const double th =
        (hodge_star(F_link) - wedge(transverse_star(F_link), frame.alpha[0])).norm();
    r.add("transverse_hodge", th);

    // pass reflects the structural identities; the instanton residuals are
    // informational (their cross-level agreement is enforced above).
    r.pass = r.residual("expansion_r1") <= tol && r.residual("expansion_r2") <= tol &&
             r.residual("expansion_rhalf") <= tol && th <= tol_eff;
    return r;
}

ConditionReport twistor_model_check(int n, const ConeLinkFrame& frame, double tol) {
    validate_level_n(n, "twistor_model_check");
    if (frame.n != n)
        throw structural_error("twistor_model_check: frame level does not match n");
    const TwistorModel tm = twistor_model(n);
    const Eigen::MatrixXd dp = twistor_projection(n);
    const cplx im(0.0, 1.0);

    ConditionReport r;
    r.tol = tol;
    r.add("omega_V",
          (pullback(dp, tm.omega_V) - wedge(frame.alpha[1], frame.alpha[2])).norm());
    r.add("omega_H", (pullback(dp, tm.omega_H) - frame.kappa[0]).norm());
    r.add("xi", (pullback(dp, tm.xi_tw) - wedge(frame.kappa[1], frame.kappa[1]) -
                 wedge(frame.kappa[2], frame.kappa[2]))
                    .norm());
    r.add("gamma", (pullback(dp, tm.gamma) -
                    wedge(frame.alpha[1] - frame.alpha[2] * im,
                          frame.kappa[1] + frame.kappa[2] * im))
                       .norm());
    r.add("omega_KE", (pullback(dp, tm.omega_KE) - wedge(frame.alpha[1], frame.alpha[2]) -
                       frame.kappa[0])
                          .norm());
    r.finalize();
    return r;
}

ConditionReport reduction_check(int n, const Form& F_base, ReductionLevel level, double tol) {
    validate_level_n(n, "reduction_check");
    const bool base_is_qk =
        level == ReductionLevel::q_to_z || level == ReductionLevel::q_to_m;
    const int base_dim = base_is_qk ? 4 * n : 4 * n + 2;
    if (F_base.degree() != 2 || F_base.dim() != base_dim)
        throw structural_error("reduction_check: needs a 2-form of the level's base dimension");
    const double fn = F_base.norm();
    if (F_base.imag_part().norm() > 1e-12 * std::max(1.0, fn))
        throw domain_error("reduction_check: needs a real-valued 2-form");

    const ConeLinkFrame frame = canonical_link_frame(n);
    const TwistorModel tm = twistor_model(n);
    const Eigen::MatrixXd dp = twistor_projection(n);
    const Eigen::MatrixXd dtau = base_projection(n);
    const double tol_eff = tol * fn;
    const auto asd_residual = [](const Form& F, const Form& Omega) {
        return (hodge_star(wedge(F, Omega)) + F).norm();
    };

    ConditionReport r;
    r.tol = tol_eff;
    bool base_pass = false;
    bool lift_pass = false;
    switch (level) {
        case ReductionLevel::z_to_m: {
            const double rb = asd_residual(F_base, instanton_form(tm));
            const double rl = asd_residual(pullback(dp, F_base),
                                           instanton_form(frame, InstantonKind::tricontact));
            r.add("base", rb);
            r.add("lift", rl);
            base_pass = rb <= tol_eff;
            lift_pass = rl <= tol_eff;
            break;
        }
        case ReductionLevel::q_to_z: {
            const double rb = asd_residual(F_base, qk_instanton_form(n));
            const double rl = asd_residual(pullback(dtau, F_base), instanton_form(tm));
            r.add("base", rb);
            r.add("lift", rl);
            base_pass = rb <= tol_eff;
            lift_pass = rl <= tol_eff;
            break;
        }
        case ReductionLevel::q_to_m: {
            const double rb = asd_residual(F_base, qk_instanton_form(n));
            const Eigen::MatrixXd lift_map = dtau * dp;  // link -> quaternionic base
            const double rl = asd_residual(pullback(lift_map, F_base),
                                           instanton_form(frame, InstantonKind::tricontact));
            r.add("base", rb);
            r.add("lift", rl);
            base_pass = rb <= tol_eff;
            lift_pass = rl <= tol_eff;
            break;
        }
        case ReductionLevel::ke_to_m: {
            const ComplexTypeSplit split = complex_type_split(tm.I_Z, F_base);
            const double rb02 = split.f02.norm();
            const double rbprim = std::abs(inner_product(F_base, tm.omega_KE));
            const double rl = asd_residual(pullback(dp, F_base),
                                           instanton_form(frame, InstantonKind::contact, 1));
            r.add("base_02", rb02);
            r.add("base_primitive", rbprim);
            r.add("lift", rl);
            base_pass = rb02 <= tol_eff && rbprim <= tol_eff;
            lift_pass = rl <= tol_eff;
            break;
        }
    }
    if (base_pass != lift_pass)
        throw invariant_violation("reduction_check: base and lift instanton verdicts disagree");
    r.pass = base_pass;
    return r;
}

}  // namespace hf
