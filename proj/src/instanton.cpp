#include "hyperforge/instanton.hpp"

#include <algorithm>
#include <cmath>

#include "hyperforge/errors.hpp"

namespace hf {
namespace {

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

void require_structure_matrix(const Eigen::MatrixXd& L, const char* what) {
    const auto N = L.rows();
    if (N == 0 || L.cols() != N || N > kMaxDim)
        throw structural_error(std::string(what) + ": matrix must be square with dim <= 16");
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
    if ((L.transpose() * L - id).norm() > 1e-10 * static_cast<double>(N) ||
        (L * L + id).norm() > 1e-10 * static_cast<double>(N))
        throw structural_error(std::string(what) + ": matrix is not an orthogonal complex structure");
}

void require_scalar_curvature(const Form& F, const char* what) {
    if (F.degree() != 2)
        throw structural_error(std::string(what) + ": curvature must be a degree-2 form");
    if (F.real_part().norm() > 1e-12 * std::max(1.0, F.norm()))
        throw domain_error(std::string(what) +
                           ": scalar curvature must be purely imaginary-valued");
}

double sum_sq(std::initializer_list<double> vals) {
    double acc = 0.0;
    for (double v : vals) acc += v * v;
    return acc;
}

// Root-sum-square of a per-entry residual over all curvature entries.
template <typename OpNorm>
double entries_residual(const std::vector<Form>& entries, OpNorm&& op_norm) {
    double acc = 0.0;
    for (const Form& e : entries) acc += sum_sq({op_norm(e)});
    return std::sqrt(acc);
}

double entries_norm(const std::vector<Form>& entries) {
    return entries_residual(entries, [](const Form& e) { return e.norm(); });
}

ConditionReport phym_impl(const HyperHermitianStructure& s, int which,
                          const std::vector<Form>& entries, double scale, double tol) {
    const Eigen::MatrixXd& L = s.structure(which);
    const Form om_pow = wedge_power(s.kaehler(which), 2 * s.n - 1);
    ConditionReport rep;
    rep.tol = tol * scale;
    rep.add("f02", entries_residual(entries, [&](const Form& e) {
                return complex_type_split(L, e).f02.norm();
            }));
    rep.add("primitive", entries_residual(entries, [&](const Form& e) {
                return wedge(e, om_pow).norm();
            }));
    rep.finalize();
    return rep;
}

ConditionReport spn_impl(const HyperHermitianStructure& s, const std::vector<Form>& entries,
                         double scale, double tol, bool scalar_case) {
    const int n = s.n;
    const Form pi = pi_form(s, n - 1);
    std::array<Form, 3> omega_pow_asd;   // omega_L^{2n-2} / (2n-2)!
    std::array<Form, 3> omega_pow_prim;  // omega_L^{2n-1}
    for (int c = 0; c < 3; ++c) {
        omega_pow_asd[static_cast<std::size_t>(c)] =
            (1.0 / factorial(2 * n - 2)) * wedge_power(s.kaehler(c), 2 * n - 2);
        omega_pow_prim[static_cast<std::size_t>(c)] = wedge_power(s.kaehler(c), 2 * n - 1);
    }

    double w_dist = 0.0, asd = 0.0;
    std::array<double, 3> asd_l{}, f02{}, prim{};
    for (const Form& e : entries) {
        const Form2Decomposition d = decompose2(s, e);
        w_dist += sum_sq({(e - d.w).norm()});
        const Form star = hodge_star(e);
        asd += sum_sq({(star + wedge(e, pi)).norm()});
        for (int c = 0; c < 3; ++c) {
            asd_l[static_cast<std::size_t>(c)] += sum_sq(
                {(star + wedge(e, omega_pow_asd[static_cast<std::size_t>(c)])).norm()});
            f02[static_cast<std::size_t>(c)] += sum_sq(
                {complex_type_split(s.structure(c), e).f02.norm()});
            prim[static_cast<std::size_t>(c)] += sum_sq(
                {wedge(e, omega_pow_prim[static_cast<std::size_t>(c)]).norm()});
        }
    }

    ConditionReport rep;
    rep.tol = tol * scale;
    rep.add("w_distance", std::sqrt(w_dist));
    rep.add("omega_asd", std::sqrt(asd));
    const char axis[3] = {'I', 'J', 'K'};
    for (int c = 0; c < 3; ++c)
        rep.add(std::string("omega_asd_") + axis[c],
                std::sqrt(asd_l[static_cast<std::size_t>(c)]));
    for (int c = 0; c < 3; ++c) {
        rep.add(std::string("phym_02_") + axis[c], std::sqrt(f02[static_cast<std::size_t>(c)]));
        rep.add(std::string("phym_primitive_") + axis[c],
                std::sqrt(prim[static_cast<std::size_t>(c)]));
    }
    if (scalar_case) {
        rep.add("type02_J", std::sqrt(f02[1]));
        rep.add("type02_K", std::sqrt(f02[2]));
    }

    const double t = rep.tol;
    const bool v1 = rep.residual("w_distance") <= t;
    const bool v2 = rep.residual("omega_asd") <= t;
    bool v3 = true, v4 = true;
    for (int c = 0; c < 3; ++c) {
        v3 = v3 && std::sqrt(asd_l[static_cast<std::size_t>(c)]) <= t;
        v4 = v4 && std::sqrt(f02[static_cast<std::size_t>(c)]) <= t &&
             std::sqrt(prim[static_cast<std::size_t>(c)]) <= t;
    }
    bool agree = v1 == v2 && v1 == v3 && v1 == v4;
    if (scalar_case) {
        const bool v5 = std::sqrt(f02[1]) <= t && std::sqrt(f02[2]) <= t;
        agree = agree && v1 == v5;
    }
    if (!agree)
        throw invariant_violation(
            "check_spn_report: the equivalent formulations returned different verdicts");
    rep.finalize();
    return rep;
}

ConditionReport omega_asd_impl(const std::vector<Form>& entries, const Form& Omega,
                               double scale, double tol) {
    const int N = entries.front().dim();
    if (Omega.dim() != N || Omega.degree() != N - 4)
        throw structural_error("check_omega_asd: calibration form must have degree dim-4");
    if (Omega.imag_part().norm() > 1e-12 * std::max(1.0, Omega.norm()))
        throw structural_error("check_omega_asd: calibration form must be real-valued");
    ConditionReport rep;
    rep.tol = tol * scale;
    rep.add("omega_asd", entries_residual(entries, [&](const Form& e) {
                return (hodge_star(e) + wedge(Omega, e)).norm();
            }));
    rep.finalize();
    return rep;
}

}  // namespace

void ConditionReport::add(std::string name, double value) {
    residuals.emplace_back(std::move(name), value);
}

double ConditionReport::residual(const std::string& name) const {
    for (const auto& [k, v] : residuals)
        if (k == name) return v;
    throw structural_error("ConditionReport: no residual named " + name);
}

double ConditionReport::max_residual() const {
    double m = 0.0;
    for (const auto& [k, v] : residuals) m = std::max(m, v);
    return m;
}

void ConditionReport::finalize() {
    pass = true;
    for (const auto& [k, v] : residuals) pass = pass && v <= tol;
}

MatrixCurvature MatrixCurvature::scalar(const Form& F) {
    MatrixCurvature m;
    m.rank = 1;
    m.terms.emplace_back(F, Eigen::MatrixXcd::Ones(1, 1));
    return m;
}

std::vector<Form> curvature_entries(const MatrixCurvature& F) {
    if (F.rank < 1 || F.rank > 4)
        throw structural_error("curvature_entries: rank must be between 1 and 4");
    if (F.terms.empty()) throw structural_error("curvature_entries: no terms");
    const int N = F.terms.front().first.dim();
    const int r = F.rank;
    std::vector<Form> entries(static_cast<std::size_t>(r) * r, Form(N, 2));
    for (const auto& [form, mat] : F.terms) {
        if (form.dim() != N || form.degree() != 2)
            throw structural_error("curvature_entries: terms must be degree-2 forms on one space");
        if (mat.rows() != r || mat.cols() != r)
            throw structural_error("curvature_entries: coefficient matrix size mismatch");
        for (int p = 0; p < r; ++p)
            for (int q = 0; q < r; ++q) {
                const cplx c = mat(p, q);
                if (c != cplx(0.0, 0.0))
                    entries[static_cast<std::size_t>(p * r + q)] += c * form;
            }
    }
    const double scale = std::max(1.0, entries_norm(entries));
    for (int p = 0; p < r; ++p)
        for (int q = p; q < r; ++q) {
            const Form defect = entries[static_cast<std::size_t>(q * r + p)] +
                                entries[static_cast<std::size_t>(p * r + q)].conjugate();
            if (defect.norm() > 1e-10 * scale)
                throw domain_error("curvature_entries: assembled curvature is not skew-Hermitian");
        }
    return entries;
}

double curvature_norm(const MatrixCurvature& F) { return entries_norm(curvature_entries(F)); }

Form tr_ff(const MatrixCurvature& F) {
    const std::vector<Form> entries = curvature_entries(F);
    const int r = F.rank;
    Form acc(entries.front().dim(), 4);
    for (int p = 0; p < r; ++p)
        for (int q = 0; q < r; ++q)
            acc += wedge(entries[static_cast<std::size_t>(p * r + q)],
                         entries[static_cast<std::size_t>(q * r + p)]);
    return acc;
}

ConditionReport check_phym(const HyperHermitianStructure& s, int which, const Form& F,
                           double tol) {
    require_scalar_curvature(F, "check_phym");
    if (F.dim() != s.dim()) throw structural_error("check_phym: dimension mismatch");
    return phym_impl(s, which, {F}, F.norm(), tol);
}

ConditionReport check_phym(const HyperHermitianStructure& s, int which,
                           const MatrixCurvature& F, double tol) {
    const std::vector<Form> entries = curvature_entries(F);
    if (entries.front().dim() != s.dim())
        throw structural_error("check_phym: dimension mismatch");
    return phym_impl(s, which, entries, entries_norm(entries), tol);
}

ConditionReport check_spn_report(const HyperHermitianStructure& s, const Form& F, double tol) {
    require_scalar_curvature(F, "check_spn_report");
    if (F.dim() != s.dim()) throw structural_error("check_spn_report: dimension mismatch");
    return spn_impl(s, {F}, F.norm(), tol, /*scalar_case=*/true);
}

ConditionReport check_spn_report(const HyperHermitianStructure& s, const MatrixCurvature& F,
                                 double tol) {
    const std::vector<Form> entries = curvature_entries(F);
    if (entries.front().dim() != s.dim())
        throw structural_error("check_spn_report: dimension mismatch");
    return spn_impl(s, entries, entries_norm(entries), tol, /*scalar_case=*/false);
}

ConditionReport check_omega_asd(const Form& F, const Form& Omega, double tol) {
    if (F.degree() != 2) throw structural_error("check_omega_asd: F must have degree 2");
    return omega_asd_impl({F}, Omega, F.norm(), tol);
}

ConditionReport check_omega_asd(const MatrixCurvature& F, const Form& Omega, double tol) {
    const std::vector<Form> entries = curvature_entries(F);
    return omega_asd_impl(entries, Omega, entries_norm(entries), tol);
}

ConditionReport check_dhym(const Eigen::MatrixXd& L, const Form& omega, const Form& F,
                           double tol) {
    require_structure_matrix(L, "check_dhym");
    const int N = static_cast<int>(L.rows());
    if (N % 2 != 0) throw structural_error("check_dhym: dimension must be even");
    require_scalar_curvature(F, "check_dhym");
    if (F.dim() != N) throw structural_error("check_dhym: dimension mismatch");
    if (omega.dim() != N || omega.degree() != 2 ||
        omega.imag_part().norm() > 1e-12 * std::max(1.0, omega.norm()))
        throw structural_error("check_dhym: omega must be a real degree-2 form");
    if (!approx_equal(l_star(L, omega), omega))
        throw structural_error("check_dhym: omega must be of type (1,1) for L");

    const int m = N / 2;
    const Form G = F.imag_part();
    Form im(N, N);  // top-degree accumulator
    for (int k = 1; 2 * k - 1 <= m; ++k) {
        const double coeff = (k % 2 == 1 ? 1.0 : -1.0) * choose(m, 2 * k - 1);
        im += coeff * wedge(wedge_power(omega, m - 2 * k + 1), wedge_power(G, 2 * k - 1));
    }

    ConditionReport rep;
    rep.tol = tol * F.norm();
    rep.add("f02", complex_type_split(L, F).f02.norm());
    rep.add("im_part", im.norm());
    rep.finalize();
    return rep;
}

ConditionReport check_dhym(const HyperHermitianStructure& s, const Form& F, double tol) {
    return check_dhym(s.I, s.omega_I, F, tol);
}

ConditionReport check_mixed(const Eigen::MatrixXd& base, const Eigen::MatrixXd& fiber,
                            const Form& G, double tol) {
    const int N = G.dim();
    if (G.degree() != 2) throw structural_error("check_mixed: G must have degree 2");
    if (base.rows() != N || base.cols() != N || fiber.rows() != N || fiber.cols() != N)
        throw structural_error("check_mixed: projector size mismatch");
    const double eps = 1e-10 * static_cast<double>(N);
    if ((base - base.transpose()).norm() > eps || (fiber - fiber.transpose()).norm() > eps)
        throw structural_error("check_mixed: projectors must be symmetric");
    if ((base * base - base).norm() > eps || (fiber * fiber - fiber).norm() > eps)
        throw structural_error("check_mixed: projectors must be idempotent");
    if ((base + fiber - Eigen::MatrixXd::Identity(N, N)).norm() > eps ||
        (base * fiber).norm() > eps)
        throw structural_error("check_mixed: projectors must be complementary and orthogonal");

    ConditionReport rep;
    rep.tol = tol * G.norm();
    rep.add("pure_base", pullback(base, G).norm());
    rep.add("pure_fiber", pullback(fiber, G).norm());
    rep.finalize();
    return rep;
}

}  // namespace hf
