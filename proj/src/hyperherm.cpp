#include "hyperforge/hyperherm.hpp"

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

void require_complex_structure(const Eigen::MatrixXd& L, const char* what) {
    const auto N = L.rows();
    if (N == 0 || L.cols() != N || N > kMaxDim)
        throw structural_error(std::string(what) + ": matrix must be square with dim <= 16");
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
    if ((L.transpose() * L - id).norm() > 1e-10 * static_cast<double>(N))
        throw structural_error(std::string(what) + ": matrix is not orthogonal");
    if ((L * L + id).norm() > 1e-10 * static_cast<double>(N))
        throw structural_error(std::string(what) + ": matrix does not square to -Id");
}

// Signed-permutation detection: L e_i = sgn[i] e_[perm[i]] for every column i.
bool signed_permutation(const Eigen::MatrixXd& L, std::vector<int>& perm, std::vector<double>& sgn) {
    const int N = static_cast<int>(L.rows());
    perm.assign(static_cast<std::size_t>(N), -1);
    sgn.assign(static_cast<std::size_t>(N), 0.0);
    std::vector<bool> hit(static_cast<std::size_t>(N), false);
    for (int j = 0; j < N; ++j) {
        int row = -1;
        for (int i = 0; i < N; ++i) {
            const double v = L(i, j);
            if (v == 0.0) continue;
            if (row >= 0 || (v != 1.0 && v != -1.0)) return false;
            row = i;
        }
        if (row < 0 || hit[static_cast<std::size_t>(row)]) return false;
        hit[static_cast<std::size_t>(row)] = true;
        perm[static_cast<std::size_t>(j)] = row;
        sgn[static_cast<std::size_t>(j)] = L(row, j);
    }
    return true;
}

Form signed_perm_pullback(const std::vector<int>& perm, const std::vector<double>& sgn,
                          const Form& a) {
    const int N = a.dim();
    const int k = a.degree();
    Form out(N, k);
    int mapped[kMaxDim];
    for (std::uint32_t S : degree_masks(N, k)) {
        double sign = 1.0;
        std::uint32_t T = 0;
        int cnt = 0;
        int inversions = 0;
        for (int i = 0; i < N; ++i) {
            if (!((S >> i) & 1u)) continue;
            const int m = perm[static_cast<std::size_t>(i)];
            sign *= sgn[static_cast<std::size_t>(i)];
            for (int t = 0; t < cnt; ++t)
                if (mapped[t] > m) ++inversions;
            mapped[cnt++] = m;
            T |= (1u << m);
        }
        if (inversions & 1) sign = -sign;
        const cplx c = a.coeff(T);
        if (c != cplx(0.0, 0.0)) out.add_coeff(S, sign * c);
    }
    return out;
}

Eigen::MatrixXcd form_to_matrix(const Form& beta) {
    const int N = beta.dim();
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(N, N);
    for (std::uint32_t m : degree_masks(N, 2)) {
        const cplx c = beta.coeff(m);
        if (c == cplx(0.0, 0.0)) continue;
        const int i = __builtin_ctz(m);
        const int j = __builtin_ctz(m & (m - 1u));
        B(i, j) = c;
        B(j, i) = -c;
    }
    return B;
}

Form matrix_to_form(const Eigen::MatrixXcd& B) {
    const int N = static_cast<int>(B.rows());
    Form out(N, 2);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            const cplx c = 0.5 * (B(i, j) - B(j, i));
            if (c != cplx(0.0, 0.0)) out.set_coeff((1u << i) | (1u << j), c);
        }
    return out;
}

HyperHermitianStructure finish_structure(int n, Eigen::MatrixXd I, Eigen::MatrixXd J,
                                         Eigen::MatrixXd K) {
    if ((I * J - K).norm() > 1e-12) throw invariant_violation("structure violates IJ = K");
    HyperHermitianStructure s;
    s.n = n;
    s.omega_I = kaehler_form(I);
    s.omega_J = kaehler_form(J);
    s.omega_K = kaehler_form(K);
    s.I = std::move(I);
    s.J = std::move(J);
    s.K = std::move(K);
    return s;
}

}  // namespace

const Eigen::MatrixXd& HyperHermitianStructure::structure(int which) const {
    switch (which) {
        case 0: return I;
        case 1: return J;
        case 2: return K;
        default: throw structural_error("structure index must be 0, 1, or 2");
    }
}

const Form& HyperHermitianStructure::kaehler(int which) const {
    switch (which) {
        case 0: return omega_I;
        case 1: return omega_J;
        case 2: return omega_K;
        default: throw structural_error("structure index must be 0, 1, or 2");
    }
}

HyperHermitianStructure standard_structure(int n) {
    if (n < 1 || n > 4) throw structural_error("standard_structure: n must be in 1..4");
    const int N = 4 * n;
    Eigen::MatrixXd I = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
    for (int a = 0; a < n; ++a) {
        const int x = a, y = n + a, u = 2 * n + a, v = 3 * n + a;
        I(y, x) = 1;  I(x, y) = -1;  I(v, u) = 1;  I(u, v) = -1;
        J(u, x) = 1;  J(x, u) = -1;  J(y, v) = 1;  J(v, y) = -1;
        K(v, x) = 1;  K(x, v) = -1;  K(u, y) = 1;  K(y, u) = -1;
    }
    return finish_structure(n, std::move(I), std::move(J), std::move(K));
}

HyperHermitianStructure quaternion_structure(int m) {
    if (m < 1 || m > 4) throw structural_error("quaternion_structure: m must be in 1..4");
    const int N = 4 * m;
    Eigen::MatrixXd I = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
    for (int q = 0; q < m; ++q) {
        const int b = 4 * q;
        // Left multiplication by i, j, k on the quad (1, i, j, k).
        I(b + 1, b + 0) = 1;  I(b + 0, b + 1) = -1;  I(b + 3, b + 2) = 1;  I(b + 2, b + 3) = -1;
        J(b + 2, b + 0) = 1;  J(b + 0, b + 2) = -1;  J(b + 1, b + 3) = 1;  J(b + 3, b + 1) = -1;
        K(b + 3, b + 0) = 1;  K(b + 0, b + 3) = -1;  K(b + 2, b + 1) = 1;  K(b + 1, b + 2) = -1;
    }
    return finish_structure(m, std::move(I), std::move(J), std::move(K));
}

Form kaehler_form(const Eigen::MatrixXd& L) {
    require_complex_structure(L, "kaehler_form");
    const int N = static_cast<int>(L.rows());
    Form out(N, 2);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (L(j, i) != 0.0) out.set_coeff((1u << i) | (1u << j), L(j, i));
    return out;
}

Form l_star(const Eigen::MatrixXd& L, const Form& beta) {
    if (beta.degree() != 2) throw structural_error("l_star: form must have degree 2");
    if (L.rows() != L.cols() || beta.dim() != L.rows())
        throw structural_error("l_star: matrix and form dimensions disagree");
    std::vector<int> perm;
    std::vector<double> sgn;
    if (signed_permutation(L, perm, sgn)) return signed_perm_pullback(perm, sgn, beta);
    return pullback(L, beta);
}

Form operator_T(const HyperHermitianStructure& s, const Form& beta) {
    return l_star(s.I, beta) + l_star(s.J, beta) + l_star(s.K, beta);
}

Form Form2Decomposition::reconstruct(const HyperHermitianStructure& s) const {
    return u_I + u_J + u_K + w + mu_I * s.omega_I + mu_J * s.omega_J + mu_K * s.omega_K;
}

Form2Decomposition decompose2(const HyperHermitianStructure& s, const Form& beta) {
    if (beta.degree() != 2 || beta.dim() != s.dim())
        throw structural_error("decompose2: expected a degree-2 form on R^{4n}");
    Form2Decomposition d;
    const double inv2n = 1.0 / (2.0 * s.n);
    d.mu_I = inner_product(beta, s.omega_I) * inv2n;
    d.mu_J = inner_product(beta, s.omega_J) * inv2n;
    d.mu_K = inner_product(beta, s.omega_K) * inv2n;
    const Form rest =
        beta - d.mu_I * s.omega_I - d.mu_J * s.omega_J - d.mu_K * s.omega_K;
    const Form ib = l_star(s.I, rest);
    const Form jb = l_star(s.J, rest);
    const Form kb = l_star(s.K, rest);
    d.u_I = 0.25 * (rest + ib - jb - kb);
    d.u_J = 0.25 * (rest - ib + jb - kb);
    d.u_K = 0.25 * (rest - ib - jb + kb);
    d.w = 0.25 * (rest + ib + jb + kb);
    return d;
}

ComplexTypeSplit complex_type_split(const HyperHermitianStructure& s,
                                    const Eigen::MatrixXd& L, const Form& beta) {
    if (beta.dim() != s.dim())
        throw structural_error("complex_type_split: form does not live on R^{4n}");
    return complex_type_split(L, beta);
}

ComplexTypeSplit complex_type_split(const Eigen::MatrixXd& L, const Form& beta) {
    const int N = static_cast<int>(L.rows());
    if (beta.degree() != 2 || beta.dim() != N)
        throw structural_error("complex_type_split: expected a degree-2 form matching L");
    if (L.cols() != N)
        throw structural_error("complex_type_split: structure matrix has wrong size");
    require_complex_structure(L, "complex_type_split");

    const Eigen::MatrixXcd B = form_to_matrix(beta);
    const cplx iu(0.0, 1.0);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(N, N);
    const Eigen::MatrixXcd Qp = 0.5 * (id - iu * L);  // projector onto the +i eigenspace of L
    const Eigen::MatrixXcd Qm = 0.5 * (id + iu * L);

    ComplexTypeSplit split;
    split.f20 = matrix_to_form(Qp.transpose() * B * Qp);
    split.f11 = matrix_to_form(Qp.transpose() * B * Qm + Qm.transpose() * B * Qp);
    split.f02 = matrix_to_form(Qm.transpose() * B * Qm);
    return split;
}

Form pi_form(const HyperHermitianStructure& s, int k) {
    if (k < 0) throw structural_error("pi_form: k must be nonnegative");
    const Form theta = wedge_power(s.omega_I, 2) + wedge_power(s.omega_J, 2) +
                       wedge_power(s.omega_K, 2);
    return (1.0 / factorial(2 * k + 1)) * wedge_power(theta, k);
}

Form phi_lambda(const HyperHermitianStructure& s, const std::array<double, 3>& lambda) {
    const double sum = lambda[0] + lambda[1] + lambda[2];
    if (std::abs(sum) > 1e-12)
        throw domain_error("phi_lambda: weights must sum to zero");
    if (lambda[0] - 2.0 * lambda[1] - 2.0 * lambda[2] <= 0.0)
        throw domain_error("phi_lambda: weights must satisfy l1 - 2 l2 - 2 l3 > 0");
    const int p = 2 * s.n - 2;
    Form out = lambda[0] * wedge_power(s.omega_I, p) +
               lambda[1] * wedge_power(s.omega_J, p) +
               lambda[2] * wedge_power(s.omega_K, p);
    return (1.0 / factorial(p)) * out;
}

Form upsilon(const HyperHermitianStructure& s) {
    const Form z = s.omega_J + cplx(0.0, 1.0) * s.omega_K;
    return (1.0 / factorial(s.n)) * wedge_power(z, s.n);
}

FundamentalForms fundamental_forms(const HyperHermitianStructure& s, int k,
                                   const std::array<double, 3>& lambda) {
    FundamentalForms f;
    f.phi_lambda = phi_lambda(s, lambda);  // validates the weights first
    f.pi_k = pi_form(s, k);
    f.upsilon_I = upsilon(s);
    return f;
}

std::array<double, 3> a_constants(const std::array<double, 3>& lambda) {
    return {lambda[0] - lambda[1] - lambda[2],
            lambda[1] - lambda[0] - lambda[2],
            lambda[2] - lambda[0] - lambda[1]};
}

std::array<double, 3> b_constants(const std::array<double, 3>& lambda, int n) {
    const double c = 1.0 - 2.0 * n;
    return {c * lambda[0] - lambda[1] - lambda[2],
            c * lambda[1] - lambda[0] - lambda[2],
            c * lambda[2] - lambda[0] - lambda[1]};
}

std::vector<Form> two_form_basis(int N) {
    std::vector<Form> basis;
    for (std::uint32_t m : degree_masks(N, 2)) {
        Form f(N, 2);
        f.set_coeff(m, 1.0);
        basis.push_back(std::move(f));
    }
    return basis;
}

SpectrumReport operator_spectrum(const std::function<Form(const Form&)>& op,
                                 const std::vector<Form>& domain) {
    if (domain.empty()) throw structural_error("operator_spectrum: empty domain basis");
    const int N = domain.front().dim();
    const int k = domain.front().degree();
    const int sz = domain.front().size();
    const int m = static_cast<int>(domain.size());
    if (m > sz) throw structural_error("operator_spectrum: domain basis is degenerate");
    Eigen::MatrixXd D(sz, m);
    for (int a = 0; a < m; ++a) {
        const Form& f = domain[static_cast<std::size_t>(a)];
        if (f.dim() != N || f.degree() != k)
            throw structural_error("operator_spectrum: mixed degrees in domain basis");
        if (f.imag_part().norm() > 1e-12 * std::max(1.0, f.norm()))
            throw structural_error("operator_spectrum: domain basis must be real-valued");
        for (int i = 0; i < sz; ++i) D(i, a) = f[i].real();
    }

    // Orthonormalize the domain (QR); reject degenerate spanning sets.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(D);
    const Eigen::VectorXd rdiag = qr.matrixQR().diagonal().head(m);
    const double scale = rdiag.cwiseAbs().maxCoeff();
    for (int a = 0; a < m; ++a)
        if (std::abs(rdiag[a]) < 1e-10 * std::max(1.0, scale))
            throw structural_error("operator_spectrum: domain basis is degenerate");
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(sz, m);

    auto column_form = [&](const Eigen::VectorXd& col) {
        Form f(N, k);
        for (int i = 0; i < sz; ++i) f[i] = col[i];
        return f;
    };

    Eigen::MatrixXd gram(m, m);
    for (int b = 0; b < m; ++b) {
        const Form sfb = op(column_form(Q.col(b)));
        if (sfb.dim() != N || sfb.degree() != k)
            throw structural_error("operator_spectrum: operator does not preserve the degree");
        for (int a = 0; a < m; ++a) {
            cplx acc = 0.0;
            for (int i = 0; i < sz; ++i) acc += Q(i, a) * sfb[i];
            gram(a, b) = acc.real();
        }
    }
    if ((gram - gram.transpose()).norm() > 1e-8 * std::max(1.0, gram.norm()))
        throw invariant_violation("operator_spectrum: operator is not symmetric on the domain");
    gram = 0.5 * (gram + gram.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd vals = es.eigenvalues();
    const Eigen::MatrixXd vecs = Q * es.eigenvectors();

    constexpr double kClusterTol = 1e-8;
    SpectrumReport rep;
    rep.domain_dim = m;
    int start = 0;
    while (start < m) {
        int stop = start + 1;
        while (stop < m && vals[stop] - vals[stop - 1] <= kClusterTol) ++stop;
        SpectrumReport::Cluster c;
        c.mult = stop - start;
        c.val = vals.segment(start, c.mult).mean();
        for (int i = start; i < stop; ++i) c.eigenbasis.push_back(column_form(vecs.col(i)));
        rep.eigs.push_back(std::move(c));
        start = stop;
    }
    return rep;
}

SpectrumReport spectrum_of_calibration(const Form& Omega, const std::vector<Form>& domain,
                                       SpectralConvention conv) {
    if (domain.empty()) throw structural_error("spectrum_of_calibration: empty domain");
    const int N = domain.front().dim();
    if (Omega.dim() != N || Omega.degree() != N - 4)
        throw structural_error("spectrum_of_calibration: calibration form must have degree dim-4");
    if (domain.front().degree() != 2)
        throw structural_error("spectrum_of_calibration: domain must consist of 2-forms");
    if (Omega.imag_part().norm() > 1e-12 * std::max(1.0, Omega.norm()))
        throw structural_error("spectrum_of_calibration: calibration form must be real-valued");

    auto op = [&Omega](const Form& b) { return hodge_star(wedge(b, Omega)); };
    SpectrumReport rep = operator_spectrum(op, domain);
    if (conv == SpectralConvention::operator_eigenvalues) return rep;

    for (auto& c : rep.eigs) {
        if (std::abs(c.val) <= 1e-10)
            throw domain_error(
                "spectrum_of_calibration: operator is singular; the calibration "
                "convention is undefined (use the operator convention)");
        c.val = 1.0 / c.val;
    }
    std::sort(rep.eigs.begin(), rep.eigs.end(),
              [](const SpectrumReport::Cluster& a, const SpectrumReport::Cluster& b) {
                  return a.val < b.val;
              });
    return rep;
}

SpectrumReport spectrum_of_calibration(const HyperHermitianStructure& s, const Form& Omega,
                                       SpectralConvention conv) {
    return spectrum_of_calibration(Omega, two_form_basis(s.dim()), conv);
}

std::array<int, 7> projector_ranks(const HyperHermitianStructure& s) {
    const int N = s.dim();
    const auto& masks = degree_masks(N, 2);
    const int m = static_cast<int>(masks.size());
    std::array<Eigen::MatrixXd, 7> proj;
    proj.fill(Eigen::MatrixXd::Zero(m, m));

    auto put = [&](Eigen::MatrixXd& P, int col, const Form& f) {
        for (int i = 0; i < m; ++i) P(i, col) = f[i].real();
    };
    for (int b = 0; b < m; ++b) {
        Form e(N, 2);
        e.set_coeff(masks[static_cast<std::size_t>(b)], 1.0);
        const Form2Decomposition d = decompose2(s, e);
        put(proj[0], b, d.u_I);
        put(proj[1], b, d.u_J);
        put(proj[2], b, d.u_K);
        put(proj[3], b, d.w);
        put(proj[4], b, d.mu_I * s.omega_I);
        put(proj[5], b, d.mu_J * s.omega_J);
        put(proj[6], b, d.mu_K * s.omega_K);
    }

    std::array<int, 7> ranks{};
    for (int p = 0; p < 7; ++p) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            0.5 * (proj[static_cast<std::size_t>(p)] +
                   proj[static_cast<std::size_t>(p)].transpose()));
        int rank = 0;
        for (int i = 0; i < m; ++i) {
            const double v = es.eigenvalues()[i];
            if (std::abs(v - 1.0) <= 1e-8) {
                ++rank;
            } else if (std::abs(v) > 1e-8) {
                throw invariant_violation("projector_ranks: component map is not a projector");
            }
        }
        ranks[static_cast<std::size_t>(p)] = rank;
    }
    return ranks;
}

}  // namespace hf
