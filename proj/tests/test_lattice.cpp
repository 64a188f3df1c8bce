#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "hyperforge/errors.hpp"
#include "hyperforge/exterior.hpp"
#include "hyperforge/hyperherm.hpp"
#include "hyperforge/kernels.hpp"
#include "hyperforge/lattice.hpp"
#include "hyperforge/random.hpp"

using hf::ab_constants;
using hf::cplx;
using hf::curvature;
using hf::decompose2;
using hf::energy_identities;
using hf::field_l2_norm;
using hf::field_mean;
using hf::Form;
using hf::gauge_transform;
using hf::lattice_codifferential;
using hf::lattice_d;
using hf::LatticeConnection;
using hf::LatticeField;
using hf::lewis_experiment;
using hf::PeriodicGrid;
using hf::PhiLambdaParams;
using hf::quaternion_structure;
using hf::random_band_limited_connection;
using hf::random_band_limited_field;
using hf::Rng;
using hf::ym_functional;
using hf::ym_gradient_flow;
using hf::zero_connection;

namespace {

const double kTau = 2.0 * 3.14159265358979323846;

// Quadrature Hermitian inner product of two fields.
double field_inner(const LatticeField& A, const LatticeField& B) {
    double acc = 0.0;
    for (std::size_t site = 0; site < A.grid.size(); ++site)
        for (int p = 0; p < A.rank; ++p)
            for (int q = 0; q < A.rank; ++q)
                acc += hermitian_inner(A.site_form(site, p, q), B.site_form(site, p, q)).real();
    return acc * A.grid.site_weight();
}

double sup_gap(const LatticeField& A, const LatticeField& B) {
    double m = 0.0;
    for (std::size_t i = 0; i < A.planes.size(); ++i)
        for (std::size_t s = 0; s < A.planes[i].size(); ++s)
            m = std::max(m, std::abs(A.planes[i][s] - B.planes[i][s]));
    return m;
}

// The potential of an abelian connection viewed as a degree-1 field.
LatticeField potential_field(const LatticeConnection& conn) {
    LatticeField f = hf::zero_field(conn.grid, 1, conn.rank);
    for (int nu = 0; nu < conn.grid.dimension; ++nu)
        for (int p = 0; p < conn.rank; ++p)
            for (int q = 0; q < conn.rank; ++q) f.plane(nu, p, q) = conn.potential(nu, p, q);
    return f;
}

Form random_w_form(int n, Rng& rng) {
    const auto s = quaternion_structure(n);
    return decompose2(s, hf::random_real_form(4 * n, 2, rng)).w;
}

Form random_u_form(int n, int which, Rng& rng) {
    const auto s = quaternion_structure(n);
    const auto dec = decompose2(s, hf::random_real_form(4 * n, 2, rng));
    return which == 0 ? dec.u_I : (which == 1 ? dec.u_J : dec.u_K);
}

PhiLambdaParams std_params(int n) { return ab_constants({2.0, -1.0, -1.0}, n); }

}  // namespace

TEST_CASE("periodic grid geometry and validation") {
    const PeriodicGrid g(4, 8);
    CHECK(g.size() == 4096);
    CHECK(g.spacing() == doctest::Approx(kTau / 8).epsilon(1e-14));
    CHECK(g.volume() == doctest::Approx(std::pow(kTau, 4)).epsilon(1e-14));
    CHECK(g.site_weight() * static_cast<double>(g.size()) ==
          doctest::Approx(g.volume()).epsilon(1e-14));
    CHECK(g.stride(0) == 1);
    CHECK(g.stride(3) == 512);

    const std::size_t site = 5 + 8 * 3 + 64 * 7 + 512 * 2;
    CHECK(g.coord(site, 0) == 5);
    CHECK(g.coord(site, 1) == 3);
    CHECK(g.coord(site, 2) == 7);
    CHECK(g.coord(site, 3) == 2);
    CHECK(g.point(site, 1) == doctest::Approx(3 * kTau / 8));
    CHECK(g.shift(site, 0, 2) == site + 2);
    CHECK(g.shift(site, 0, 5) == site - 3);  // wraps 5 + 5 -> 2
    CHECK(g.shift(g.shift(site, 2, -9), 2, 9) == site);

    CHECK(hf::same_grid(g, PeriodicGrid(4, 8)));
    CHECK(!hf::same_grid(g, PeriodicGrid(4, 4)));
    CHECK_THROWS_AS(PeriodicGrid(3, 8), hf::structural_error);
    CHECK_THROWS_AS(PeriodicGrid(12, 4), hf::structural_error);
    CHECK_THROWS_AS(PeriodicGrid(4, 6), hf::structural_error);
    CHECK_THROWS_AS(PeriodicGrid(4, 2), hf::structural_error);
    CHECK_THROWS_AS(PeriodicGrid(8, 8), hf::structural_error);  // 8^8 sites > 2^22
}

TEST_CASE("band-limited fields are real, deterministic and band-limited") {
    const PeriodicGrid g(4, 8);
    const auto f1 = random_band_limited_field(g, 2, 17);
    const auto f2 = random_band_limited_field(g, 2, 17);
    const auto f3 = random_band_limited_field(g, 2, 18);
    REQUIRE(f1.size() == g.size());
    CHECK(f1 == f2);
    CHECK(f1 != f3);
    double scale = 0.0;
    for (const cplx& z : f1) {
        CHECK(z.imag() == 0.0);
        scale = std::max(scale, std::abs(z));
    }
    CHECK(scale > 1e-3);

    // Fourier support: correlate against out-of-band modes.
    for (int k = 3; k <= 4; ++k) {
        cplx mode_amp(0.0, 0.0);
        for (std::size_t s = 0; s < g.size(); ++s) {
            const double ang = k * g.point(s, 0);
            mode_amp += f1[s] * cplx(std::cos(ang), -std::sin(ang));
        }
        CHECK(std::abs(mode_amp) / static_cast<double>(g.size()) <= 1e-12);
    }
    CHECK_THROWS_AS(random_band_limited_field(g, 0, 1), hf::domain_error);
    CHECK_THROWS_AS(random_band_limited_field(g, 4, 1), hf::domain_error);
}

TEST_CASE("quadrature integrates low-mode products exactly") {
    const PeriodicGrid g(4, 8);
    // Product of four single-mode factors, frequencies below P/4 = 2.
    double q1 = 0.0, q2 = 0.0, q3 = 0.0;
    for (std::size_t s = 0; s < g.size(); ++s) {
        const double x0 = g.point(s, 0), x1 = g.point(s, 1), x2 = g.point(s, 2);
        q1 += std::cos(x0) * std::cos(x0) * std::cos(x1) * std::cos(x1);
        q2 += std::cos(x0) * std::sin(x1) * std::cos(x2);
        q3 += std::sin(x0) * std::sin(x0) * std::sin(x1) * std::sin(x1);
    }
    const double w = g.site_weight();
    // int cos^2 = int sin^2 = pi per axis, full axes contribute 2 pi each.
    CHECK(q1 * w == doctest::Approx(M_PI * M_PI * kTau * kTau).epsilon(1e-13));
    CHECK(std::abs(q2 * w) <= 1e-12);
    CHECK(q3 * w == doctest::Approx(M_PI * M_PI * kTau * kTau).epsilon(1e-13));
}

TEST_CASE("spectral derivative: exactness, nilpotency, adjointness") {
    const PeriodicGrid g(4, 8);

    // d of a single-mode 1-form matches the analytic derivative.
    LatticeField a = hf::zero_field(g, 1, 1);
    for (std::size_t s = 0; s < g.size(); ++s)
        a.plane(2)[s] = cplx(0.0, std::sin(2.0 * g.point(s, 0)));  // a = i sin(2 x0) e^3
    const LatticeField da = lattice_d(a);
    const int c01 = hf::mask_rank(4, 0b0101u);  // e^{13} component
    for (std::size_t s = 0; s < g.size(); ++s) {
        const cplx want(0.0, 2.0 * std::cos(2.0 * g.point(s, 0)));
        CHECK(std::abs(da.plane(c01)[s] - want) <= 1e-12);
    }

    // d(d(.)) = 0 and adjointness on random band-limited data.
    Rng rng(5);
    LatticeField one = hf::zero_field(g, 1, 1);
    LatticeField two = hf::zero_field(g, 2, 1);
    for (int c = 0; c < one.components(); ++c)
        one.plane(c) = random_band_limited_field(g, 3, rng.bits());
    for (int c = 0; c < two.components(); ++c)
        two.plane(c) = random_band_limited_field(g, 3, rng.bits());
    CHECK(field_l2_norm(lattice_d(lattice_d(one))) <= 1e-11);
    const double lhs = field_inner(lattice_d(one), two);
    const double rhs = field_inner(one, lattice_codifferential(two));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    CHECK(field_l2_norm(lattice_codifferential(lattice_codifferential(two))) <= 1e-11);

    CHECK_THROWS_AS(lattice_d(hf::zero_field(g, 4, 1)), hf::structural_error);
    CHECK_THROWS_AS(lattice_codifferential(hf::zero_field(g, 0, 1)), hf::structural_error);
}

TEST_CASE("curvature of explicit potentials") {
    const PeriodicGrid g(4, 8);

    // Zero potential: curvature is the harmonic part everywhere.
    LatticeConnection conn = zero_connection(g, 1);
    Rng rng(7);
    const Form h = cplx(0.0, 1.0) * hf::random_real_form(4, 2, rng);
    conn.harmonic = {h};
    const LatticeField Fh = curvature(conn);
    for (std::size_t s = 0; s < g.size(); s += 371)
        CHECK(hf::approx_equal(Fh.site_form(s), h, 1e-12, 1e-12));

    // a^1 = i sin(x_0): F_{01} = i cos(x_0), everything else zero.
    LatticeConnection sine = zero_connection(g, 1);
    for (std::size_t s = 0; s < g.size(); ++s)
        sine.potential(1)[s] = cplx(0.0, std::sin(g.point(s, 0)));
    const LatticeField Fs = curvature(sine);
    for (std::size_t s = 0; s < g.size(); ++s) {
        Form want(4, 2);
        want.set_coeff(0b0011u, cplx(0.0, std::cos(g.point(s, 0))));
        CHECK((Fs.site_form(s) - want).norm() <= 1e-12);
    }

    // Nyquist content in the potential differentiates to zero.
    LatticeConnection nyq = zero_connection(PeriodicGrid(4, 4), 1);
    for (std::size_t s = 0; s < nyq.grid.size(); ++s)
        nyq.potential(1)[s] = cplx(0.0, std::cos(2.0 * nyq.grid.point(s, 0)));
    CHECK(field_l2_norm(curvature(nyq)) <= 1e-12);
}

TEST_CASE("curvature: mean, Bianchi, route equivalence, gauge invariance") {
    const PeriodicGrid g(4, 8);
    Rng rng(11);
    for (int rank : {1, 2}) {
        LatticeConnection conn = random_band_limited_connection(g, rank, 2, 100 + rank);
        conn.harmonic.assign(static_cast<std::size_t>(rank) * rank, Form(4, 2));
        for (int p = 0; p < rank; ++p) {
            for (int q = p; q < rank; ++q) {
                const Form hr = hf::random_real_form(4, 2, rng);
                const Form hi = hf::random_real_form(4, 2, rng);
                conn.harmonic[static_cast<std::size_t>(p * rank + q)] =
                    p == q ? cplx(0.0, 1.0) * hr : (hr + cplx(0.0, 1.0) * hi);
                if (p != q)
                    conn.harmonic[static_cast<std::size_t>(q * rank + p)] =
                        -conn.harmonic[static_cast<std::size_t>(p * rank + q)].conjugate();
            }
        }
        const LatticeField F = curvature(conn);

        // The exact part integrates to zero: the mean recovers the class.
        for (int p = 0; p < rank; ++p)
            for (int q = 0; q < rank; ++q)
                CHECK((field_mean(F, p, q) - conn.harmonic[static_cast<std::size_t>(p * rank + q)])
                          .norm() <= 1e-12);

        // Discrete second derivative of the curvature vanishes identically.
        CHECK(field_l2_norm(lattice_d(F)) <= 1e-10);

        // F agrees with harmonic + d(potential-as-1-form).
        LatticeField alt = lattice_d(potential_field(conn));
        for (int p = 0; p < rank; ++p)
            for (int q = 0; q < rank; ++q) {
                const Form& hpq = conn.harmonic[static_cast<std::size_t>(p * rank + q)];
                for (int c = 0; c < alt.components(); ++c)
                    for (cplx& z : alt.plane(c, p, q)) z += hpq[c];
            }
        CHECK(sup_gap(F, alt) <= 1e-11);

        // Gauge shifts leave the curvature unchanged.
        std::vector<std::vector<cplx>> phi(static_cast<std::size_t>(rank) * rank,
                                           std::vector<cplx>(g.size(), cplx(0.0, 0.0)));
        for (int p = 0; p < rank; ++p) {
            for (int q = p; q < rank; ++q) {
                const auto g1 = random_band_limited_field(g, 2, rng.bits());
                const auto g2 = random_band_limited_field(g, 2, rng.bits());
                for (std::size_t s = 0; s < g.size(); ++s) {
                    phi[static_cast<std::size_t>(p * rank + q)][s] =
                        p == q ? cplx(0.0, g1[s].real()) : cplx(g1[s].real(), g2[s].real());
                    if (p != q)
                        phi[static_cast<std::size_t>(q * rank + p)][s] =
                            -std::conj(phi[static_cast<std::size_t>(p * rank + q)][s]);
                }
            }
        }
        const LatticeConnection shifted = gauge_transform(conn, phi);
        CHECK(sup_gap(curvature(shifted), F) <= 1e-12);
    }
}

TEST_CASE("connection validation") {
    const PeriodicGrid g(4, 4);
    LatticeConnection conn = zero_connection(g, 1);
    conn.potential(0)[3] = cplx(0.5, 0.2);  // nonzero real part: not skew-Hermitian
    CHECK_THROWS_AS(curvature(conn), hf::domain_error);

    LatticeConnection short_planes = zero_connection(g, 1);
    short_planes.a.pop_back();
    CHECK_THROWS_AS(curvature(short_planes), hf::structural_error);

    LatticeConnection bad_h = zero_connection(g, 1);
    bad_h.harmonic = {Form(4, 1)};
    CHECK_THROWS_AS(curvature(bad_h), hf::structural_error);

    LatticeConnection real_h = zero_connection(g, 1);
    real_h.harmonic = {Form::basis(4, {1, 2})};  // real coefficients: not skew
    CHECK_THROWS_AS(curvature(real_h), hf::domain_error);

    CHECK_THROWS_AS(zero_connection(g, 3), hf::structural_error);
    CHECK_THROWS_AS(random_band_limited_connection(g, 1, 2, 1), hf::domain_error);  // band too wide
}

TEST_CASE("energy-weight constants") {
    const PhiLambdaParams p1 = ab_constants({2.0, -1.0, -1.0}, 1);
    CHECK(p1.a[0] == doctest::Approx(4.0));
    CHECK(p1.a[1] == doctest::Approx(-2.0));
    CHECK(p1.a[2] == doctest::Approx(-2.0));
    CHECK(p1.b[0] == doctest::Approx(0.0));
    CHECK(p1.b[1] == doctest::Approx(0.0));
    CHECK(p1.b[2] == doctest::Approx(0.0));

    const PhiLambdaParams p2 = ab_constants({2.0, -1.0, -1.0}, 2);
    CHECK(p2.b[0] == doctest::Approx(-4.0));
    CHECK(p2.b[1] == doctest::Approx(2.0));
    CHECK(p2.b[2] == doctest::Approx(2.0));

    // With the zero-sum constraint, a_I = 2 lambda_1.
    Rng rng(3);
    for (int t = 0; t < 8; ++t) {
        const double l1 = 0.5 + std::abs(rng.normal());
        const double l2 = rng.normal();
        const PhiLambdaParams p = ab_constants({l1, l2, -l1 - l2}, 2);
        CHECK(p.a[0] == doctest::Approx(2.0 * l1).epsilon(1e-12));
        CHECK(p.a[0] + p.a[1] + p.a[2] ==
              doctest::Approx(-(p.lambda[0] + p.lambda[1] + p.lambda[2])).epsilon(1e-9));
    }

    CHECK_THROWS_AS(ab_constants({1.0, 1.0, 1.0}, 2), hf::domain_error);   // sum nonzero
    CHECK_THROWS_AS(ab_constants({-2.0, 1.0, 1.0}, 2), hf::domain_error);  // a_I <= 0
    CHECK_THROWS_AS(ab_constants({2.0, -1.0, -1.0}, 0), hf::domain_error);

    // Pointwise oracle for the constants: for a constant 2-plane-type form u,
    // the Phi-pairing density of F = i u equals a_L ||u||^2.
    const auto s = quaternion_structure(2);
    const Form star_phi = hodge_star(phi_lambda(s, p2.lambda));
    for (int which = 0; which < 3; ++which) {
        Rng r2(40 + which);
        const Form u = random_u_form(2, which, r2);
        const double lhs = -inner_product(wedge(u, u), star_phi).real();  // tr(F^F) = -u^u
        CHECK(lhs == doctest::Approx(p2.a[static_cast<std::size_t>(which)] * u.norm() * u.norm())
                         .epsilon(1e-10));
    }
    // ... and the trace directions pick up the b-constants (density 2n b_L).
    for (int which = 0; which < 3; ++which) {
        const Form om = s.kaehler(which);
        const double lhs = -inner_product(wedge(om, om), star_phi).real();
        CHECK(lhs ==
              doctest::Approx(4.0 * p2.b[static_cast<std::size_t>(which)]).epsilon(1e-10));
    }
    // ... and w-type forms pair to zero against Phi.
    Rng r3(77);
    const Form w = random_w_form(2, r3);
    CHECK(std::abs(inner_product(wedge(w, w), star_phi).real()) <= 1e-10 * w.norm() * w.norm());
}

TEST_CASE("energy identities on constant curvature") {
    // T^4: F = i omega_I.  tr(F^F) = -omega^2 = -2 vol.
    {
        const auto s = quaternion_structure(1);
        LatticeConnection conn = zero_connection(PeriodicGrid(4, 4), 1);
        conn.harmonic = {cplx(0.0, 1.0) * s.omega_I};
        const auto rep = energy_identities(conn, s, std_params(1), 1e-10);
        CHECK(rep.pass);
        CHECK(rep.residual("hym_value") ==
              doctest::Approx(-2.0 * std::pow(kTau, 4)).epsilon(1e-12));
        CHECK(rep.residual("hym_residual") <= rep.tol);
        CHECK(rep.residual("phi_residual") <= rep.tol);
        CHECK(rep.residual("total_energy") ==
              doctest::Approx(2.0 * std::pow(kTau, 4)).epsilon(1e-12));
    }
    // T^8: a w-type constant class makes both sides of the Phi identity vanish.
    {
        const auto s = quaternion_structure(2);
        Rng rng(19);
        const Form w = random_w_form(2, rng);
        LatticeConnection conn = zero_connection(PeriodicGrid(8, 4), 1);
        conn.harmonic = {cplx(0.0, 1.0) * w};
        const auto rep = energy_identities(conn, s, std_params(2), 1e-10);
        CHECK(rep.pass);
        CHECK(std::abs(rep.residual("phi_value")) <= 1e-8);
        // ... while a u_I class pairs to a_I ||u||^2 (2 pi)^8.
        const Form u = random_u_form(2, 0, rng);
        conn.harmonic = {cplx(0.0, 1.0) * u};
        const auto rep2 = energy_identities(conn, s, std_params(2), 1e-10);
        CHECK(rep2.pass);
        CHECK(rep2.residual("phi_value") ==
              doctest::Approx(std_params(2).a[0] * u.norm() * u.norm() * std::pow(kTau, 8))
                  .epsilon(1e-10));
    }
}

TEST_CASE("energy identities on random band-limited configurations") {
    // T^4 (rank 1 and 2) and T^8 (rank 1), harmonic class plus exact part.
    const auto s1 = quaternion_structure(1);
    Rng rng(23);
    for (int t = 0; t < 4; ++t) {
        const int rank = t < 2 ? 1 : 2;
        LatticeConnection conn = random_band_limited_connection(PeriodicGrid(4, 4), rank, 1,
                                                                900 + static_cast<unsigned>(t));
        conn.harmonic.assign(static_cast<std::size_t>(rank) * rank, Form(4, 2));
        for (int p = 0; p < rank; ++p)
            conn.harmonic[static_cast<std::size_t>(p * rank + p)] =
                cplx(0.0, 1.0) * hf::random_real_form(4, 2, rng);
        const auto rep = energy_identities(conn, s1, std_params(1), 1e-8);
        CHECK(rep.pass);
        CHECK(rep.residual("hym_residual") <= rep.tol);
    }
    const auto s2 = quaternion_structure(2);
    for (int t = 0; t < 2; ++t) {
        LatticeConnection conn =
            random_band_limited_connection(PeriodicGrid(8, 4), 1, 1, 950 + static_cast<unsigned>(t));
        conn.harmonic = {cplx(0.0, 1.0) * hf::random_real_form(8, 2, rng)};
        const auto rep = energy_identities(conn, s2, std_params(2), 1e-8);
        CHECK(rep.pass);
        CHECK(rep.residual("phi_residual") <= rep.tol);
    }
}

TEST_CASE("energy identity values are topological") {
    const auto s = quaternion_structure(2);
    const PeriodicGrid g(8, 4);
    Rng rng(29);
    const Form h = cplx(0.0, 1.0) * hf::random_real_form(8, 2, rng);
    double ref_hym = 0.0, ref_phi = 0.0;
    for (int t = 0; t < 3; ++t) {
        LatticeConnection conn = t == 0 ? zero_connection(g, 1)
                                        : random_band_limited_connection(g, 1, 1, 700 + static_cast<unsigned>(t));
        conn.harmonic = {h};
        const auto rep = energy_identities(conn, s, std_params(2), 1e-8);
        CHECK(rep.pass);
        if (t == 0) {
            ref_hym = rep.residual("hym_value");
            ref_phi = rep.residual("phi_value");
        } else {
            CHECK(rep.residual("hym_value") == doctest::Approx(ref_hym).epsilon(1e-9));
            CHECK(rep.residual("phi_value") == doctest::Approx(ref_phi).epsilon(1e-9));
        }
    }
}

TEST_CASE("energy identities validation") {
    const auto s1 = quaternion_structure(1);
    const auto s2 = quaternion_structure(2);
    LatticeConnection conn = zero_connection(PeriodicGrid(4, 4), 1);
    CHECK_THROWS_AS(energy_identities(conn, s2, std_params(2), 1e-8), hf::structural_error);
    CHECK_THROWS_AS(energy_identities(conn, s1, std_params(2), 1e-8), hf::structural_error);
    PhiLambdaParams bad = std_params(1);
    bad.a[0] = 6.0;  // inconsistent with the lambda weights
    CHECK_THROWS_AS(energy_identities(conn, s1, bad, 1e-8), hf::domain_error);
}

TEST_CASE("compactness experiment: classes with no u_I part have instanton representatives") {
    Rng rng(31);
    // n = 2, T^8: a w-class passes with vanishing u_I curvature energy.
    {
        const Form w = random_w_form(2, rng);
        const auto rep =
            lewis_experiment(PeriodicGrid(8, 4), cplx(0.0, 1.0) * w, 42, std_params(2), 1e-9);
        CHECK(rep.pass);
        CHECK(rep.residual("f_I_l2") <= 1e-9);
        CHECK(std::abs(rep.residual("phi_integral")) <= 1e-8);
        CHECK(rep.residual("gauge_invariance") <= 1e-11);
        CHECK(rep.residual("topological_invariance") <= rep.tol);
    }
    // n = 1, T^4: every compatible class is already w-type.
    {
        const Form w = random_w_form(1, rng);
        const auto rep =
            lewis_experiment(PeriodicGrid(4, 8), cplx(0.0, 1.0) * w, 43, std_params(1), 1e-9);
        CHECK(rep.pass);
        CHECK(rep.residual("f_I_l2") <= 1e-9);
    }
}

TEST_CASE("compactness experiment: u_I classes carry quantized energy") {
    Rng rng(37);
    const PhiLambdaParams params = std_params(2);
    const Form u = random_u_form(2, 0, rng);
    const Form w = random_w_form(2, rng);
    const auto rep = lewis_experiment(PeriodicGrid(8, 4), cplx(0.0, 1.0) * (u + w), 44, params, 1e-8);
    CHECK(rep.pass);
    const double want = params.a[0] * u.norm() * u.norm() * std::pow(kTau, 8);
    CHECK(rep.residual("phi_integral") == doctest::Approx(want).epsilon(1e-8));
    CHECK(rep.residual("phym_energy_match") <= rep.tol);
    CHECK(rep.residual("f_I_l2") ==
          doctest::Approx(u.norm() * std::pow(kTau, 4)).epsilon(1e-9));  // sqrt(vol) = (2pi)^4

    // Scaling the class by t scales the pairing by t^2.
    const auto rep2 =
        lewis_experiment(PeriodicGrid(8, 4), cplx(0.0, 3.0) * (u + w), 44, params, 1e-8);
    CHECK(rep2.residual("phi_integral") ==
          doctest::Approx(9.0 * rep.residual("phi_integral")).epsilon(1e-8));

    // Determinism: repeated runs agree bitwise.
    const auto rep3 = lewis_experiment(PeriodicGrid(8, 4), cplx(0.0, 1.0) * (u + w), 44, params, 1e-8);
    for (std::size_t i = 0; i < rep.residuals.size(); ++i) {
        CHECK(rep.residuals[i].first == rep3.residuals[i].first);
        CHECK(rep.residuals[i].second == rep3.residuals[i].second);
    }
}

TEST_CASE("compactness experiment validation") {
    Rng rng(41);
    const auto params = std_params(2);
    const PeriodicGrid g(8, 4);
    // u_J part: not a compatible class.
    CHECK_THROWS_AS(
        lewis_experiment(g, cplx(0.0, 1.0) * random_u_form(2, 1, rng), 1, params, 1e-8),
        hf::domain_error);
    // trace part: not compatible.
    CHECK_THROWS_AS(lewis_experiment(g, cplx(0.0, 1.0) * quaternion_structure(2).omega_I, 1,
                                     params, 1e-8),
                    hf::domain_error);
    // real coefficients: not skew-Hermitian.
    CHECK_THROWS_AS(lewis_experiment(g, random_w_form(2, rng), 1, params, 1e-8), hf::domain_error);
    // wrong dimension.
    CHECK_THROWS_AS(
        lewis_experiment(PeriodicGrid(4, 4), cplx(0.0, 1.0) * random_w_form(2, rng), 1, params, 1e-8),
        hf::structural_error);
}

TEST_CASE("Omega-deformed Yang-Mills functional") {
    const PeriodicGrid g(4, 8);
    const Form one = Form::scalar(4, 1.0);
    CHECK(ym_functional(zero_connection(g, 1), one) == doctest::Approx(0.0).epsilon(1e-14));

    Rng rng(43);
    const auto s = quaternion_structure(1);
    // Anti-self-dual class: the functional vanishes.
    const Form w = random_w_form(1, rng);
    LatticeConnection asd = zero_connection(g, 1);
    asd.harmonic = {cplx(0.0, 1.0) * w};
    CHECK(std::abs(ym_functional(asd, one)) <= 1e-9 * std::max(1.0, w.norm() * w.norm()));

    // Self-dual class: the functional is twice the curvature energy.
    LatticeConnection sd = zero_connection(g, 1);
    sd.harmonic = {cplx(0.0, 1.0) * s.omega_I};
    const double energy = 2.0 * std::pow(kTau, 4);  // ||omega_I||^2 (2 pi)^4
    CHECK(ym_functional(sd, one) == doctest::Approx(2.0 * energy).epsilon(1e-12));

    // The Omega-term is constant in the potential.
    double ref = 0.0;
    for (int t = 0; t < 3; ++t) {
        LatticeConnection conn = t == 0 ? zero_connection(g, 1)
                                        : random_band_limited_connection(g, 1, 2, 500 + static_cast<unsigned>(t));
        conn.harmonic = {cplx(0.0, 1.0) * (w + s.omega_I)};
        const double topo = ym_functional(conn, one) - std::pow(field_l2_norm(curvature(conn)), 2);
        if (t == 0)
            ref = topo;
        else
            CHECK(topo == doctest::Approx(ref).epsilon(1e-9));
    }

    CHECK_THROWS_AS(ym_functional(zero_connection(g, 1), Form::scalar(8, 1.0)),
                    hf::structural_error);
    CHECK_THROWS_AS(ym_functional(zero_connection(g, 1), Form(4, 1)), hf::structural_error);
    CHECK_THROWS_AS(ym_functional(zero_connection(g, 1), Form::scalar(4, cplx(0.0, 1.0))),
                    hf::domain_error);
}

TEST_CASE("gradient flow: anti-self-dual class converges to the instanton") {
    const PeriodicGrid g(4, 8);
    Rng rng(47);
    const Form w = random_w_form(1, rng);
    LatticeConnection conn = random_band_limited_connection(g, 1, 3, 4711);
    conn.harmonic = {cplx(0.0, 1.0) * w};
    const Form one = Form::scalar(4, 1.0);

    const auto result = ym_gradient_flow(conn, one, 10000);
    CHECK(result.report.pass);
    CHECK(result.report.residual("codifferential") <= result.report.tol);
    CHECK(result.report.residual("omega_asd") <= 1e-6);
    CHECK(result.report.residual("monotone") == 0.0);
    CHECK(result.report.residual("trace_consistency") <= 1e-8);
    CHECK(result.trace.size() >= 2);
    CHECK(result.trace.size() <= 10001);
    for (std::size_t i = 1; i < result.trace.size(); ++i)
        CHECK(result.trace[i] <= result.trace[i - 1] + 1e-9 * std::max(1.0, std::abs(result.trace[i - 1])));
    // The limit is the harmonic representative: functional ~ 0 for this class.
    CHECK(std::abs(result.report.residual("functional_final")) <= 1e-8);
    // The reported functional matches an independent recomputation.
    CHECK(ym_functional(result.connection, one) ==
          doctest::Approx(result.report.residual("functional_final")).epsilon(1e-10));
    // The flow only moved the exact part: the class is untouched.
    CHECK((field_mean(curvature(result.connection)) - cplx(0.0, 1.0) * w).norm() <= 1e-10);
}

TEST_CASE("gradient flow: self-dual class converges with the expected residual") {
    const PeriodicGrid g(4, 8);
    const auto s = quaternion_structure(1);
    LatticeConnection conn = random_band_limited_connection(g, 1, 3, 777);
    conn.harmonic = {cplx(0.0, 1.0) * s.omega_I};
    const Form one = Form::scalar(4, 1.0);

    const auto result = ym_gradient_flow(conn, one, 10000);
    CHECK(result.report.pass);  // converged: d*F ~ 0 ...
    CHECK(result.report.residual("codifferential") <= result.report.tol);
    // ... but the instanton residual stays at 2 ||F||: the class obstructs.
    CHECK(result.report.residual("omega_asd") == doctest::Approx(2.0).epsilon(1e-6));
    const double energy = 2.0 * std::pow(kTau, 4);
    CHECK(result.report.residual("functional_final") ==
          doctest::Approx(2.0 * energy).epsilon(1e-6));
}

TEST_CASE("gradient flow: edge cases and validation") {
    const PeriodicGrid g(4, 8);
    const Form one = Form::scalar(4, 1.0);
    Rng rng(53);

    // Zero potential: already critical, no iterations.
    LatticeConnection still = zero_connection(g, 1);
    still.harmonic = {cplx(0.0, 1.0) * random_w_form(1, rng)};
    const auto r0 = ym_gradient_flow(still, one, 1000);
    CHECK(r0.trace.size() == 1);
    CHECK(r0.report.pass);

    // Oversized steps diverge with a step-size error.
    LatticeConnection conn = random_band_limited_connection(g, 1, 3, 999);
    CHECK_THROWS_AS(ym_gradient_flow(conn, one, 100, 1.0), hf::domain_error);

    CHECK_THROWS_AS(ym_gradient_flow(zero_connection(g, 2), one, 10), hf::structural_error);
    CHECK_THROWS_AS(ym_gradient_flow(conn, Form::scalar(8, 1.0), 10), hf::structural_error);
    CHECK_THROWS_AS(ym_gradient_flow(conn, one, -1), hf::domain_error);
    CHECK_THROWS_AS(ym_gradient_flow(conn, one, 10, -0.5), hf::domain_error);

    // Determinism: identical inputs give bitwise identical traces and output.
    const auto ra = ym_gradient_flow(conn, one, 50);
    const auto rb = ym_gradient_flow(conn, one, 50);
    REQUIRE(ra.trace.size() == rb.trace.size());
    for (std::size_t i = 0; i < ra.trace.size(); ++i) CHECK(ra.trace[i] == rb.trace[i]);
    for (int nu = 0; nu < 4; ++nu)
        CHECK(ra.connection.potential(nu) == rb.connection.potential(nu));
}

TEST_CASE("gradient flow on the 8-torus with a quaternionic calibration") {
    const PeriodicGrid g(8, 4);
    const auto s = quaternion_structure(2);
    const PhiLambdaParams params = std_params(2);
    LatticeConnection conn = random_band_limited_connection(g, 1, 1, 616);
    Rng rng(59);
    conn.harmonic = {cplx(0.0, 1.0) * random_w_form(2, rng)};
    const Form Omega = phi_lambda(s, params.lambda);

    const auto result = ym_gradient_flow(conn, Omega, 60);
    CHECK(result.report.residual("monotone") == 0.0);
    CHECK(result.trace.size() >= 2);
    CHECK(result.trace.back() < result.trace.front());
    CHECK(result.report.residual("trace_consistency") <=
          1e-8 * std::max(1.0, std::abs(result.trace.back())));
}

TEST_CASE("site-parallel reductions match the serial path") {
    const auto s = quaternion_structure(1);
    LatticeConnection conn = random_band_limited_connection(PeriodicGrid(4, 4), 1, 1, 321);
    Rng rng(61);
    conn.harmonic = {cplx(0.0, 1.0) * hf::random_real_form(4, 2, rng)};
    const auto serial = energy_identities(conn, s, std_params(1), 1e-8);
    REQUIRE(setenv("HYPERFORGE_THREADS", "3", 1) == 0);
    CHECK(hf::lattice_threads() == 3);
    const auto parallel = energy_identities(conn, s, std_params(1), 1e-8);
    REQUIRE(unsetenv("HYPERFORGE_THREADS") == 0);
    CHECK(hf::lattice_threads() == 1);
    CHECK(parallel.pass);
    for (std::size_t i = 0; i < serial.residuals.size(); ++i) {
        const double scale = std::max(1.0, std::abs(serial.residuals[i].second));
        CHECK(std::abs(parallel.residuals[i].second - serial.residuals[i].second) <= 1e-10 * scale);
    }
}

TEST_CASE("lattice reductions agree across kernel implementations") {
    if (!hf::kernels::avx2::available()) return;
    LatticeConnection conn = random_band_limited_connection(PeriodicGrid(4, 8), 1, 2, 2024);
    Rng rng(67);
    conn.harmonic = {cplx(0.0, 1.0) * random_w_form(1, rng)};
    const Form one = Form::scalar(4, 1.0);

    hf::kernels::force_isa("scalar");
    const double n_scalar = field_l2_norm(curvature(conn));
    const auto f_scalar = ym_gradient_flow(conn, one, 40);
    hf::kernels::force_isa("avx2");
    const double n_avx2 = field_l2_norm(curvature(conn));
    const auto f_avx2 = ym_gradient_flow(conn, one, 40);
    hf::kernels::force_isa("auto");

    CHECK(std::abs(n_scalar - n_avx2) <= 1e-12 * std::max(1.0, n_scalar));
    REQUIRE(f_scalar.trace.size() == f_avx2.trace.size());
    for (std::size_t i = 0; i < f_scalar.trace.size(); ++i) {
        const double scale = std::max(1.0, std::abs(f_scalar.trace[i]));
        CHECK(std::abs(f_scalar.trace[i] - f_avx2.trace[i]) <= 1e-10 * scale);
    }
}
