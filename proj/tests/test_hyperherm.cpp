#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "hyperforge/errors.hpp"
#include "hyperforge/hyperherm.hpp"
#include "hyperforge/json_io.hpp"
#include "hyperforge/random.hpp"

using hf::cplx;
using hf::Form;
using hf::HyperHermitianStructure;

namespace {

const cplx kI{0.0, 1.0};

// Random orthogonal complex structure (conjugate of the standard one); not a
// signed permutation, so it exercises the generic pullback path of l_star.
Eigen::MatrixXd rotated_structure(const Eigen::MatrixXd& L, hf::Rng& rng) {
  const int N = static_cast<int>(L.rows());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(rng.normal_matrix(N, N));
  Eigen::MatrixXd R = qr.householderQ();
  if (R.determinant() < 0) R.col(0) *= -1.0;
  return R * L * R.transpose();
}

void check_structure_invariants(const HyperHermitianStructure& s) {
  const int N = s.dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
  CHECK((s.I * s.I + id).norm() < 1e-14);
  CHECK((s.J * s.J + id).norm() < 1e-14);
  CHECK((s.K * s.K + id).norm() < 1e-14);
  CHECK((s.I * s.J - s.K).norm() < 1e-14);
  CHECK((s.J * s.K - s.I).norm() < 1e-14);  // cyclic
  CHECK((s.K * s.I - s.J).norm() < 1e-14);
  CHECK((s.I.transpose() * s.I - id).norm() < 1e-14);
  CHECK((s.J.transpose() * s.J - id).norm() < 1e-14);
  CHECK((s.K.transpose() * s.K - id).norm() < 1e-14);
  // <omega_L, omega_M> = 2n delta_LM
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const cplx ip = hf::inner_product(s.kaehler(a), s.kaehler(b));
      CHECK(std::abs(ip - (a == b ? cplx(2.0 * s.n) : cplx(0.0))) < 1e-12);
    }
}

}  // namespace

TEST_CASE("standard structure: action table, quaternion relations, form normalization") {
  for (int n = 1; n <= 4; ++n) check_structure_invariants(hf::standard_structure(n));

  // n = 1, coordinates (x, y, u, v) = (e1, e2, e3, e4):
  const auto s = hf::standard_structure(1);
  CHECK(hf::approx_equal(s.omega_I, Form::basis(4, {1, 2}) + Form::basis(4, {3, 4})));
  // omega_J = dx^du + dv^dy
  CHECK(hf::approx_equal(s.omega_J, Form::basis(4, {1, 3}) - Form::basis(4, {2, 4})));
  CHECK(hf::approx_equal(s.omega_K, Form::basis(4, {1, 4}) + Form::basis(4, {2, 3})));

  const auto s2 = hf::standard_structure(2);
  CHECK(std::abs(hf::inner_product(s2.omega_K, s2.omega_K) - 4.0) < 1e-14);

  CHECK_THROWS_AS(hf::standard_structure(0), hf::structural_error);
  CHECK_THROWS_AS(hf::standard_structure(5), hf::structural_error);
}

TEST_CASE("quaternion-coordinate structure: left multiplication quads") {
  for (int m = 1; m <= 3; ++m) check_structure_invariants(hf::quaternion_structure(m));

  const auto q = hf::quaternion_structure(1);
  // Left multiplication by i on (1, i, j, k).
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(4);
  e0[0] = 1.0;
  CHECK((q.I * e0 - Eigen::VectorXd::Unit(4, 1)).norm() < 1e-15);
  CHECK((q.J * e0 - Eigen::VectorXd::Unit(4, 2)).norm() < 1e-15);
  CHECK((q.K * e0 - Eigen::VectorXd::Unit(4, 3)).norm() < 1e-15);
  CHECK_THROWS_AS(hf::quaternion_structure(0), hf::structural_error);
}

TEST_CASE("kaehler_form rejects matrices that are not complex structures") {
  CHECK_THROWS_AS(hf::kaehler_form(Eigen::MatrixXd::Identity(4, 4)), hf::structural_error);
  Eigen::MatrixXd bad(2, 2);
  bad << 0, -2, 2, 0;  // squares to -4 Id
  CHECK_THROWS_AS(hf::kaehler_form(bad), hf::structural_error);
  CHECK_THROWS_AS(hf::kaehler_form(Eigen::MatrixXd::Zero(3, 4)), hf::structural_error);
}

TEST_CASE("l_star: invariances, involution, fast path consistency") {
  const auto s = hf::standard_structure(2);
  CHECK(hf::approx_equal(hf::l_star(s.I, s.omega_I), s.omega_I));
  CHECK(hf::approx_equal(hf::l_star(s.J, s.omega_K), -s.omega_K));
  CHECK(hf::approx_equal(hf::l_star(s.I, s.omega_J), -s.omega_J));
  CHECK(hf::approx_equal(hf::l_star(s.K, s.omega_K), s.omega_K));

  hf::Rng rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    const Form beta = hf::random_complex_form(8, 2, rng);
    for (int a = 0; a < 3; ++a) {
      const Eigen::MatrixXd& L = s.structure(a);
      const Form once = hf::l_star(L, beta);
      CHECK(hf::approx_equal(hf::l_star(L, once), beta));          // involution
      CHECK(hf::approx_equal(once, hf::pullback(L, beta)));        // fast path == pullback
    }
    // generic (non-signed-permutation) complex structures take the minor path
    const Eigen::MatrixXd L = rotated_structure(s.I, rng);
    const Form once = hf::l_star(L, beta);
    CHECK(hf::approx_equal(hf::l_star(L, once), beta));
  }

  CHECK_THROWS_AS(hf::l_star(s.I, Form::basis(8, {1})), hf::structural_error);
  CHECK_THROWS_AS(hf::l_star(s.I, Form::basis(4, {1, 2})), hf::structural_error);
}

TEST_CASE("operator T: fixed vectors and full spectrum") {
  const auto s = hf::standard_structure(1);
  CHECK(hf::approx_equal(hf::operator_T(s, s.omega_I), -s.omega_I));
  CHECK(hf::approx_equal(hf::operator_T(s, s.omega_J), -s.omega_J));
  CHECK(hf::approx_equal(hf::operator_T(s, s.omega_K), -s.omega_K));

  // spectrum {-1, 3} with multiplicities {6n^2-3n, 2n^2+n}
  for (int n = 1; n <= 3; ++n) {
    const auto sn = hf::standard_structure(n);
    auto op = [&sn](const Form& b) { return hf::operator_T(sn, b); };
    const auto rep = hf::operator_spectrum(op, hf::two_form_basis(4 * n));
    REQUIRE(rep.eigs.size() == 2);
    CHECK(rep.domain_dim == hf::choose(4 * n, 2));
    CHECK(rep.eigs[0].val == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(rep.eigs[0].mult == 6 * n * n - 3 * n);
    CHECK(rep.eigs[1].val == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(rep.eigs[1].mult == 2 * n * n + n);
  }
}

TEST_CASE("decompose2: omega components, reconstruction, orthogonality, Parseval") {
  const auto s = hf::standard_structure(2);

  const auto dj = hf::decompose2(s, s.omega_J);
  CHECK(std::abs(dj.mu_J - 1.0) < 1e-14);
  CHECK(std::abs(dj.mu_I) < 1e-14);
  CHECK(std::abs(dj.mu_K) < 1e-14);
  CHECK(dj.u_I.is_zero());
  CHECK(dj.u_J.is_zero());
  CHECK(dj.u_K.is_zero());
  CHECK(dj.w.is_zero());

  hf::Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Form beta = (trial % 2 == 0) ? hf::random_real_form(8, 2, rng)
                                       : hf::random_complex_form(8, 2, rng);
    const auto d = hf::decompose2(s, beta);
    CHECK(hf::approx_equal(d.reconstruct(s), beta));

    // eigenspace memberships of T
    CHECK(hf::approx_equal(hf::operator_T(s, d.w), 3.0 * d.w));
    CHECK(hf::approx_equal(hf::operator_T(s, d.u_I), -d.u_I));
    CHECK(hf::approx_equal(hf::operator_T(s, beta - d.w), -(beta - d.w)));

    // pairwise Hermitian orthogonality
    const std::array<const Form*, 4> parts{&d.u_I, &d.u_J, &d.u_K, &d.w};
    for (std::size_t a = 0; a < parts.size(); ++a)
      for (std::size_t b = a + 1; b < parts.size(); ++b)
        CHECK(std::abs(hf::hermitian_inner(*parts[a], *parts[b])) < 1e-10);
    for (const Form* p : parts)
      for (int c = 0; c < 3; ++c)
        CHECK(std::abs(hf::hermitian_inner(*p, s.kaehler(c))) < 1e-10);

    // Parseval: |beta|^2 = sum |parts|^2 + 2n sum |mu|^2
    const double total = beta.norm() * beta.norm();
    double acc = 0.0;
    for (const Form* p : parts) acc += p->norm() * p->norm();
    acc += 2.0 * s.n *
           (std::norm(d.mu_I) + std::norm(d.mu_J) + std::norm(d.mu_K));
    CHECK(acc == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("projector ranks match the closed-form dimensions") {
  // (U_I, U_J, U_K, W, R omega_I, R omega_J, R omega_K)
  for (int n = 1; n <= 3; ++n) {
    const auto ranks = hf::projector_ranks(hf::standard_structure(n));
    const int u = 2 * n * n - n - 1;
    CHECK(ranks == std::array<int, 7>{u, u, u, 2 * n * n + n, 1, 1, 1});
  }
  // the quaternion-coordinate model decomposes identically
  const auto ranks = hf::projector_ranks(hf::quaternion_structure(2));
  CHECK(ranks == std::array<int, 7>{5, 5, 5, 10, 1, 1, 1});
}

TEST_CASE("tri-primitivity: I- and J-invariance forces K-invariance and primitivity") {
  const auto s = hf::standard_structure(2);
  hf::Rng rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    const Form beta = hf::random_real_form(8, 2, rng);
    // average over {1, I*, J*, K*} to make an I- and J-invariant form
    const Form inv = 0.25 * (beta + hf::l_star(s.I, beta) + hf::l_star(s.J, beta) +
                             hf::l_star(s.K, beta));
    CHECK(hf::approx_equal(hf::l_star(s.I, inv), inv));
    CHECK(hf::approx_equal(hf::l_star(s.J, inv), inv));
    CHECK(hf::approx_equal(hf::l_star(s.K, inv), inv));
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(hf::inner_product(inv, s.kaehler(c))) < 1e-12 * inv.norm());
  }
}

TEST_CASE("complex type split: reconstruction, (1,1) formula, reality, known types") {
  const auto s = hf::standard_structure(2);
  hf::Rng rng(41);

  for (int trial = 0; trial < 6; ++trial) {
    const bool real_input = trial % 2 == 0;
    const Form beta = real_input ? hf::random_real_form(8, 2, rng)
                                 : hf::random_complex_form(8, 2, rng);
    for (int a = 0; a < 3; ++a) {
      const Eigen::MatrixXd& L = s.structure(a);
      const auto split = hf::complex_type_split(s, L, beta);
      CHECK(hf::approx_equal(split.f20 + split.f11 + split.f02, beta));
      CHECK(hf::approx_equal(split.f11, 0.5 * (beta + hf::l_star(L, beta))));
      if (real_input) CHECK(hf::approx_equal(split.f20, split.f02.conjugate()));

      // types are Hermitian-orthogonal: Parseval
      const double total = beta.norm() * beta.norm();
      const double acc = split.f20.norm() * split.f20.norm() +
                         split.f11.norm() * split.f11.norm() +
                         split.f02.norm() * split.f02.norm();
      CHECK(acc == doctest::Approx(total).epsilon(1e-12));

      // idempotence: each part is purely of its own type
      const auto s20 = hf::complex_type_split(s, L, split.f20);
      CHECK(hf::approx_equal(s20.f20, split.f20));
      CHECK(s20.f11.is_zero(1e-10 * std::max(1.0, beta.norm())));
      CHECK(s20.f02.is_zero(1e-10 * std::max(1.0, beta.norm())));
    }
  }

  // omega_K is (2,0)+(0,2) with respect to I
  const auto wk = hf::complex_type_split(s, s.I, s.omega_K);
  CHECK(wk.f11.is_zero());
  CHECK(hf::approx_equal(wk.f20 + wk.f02, s.omega_K));
  // and omega_I is purely (1,1) with respect to I
  const auto wi = hf::complex_type_split(s, s.I, s.omega_I);
  CHECK(wi.f20.is_zero());
  CHECK(wi.f02.is_zero());

  // (dx1 + i dy1) ^ (dx2 + i dy2) is pure (2,0) for I; coords (x,x,y,y,u,u,v,v)
  const Form z1 = Form::basis(8, {1}) + kI * Form::basis(8, {3});
  const Form z2 = Form::basis(8, {2}) + kI * Form::basis(8, {4});
  const Form prod = hf::wedge(z1, z2);
  const auto sp = hf::complex_type_split(s, s.I, prod);
  CHECK(hf::approx_equal(sp.f20, prod));
  CHECK(sp.f11.is_zero(1e-12));
  CHECK(sp.f02.is_zero(1e-12));

  // the sp(n) component has vanishing (0,2) part for all three structures
  hf::Rng rng2(43);
  const Form w = hf::decompose2(s, hf::random_real_form(8, 2, rng2)).w;
  for (int a = 0; a < 3; ++a) {
    const auto ws = hf::complex_type_split(s, s.structure(a), w);
    CHECK(ws.f02.is_zero(1e-10 * std::max(1.0, w.norm())));
    CHECK(ws.f20.is_zero(1e-10 * std::max(1.0, w.norm())));
  }
}

TEST_CASE("distinguished forms: pi, phi, upsilon") {
  const auto s1 = hf::standard_structure(1);
  const auto s2 = hf::standard_structure(2);

  CHECK(hf::approx_equal(hf::pi_form(s2, 0), Form::scalar(8, 1.0)));
  CHECK(hf::pi_form(s2, 1).degree() == 4);
  // theta/3! restricted to n=1: (w_I^2 + w_J^2 + w_K^2)/6 = 6 vol / 6 = vol
  CHECK(hf::approx_equal(hf::pi_form(s1, 1), Form::volume(4)));

  const std::array<double, 3> lam{2.0, -1.0, -1.0};
  // n=1: degree-0 weighted form, forced to zero by the weight condition
  CHECK(hf::phi_lambda(s1, lam).is_zero());
  // n=2: (1/2)(2 w_I^2 - w_J^2 - w_K^2)
  const Form expect = 0.5 * (2.0 * hf::wedge_power(s2.omega_I, 2) -
                             hf::wedge_power(s2.omega_J, 2) -
                             hf::wedge_power(s2.omega_K, 2));
  CHECK(hf::approx_equal(hf::phi_lambda(s2, lam), expect));

  CHECK_THROWS_AS(hf::phi_lambda(s2, {1.0, 1.0, 1.0}), hf::domain_error);
  CHECK_THROWS_AS(hf::phi_lambda(s2, {-2.0, 1.0, 1.0}), hf::domain_error);
  CHECK_THROWS_AS(hf::phi_lambda(s2, {0.0, 0.0, 0.0}), hf::domain_error);

  const auto fund = hf::fundamental_forms(s2, 1, lam);
  CHECK(fund.pi_k.degree() == 4);
  CHECK(fund.phi_lambda.degree() == 4);
  CHECK(fund.upsilon_I.degree() == 4);

  // weight constants: a = 2 l1 under the zero-sum condition
  const auto a = hf::a_constants(lam);
  CHECK(a == std::array<double, 3>{4.0, -2.0, -2.0});
  const auto b = hf::b_constants(lam, 2);
  CHECK(b == std::array<double, 3>{-4.0, 2.0, 2.0});

  // upsilon is (2n, 0) for I: contraction by any (0,1) vector kills it
  for (const auto* s : {&s1, &s2}) {
    const Form ups = hf::upsilon(*s);
    hf::Rng rng(51);
    for (int trial = 0; trial < 4; ++trial) {
      const Eigen::VectorXd x = rng.normal_vector(s->dim());
      const Form contracted =
          hf::interior_product(x, ups) + kI * hf::interior_product(s->I * x, ups);
      CHECK(contracted.is_zero(1e-10));
    }
  }

  // normalization: c_m upsilon ^ conj(upsilon) = omega_I^m / m!  (m = 2n)
  for (const auto* s : {&s1, &s2}) {
    const int m = 2 * s->n;
    double fact = 1.0;
    for (int i = 2; i <= m; ++i) fact *= i;
    cplx cm = std::pow(cplx(0.0, 0.5), m);
    if ((m * (m - 1) / 2) % 2 == 1) cm = -cm;
    const Form ups = hf::upsilon(*s);
    const Form lhs = cm * hf::wedge(ups, ups.conjugate());
    const Form rhs = (1.0 / fact) * hf::wedge_power(s->omega_I, m);
    CHECK(hf::approx_equal(lhs, rhs));
  }
}

TEST_CASE("hodge star on decomposition components against the quaternionic calibration") {
  const auto s = hf::standard_structure(2);
  const Form pi1 = hf::pi_form(s, 1);
  hf::Rng rng(61);
  for (int trial = 0; trial < 6; ++trial) {
    const auto d = hf::decompose2(s, hf::random_real_form(8, 2, rng));
    const Form u = d.u_I + d.u_J + d.u_K;
    CHECK(hf::approx_equal(hf::hodge_star(u), 3.0 * hf::wedge(u, pi1)));
    CHECK(hf::approx_equal(hf::hodge_star(d.w), -hf::wedge(d.w, pi1)));
  }
  for (int c = 0; c < 3; ++c)
    CHECK(hf::approx_equal(hf::hodge_star(s.kaehler(c)),
                           (3.0 / 5.0) * hf::wedge(s.kaehler(c), pi1)));
}

TEST_CASE("calibration spectra: quaternionic 4-form") {
  // n = 1: the operator is the plain hodge star; the (-1)-eigenspace is W
  const auto s1 = hf::standard_structure(1);
  const auto rep1 = hf::spectrum_of_calibration(s1, hf::pi_form(s1, 0));
  REQUIRE(rep1.eigs.size() == 2);
  CHECK(rep1.domain_dim == 6);
  CHECK(rep1.eigs[0].val == doctest::Approx(-1.0));
  CHECK(rep1.eigs[0].mult == 3);
  CHECK(rep1.eigs[1].val == doctest::Approx(1.0));
  CHECK(rep1.eigs[1].mult == 3);
  for (const Form& f : rep1.eigs[0].eigenbasis)
    CHECK(hf::approx_equal(hf::decompose2(s1, f).w, f));

  // n = 2, calibration convention: {-1 (W), 3/5 (omegas), 3 (U)}
  const auto s2 = hf::standard_structure(2);
  const auto rep2 = hf::spectrum_of_calibration(s2, hf::pi_form(s2, 1));
  REQUIRE(rep2.eigs.size() == 3);
  CHECK(rep2.domain_dim == 28);
  CHECK(rep2.eigs[0].val == doctest::Approx(-1.0));
  CHECK(rep2.eigs[0].mult == 10);
  CHECK(rep2.eigs[1].val == doctest::Approx(0.6));
  CHECK(rep2.eigs[1].mult == 3);
  CHECK(rep2.eigs[2].val == doctest::Approx(3.0));
  CHECK(rep2.eigs[2].mult == 15);

  // operator convention reports the literal (reciprocal) eigenvalues
  const auto rep2op = hf::spectrum_of_calibration(
      s2, hf::pi_form(s2, 1), hf::SpectralConvention::operator_eigenvalues);
  REQUIRE(rep2op.eigs.size() == 3);
  CHECK(rep2op.eigs[0].val == doctest::Approx(-1.0));
  CHECK(rep2op.eigs[0].mult == 10);
  CHECK(rep2op.eigs[1].val == doctest::Approx(1.0 / 3.0));
  CHECK(rep2op.eigs[1].mult == 15);
  CHECK(rep2op.eigs[2].val == doctest::Approx(5.0 / 3.0));
  CHECK(rep2op.eigs[2].mult == 3);
}

TEST_CASE("calibration spectra: weighted form encodes the energy-weight constants") {
  const auto s = hf::standard_structure(2);
  const std::array<double, 3> lam{2.0, -1.0, -1.0};
  const Form phi = hf::phi_lambda(s, lam);
  const auto a = hf::a_constants(lam);
  const auto b = hf::b_constants(lam, 2);

  // operator eigenvalues: -a_I on U_I (5 each), -b_L on R omega_L, 0 on W
  const auto rep = hf::spectrum_of_calibration(
      s, phi, hf::SpectralConvention::operator_eigenvalues);
  REQUIRE(rep.eigs.size() == 5);
  CHECK(rep.eigs[0].val == doctest::Approx(-a[0]));      // -4: U_I
  CHECK(rep.eigs[0].mult == 5);
  CHECK(rep.eigs[1].val == doctest::Approx(-b[1]));      // -2: omega_J, omega_K
  CHECK(rep.eigs[1].mult == 2);
  CHECK(std::abs(rep.eigs[2].val) < 1e-10);              // 0: W
  CHECK(rep.eigs[2].mult == 10);
  CHECK(rep.eigs[3].val == doctest::Approx(-a[1]));      // +2: U_J + U_K
  CHECK(rep.eigs[3].mult == 10);
  CHECK(rep.eigs[4].val == doctest::Approx(-b[0]));      // +4: omega_I
  CHECK(rep.eigs[4].mult == 1);

  // the sp(n) part lies in the kernel of wedging with the weighted form
  hf::Rng rng(71);
  const Form w = hf::decompose2(s, hf::random_real_form(8, 2, rng)).w;
  CHECK(hf::wedge(w, phi).is_zero(1e-10 * std::max(1.0, w.norm())));

  // calibration convention is undefined for singular operators
  CHECK_THROWS_AS(hf::spectrum_of_calibration(s, phi), hf::domain_error);
}

TEST_CASE("spectrum plumbing: validation and serialization") {
  const auto s = hf::standard_structure(1);
  // wrong calibration degree
  CHECK_THROWS_AS(hf::spectrum_of_calibration(s, s.omega_I), hf::structural_error);
  // degenerate domain basis
  const Form e12 = Form::basis(4, {1, 2});
  CHECK_THROWS_AS(
      hf::spectrum_of_calibration(hf::pi_form(s, 0), {e12, e12}),
      hf::structural_error);
  // empty domain
  CHECK_THROWS_AS(hf::spectrum_of_calibration(hf::pi_form(s, 0), {}), hf::structural_error);
  // complex calibration form
  CHECK_THROWS_AS(
      hf::spectrum_of_calibration(s, kI * hf::pi_form(s, 0)),
      hf::structural_error);
  // non-symmetric operators are rejected by the spectrum helper
  auto skew = [](const Form& f) {
    Form out = f;
    out[1] += f[0];
    return out;
  };
  CHECK_THROWS_AS(hf::operator_spectrum(skew, hf::two_form_basis(4)),
                  hf::invariant_violation);

  const auto rep = hf::spectrum_of_calibration(s, hf::pi_form(s, 0));
  const hf::json j = hf::spectrum_to_json(rep);
  REQUIRE(j["eigs"].size() == 2);
  CHECK(j["eigs"][0]["val"].get<double>() == doctest::Approx(-1.0));
  CHECK(j["eigs"][0]["mult"] == 3);
  CHECK(j["eigs"][1]["val"].get<double>() == doctest::Approx(1.0));
  CHECK(j["domain_dim"] == 6);
  CHECK(j.dump() == hf::spectrum_to_json(rep).dump());  // stable serialization

  const hf::json sj = hf::structure_to_json(s);
  CHECK(sj["n"] == 1);
  CHECK(sj["dim"] == 4);
  CHECK(sj["I"]["rows"] == 4);
  // I(row 1, col 0) = 1 in row-major data
  CHECK(sj["I"]["data"][4].get<double>() == doctest::Approx(1.0));
}
