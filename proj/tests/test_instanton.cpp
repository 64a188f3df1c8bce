#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>

#include "hyperforge/errors.hpp"
#include "hyperforge/instanton.hpp"
#include "hyperforge/json_io.hpp"
#include "hyperforge/random.hpp"

using hf::cplx;
using hf::Form;
using hf::HyperHermitianStructure;

namespace {

const cplx kI{0.0, 1.0};

Form random_w_form(const HyperHermitianStructure& s, hf::Rng& rng) {
  return hf::decompose2(s, hf::random_real_form(s.dim(), 2, rng)).w;
}

// keep only coefficients with one index in the base block and one in the fiber
Form mixed_part(const Form& g, int base_dim) {
  Form out = g;
  const std::uint32_t base_mask = (1u << base_dim) - 1u;
  const auto& masks = hf::degree_masks(g.dim(), 2);
  for (std::size_t t = 0; t < masks.size(); ++t) {
    const int low = std::popcount(masks[t] & base_mask);
    if (low != 1) out[static_cast<int>(t)] = 0.0;
  }
  return out;
}

Eigen::MatrixXd block_projector(int N, int from, int to) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, N);
  for (int i = from; i < to; ++i) P(i, i) = 1.0;
  return P;
}

}  // namespace

TEST_CASE("condition report plumbing and serialization") {
  hf::ConditionReport rep;
  rep.tol = 0.5;
  rep.add("alpha", 0.25);
  rep.add("beta", 1.5);
  rep.finalize();
  CHECK_FALSE(rep.pass);
  CHECK(rep.residual("alpha") == 0.25);
  CHECK(rep.max_residual() == 1.5);
  CHECK_THROWS_AS(rep.residual("gamma"), hf::structural_error);

  const hf::json j = hf::report_to_json(rep);
  CHECK(j["pass"] == false);
  CHECK(j["tol"] == 0.5);
  CHECK(j["residuals"]["alpha"] == 0.25);
  CHECK(j.dump() == R"({"residuals":{"alpha":0.25,"beta":1.5},"pass":false,"tol":0.5})");
}

TEST_CASE("matrix curvature: entries, skew-Hermiticity, trace form") {
  const auto s = hf::standard_structure(1);
  hf::Rng rng(5);
  const Form g = hf::random_real_form(4, 2, rng);

  // scalar wrapper: one entry, equal to the input
  const auto sc = hf::MatrixCurvature::scalar(kI * g);
  const auto entries = hf::curvature_entries(sc);
  REQUIRE(entries.size() == 1);
  CHECK(hf::approx_equal(entries[0], kI * g));
  CHECK(hf::curvature_norm(sc) == doctest::Approx(g.norm()));

  // tr(F ^ F) for scalar F = iG is -G ^ G, a real 4-form
  const Form tr = hf::tr_ff(sc);
  CHECK(hf::approx_equal(tr, -hf::wedge(g, g)));
  CHECK(tr.imag_part().is_zero(1e-12));

  // rank-2: real forms times skew-Hermitian coefficients stay skew-Hermitian
  Eigen::MatrixXcd m1(2, 2), m2(2, 2);
  m1 << cplx(0, 1), cplx(1, 1), cplx(-1, 1), cplx(0, -2);
  m2 << cplx(0, 0.5), cplx(2, 0), cplx(-2, 0), cplx(0, 1);
  hf::MatrixCurvature mc;
  mc.rank = 2;
  mc.terms.emplace_back(g, m1);
  mc.terms.emplace_back(hf::random_real_form(4, 2, rng), m2);
  const auto me = hf::curvature_entries(mc);
  REQUIRE(me.size() == 4);
  CHECK(hf::approx_equal(me[1], -me[2].conjugate()));
  CHECK(hf::tr_ff(mc).imag_part().is_zero(1e-10));

  // violations
  hf::MatrixCurvature bad;
  bad.rank = 2;
  Eigen::MatrixXcd notskew = Eigen::MatrixXcd::Identity(2, 2);
  bad.terms.emplace_back(g, notskew);
  CHECK_THROWS_AS(hf::curvature_entries(bad), hf::domain_error);

  hf::MatrixCurvature worse;
  worse.rank = 5;
  worse.terms.emplace_back(g, Eigen::MatrixXcd::Zero(5, 5));
  CHECK_THROWS_AS(hf::curvature_entries(worse), hf::structural_error);
}

TEST_CASE("primitive HYM checker: component membership drives the verdict") {
  const auto s = hf::standard_structure(2);
  hf::Rng rng(13);

  const Form w = random_w_form(s, rng);
  for (int c = 0; c < 3; ++c) CHECK(hf::check_phym(s, c, kI * w).pass);

  // omega_I is (1,1) for I but not primitive
  const auto ri = hf::check_phym(s, 0, kI * s.omega_I);
  CHECK_FALSE(ri.pass);
  CHECK(ri.residual("f02") < ri.tol);
  CHECK(ri.residual("primitive") > ri.tol);

  // a U_I element is primitive (1,1) for I but has (0,2) part for J
  const Form ui = hf::decompose2(s, hf::random_real_form(8, 2, rng)).u_I;
  CHECK(hf::check_phym(s, 0, kI * ui).pass);
  const auto rj = hf::check_phym(s, 1, kI * ui);
  CHECK_FALSE(rj.pass);
  CHECK(rj.residual("f02") > rj.tol);

  // purely imaginary is required for the scalar case
  CHECK_THROWS_AS(hf::check_phym(s, 0, w), hf::domain_error);

  // matrix-valued: entries assembled from the invariant part pass entrywise
  Eigen::MatrixXcd m1(2, 2);
  m1 << cplx(0, 1), cplx(1, 0), cplx(-1, 0), cplx(0, -1);
  hf::MatrixCurvature mc;
  mc.rank = 2;
  mc.terms.emplace_back(w, m1);
  mc.terms.emplace_back(random_w_form(s, rng), m1);
  for (int c = 0; c < 3; ++c) CHECK(hf::check_phym(s, c, mc).pass);
}

TEST_CASE("quaternionic instanton report: examples and verdict structure") {
  const auto s = hf::standard_structure(2);
  hf::Rng rng(17);

  const auto pass_rep = hf::check_spn_report(s, kI * random_w_form(s, rng));
  CHECK(pass_rep.pass);
  CHECK(pass_rep.residuals.size() == 13);  // 1 + 1 + 3 + 6 + 2

  const auto yfail = hf::check_spn_report(s, kI * s.omega_K);
  CHECK_FALSE(yfail.pass);
  CHECK(yfail.residual("w_distance") == doctest::Approx(s.omega_K.norm()));

  // U_J: the J-type (0,2) residual vanishes but the K one does not
  const Form uj = hf::decompose2(s, hf::random_real_form(8, 2, rng)).u_J;
  const auto ujrep = hf::check_spn_report(s, kI * uj);
  CHECK_FALSE(ujrep.pass);
  CHECK(ujrep.residual("type02_J") < ujrep.tol);
  CHECK(ujrep.residual("type02_K") > ujrep.tol);
  CHECK(ujrep.residual("w_distance") == doctest::Approx(uj.norm()));

  CHECK_THROWS_AS(hf::check_spn_report(s, hf::random_real_form(8, 2, rng)),
                  hf::domain_error);

  // matrix-valued input: no scalar-only residuals, same verdict logic
  Eigen::MatrixXcd m1(2, 2);
  m1 << cplx(0, 2), cplx(0, 1), cplx(0, 1), cplx(0, -1);
  hf::MatrixCurvature mc;
  mc.rank = 2;
  mc.terms.emplace_back(random_w_form(s, rng), m1);
  const auto mrep = hf::check_spn_report(s, mc);
  CHECK(mrep.pass);
  CHECK(mrep.residuals.size() == 11);
}

TEST_CASE("equivalence battery: all formulations agree on random samples") {
  for (int n = 1; n <= 2; ++n) {
    const auto s = hf::standard_structure(n);
    hf::Rng rng(100 + n);
    int fails = 0, passes = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Form g = hf::random_real_form(4 * n, 2, rng);
      // never throws (verdict agreement), generic samples fail
      const auto rep = hf::check_spn_report(s, kI * g, 1e-9);
      fails += rep.pass ? 0 : 1;
      // projected samples pass in every formulation
      const auto wrep = hf::check_spn_report(s, kI * hf::decompose2(s, g).w, 1e-9);
      passes += wrep.pass ? 1 : 0;
    }
    CHECK(fails == 1000);
    CHECK(passes == 1000);
  }
}

TEST_CASE("residuals are absolutely homogeneous in the curvature") {
  const auto s = hf::standard_structure(2);
  hf::Rng rng(29);
  const Form g = hf::random_real_form(8, 2, rng);
  const double t = 3.75;

  const auto r1 = hf::check_spn_report(s, kI * g);
  const auto r2 = hf::check_spn_report(s, cplx(t) * kI * g);
  for (std::size_t i = 0; i < r1.residuals.size(); ++i) {
    CHECK(r1.residuals[i].first == r2.residuals[i].first);
    CHECK(r2.residuals[i].second ==
          doctest::Approx(t * r1.residuals[i].second).epsilon(1e-12));
  }
  CHECK(r2.tol == doctest::Approx(t * r1.tol));

  const auto p1 = hf::check_phym(s, 1, kI * g);
  const auto p2 = hf::check_phym(s, 1, cplx(t) * kI * g);
  CHECK(p2.residual("f02") == doctest::Approx(t * p1.residual("f02")));
  CHECK(p2.residual("primitive") == doctest::Approx(t * p1.residual("primitive")));

  const Form pi = hf::pi_form(s, 1);
  const auto a1 = hf::check_omega_asd(kI * g, pi);
  const auto a2 = hf::check_omega_asd(cplx(t) * kI * g, pi);
  CHECK(a2.residual("omega_asd") == doctest::Approx(t * a1.residual("omega_asd")));
}

TEST_CASE("calibrated anti-self-duality checker") {
  // classical four-dimensional case: Omega = 1
  const Form one = Form::scalar(4, 1.0);
  const Form asd = kI * (Form::basis(4, {1, 2}) - Form::basis(4, {3, 4}));
  const Form sd = kI * (Form::basis(4, {1, 2}) + Form::basis(4, {3, 4}));
  CHECK(hf::check_omega_asd(asd, one).pass);
  const auto sdrep = hf::check_omega_asd(sd, one);
  CHECK_FALSE(sdrep.pass);
  CHECK(sdrep.residual("omega_asd") == doctest::Approx(2.0 * sd.norm()));

  // quaternionic calibration: the invariant part is calibrated-ASD
  const auto s = hf::standard_structure(2);
  hf::Rng rng(31);
  CHECK(hf::check_omega_asd(kI * random_w_form(s, rng), hf::pi_form(s, 1)).pass);

  CHECK_THROWS_AS(hf::check_omega_asd(asd, Form::scalar(8, 1.0)), hf::structural_error);
  CHECK_THROWS_AS(hf::check_omega_asd(asd, Form::basis(4, {1})), hf::structural_error);
}

TEST_CASE("deformed HYM checker: phase-1 equation") {
  const auto s1 = hf::standard_structure(1);
  const auto s2 = hf::standard_structure(2);

  // zero curvature is flat dHYM
  CHECK(hf::check_dhym(s1, Form(4, 2)).pass);

  // F = i omega fails the imaginary-part equation in dimension 4 (m = 2)
  const auto r = hf::check_dhym(s1, kI * s1.omega_I);
  CHECK_FALSE(r.pass);
  CHECK(r.residual("f02") < r.tol);
  CHECK(r.residual("im_part") > r.tol);
  // Im((1+i)^2 omega^2) = 2 omega^2 = 4 vol
  CHECK(r.residual("im_part") == doctest::Approx(4.0));

  // mixed (1,1) curvature on the product splitting is dHYM
  hf::Rng rng(37);
  for (const auto* s : {&s1, &s2}) {
    const int N = s->dim();
    Form g = mixed_part(hf::random_real_form(N, 2, rng), N / 2);
    g = 0.5 * (g + hf::l_star(s->I, g));  // (1,1) projection, preserves mixedness
    const auto rep = hf::check_dhym(*s, kI * g);
    CHECK(rep.pass);
    // and it is mixed in the sense of the splitting checker
    const auto mixed = hf::check_mixed(block_projector(N, 0, N / 2),
                                       block_projector(N, N / 2, N), g);
    CHECK(mixed.pass);
  }

  CHECK_THROWS_AS(hf::check_dhym(s1.I, s1.omega_J, kI * s1.omega_I), hf::structural_error);
  CHECK_THROWS_AS(hf::check_dhym(s1, s1.omega_I), hf::domain_error);
}

TEST_CASE("mixed-form checker: splitting validation and examples") {
  const auto s = hf::standard_structure(1);
  const auto pb = block_projector(4, 0, 2);
  const auto pf = block_projector(4, 2, 4);

  CHECK(hf::check_mixed(pb, pf, Form::basis(4, {1, 3})).pass);  // dx^du

  const auto rep = hf::check_mixed(pb, pf, s.omega_I);  // dx^dy + du^dv
  CHECK_FALSE(rep.pass);
  CHECK(rep.residual("pure_base") == doctest::Approx(1.0));
  CHECK(rep.residual("pure_fiber") == doctest::Approx(1.0));

  CHECK_THROWS_AS(hf::check_mixed(pb, block_projector(4, 2, 3), s.omega_I),
                  hf::structural_error);
  CHECK_THROWS_AS(
      hf::check_mixed(0.5 * Eigen::MatrixXd::Identity(4, 4),
                      0.5 * Eigen::MatrixXd::Identity(4, 4), s.omega_I),
      hf::structural_error);
  Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(4, 4);
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(hf::check_mixed(skew, pf, s.omega_I), hf::structural_error);
}

TEST_CASE("dimension four: the quaternionic condition is classical ASD and pHYM(I)") {
  const auto s = hf::standard_structure(1);
  const Form one = Form::scalar(4, 1.0);
  hf::Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const Form g = hf::random_real_form(4, 2, rng);
    const Form f = (trial % 2 == 0) ? kI * g : kI * hf::decompose2(s, g).w;
    const bool spn = hf::check_spn_report(s, f).pass;
    CHECK(spn == hf::check_omega_asd(f, one).pass);
    CHECK(spn == hf::check_phym(s, 0, f).pass);
  }
}

TEST_CASE("dimension eight: invariance implies pHYM(I) but not conversely") {
  const auto s = hf::standard_structure(2);
  hf::Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = hf::decompose2(s, hf::random_real_form(8, 2, rng));
    CHECK(hf::check_phym(s, 0, kI * d.w).pass);        // W implies pHYM(I)
    CHECK(hf::check_phym(s, 0, kI * d.u_I).pass);      // but so does U_I
    CHECK_FALSE(hf::check_spn_report(s, kI * d.u_I).pass);
  }
}
