#include <catch2/catch_amalgamated.hpp>

#include <picheck/propagation.hpp>
#include <picheck/random.hpp>

#include "oracles.hpp"

using namespace picheck;

namespace {

Family random_family(Rng& rng, int d_A, int d_B) {
  std::vector<CMatrix> reps;
  for (int m = 0; m < d_A; ++m) reps.push_back(rng.random_unitary(d_B));
  return Family(d_A, d_B, reps);
}

} // namespace

TEST_CASE("constant frame rotor is the plain exponential", "[propagation]") {
  Rng rng(201);
  const CMatrix h1 = rng.random_hermitian(2), h2 = rng.random_hermitian(2);
  const DiagonalFrame frame = DiagonalFrame::constant({h1, h2}, 2.0);
  const double t = 1.37;
  REQUIRE((frame.rotor(1, t) - oracles::hermitian_expm(h1, complex(0, -t))).norm() < 1e-12);
  REQUIRE((frame.rotor(2, t) - oracles::hermitian_expm(h2, complex(0, -t))).norm() < 1e-12);

  const CMatrix u = frame.frame_unitary(t);
  REQUIRE((u.block(0, 0, 2, 2) - frame.rotor(1, t)).norm() == 0.0);
  REQUIRE((u.block(2, 2, 2, 2) - frame.rotor(2, t)).norm() == 0.0);
  REQUIRE(u.block(0, 2, 2, 2).norm() == 0.0);
}

TEST_CASE("piecewise frame matches direct integration", "[propagation]") {
  Rng rng(202);
  const CMatrix ha = rng.random_hermitian(2), hb = rng.random_hermitian(2);
  const double t1 = 0.6, t2 = 1.5;
  const DiagonalFrame frame(1, 2, {t1, t2}, {{ha}, {hb}});
  // Independent oracle: integrate i dR/dt = H R per segment, splitting at the
  // breakpoint so the smooth-RHS convergence rate applies.
  auto flow = [&](const CMatrix& h, const CMatrix& r0, double from, double to) {
    auto deriv = [&](double, const CMatrix& r) { return CMatrix(complex(0, -1) * h * r); };
    return ode_propagate(deriv, r0, from, to, 2000);
  };
  for (double t : {0.3, 0.6, 1.1, 1.5, 2.2}) {
    CMatrix ref = flow(ha, CMatrix(CMatrix::Identity(2, 2)), 0.0, std::min(t, t1));
    if (t > t1) ref = flow(hb, ref, t1, t);
    REQUIRE((frame.rotor(1, t) - ref).norm() < 1e-9);
  }
  REQUIRE(frame.hamiltonian(1, 0.1) == ha);
  REQUIRE(frame.hamiltonian(1, 1.0) == hb);
  REQUIRE(frame.hamiltonian(1, 99.0) == hb); // final segment extends
}

TEST_CASE("frame validates its schedule", "[propagation]") {
  Rng rng(203);
  const CMatrix h = rng.random_hermitian(2);
  const CMatrix skew = h + 0.01 * complex(0, 1) * CMatrix::Identity(2, 2);
  REQUIRE_THROWS_AS(DiagonalFrame::constant({skew}, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(DiagonalFrame(1, 2, {1.0, 0.5}, {{h}, {h}}), std::invalid_argument);
  REQUIRE_THROWS_AS(DiagonalFrame(2, 2, {1.0}, {{h}}), std::invalid_argument);
  const DiagonalFrame ok = DiagonalFrame::constant({h}, 1.0);
  REQUIRE_THROWS_AS(ok.rotor(1, -0.5), std::invalid_argument);
}

TEST_CASE("pi_propagator is unitary and lives in the algebra", "[propagation]") {
  Rng rng(204);
  const Family fam = random_family(rng, 3, 2);
  const CMatrix h = rng.random_hermitian(3);
  for (double t : {0.0, 0.4, 1.7}) {
    const CMatrix w = pi_propagator(fam, h, t);
    REQUIRE((w.adjoint() * w - CMatrix::Identity(6, 6)).norm() < 1e-12);
    const XiReport xi = xi_correspondence_check(fam, h, t);
    REQUIRE(xi.pass);
    REQUIRE(xi.membership_residual < 1e-9);
    REQUIRE(xi.max_coeff_error < 1e-9);
  }
  REQUIRE_THROWS_AS(pi_propagator(fam, rng.gaussian_matrix(3, 3), 1.0),
                    std::invalid_argument);
}

TEST_CASE("two-level coefficient flow has the closed form", "[propagation]") {
  Rng rng(205);
  const Family fam = random_family(rng, 2, 3);
  const double omega = 0.9;
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 1) = omega;
  h(1, 0) = omega;
  for (double t : {0.25, 0.8, 2.0}) {
    const CMatrix w = pi_propagator(fam, h, t);
    const ProjectedBlock stay = projected_block(w, fam, 1, 1);
    const ProjectedBlock hop = projected_block(w, fam, 1, 2);
    REQUIRE(std::abs(stay.fit.constant - complex(std::cos(omega * t), 0)) < 1e-12);
    REQUIRE(std::abs(hop.fit.constant - complex(0, -std::sin(omega * t))) < 1e-12);
    REQUIRE(stay.fit.residual < 1e-12);
    REQUIRE(hop.fit.residual < 1e-12);
  }
}

TEST_CASE("projected blocks fit the family unitary or vanish", "[propagation]") {
  Rng rng(206);
  const Family fam = random_family(rng, 3, 2);
  const CMatrix h = rng.random_hermitian(3);
  const CMatrix w = pi_propagator(fam, h, 1.1);
  for (int i = 1; i <= 3; ++i)
    for (int r = 1; r <= 3; ++r) {
      const ProjectedBlock pb = projected_block(w, fam, i, r);
      if (pb.fit.trivially_zero) continue;
      REQUIRE(pb.fit.residual < 1e-9 * std::max(1.0, pb.block.norm()));
      // The normalized block is unitary: it is a scalar times U(r, i).
      const CMatrix normalized = pb.block / pb.fit.constant;
      REQUIRE((normalized.adjoint() * normalized - CMatrix::Identity(2, 2)).norm() < 1e-8);
    }
}

TEST_CASE("block-diagonal coefficients leave a transition unreachable", "[propagation]") {
  Rng rng(207);
  const Family fam = random_family(rng, 2, 2);
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 0.7;
  h(1, 1) = -0.2;
  const CMatrix w = pi_propagator(fam, h, 1.3);
  const TransitionReport hop = induced_transition_check(w, fam, 1, 2);
  REQUIRE(hop.trivially_zero);
  const TransitionReport stay = induced_transition_check(w, fam, 1, 1);
  REQUIRE_FALSE(stay.trivially_zero);
  REQUIRE(stay.sine < 1e-12);
}

TEST_CASE("dressing prepends the frame rotation", "[propagation]") {
  Rng rng(208);
  const Family fam = random_family(rng, 2, 2);
  const CMatrix h1 = rng.random_hermitian(2), h2 = rng.random_hermitian(2);
  const DiagonalFrame frame = DiagonalFrame::constant({h1, h2}, 2.0);
  const CMatrix w = pi_propagator(fam, rng.random_hermitian(2), 0.9);
  const double t = 0.9;
  const CMatrix dressed = schrodinger_dress(frame, w, t);
  REQUIRE((frame.frame_unitary(t).adjoint() * dressed - w).norm() < 1e-12);
  REQUIRE((dressed.adjoint() * dressed - CMatrix::Identity(4, 4)).norm() < 1e-12);
  // Trivial interaction: the lab propagator is the frame itself.
  const CMatrix idle = schrodinger_dress(frame, CMatrix(CMatrix::Identity(4, 4)), t);
  REQUIRE((idle - frame.frame_unitary(t)).norm() == 0.0);
}
