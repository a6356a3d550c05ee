#include <catch2/catch_amalgamated.hpp>

#include <picheck/numerics.hpp>
#include <picheck/random.hpp>

#include "oracles.hpp"

using namespace picheck;

namespace {
CMatrix pauli_x() {
  CMatrix s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}
} // namespace

TEST_CASE("kron matches the index formula", "[numerics]") {
  Rng rng(11);
  const CMatrix a = rng.gaussian_matrix(3, 2);
  const CMatrix b = rng.gaussian_matrix(2, 4);
  const CMatrix k = kron(a, b);
  REQUIRE(k.rows() == 6);
  REQUIRE(k.cols() == 8);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 4; ++s)
          REQUIRE(std::abs(k(i * 2 + r, j * 4 + s) - a(i, j) * b(r, s)) < 1e-15);
}

TEST_CASE("kron mixed-product identity", "[numerics]") {
  Rng rng(12);
  const CMatrix a = rng.gaussian_matrix(3, 3), b = rng.gaussian_matrix(2, 2);
  const CMatrix c = rng.gaussian_matrix(3, 3), d = rng.gaussian_matrix(2, 2);
  const CMatrix lhs = kron(a, b) * kron(c, d);
  const CMatrix rhs = kron(CMatrix(a * c), CMatrix(b * d));
  REQUIRE((lhs - rhs).norm() < 1e-12 * rhs.norm());
  REQUIRE((kron(CMatrix(CMatrix::Identity(2, 2)), CMatrix(CMatrix::Identity(3, 3))) -
           CMatrix::Identity(6, 6))
              .norm() == 0.0);
}

TEST_CASE("expm closed forms", "[numerics]") {
  REQUIRE((expm(CMatrix::Zero(3, 3)) - CMatrix::Identity(3, 3)).norm() < 1e-15);

  CMatrix nil(2, 2);
  nil << 0, 1, 0, 0;
  CMatrix expect(2, 2);
  expect << 1, 1, 0, 1;
  REQUIRE((expm(nil) - expect).norm() < 1e-14);

  const double theta = 0.77;
  const CMatrix sx = pauli_x();
  const CMatrix u = expm(sx, complex(0, -theta));
  CMatrix closed(2, 2);
  closed << std::cos(theta), complex(0, -std::sin(theta)), complex(0, -std::sin(theta)),
      std::cos(theta);
  REQUIRE((u - closed).norm() < 1e-14);
}

TEST_CASE("expm agrees with the Taylor oracle at small norm", "[numerics]") {
  Rng rng(7);
  CMatrix a = rng.gaussian_matrix(6, 6);
  a *= 2.0 / a.norm();
  const CMatrix ref = oracles::taylor_expm(a, 40);
  REQUIRE((expm(a) - ref).norm() < 1e-11 * ref.norm());
}

TEST_CASE("expm relative error across the norm range", "[numerics]") {
  Rng rng(21);
  for (double nrm : {0.5, 2.0, 5.0, 10.0, 20.0}) {
    CMatrix a = rng.gaussian_matrix(8, 8);
    a *= nrm / a.norm();
    const CMatrix ref = oracles::scaled_taylor_expm(a);
    REQUIRE((expm(a) - ref).norm() < 1e-12 * ref.norm());
  }
  // Near the contract edge use a normal matrix so the oracle stays exact.
  CMatrix h = rng.random_hermitian(8);
  h *= 50.0 / h.norm();
  const CMatrix ref = oracles::hermitian_expm(h, complex(0, -1));
  REQUIRE((expm(h, complex(0, -1)) - ref).norm() < 1e-12 * ref.norm());
}

TEST_CASE("expm scale argument and group properties", "[numerics]") {
  Rng rng(22);
  const CMatrix a = rng.gaussian_matrix(5, 5);
  const CMatrix e1 = expm(a, complex(0.3, 0.1));
  const CMatrix e2 = expm(a, complex(0.5, -0.4));
  const CMatrix e12 = expm(a, complex(0.8, -0.3));
  REQUIRE((e1 * e2 - e12).norm() < 1e-12 * e12.norm());

  const CMatrix h = rng.random_hermitian(6);
  const CMatrix u = expm(h, complex(0, -1.3));
  REQUIRE((u.adjoint() * u - CMatrix::Identity(6, 6)).norm() < 1e-12);
}

TEST_CASE("expm rejects bad input", "[numerics]") {
  REQUIRE_THROWS_AS(expm(CMatrix::Zero(2, 3)), std::invalid_argument);
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(expm(bad), std::invalid_argument);
}

TEST_CASE("eig residuals and reconstruction", "[numerics]") {
  Rng rng(31);
  const CMatrix a = rng.gaussian_matrix(6, 6);
  const EigResult r = eig(a);
  for (int j = 0; j < 6; ++j)
    REQUIRE((a * r.vectors.col(j) - r.values(j) * r.vectors.col(j)).norm() < 1e-9 * a.norm());
  const CMatrix recon = r.vectors * r.values.asDiagonal() *
                        r.vectors.partialPivLu().solve(CMatrix::Identity(6, 6));
  REQUIRE((recon - a).norm() < 1e-10 * a.norm());
}

TEST_CASE("eig eigenvalues match the self-adjoint solver on Hermitian input", "[numerics]") {
  Rng rng(32);
  const CMatrix h = rng.random_hermitian(7);
  EigResult r = eig(h);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  std::vector<double> got;
  for (int i = 0; i < 7; ++i) {
    REQUIRE(std::abs(r.values(i).imag()) < 1e-12 * h.norm());
    got.push_back(r.values(i).real());
  }
  std::sort(got.begin(), got.end());
  for (int i = 0; i < 7; ++i) REQUIRE(std::abs(got[i] - es.eigenvalues()(i)) < 1e-11 * h.norm());
}

TEST_CASE("proportionality_fit frozen two-by-two example", "[numerics]") {
  CMatrix t = CMatrix::Identity(2, 2);
  CMatrix d(2, 2);
  d << 1, 0, 0, -1;
  const CMatrix x = (complex(5e-10, 2.0)) * t + 5e-10 * d;
  const ProportionalityFit fit = proportionality_fit(x, t);
  REQUIRE_FALSE(fit.trivially_zero);
  REQUIRE(std::abs(fit.constant - complex(5e-10, 2.0)) < 1e-18);
  REQUIRE(std::abs(fit.residual - 7.0710678118654755e-10) < 1e-20);
}

TEST_CASE("proportionality_fit exact, zero, and degenerate branches", "[numerics]") {
  Rng rng(41);
  const CMatrix t = rng.gaussian_matrix(3, 3);
  const complex c0(3.0, -2.0);
  ProportionalityFit fit = proportionality_fit(CMatrix(c0 * t), t);
  REQUIRE(std::abs(fit.constant - c0) < 1e-14);
  REQUIRE(fit.residual < 1e-14 * t.norm());

  fit = proportionality_fit(CMatrix(1e-12 * t), CMatrix(CMatrix::Identity(3, 3)));
  REQUIRE(fit.trivially_zero);
  REQUIRE(fit.constant == complex(0.0, 0.0));

  REQUIRE_THROWS_AS(proportionality_fit(t, CMatrix(CMatrix::Zero(3, 3))),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(proportionality_fit(t, CMatrix(CMatrix::Zero(2, 2))),
                    std::invalid_argument);
}

TEST_CASE("proportionality_fit relative residual is scale invariant", "[numerics]") {
  Rng rng(42);
  const CMatrix t = rng.gaussian_matrix(4, 4);
  const CMatrix x = complex(0.3, 1.1) * t + 0.05 * rng.gaussian_matrix(4, 4);
  const ProportionalityFit f1 = proportionality_fit(x, t);
  const ProportionalityFit f2 = proportionality_fit(CMatrix(7.0 * x), CMatrix(7.0 * t));
  REQUIRE(std::abs(f1.residual / x.norm() - f2.residual / (7.0 * x.norm())) < 1e-12);
  REQUIRE(std::abs(f1.constant - f2.constant) < 1e-12);
}

TEST_CASE("ode_propagate reproduces the matrix exponential", "[numerics]") {
  Rng rng(51);
  const CMatrix a = 0.5 * rng.gaussian_matrix(4, 4);
  const CMatrix y0 = rng.gaussian_matrix(4, 4);
  const CMatrix y = ode_propagate([&](double, const CMatrix& m) { return CMatrix(a * m); },
                                  y0, 0.0, 1.0, 400);
  const CMatrix ref = expm(a) * y0;
  REQUIRE((y - ref).norm() < 1e-9 * ref.norm());
}

TEST_CASE("ode_propagate shows fourth-order convergence", "[numerics]") {
  // dy/dt = i*alpha*t*y  =>  y(T) = exp(i*alpha*T^2/2) y0, genuinely
  // time-dependent so all four stage evaluations matter.
  const double alpha = 2.3, T = 1.7;
  CMatrix y0(1, 1);
  y0(0, 0) = complex(1.0, 0.5);
  auto deriv = [&](double t, const CMatrix& y) { return CMatrix(complex(0, alpha * t) * y); };
  const complex exact = std::exp(complex(0, alpha * T * T / 2)) * y0(0, 0);
  std::vector<double> errs;
  for (int steps : {25, 50, 100})
    errs.push_back(std::abs(ode_propagate(deriv, y0, 0.0, T, steps)(0, 0) - exact));
  REQUIRE(errs[0] / errs[1] > 12.0);
  REQUIRE(errs[0] / errs[1] < 20.0);
  REQUIRE(errs[1] / errs[2] > 12.0);
  REQUIRE(errs[1] / errs[2] < 20.0);
}

TEST_CASE("rng streams are deterministic and splittable", "[numerics]") {
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) REQUIRE(a.uniform() == b.uniform());
  REQUIRE(splitmix64(0) == 0xE220A8397B1DCDAFull);

  Rng s0 = substream(1, 0);
  Rng s1 = substream(1, 1);
  REQUIRE(s0.uniform() != s1.uniform());
}

TEST_CASE("rng draws have the right support and symmetry", "[numerics]") {
  Rng rng(99);
  double mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mean += rng.gaussian();
  }
  REQUIRE(std::abs(mean / 20000.0) < 0.05);

  const CMatrix u = rng.random_unitary(5);
  REQUIRE((u.adjoint() * u - CMatrix::Identity(5, 5)).norm() < 1e-13);
  const CMatrix h = rng.random_hermitian(5);
  REQUIRE((h - h.adjoint()).norm() < 1e-15);
}
