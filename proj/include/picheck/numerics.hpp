#pragma once
// Dense complex linear-algebra kernel: Kronecker products, matrix exponential
// (scaling-and-squaring), eigendecomposition, least-squares proportionality
// fits, and a fixed-step RK4 integrator. Everything downstream builds on this.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace picheck {

using complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Library-wide default tolerances.
inline constexpr double eq_tol = 1e-9;    // equality of matrices / scalars
inline constexpr double prop_tol = 1e-7;  // proportionality residuals
inline constexpr double zero_tol = 1e-10; // "trivially zero" threshold

inline void require_square(const CMatrix& a, const char* who) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square, got " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

inline void require_finite(const CMatrix& a, const char* who) {
  if (!a.allFinite())
    throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
}

// Frobenius inner product, conjugate-linear in the first argument:
// <a, b> = sum_ij conj(a_ij) b_ij = tr(a^† b).
inline complex frobenius_inner(const CMatrix& a, const CMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace detail {

// Pade approximant of order m in {3,5,7,9} for exp(a); `pows[k]` = a^(2k).
inline CMatrix pade_small(const CMatrix& a, const std::vector<CMatrix>& pows,
                          const std::vector<double>& b) {
  const Eigen::Index n = a.rows();
  CMatrix u = CMatrix::Zero(n, n), v = CMatrix::Zero(n, n);
  for (std::size_t k = 0; 2 * k + 1 < b.size(); ++k) u += b[2 * k + 1] * pows[k];
  for (std::size_t k = 0; 2 * k < b.size(); ++k) v += b[2 * k] * pows[k];
  u = a * u;
  return (v - u).partialPivLu().solve(v + u);
}

} // namespace detail

// exp(scale * a) via scaling-and-squaring with Pade approximants of degree
// 3/5/7/9/13 chosen by the 1-norm (Higham's theta thresholds).
inline CMatrix expm(const CMatrix& a, complex scale = complex(1.0, 0.0)) {
  require_square(a, "expm");
  require_finite(a, "expm");
  const Eigen::Index n = a.rows();
  if (n == 0) return CMatrix(0, 0);
  CMatrix A = scale * a;

  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  const CMatrix I = CMatrix::Identity(n, n);
  if (norm1 == 0.0) return I;

  constexpr double theta3 = 1.495585217958292e-2;
  constexpr double theta5 = 2.539398330063230e-1;
  constexpr double theta7 = 9.504178996162932e-1;
  constexpr double theta9 = 2.097847961257068e0;
  constexpr double theta13 = 5.371920351148152e0;

  const CMatrix A2 = A * A;
  if (norm1 <= theta9) {
    std::vector<CMatrix> pows{I, A2};
    if (norm1 <= theta3)
      return detail::pade_small(A, pows, {120, 60, 12, 1});
    pows.push_back(A2 * A2);
    if (norm1 <= theta5)
      return detail::pade_small(A, pows, {30240, 15120, 3360, 420, 30, 1});
    pows.push_back(pows[2] * A2);
    if (norm1 <= theta7)
      return detail::pade_small(A, pows,
                                {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1});
    pows.push_back(pows[3] * A2);
    return detail::pade_small(A, pows,
                              {17643225600, 8821612800, 2075673600, 302702400, 30270240,
                               2162160, 110880, 3960, 90, 1});
  }

  int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const double scale_down = std::ldexp(1.0, -s);
  const CMatrix As = A * scale_down;
  const CMatrix B2 = As * As;
  const CMatrix B4 = B2 * B2;
  const CMatrix B6 = B4 * B2;
  static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
  CMatrix u = As * (B6 * (b[13] * B6 + b[11] * B4 + b[9] * B2) + b[7] * B6 + b[5] * B4 +
                    b[3] * B2 + b[1] * I);
  CMatrix v = B6 * (b[12] * B6 + b[10] * B4 + b[8] * B2) + b[6] * B6 + b[4] * B4 + b[2] * B2 +
              b[0] * I;
  CMatrix x = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < s; ++k) x = x * x;
  return x;
}

struct EigResult {
  CVector values;
  CMatrix vectors; // columns are right eigenvectors, unit norm
};

// Dense eigendecomposition with a residual guarantee: for every pair
// ||a v - lambda v||_2 <= 1e-9 * ||a||_F, else throws.
inline EigResult eig(const CMatrix& a) {
  require_square(a, "eig");
  require_finite(a, "eig");
  Eigen::ComplexEigenSolver<CMatrix> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eig: eigensolver failed to converge");
  EigResult r{solver.eigenvalues(), solver.eigenvectors()};
  const double bound = 1e-9 * a.norm();
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    const double res = (a * r.vectors.col(j) - r.values(j) * r.vectors.col(j)).norm();
    if (res > bound)
      throw std::runtime_error("eig: eigenpair residual " + std::to_string(res) +
                               " exceeds bound " + std::to_string(bound));
  }
  return r;
}

struct ProportionalityFit {
  complex constant{0.0, 0.0};
  double residual = 0.0;   // ||x - constant * target||_F
  bool trivially_zero = false;
};

// Least-squares fit of x ~ c * target. When ||x||_F is below
// tol * max(1, ||target||_F) the input counts as trivially zero and c = 0.
inline ProportionalityFit proportionality_fit(const CMatrix& x, const CMatrix& target,
                                              double tol = zero_tol) {
  if (x.rows() != target.rows() || x.cols() != target.cols())
    throw std::invalid_argument("proportionality_fit: shape mismatch");
  require_finite(x, "proportionality_fit");
  require_finite(target, "proportionality_fit");
  ProportionalityFit fit;
  const double xnorm = x.norm();
  const double tnorm = target.norm();
  if (xnorm <= tol * std::max(1.0, tnorm)) {
    fit.trivially_zero = true;
    fit.residual = xnorm;
    return fit;
  }
  if (tnorm <= tol)
    throw std::invalid_argument("proportionality_fit: target is numerically zero");
  fit.constant = frobenius_inner(target, x) / frobenius_inner(target, target);
  fit.residual = (x - fit.constant * target).norm();
  return fit;
}

// Classic fixed-step RK4 over [t0, t1]; deriv(t, y) -> dy/dt.
template <class Deriv>
CMatrix ode_propagate(Deriv&& deriv, const CMatrix& y0, double t0, double t1, int steps) {
  if (steps < 1) throw std::invalid_argument("ode_propagate: steps must be >= 1");
  require_finite(y0, "ode_propagate");
  const double h = (t1 - t0) / steps;
  CMatrix y = y0;
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    const CMatrix k1 = deriv(t, y);
    const CMatrix k2 = deriv(t + 0.5 * h, CMatrix(y + 0.5 * h * k1));
    const CMatrix k3 = deriv(t + 0.5 * h, CMatrix(y + 0.5 * h * k2));
    const CMatrix k4 = deriv(t + h, CMatrix(y + h * k3));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

} // namespace picheck
