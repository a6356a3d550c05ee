#pragma once
// Independent oracles used by the test suite. These deliberately avoid the
// code paths under test: plain Taylor series for the exponential, eigensolver
// reconstruction for normal matrices.

#include <picheck/numerics.hpp>

namespace oracles {

using picheck::CMatrix;
using picheck::complex;

// Plain Taylor series; accurate for ||a||_F <~ 2 well below 1e-13.
inline CMatrix taylor_expm(const CMatrix& a, int terms = 60) {
  CMatrix sum = CMatrix::Identity(a.rows(), a.cols());
  CMatrix term = sum;
  for (int k = 1; k <= terms; ++k) {
    term = (term * a) / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

// Taylor with pre-scaling and repeated squaring: valid at any moderate norm,
// independent of the Pade implementation under test.
inline CMatrix scaled_taylor_expm(const CMatrix& a) {
  int k = 0;
  double nrm = a.norm();
  while (nrm > 0.5) {
    nrm *= 0.5;
    ++k;
  }
  CMatrix x = taylor_expm(a * std::ldexp(1.0, -k));
  for (int i = 0; i < k; ++i) x = x * x;
  return x;
}

// exp(scale * h) for Hermitian h through the spectral decomposition; exact up
// to eigensolver accuracy at any norm.
inline CMatrix hermitian_expm(const CMatrix& h, complex scale) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    phases(i) = std::exp(scale * es.eigenvalues()(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace oracles
