#pragma once
// Deterministic random streams. The uniform/gaussian maps are hand-rolled so
// the draw sequence is identical across standard libraries (std::*_distribution
// implementations are not portable); mt19937_64 itself is fully specified.

#include <cstdint>
#include <numbers>

#include "picheck/numerics.hpp"

#include <random>

namespace picheck {

// Stream splitter: derive independent substream seeds from (seed, index) so
// per-check streams never depend on evaluation order or thread count.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(gen_() % span);
  }

  // Box-Muller; second variate cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform(); // (0, 1]: keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  complex cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return complex(re, im);
  }

  CMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cgaussian();
    return m;
  }

  CMatrix random_hermitian(Eigen::Index n) {
    CMatrix g = gaussian_matrix(n, n);
    return 0.5 * (g + g.adjoint());
  }

  // Haar-distributed unitary: QR of a Ginibre matrix with the R-diagonal
  // phase fix (plain QR is not phase-unique).
  CMatrix random_unitary(Eigen::Index n) {
    CMatrix g = gaussian_matrix(n, n);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
      const complex d = r(j, j);
      const double mag = std::abs(d);
      q.col(j) *= (mag > 0.0) ? d / mag : complex(1.0, 0.0);
    }
    return q;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Named substream: hash a label into the master seed so adding or reordering
// checks never shifts another check's draws.
inline Rng substream(std::uint64_t master_seed, std::uint64_t index) {
  return Rng(splitmix64(master_seed ^ splitmix64(index)));
}

} // namespace picheck
