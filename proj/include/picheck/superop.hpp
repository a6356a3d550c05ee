#pragma once
// Liouville-space layer. Density operators are row-stacked: vec(x rho y) =
// (x (x) y^T) vec(rho). Superoperator basis elements over a family multiply
// like matrix units on ancilla index pairs, superprojectors cut out
// ancilla-conditioned blocks, and the exact gate criterion reduces to algebra
// membership of the Hamiltonian and every jump operator.

#include <optional>

#include "picheck/algebra.hpp"
#include "picheck/numerics.hpp"
#include "picheck/propagation.hpp"
#include "picheck/random.hpp"

namespace picheck {

// Superoperators get dense (d_A d_B)^2 storage; keep composite dims modest.
inline constexpr int max_superop_composite_dim = 16;

inline void require_superop_dims(int composite_dim, const char* who) {
  if (composite_dim > max_superop_composite_dim)
    throw std::invalid_argument(std::string(who) + ": composite dimension " +
                                std::to_string(composite_dim) + " exceeds superoperator cap " +
                                std::to_string(max_superop_composite_dim));
}

inline CVector vec(const CMatrix& m) {
  CVector v(m.rows() * m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

inline CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("unvec: size mismatch");
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v(i * cols + j);
  return m;
}

// Superoperator of rho -> x rho y, acting on operands with rows(rho) =
// cols(x) and cols(rho) = rows(y).
inline CMatrix left_right_superop(const CMatrix& x, const CMatrix& y) {
  return kron(x, y.transpose());
}

// Superoperator basis element over the family, indexed by two ancilla pairs:
// rho -> base(m,p) rho base(q,n). These satisfy the matrix-unit law
// B(m,n,p,q) B(r,s,t,v) = delta_pr delta_qs B(m,n,t,v).
inline CMatrix hs_base(const Family& family, int m, int n, int p, int q) {
  require_superop_dims(family.composite_dim(), "hs_base");
  return left_right_superop(family.basis_element(m, p), family.basis_element(q, n));
}

// One instance of the matrix-unit multiplication law.
inline bool hs_basis_mult_check(const Family& family, int m, int n, int p, int q, int r, int s,
                                int t, int v, double tol = eq_tol) {
  const CMatrix product = hs_base(family, m, n, p, q) * hs_base(family, r, s, t, v);
  const double kron_delta = (p == r && q == s) ? 1.0 : 0.0;
  return (product - kron_delta * hs_base(family, m, n, t, v)).norm() <= tol;
}

// Realize a coefficient matrix over the superoperator basis. `eta` is indexed
// by flattened ancilla pairs a = (m-1) d_A + (n-1) against b = (p-1) d_A + (q-1).
inline CMatrix hs_realize(const Family& family, const CMatrix& eta) {
  const int d_A = family.dim_ancilla();
  require_superop_dims(family.composite_dim(), "hs_realize");
  if (eta.rows() != d_A * d_A || eta.cols() != d_A * d_A)
    throw std::invalid_argument("hs_realize: coefficient matrix must be d_A^2 x d_A^2");
  require_finite(eta, "hs_realize");
  const int dim = family.composite_dim() * family.composite_dim();
  CMatrix out = CMatrix::Zero(dim, dim);
  for (int m = 1; m <= d_A; ++m)
    for (int n = 1; n <= d_A; ++n)
      for (int p = 1; p <= d_A; ++p)
        for (int q = 1; q <= d_A; ++q) {
          const complex c = eta((m - 1) * d_A + (n - 1), (p - 1) * d_A + (q - 1));
          if (c == complex(0.0, 0.0)) continue;
          out += c * hs_base(family, m, n, p, q);
        }
  return out;
}

// Lindblad generator in row-stacked convention:
// L = -i (H (x) I - I (x) H^T) + sum_j [ K (x) conj(K)
//        - 1/2 (K^dag K) (x) I - 1/2 I (x) (K^dag K)^T ].
inline CMatrix liouvillian(const CMatrix& h, const std::vector<CMatrix>& jumps) {
  require_square(h, "liouvillian");
  require_finite(h, "liouvillian");
  require_superop_dims(static_cast<int>(h.rows()), "liouvillian");
  if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm()))
    throw std::invalid_argument("liouvillian: Hamiltonian must be Hermitian");
  const Eigen::Index d = h.rows();
  const CMatrix eye = CMatrix::Identity(d, d);
  CMatrix l = complex(0, -1) * (kron(h, eye) - kron(eye, h.transpose()));
  for (const CMatrix& k : jumps) {
    if (k.rows() != d || k.cols() != d)
      throw std::invalid_argument("liouvillian: jump operator has wrong shape");
    require_finite(k, "liouvillian");
    const CMatrix kdk = k.adjoint() * k;
    l += kron(k, k.conjugate()) -
         0.5 * (kron(kdk, eye) + kron(eye, kdk.transpose()));
  }
  return l;
}

// P_i (x) P_i for the ancilla-level projector P_i = |i><i| (x) I_B; cuts a
// superoperator down to the i-th ancilla column/row sector.
inline CMatrix superprojector(int i, int d_A, int d_B) {
  require_superop_dims(d_A * d_B, "superprojector");
  if (i < 1 || i > d_A) throw std::invalid_argument("superprojector: level out of range");
  const int d = d_A * d_B;
  CMatrix p = CMatrix::Zero(d, d);
  p.block((i - 1) * d_B, (i - 1) * d_B, d_B, d_B) = CMatrix::Identity(d_B, d_B);
  return kron(p, p);
}

// The d_B^2 x d_B^2 central-space block of a composite superoperator for the
// ancilla transition i -> r: row (j,k) of the block is superoperator row
// ((r-1) d_B + j) * d + (r-1) d_B + k, and likewise columns with i.
inline CMatrix central_superop_block(const CMatrix& w_hat, int d_A, int d_B, int i, int r) {
  const int d = d_A * d_B;
  if (w_hat.rows() != d * d || w_hat.cols() != d * d)
    throw std::invalid_argument("central_superop_block: superoperator has wrong shape");
  if (i < 1 || i > d_A || r < 1 || r > d_A)
    throw std::invalid_argument("central_superop_block: level out of range");
  CMatrix block(d_B * d_B, d_B * d_B);
  for (int j = 0; j < d_B; ++j)
    for (int k = 0; k < d_B; ++k)
      for (int j2 = 0; j2 < d_B; ++j2)
        for (int k2 = 0; k2 < d_B; ++k2)
          block(j * d_B + k, j2 * d_B + k2) =
              w_hat(((r - 1) * d_B + j) * d + (r - 1) * d_B + k,
                    ((i - 1) * d_B + j2) * d + (i - 1) * d_B + k2);
  return block;
}

struct PiGateReport {
  ProportionalityFit fit;        // block against U(r,i) (x) conj(U(r,i))
  double channel_unitarity = 0.0; // || Q Q^dag - I || for Q = block / constant
};

// Gate condition on a full channel: the i -> r central block must act as the
// family unitary's conjugation, block = c * U(r,i) (x) conj(U(r,i)).
inline PiGateReport pi_gate_condition(const CMatrix& w_hat, const Family& family, int i, int r,
                                      double tol = zero_tol) {
  require_superop_dims(family.composite_dim(), "pi_gate_condition");
  const CMatrix block =
      central_superop_block(w_hat, family.dim_ancilla(), family.dim_central(), i, r);
  const CMatrix u = family.unitary(r, i);
  PiGateReport report;
  report.fit = proportionality_fit(block, kron(u, u.conjugate()), tol);
  if (!report.fit.trivially_zero) {
    const CMatrix q = block / report.fit.constant;
    report.channel_unitarity =
        (q * q.adjoint() - CMatrix::Identity(q.rows(), q.cols())).norm();
  }
  return report;
}

// Full-channel propagator exp(T[ integral L(t) dt ]). Constant generators use
// the exponential; a genuinely time-dependent generator is integrated with
// fixed-step RK4.
inline CMatrix channel_propagator(const CMatrix& h, const std::vector<Jump>& jumps,
                                  const DiagonalFrame* frame, double t, int steps = 800) {
  require_superop_dims(static_cast<int>(h.rows()), "channel_propagator");
  auto l_at = [&](double s) {
    std::vector<CMatrix> ks;
    ks.reserve(jumps.size());
    for (const Jump& j : jumps) ks.push_back(jump_at(j, frame, s));
    return liouvillian(h, ks);
  };
  const CMatrix l0 = l_at(0.0);
  const bool constant =
      (l_at(0.5 * t) - l0).norm() <= 1e-12 * std::max(1.0, l0.norm()) &&
      (l_at(0.37 * t) - l0).norm() <= 1e-12 * std::max(1.0, l0.norm());
  if (constant) return expm(l0, t);
  return ode_propagate([&](double s, const CMatrix& w) { return CMatrix(l_at(s) * w); },
                       CMatrix(CMatrix::Identity(l0.rows(), l0.cols())), 0.0, t, steps);
}

struct Witness {
  std::string label;    // which generator failed membership
  double residual = 0.0;
  double time = 0.0;    // sample time for scheduled jumps
};

struct Theorem1Report {
  bool exact_pi = false;
  Graph extended;                 // self-adjoint extension actually tested against
  std::vector<Witness> witnesses; // failing generators; empty iff exact_pi
  bool spot_check_ok = true;      // gate condition sampled at random times
  double spot_check_worst = 0.0;  // worst relative block residual seen
};

// Exact gate criterion: the channel is path-independent for all times iff the
// Hamiltonian and every jump operator (at every time) lie in the self-adjoint
// extension of the interaction graph. When they do, the gate condition is
// spot-checked on the full channel at three random times in (0, 2T].
inline Theorem1Report theorem1_check(const Family& family, const Graph& graph,
                                     const CMatrix& h_int, const std::vector<Jump>& jumps,
                                     const DiagonalFrame* frame, double horizon,
                                     std::uint64_t seed = 0, double tol = eq_tol) {
  require_superop_dims(family.composite_dim(), "theorem1_check");
  if (horizon <= 0.0) throw std::invalid_argument("theorem1_check: horizon must be positive");
  Theorem1Report report;
  report.extended = self_adjoint_extension(family.dim_ancilla(), graph);

  auto probe = [&](const CMatrix& op, const std::string& label, double time) {
    const MembershipReport mem = membership(family, op, report.extended, tol);
    if (!mem.member) report.witnesses.push_back({label, mem.residual, time});
  };
  probe(h_int, "hamiltonian", 0.0);
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    const std::string label = "jump " + std::to_string(j + 1);
    if (jumps[j].frame_conjugated && frame != nullptr) {
      for (int s = 0; s <= 4; ++s) {
        const double t = horizon * s / 4.0;
        probe(jump_at(jumps[j], frame, t), label, t);
      }
    } else {
      probe(jump_at(jumps[j], frame, 0.0), label, 0.0);
    }
  }
  report.exact_pi = report.witnesses.empty();
  if (!report.exact_pi) return report;

  Rng rng = substream(seed, 0x7e01);
  for (int probe_idx = 0; probe_idx < 3; ++probe_idx) {
    const double t = 2.0 * horizon * (1.0 - rng.uniform()); // in (0, 2T]
    const CMatrix w_hat = channel_propagator(h_int, jumps, frame, t);
    for (int i = 1; i <= family.dim_ancilla(); ++i)
      for (int r = 1; r <= family.dim_ancilla(); ++r) {
        const PiGateReport gate = pi_gate_condition(w_hat, family, i, r);
        if (gate.fit.trivially_zero) continue;
        const double sine =
            gate.fit.residual /
            central_superop_block(w_hat, family.dim_ancilla(), family.dim_central(), i, r)
                .norm();
        report.spot_check_worst = std::max(report.spot_check_worst, sine);
      }
  }
  report.spot_check_ok = report.spot_check_worst <= 1e-8;
  return report;
}

struct Lemma3Report {
  bool multiplicity_ok = false;      // every coefficient eigenvalue, d_B^2-fold
  double max_value_gap = 0.0;        // worst eigenvalue match distance
  double conjugation_residual = 0.0; // || hs_realize(eta) - U_hat plain U_hat^dag ||
  bool ok(double tol) const { return multiplicity_ok && conjugation_residual <= tol; }
};

// The realized superoperator is unitarily equivalent to the identity-family
// realization via U_hat = U_AB (x) conj(U_AB), so its spectrum is the
// coefficient matrix spectrum with multiplicity d_B^2.
inline Lemma3Report lemma3_verify(const Family& family, const CMatrix& eta, double tol = 1e-7) {
  const int d_A = family.dim_ancilla(), d_B = family.dim_central();
  require_superop_dims(family.composite_dim(), "lemma3_verify");
  Lemma3Report report;

  const CMatrix big = hs_realize(family, eta);
  const CMatrix plain = hs_realize(Family::identity(d_A, d_B), eta);
  const CMatrix u_ab = dressing_unitary(family);
  const CMatrix u_hat = kron(u_ab, u_ab.conjugate());
  report.conjugation_residual = (big - u_hat * plain * u_hat.adjoint()).norm();

  const EigResult small = eig(eta);
  const EigResult full = eig(big);
  std::vector<int> counts(small.values.size(), 0);
  report.multiplicity_ok = true;
  for (Eigen::Index j = 0; j < full.values.size(); ++j) {
    Eigen::Index best = 0;
    double best_gap = std::abs(full.values(j) - small.values(0));
    for (Eigen::Index a = 1; a < small.values.size(); ++a) {
      const double gap = std::abs(full.values(j) - small.values(a));
      if (gap < best_gap) {
        best_gap = gap;
        best = a;
      }
    }
    report.max_value_gap = std::max(report.max_value_gap, best_gap);
    if (best_gap > tol) report.multiplicity_ok = false;
    ++counts[best];
  }
  // With coefficient eigenvalues closer than tol the per-value counts can
  // alias; tolerate only exact d_B^2 multiplicities for well-separated input.
  for (int c : counts)
    if (c != d_B * d_B) report.multiplicity_ok = false;
  return report;
}

} // namespace picheck
