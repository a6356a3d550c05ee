#pragma once
// Jump expansion of a dissipative channel. The generator splits as
// L(t) = l_eff + S(t) with l_eff = -i(H_eff (x) I - I (x) conj(H_eff)),
// H_eff = H - i/2 sum K^dag K, and S(t) = sum K(t) (x) conj(K(t)). The p-jump
// term W_p(t) is the time-ordered integral with p insertions of S; a path
// i -> r has order n when every W_k block through k = n acts proportionally
// to the family unitary and the block at n+1 visibly does not.

#include <cstdint>
#include <optional>

#include "picheck/superop.hpp"

namespace picheck {

// Zero floor for order classification. Structurally unreachable blocks come
// out as exact zeros of the arithmetic, while the smallest genuine high-order
// blocks at generic times sit many decades above this.
inline constexpr double pi_order_zero_floor = 1e-14;

struct DysonSplit {
  CMatrix h;      // interaction Hamiltonian (composite, Hermitian)
  CMatrix l_eff;  // drift superoperator (constant by construction)
  bool s_constant = false;
  CMatrix s0;     // S(0)
  std::vector<Jump> jumps;
  std::optional<DiagonalFrame> frame;

  CMatrix s_at(double t) const {
    if (s_constant) return s0;
    CMatrix s = CMatrix::Zero(s0.rows(), s0.cols());
    const DiagonalFrame* f = frame ? &*frame : nullptr;
    for (const Jump& j : jumps) {
      const CMatrix k = jump_at(j, f, t);
      s += kron(k, k.conjugate());
    }
    return s;
  }
};

// || l_eff + S(t) - L(t) || for the full Lindblad generator at time t.
inline double split_reconstruction_residual(const DysonSplit& split, double t) {
  const DiagonalFrame* f = split.frame ? &*split.frame : nullptr;
  std::vector<CMatrix> ks;
  ks.reserve(split.jumps.size());
  for (const Jump& j : split.jumps) ks.push_back(jump_at(j, f, t));
  return (split.l_eff + split.s_at(t) - liouvillian(split.h, ks)).norm();
}

// Build the effective/jump split. Requires sum_j K_j(t)^dag K_j(t) constant in
// t (otherwise the drift itself would be time-dependent); detects whether
// S(t) is constant by probing incommensurate fractions of the horizon.
inline DysonSplit split(const CMatrix& h, const std::vector<Jump>& jumps,
                        const std::optional<DiagonalFrame>& frame, double horizon) {
  require_square(h, "split");
  require_finite(h, "split");
  require_superop_dims(static_cast<int>(h.rows()), "split");
  if (horizon <= 0.0) throw std::invalid_argument("split: horizon must be positive");
  if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm()))
    throw std::invalid_argument("split: Hamiltonian must be Hermitian");
  const Eigen::Index d = h.rows();
  const DiagonalFrame* f = frame ? &*frame : nullptr;
  for (const Jump& j : jumps) {
    if (j.op.rows() != d || j.op.cols() != d)
      throw std::invalid_argument("split: jump operator has wrong shape");
    if (j.frame_conjugated && f == nullptr)
      throw std::invalid_argument("split: frame-conjugated jump without a frame");
  }

  auto m_at = [&](double t) {
    CMatrix m = CMatrix::Zero(d, d);
    for (const Jump& j : jumps) {
      const CMatrix k = jump_at(j, f, t);
      m += k.adjoint() * k;
    }
    return m;
  };
  const CMatrix m0 = m_at(0.0);
  for (double frac : {0.37, 0.81}) {
    const double res = (m_at(frac * horizon) - m0).norm();
    if (res > 1e-10 * std::max(1.0, m0.norm()))
      throw std::invalid_argument(
          "split: sum K^dag K varies with time (residual " + std::to_string(res) +
          "); the drift would not be constant");
  }

  DysonSplit out;
  out.h = h;
  out.jumps = jumps;
  out.frame = frame;
  const CMatrix eye = CMatrix::Identity(d, d);
  const CMatrix h_eff = h - complex(0, 0.5) * m0;
  out.l_eff = complex(0, -1) * (kron(h_eff, eye) - kron(eye, h_eff.adjoint().transpose()));

  out.s_constant = true;
  out.s0 = CMatrix::Zero(d * d, d * d);
  for (const Jump& j : jumps) {
    const CMatrix k = jump_at(j, f, 0.0);
    out.s0 += kron(k, k.conjugate());
  }
  for (double frac : {0.37, 0.5, 0.81, 1.0}) {
    CMatrix s = CMatrix::Zero(d * d, d * d);
    for (const Jump& j : jumps) {
      const CMatrix k = jump_at(j, f, frac * horizon);
      s += kron(k, k.conjugate());
    }
    if ((s - out.s0).norm() > 1e-12 * std::max(1.0, out.s0.norm())) {
      out.s_constant = false;
      break;
    }
  }
  return out;
}

// W_0 .. W_pmax at time t for a constant S, via the block-bidiagonal
// augmented generator: exp(C t) with C having l_eff on the diagonal and S on
// the superdiagonal carries W_p in the top block row, column p.
inline std::vector<CMatrix> dyson_terms_constant(const DysonSplit& split, double t, int pmax) {
  if (!split.s_constant)
    throw std::invalid_argument(
        "dyson_terms_constant: S(t) is time-dependent, use dyson_terms_timedep");
  if (pmax < 0 || pmax > 64) throw std::invalid_argument("dyson_terms_constant: bad pmax");
  const Eigen::Index n = split.l_eff.rows();
  const Eigen::Index big = (pmax + 1) * n;
  CMatrix c = CMatrix::Zero(big, big);
  for (int p = 0; p <= pmax; ++p) {
    c.block(p * n, p * n, n, n) = split.l_eff;
    if (p < pmax) c.block(p * n, (p + 1) * n, n, n) = split.s0;
  }
  const CMatrix e = expm(c, t);
  std::vector<CMatrix> terms;
  terms.reserve(pmax + 1);
  for (int p = 0; p <= pmax; ++p) terms.push_back(e.block(0, p * n, n, n));
  return terms;
}

// Same terms through the coupled hierarchy dG_p/dt = l_eff G_p + S(t) G_{p-1},
// integrated with fixed-step RK4. Works for constant S too (cross-validation).
inline std::vector<CMatrix> dyson_terms_timedep(const DysonSplit& split, double t, int pmax,
                                                int steps = 2000) {
  if (pmax < 0 || pmax > 64) throw std::invalid_argument("dyson_terms_timedep: bad pmax");
  if (steps < 1) throw std::invalid_argument("dyson_terms_timedep: steps must be >= 1");
  const Eigen::Index n = split.l_eff.rows();
  std::vector<CMatrix> g(pmax + 1, CMatrix::Zero(n, n));
  g[0] = CMatrix::Identity(n, n);

  auto deriv = [&](double s, const std::vector<CMatrix>& y) {
    std::vector<CMatrix> d(pmax + 1);
    const CMatrix smat = split.s_at(s);
    d[0] = split.l_eff * y[0];
    for (int p = 1; p <= pmax; ++p) d[p] = split.l_eff * y[p] + smat * y[p - 1];
    return d;
  };
  auto axpy = [&](const std::vector<CMatrix>& y, double a, const std::vector<CMatrix>& k) {
    std::vector<CMatrix> out(pmax + 1);
    for (int p = 0; p <= pmax; ++p) out[p] = y[p] + a * k[p];
    return out;
  };

  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const double s = i * h;
    const auto k1 = deriv(s, g);
    const auto k2 = deriv(s + 0.5 * h, axpy(g, 0.5 * h, k1));
    const auto k3 = deriv(s + 0.5 * h, axpy(g, 0.5 * h, k2));
    const auto k4 = deriv(s + h, axpy(g, h, k3));
    for (int p = 0; p <= pmax; ++p)
      g[p] += (h / 6.0) * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
  }
  return g;
}

// Route to the closed-form path when S is constant, the hierarchy otherwise.
inline std::vector<CMatrix> dyson_terms(const DysonSplit& split, double t, int pmax,
                                        int steps = 2000) {
  return split.s_constant ? dyson_terms_constant(split, t, pmax)
                          : dyson_terms_timedep(split, t, pmax, steps);
}

enum class PiVerdict { order, exact, unreachable, gray_zone };

inline const char* to_string(PiVerdict v) {
  switch (v) {
    case PiVerdict::order: return "ORDER";
    case PiVerdict::exact: return "EXACT";
    case PiVerdict::unreachable: return "UNREACHABLE";
    case PiVerdict::gray_zone: return "GRAY_ZONE";
  }
  return "?";
}

struct PiOrderEntry {
  PiVerdict verdict = PiVerdict::gray_zone;
  int order = -1;                  // meaningful when verdict == order
  double time = 0.0;
  std::vector<double> residuals;   // per k: fit residual / ||block_k||, 0 if zero
  std::vector<complex> constants;  // fitted c_k
  std::vector<bool> zero_blocks;
  std::string note;
};

namespace detail {

// Verdict from filled residuals/zero_blocks: all-zero is unreachable, a clean
// jump past fail_tol fixes the order, anything between the thresholds is a
// gray zone, and passing everywhere through pmax is exact.
inline void classify_fits(PiOrderEntry& entry, double pass_tol, double fail_tol) {
  if (!(pass_tol < fail_tol))
    throw std::invalid_argument("pi order classification: need pass_tol < fail_tol");
  bool all_zero = true;
  for (bool z : entry.zero_blocks) all_zero = all_zero && z;
  if (all_zero) {
    entry.verdict = PiVerdict::unreachable;
    return;
  }
  for (std::size_t k = 0; k < entry.residuals.size(); ++k) {
    if (entry.residuals[k] <= pass_tol) continue;
    if (entry.residuals[k] >= fail_tol) {
      entry.verdict = PiVerdict::order;
      entry.order = static_cast<int>(k) - 1;
      return;
    }
    entry.verdict = PiVerdict::gray_zone;
    entry.note = "residual at k=" + std::to_string(k) + " between pass and fail thresholds";
    return;
  }
  entry.verdict = PiVerdict::exact;
}

} // namespace detail

// Classify one path at one time from precomputed terms. Residuals are
// relative to the block's own norm: a passing block is proportional to the
// target up to integrator roundoff regardless of its magnitude, while the
// first failing block carries an O(1) misfit fraction.
inline PiOrderEntry classify_path(const std::vector<CMatrix>& terms, const Family& family,
                                  int i, int r, double t, double pass_tol, double fail_tol) {
  const int d_A = family.dim_ancilla(), d_B = family.dim_central();
  const CMatrix u = family.unitary(r, i);
  const CMatrix target = kron(u, u.conjugate());
  PiOrderEntry entry;
  entry.time = t;
  for (const CMatrix& term : terms) {
    const CMatrix block = central_superop_block(term, d_A, d_B, i, r);
    const ProportionalityFit fit = proportionality_fit(block, target, pi_order_zero_floor);
    entry.constants.push_back(fit.constant);
    entry.zero_blocks.push_back(fit.trivially_zero);
    entry.residuals.push_back(fit.trivially_zero ? 0.0 : fit.residual / block.norm());
  }
  detail::classify_fits(entry, pass_tol, fail_tol);
  return entry;
}

struct PiOrderReport {
  PiVerdict verdict = PiVerdict::gray_zone;
  int order = -1;
  std::vector<PiOrderEntry> entries; // one per evaluation time
  std::string note;
};

namespace detail {

// Combine per-time entries; any disagreement demotes the result to gray zone.
inline void combine_entries(PiOrderReport& report) {
  report.verdict = report.entries.front().verdict;
  report.order = report.entries.front().order;
  for (const PiOrderEntry& e : report.entries) {
    if (e.verdict != report.verdict || e.order != report.order) {
      report.verdict = PiVerdict::gray_zone;
      report.order = -1;
      report.note = "verdicts disagree across evaluation times";
      return;
    }
    if (e.verdict == PiVerdict::gray_zone && report.note.empty()) report.note = e.note;
  }
}

} // namespace detail

// Generic evaluation times in [0.3 T, T], drawn from a dedicated substream so
// results do not depend on check ordering.
inline std::vector<double> generic_times(double horizon, int count, std::uint64_t seed,
                                         std::uint64_t stream) {
  Rng rng = substream(seed, stream);
  std::vector<double> times;
  for (int i = 0; i < count; ++i) times.push_back(horizon * (0.3 + 0.7 * rng.uniform()));
  return times;
}

// Order of a path across several generic times; the per-time verdicts must
// agree or the result is a gray zone.
inline PiOrderReport pi_order(const DysonSplit& split, const Family& family, int i, int r,
                              const std::vector<double>& times, int pmax, double pass_tol,
                              double fail_tol, int steps = 2000) {
  if (times.empty()) throw std::invalid_argument("pi_order: need at least one time");
  PiOrderReport report;
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("pi_order: times must be positive");
    const std::vector<CMatrix> terms = dyson_terms(split, t, pmax, steps);
    report.entries.push_back(classify_path(terms, family, i, r, t, pass_tol, fail_tol));
  }
  detail::combine_entries(report);
  return report;
}

// Lab-frame version: dress each term with R(t) (x) conj(R(t)) and fit against
// the dressed target (R_r U(r,i)). Unitary invariance of the fit makes the
// residuals identical to the interaction-picture ones; this recomputes them
// from the dressed data as a consistency path.
inline PiOrderReport schrodinger_pi_order(const DysonSplit& split, const Family& family,
                                          const DiagonalFrame& frame, int i, int r,
                                          const std::vector<double>& times, int pmax,
                                          double pass_tol, double fail_tol, int steps = 2000) {
  if (times.empty()) throw std::invalid_argument("schrodinger_pi_order: need times");
  const int d_A = family.dim_ancilla(), d_B = family.dim_central();
  PiOrderReport report;
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("schrodinger_pi_order: times must be positive");
    const std::vector<CMatrix> terms = dyson_terms(split, t, pmax, steps);
    const CMatrix rot = frame.rotor(r, t);
    const CMatrix dress = kron(rot, rot.conjugate());
    const CMatrix u_lab = rot * family.unitary(r, i);
    const CMatrix target = kron(u_lab, u_lab.conjugate());

    PiOrderEntry entry;
    entry.time = t;
    for (const CMatrix& w : terms) {
      const CMatrix block = dress * central_superop_block(w, d_A, d_B, i, r);
      const ProportionalityFit fit = proportionality_fit(block, target, pi_order_zero_floor);
      entry.constants.push_back(fit.constant);
      entry.zero_blocks.push_back(fit.trivially_zero);
      entry.residuals.push_back(fit.trivially_zero ? 0.0 : fit.residual / block.norm());
    }
    detail::classify_fits(entry, pass_tol, fail_tol);
    report.entries.push_back(std::move(entry));
  }
  detail::combine_entries(report);
  return report;
}

} // namespace picheck
