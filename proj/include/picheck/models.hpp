#pragma once

// Built-in composite-system models: the error-transparent gate family and the
// cavity SNAP gate driven through an ancilla, plus the error-transparency and
// noiseless-ancilla-subspace diagnostics they rest on.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "picheck/algebra.hpp"
#include "picheck/numerics.hpp"
#include "picheck/propagation.hpp"

namespace picheck {

// A ready-to-check open-system model: design algebra (family over a graph),
// interaction-picture Hamiltonian, dissipative channels, the ancilla-
// conditioned frame the channels live in, and the gate horizon.
struct Model {
  Family family;
  Graph graph;
  CMatrix h_int;
  std::vector<Jump> jumps;
  std::optional<DiagonalFrame> frame;
  double horizon;
};

// |m><n| (x) central, on a d_A x d_B composite space. 1-based levels.
inline CMatrix level_transfer(int d_A, int d_B, int m, int n, const CMatrix& central) {
  require_edge_range({{m, n}}, d_A, "level_transfer");
  if (central.rows() != d_B || central.cols() != d_B)
    throw std::invalid_argument("level_transfer: central block is not d_B x d_B");
  CMatrix out = CMatrix::Zero(d_A * d_B, d_A * d_B);
  out.block((m - 1) * d_B, (n - 1) * d_B, d_B, d_B) = central;
  return out;
}

namespace detail {

inline void require_level_hams(const std::vector<CMatrix>& level_hams, const char* who) {
  if (level_hams.empty()) throw std::invalid_argument(std::string(who) + ": empty level list");
  const int d = static_cast<int>(level_hams.front().rows());
  for (const CMatrix& h : level_hams) {
    require_square(h, who);
    if (h.rows() != d) throw std::invalid_argument(std::string(who) + ": mixed central dims");
    if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm()))
      throw std::invalid_argument(std::string(who) + ": level Hamiltonian not Hermitian");
  }
}

// Shift lambda making H_m - H_n - lambda*I as small as possible, and the
// Frobenius norm of what remains. Hermitian inputs make lambda real.
inline std::pair<double, double> identity_shift_fit(const CMatrix& hm, const CMatrix& hn) {
  const CMatrix diff = hm - hn;
  const double lambda = diff.trace().real() / static_cast<double>(diff.rows());
  const double deviation =
      (diff - lambda * CMatrix::Identity(diff.rows(), diff.cols())).norm();
  return {lambda, deviation};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Error-transparency diagnostic: error i (a downward jump from level 1 to
// level i carrying the identity) commutes with the drift up to a scalar
// exactly when H_1 - H_i is proportional to the identity.

struct EtConditionEntry {
  int level = 0;      // i in [2, d_A]
  double lambda = 0;  // fitted shift: trace(H_1 - H_i) / d_B
  double deviation = 0; // ||H_1 - H_i - lambda*I||_F
  bool transparent = false;
};

inline std::vector<EtConditionEntry> et_condition_check(const std::vector<CMatrix>& level_hams,
                                                        double tol = eq_tol) {
  detail::require_level_hams(level_hams, "et_condition_check");
  std::vector<EtConditionEntry> out;
  for (int i = 2; i <= static_cast<int>(level_hams.size()); ++i) {
    const auto [lambda, deviation] =
        detail::identity_shift_fit(level_hams[0], level_hams[i - 1]);
    out.push_back({i, lambda, deviation, deviation <= tol});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Noiseless-ancilla-subspace partition: levels m, n land in one class when
// H_m - H_n is proportional to the identity within tol. The relation is
// exactly transitive for exact proportionality; union-find absorbs the
// tolerance slop, and worst_in_class reports the largest in-class deviation.

struct NasReport {
  std::vector<std::vector<int>> classes; // 1-based, ascending, ordered by first member
  double worst_in_class = 0.0;
};

inline NasReport nas_check(const std::vector<CMatrix>& level_hams, double tol = eq_tol) {
  detail::require_level_hams(level_hams, "nas_check");
  const int n = static_cast<int>(level_hams.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  const auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (detail::identity_shift_fit(level_hams[i], level_hams[j]).second <= tol)
        parent[find(j)] = find(i);

  NasReport report;
  std::vector<std::vector<int>> buckets(n);
  for (int i = 0; i < n; ++i) buckets[find(i)].push_back(i + 1);
  for (auto& bucket : buckets)
    if (!bucket.empty()) report.classes.push_back(std::move(bucket));
  for (const auto& cls : report.classes)
    for (std::size_t a = 0; a < cls.size(); ++a)
      for (std::size_t b = a + 1; b < cls.size(); ++b)
        report.worst_in_class = std::max(
            report.worst_in_class,
            detail::identity_shift_fit(level_hams[cls[a] - 1], level_hams[cls[b] - 1]).second);
  return report;
}

// ---------------------------------------------------------------------------
// Error-transparent gate model: zero interaction Hamiltonian, errors
// K_i = sqrt(gamma_i) |i><1| (x) I for i in [2, d_A], identity family over
// loops + the (i,1) edges. Transparent errors are emitted time-independent
// (the residual scalar phase cancels in the dissipator); a non-transparent
// error keeps its frame conjugation K_i(t) = R_i(t)^dag K_i R_1(t) so the
// breakage is visible to every downstream check.

struct EtSpec {
  int d_A = 3;
  int d_B = 2;
  // Per-level drift Hamiltonians, size d_A. Empty selects the built-in
  // defaults: H_1 = 0.5*diag(0..d_B-1), H_2 = H_1, H_3 = H_1 - 0.25*I,
  // H_m = H_1 beyond that (all transparent).
  std::vector<CMatrix> level_hams{};
  // Rates gamma_i for i = 2..d_A (index 0 <-> i = 2). Empty: 0.02 each.
  std::vector<double> gammas{};
  double horizon = std::numbers::pi;
};

inline std::vector<CMatrix> et_default_level_hams(int d_A, int d_B) {
  CMatrix h1 = CMatrix::Zero(d_B, d_B);
  for (int j = 0; j < d_B; ++j) h1(j, j) = 0.5 * j;
  std::vector<CMatrix> hams(d_A, h1);
  if (d_A >= 3) hams[2] = h1 - 0.25 * CMatrix::Identity(d_B, d_B);
  return hams;
}

inline Model et_model(const EtSpec& spec = {}) {
  if (spec.d_A < 2) throw std::invalid_argument("et_model: d_A < 2");
  if (spec.d_B < 1) throw std::invalid_argument("et_model: d_B < 1");
  if (!(spec.horizon > 0)) throw std::invalid_argument("et_model: horizon must be positive");
  std::vector<CMatrix> hams =
      spec.level_hams.empty() ? et_default_level_hams(spec.d_A, spec.d_B) : spec.level_hams;
  if (static_cast<int>(hams.size()) != spec.d_A)
    throw std::invalid_argument("et_model: level_hams must list one Hamiltonian per level");
  detail::require_level_hams(hams, "et_model");
  if (hams.front().rows() != spec.d_B)
    throw std::invalid_argument("et_model: level Hamiltonians must be d_B x d_B");
  std::vector<double> gammas =
      spec.gammas.empty() ? std::vector<double>(spec.d_A - 1, 0.02) : spec.gammas;
  if (static_cast<int>(gammas.size()) != spec.d_A - 1)
    throw std::invalid_argument("et_model: gammas must list one rate per level 2..d_A");
  for (double g : gammas)
    if (!(g >= 0)) throw std::invalid_argument("et_model: negative rate");

  Graph graph = loops(spec.d_A);
  const std::vector<EtConditionEntry> condition = et_condition_check(hams);
  std::vector<Jump> jumps;
  const CMatrix eye = CMatrix::Identity(spec.d_B, spec.d_B);
  for (int i = 2; i <= spec.d_A; ++i) {
    graph.insert({i, 1});
    graph.insert({1, i});
    const double gamma = gammas[i - 2];
    if (gamma == 0.0) continue;
    jumps.push_back({std::sqrt(gamma) * level_transfer(spec.d_A, spec.d_B, i, 1, eye),
                     !condition[i - 2].transparent});
  }

  return Model{Family::identity(spec.d_A, spec.d_B), std::move(graph),
               CMatrix::Zero(spec.d_A * spec.d_B, spec.d_A * spec.d_B), std::move(jumps),
               DiagonalFrame::constant(std::move(hams), spec.horizon), spec.horizon};
}

// ---------------------------------------------------------------------------
// SNAP gate model: an ancilla drive Omega(|1><d_A| (x) U + h.c.) with
// U = diag(e^{i phi_0}, ...) on an N-dimensional central truncation.
// Level 1 carries the dispersive shift H_1; levels 2..d_A share H_2, forming
// a noiseless ancilla subspace, so relaxation within them and all dephasing
// are transparent. The 2->1 relaxation carries the identity where the family
// expects U, which is what limits the gate to a finite order.

struct SnapSpec {
  int d_A = 4;
  int cavity_dim = 2; // central truncation N (d_B = N)
  // Phases phi_0..phi_{N-1}. Empty selects phi_k = k*pi/2.
  std::vector<double> phases{};
  double omega = 1.0;
  // Central Hamiltonian on level 1 / on levels 2..d_A. Empty selects
  // H_1 = 0.5*diag(0..N-1) and H_2 = 0.
  std::optional<CMatrix> h1{};
  std::optional<CMatrix> h2{};
  // Dephasing rates kappa_m, m = 1..d_A. Empty: 0.02 each.
  std::vector<double> dephase{};
  // Relaxation rates gamma_m for the jump m -> m-1, m = 2..d_A
  // (index 0 <-> m = 2). Empty: 0.02 each.
  std::vector<double> relax{};
  double horizon = -1.0; // <= 0 selects pi / (2*omega)
};

inline CMatrix snap_unitary(const std::vector<double>& phases) {
  if (phases.empty()) throw std::invalid_argument("snap_unitary: empty phase list");
  CMatrix u = CMatrix::Zero(phases.size(), phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k)
    u(k, k) = std::exp(complex(0.0, phases[k]));
  return u;
}

inline Model snap_model(const SnapSpec& spec = {}) {
  if (spec.d_A < 2) throw std::invalid_argument("snap_model: d_A < 2");
  if (spec.cavity_dim < 1) throw std::invalid_argument("snap_model: cavity_dim < 1");
  if (!(spec.omega > 0)) throw std::invalid_argument("snap_model: omega must be positive");
  const int n = spec.cavity_dim;
  std::vector<double> phases = spec.phases;
  if (phases.empty())
    for (int k = 0; k < n; ++k) phases.push_back(k * std::numbers::pi / 2.0);
  if (static_cast<int>(phases.size()) != n)
    throw std::invalid_argument("snap_model: phases must list one angle per cavity level");
  CMatrix h1 = spec.h1.value_or([&] {
    CMatrix h = CMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) h(j, j) = 0.5 * j;
    return h;
  }());
  CMatrix h2 = spec.h2.value_or(CMatrix::Zero(n, n));
  if (h1.rows() != n || h1.cols() != n || h2.rows() != n || h2.cols() != n)
    throw std::invalid_argument("snap_model: central Hamiltonians must be N x N");
  std::vector<double> dephase =
      spec.dephase.empty() ? std::vector<double>(spec.d_A, 0.02) : spec.dephase;
  std::vector<double> relax =
      spec.relax.empty() ? std::vector<double>(spec.d_A - 1, 0.02) : spec.relax;
  if (static_cast<int>(dephase.size()) != spec.d_A)
    throw std::invalid_argument("snap_model: dephase must list one rate per level");
  if (static_cast<int>(relax.size()) != spec.d_A - 1)
    throw std::invalid_argument("snap_model: relax must list one rate per level 2..d_A");
  for (double r : dephase)
    if (!(r >= 0)) throw std::invalid_argument("snap_model: negative rate");
  for (double r : relax)
    if (!(r >= 0)) throw std::invalid_argument("snap_model: negative rate");
  const double horizon =
      spec.horizon > 0 ? spec.horizon : std::numbers::pi / (2.0 * spec.omega);

  const CMatrix u = snap_unitary(phases);
  // Anchor at level 1: U(1,m) = U for m >= 2, so every edge within 2..d_A
  // carries the identity and the drive edge (d_A,1) carries U^dag.
  std::vector<CMatrix> reps(spec.d_A, u.adjoint());
  reps[0] = CMatrix::Identity(n, n);
  Family family(spec.d_A, n, std::move(reps));

  Graph graph = loops(spec.d_A);
  graph.insert({1, spec.d_A});
  graph.insert({spec.d_A, 1});
  for (int m = 3; m <= spec.d_A; ++m) {
    graph.insert({m - 1, m});
    graph.insert({m, m - 1});
  }

  const CMatrix h_int =
      spec.omega * (family.basis_element(1, spec.d_A) + family.basis_element(spec.d_A, 1));

  const CMatrix eye = CMatrix::Identity(n, n);
  std::vector<Jump> jumps;
  for (int m = 1; m <= spec.d_A; ++m)
    if (dephase[m - 1] > 0.0)
      jumps.push_back(
          {std::sqrt(dephase[m - 1]) * level_transfer(spec.d_A, n, m, m, eye), false});
  for (int m = 2; m <= spec.d_A; ++m) {
    if (relax[m - 2] <= 0.0) continue;
    // Only the 2->1 jump leaves the shared-H_2 subspace; in the interaction
    // picture it is R_1(t)^dag K R_2(t), i.e. frame-conjugated.
    jumps.push_back({std::sqrt(relax[m - 2]) * level_transfer(spec.d_A, n, m - 1, m, eye),
                     m == 2});
  }

  std::vector<CMatrix> frame_hams(spec.d_A, h2);
  frame_hams[0] = h1;
  return Model{std::move(family), std::move(graph), h_int, std::move(jumps),
               DiagonalFrame::constant(std::move(frame_hams), horizon), horizon};
}

} // namespace picheck
