#pragma once
// Ancilla-indexed operator families and the matrix algebras they span.
// A family assigns a central-system unitary U(m,n) to every ordered pair of
// ancilla levels such that U(m,e) U(e,n) = U(m,n), U(m,m) = I and
// U(n,m) = U(m,n)^dag. Storage is one representative per level against an
// anchor: V_m = U(m, anchor), so U(m,n) = V_m V_n^dag and the cocycle holds
// exactly by construction. Basis elements |m><n| (x) U(m,n) multiply like
// matrix units, which is what every check here leans on.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "picheck/numerics.hpp"

namespace picheck {

using Edge = std::pair<int, int>; // 1-based ancilla levels (m, n) ~ |m><n|
using Graph = std::set<Edge>;

inline Graph loops(int d_A) {
  Graph g;
  for (int m = 1; m <= d_A; ++m) g.insert({m, m});
  return g;
}

inline Graph full_graph(int d_A) {
  Graph g;
  for (int m = 1; m <= d_A; ++m)
    for (int n = 1; n <= d_A; ++n) g.insert({m, n});
  return g;
}

inline void require_edge_range(const Graph& g, int d_A, const char* who) {
  for (const auto& [m, n] : g)
    if (m < 1 || m > d_A || n < 1 || n > d_A)
      throw std::invalid_argument(std::string(who) + ": edge (" + std::to_string(m) + "," +
                                  std::to_string(n) + ") outside 1.." + std::to_string(d_A));
}

class Family {
 public:
  Family(int d_A, int d_B, std::vector<CMatrix> reps, int anchor = 1)
      : d_A_(d_A), d_B_(d_B), anchor_(anchor), reps_(std::move(reps)) {
    if (d_A < 1 || d_B < 1) throw std::invalid_argument("Family: dimensions must be >= 1");
    if (anchor < 1 || anchor > d_A) throw std::invalid_argument("Family: anchor out of range");
    if (static_cast<int>(reps_.size()) != d_A)
      throw std::invalid_argument("Family: need one representative per ancilla level");
    for (const CMatrix& v : reps_) {
      if (v.rows() != d_B || v.cols() != d_B)
        throw std::invalid_argument("Family: representative has wrong shape");
      require_finite(v, "Family");
      if ((v.adjoint() * v - CMatrix::Identity(d_B, d_B)).norm() > 1e-10 * d_B)
        throw std::invalid_argument("Family: representative is not unitary");
    }
    // Snap the anchor representative to the exact identity so loop unitaries
    // come out bit-exact.
    reps_[anchor_ - 1] = CMatrix::Identity(d_B, d_B);
  }

  static Family identity(int d_A, int d_B) {
    return Family(d_A, d_B, std::vector<CMatrix>(d_A, CMatrix::Identity(d_B, d_B)));
  }

  int dim_ancilla() const { return d_A_; }
  int dim_central() const { return d_B_; }
  int composite_dim() const { return d_A_ * d_B_; }
  int anchor() const { return anchor_; }

  const CMatrix& rep(int m) const {
    check_level(m);
    return reps_[m - 1];
  }

  // U(m, n) = V_m V_n^dag; U(m, anchor) returns V_m without a product.
  CMatrix unitary(int m, int n) const {
    check_level(m);
    check_level(n);
    if (m == n) return CMatrix::Identity(d_B_, d_B_);
    if (n == anchor_) return reps_[m - 1];
    return reps_[m - 1] * reps_[n - 1].adjoint();
  }

  // |m><n| (x) U(m,n) on the composite space (ancilla slot outer).
  CMatrix basis_element(int m, int n) const {
    CMatrix out = CMatrix::Zero(composite_dim(), composite_dim());
    out.block((m - 1) * d_B_, (n - 1) * d_B_, d_B_, d_B_) = unitary(m, n);
    return out;
  }

 private:
  void check_level(int m) const {
    if (m < 1 || m > d_A_)
      throw std::invalid_argument("Family: level " + std::to_string(m) + " outside 1.." +
                                  std::to_string(d_A_));
  }

  int d_A_, d_B_, anchor_;
  std::vector<CMatrix> reps_;
};

struct CocycleReport {
  bool ok = true;
  double worst_residual = 0.0;
  std::string worst_condition; // human-readable description of the worst check
};

// Checks an explicit edge map for the cocycle conditions: loops carry the
// identity, reversed edges carry adjoints, and U(m,e) U(e,n) = U(m,n) for
// every triple whose three edges are all present.
inline CocycleReport verify_cocycle(const std::map<Edge, CMatrix>& edges, double tol = eq_tol) {
  CocycleReport report;
  if (edges.empty()) return report;
  const Eigen::Index d_B = edges.begin()->second.rows();
  int d_A = 0;
  for (const auto& [edge, u] : edges) {
    if (u.rows() != d_B || u.cols() != d_B)
      throw std::invalid_argument("verify_cocycle: matrices must share one square shape");
    require_finite(u, "verify_cocycle");
    d_A = std::max({d_A, edge.first, edge.second});
    if (edge.first < 1 || edge.second < 1)
      throw std::invalid_argument("verify_cocycle: levels are 1-based");
  }
  auto note = [&](double residual, std::string what) {
    if (residual > report.worst_residual) {
      report.worst_residual = residual;
      report.worst_condition = std::move(what);
    }
    if (residual > tol) report.ok = false;
  };
  const CMatrix eye = CMatrix::Identity(d_B, d_B);
  for (const auto& [edge, u] : edges) {
    const auto [m, n] = edge;
    if (m == n)
      note((u - eye).norm(), "loop (" + std::to_string(m) + "," + std::to_string(m) + ") != I");
    if (auto rev = edges.find({n, m}); rev != edges.end() && m < n)
      note((rev->second - u.adjoint()).norm(),
           "U(" + std::to_string(n) + "," + std::to_string(m) + ") != U(" + std::to_string(m) +
               "," + std::to_string(n) + ")^dag");
  }
  for (const auto& [left, u_me] : edges) {
    const auto [m, e] = left;
    for (int n = 1; n <= d_A; ++n) {
      const auto mid = edges.find({e, n});
      const auto whole = edges.find({m, n});
      if (mid == edges.end() || whole == edges.end()) continue;
      note((u_me * mid->second - whole->second).norm(),
           "U(" + std::to_string(m) + "," + std::to_string(e) + ") U(" + std::to_string(e) +
               "," + std::to_string(n) + ") != U(" + std::to_string(m) + "," +
               std::to_string(n) + ")");
    }
  }
  return report;
}

// Builds a family from a partial edge map by walking the connectivity graph
// from the anchor; every level must be reachable and every provided generator
// must be consistent with the walked representatives.
inline Family family_from_generators(int d_A, int d_B, const std::map<Edge, CMatrix>& gens,
                                     int anchor = 1, double tol = eq_tol) {
  if (anchor < 1 || anchor > d_A)
    throw std::invalid_argument("family_from_generators: anchor out of range");
  for (const auto& [edge, u] : gens) {
    if (edge.first < 1 || edge.first > d_A || edge.second < 1 || edge.second > d_A)
      throw std::invalid_argument("family_from_generators: edge outside 1.." +
                                  std::to_string(d_A));
    if (u.rows() != d_B || u.cols() != d_B)
      throw std::invalid_argument("family_from_generators: generator has wrong shape");
    if ((u.adjoint() * u - CMatrix::Identity(d_B, d_B)).norm() > tol * d_B)
      throw std::invalid_argument("family_from_generators: generator (" +
                                  std::to_string(edge.first) + "," +
                                  std::to_string(edge.second) + ") is not unitary");
  }
  std::vector<std::optional<CMatrix>> reps(d_A);
  reps[anchor - 1] = CMatrix::Identity(d_B, d_B);
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [edge, u] : gens) {
      const auto [m, n] = edge;
      if (reps[n - 1] && !reps[m - 1]) {
        reps[m - 1] = u * *reps[n - 1]; // V_m = U(m,n) V_n
        grew = true;
      } else if (reps[m - 1] && !reps[n - 1]) {
        reps[n - 1] = u.adjoint() * *reps[m - 1];
        grew = true;
      }
    }
  }
  std::vector<CMatrix> out;
  for (int m = 1; m <= d_A; ++m) {
    if (!reps[m - 1])
      throw std::invalid_argument("family_from_generators: level " + std::to_string(m) +
                                  " not reachable from anchor");
    out.push_back(*reps[m - 1]);
  }
  Family fam(d_A, d_B, out, anchor);
  for (const auto& [edge, u] : gens) {
    const double res = (u - fam.unitary(edge.first, edge.second)).norm();
    if (res > tol * std::max(1.0, u.norm()))
      throw std::invalid_argument("family_from_generators: generator (" +
                                  std::to_string(edge.first) + "," +
                                  std::to_string(edge.second) +
                                  ") inconsistent with the walked family, residual " +
                                  std::to_string(res));
  }
  return fam;
}

struct ClosureReport {
  bool closed = true;
  Graph missing_edges;      // compositions (a,c) implied by (a,b),(b,c) but absent
  bool self_adjoint = true; // (a,b) present iff (b,a) present
};

inline ClosureReport closure_check(int d_A, const Graph& graph) {
  require_edge_range(graph, d_A, "closure_check");
  ClosureReport report;
  for (const auto& [a, b] : graph) {
    if (!graph.count({b, a})) report.self_adjoint = false;
    for (const auto& [c, d] : graph)
      if (b == c && !graph.count({a, d})) report.missing_edges.insert({a, d});
  }
  report.closed = report.missing_edges.empty();
  return report;
}

// Smallest self-adjoint subalgebra graph containing the input: close under
// transpose and composition, seeded with every loop (all subalgebras here
// contain the loops by definition).
inline Graph self_adjoint_extension(int d_A, Graph graph) {
  require_edge_range(graph, d_A, "self_adjoint_extension");
  for (int m = 1; m <= d_A; ++m) graph.insert({m, m});
  bool grew = true;
  while (grew) {
    grew = false;
    Graph next = graph;
    for (const auto& [a, b] : graph) {
      if (next.insert({b, a}).second) grew = true;
      for (const auto& [c, d] : graph)
        if (b == c && next.insert({a, d}).second) grew = true;
    }
    graph.swap(next);
  }
  return graph;
}

// Realize a coefficient matrix h over the family: sum_mn h(m,n) |m><n| (x) U(m,n).
inline CMatrix realize(const Family& family, const CMatrix& h) {
  const int d_A = family.dim_ancilla(), d_B = family.dim_central();
  if (h.rows() != d_A || h.cols() != d_A)
    throw std::invalid_argument("realize: coefficient matrix must be d_A x d_A");
  require_finite(h, "realize");
  CMatrix out = CMatrix::Zero(family.composite_dim(), family.composite_dim());
  for (int m = 1; m <= d_A; ++m)
    for (int n = 1; n <= d_A; ++n) {
      if (h(m - 1, n - 1) == complex(0.0, 0.0)) continue;
      out.block((m - 1) * d_B, (n - 1) * d_B, d_B, d_B) = h(m - 1, n - 1) * family.unitary(m, n);
    }
  return out;
}

struct MembershipReport {
  bool member = false;
  CMatrix coefficients; // d_A x d_A, zero outside the graph
  double residual = 0.0;
};

// Projects x onto span{ |m><n| (x) U(m,n) : (m,n) in graph }. Basis elements
// are orthogonal with <base, base> = d_B, so coefficients come from inner
// products; membership holds when the projection residual is small.
inline MembershipReport membership(const Family& family, const CMatrix& x, const Graph& graph,
                                   double tol = eq_tol) {
  const int d_A = family.dim_ancilla(), d_B = family.dim_central();
  require_edge_range(graph, d_A, "membership");
  if (x.rows() != family.composite_dim() || x.cols() != family.composite_dim())
    throw std::invalid_argument("membership: operand has wrong shape");
  require_finite(x, "membership");
  MembershipReport report;
  report.coefficients = CMatrix::Zero(d_A, d_A);
  CMatrix recon = CMatrix::Zero(x.rows(), x.cols());
  for (const auto& [m, n] : graph) {
    const CMatrix u = family.unitary(m, n);
    const complex c =
        frobenius_inner(u, x.block((m - 1) * d_B, (n - 1) * d_B, d_B, d_B)) /
        static_cast<double>(d_B);
    report.coefficients(m - 1, n - 1) = c;
    recon.block((m - 1) * d_B, (n - 1) * d_B, d_B, d_B) = c * u;
  }
  report.residual = (x - recon).norm();
  report.member = report.residual <= tol * std::max(1.0, x.norm());
  return report;
}

// Product of basis elements along a path of ancilla levels. The cocycle makes
// this collapse to the single basis element between the endpoints, which is
// exactly the path-independence statement.
inline CMatrix path_product(const Family& family, const std::vector<int>& path) {
  if (path.empty()) throw std::invalid_argument("path_product: empty path");
  if (path.size() == 1) return family.basis_element(path[0], path[0]);
  CMatrix out = family.basis_element(path[0], path[1]);
  for (std::size_t i = 2; i < path.size(); ++i)
    out = out * family.basis_element(path[i - 1], path[i]);
  return out;
}

struct SpectrumReport {
  bool spectrum_ok = false;      // composite eigenvalues = ancilla ones, d_B-fold
  double max_value_gap = 0.0;    // worst sorted-multiset mismatch
  double max_pair_residual = 0.0;
  double conjugation_residual = 0.0; // || realize(h) - U (h (x) I) U^dag ||
  bool ok(double tol) const {
    return spectrum_ok && max_pair_residual <= tol && conjugation_residual <= tol;
  }
};

// Block-diagonal conjugation unitary sum_m |m><m| (x) V_m.
inline CMatrix dressing_unitary(const Family& family) {
  const int d_A = family.dim_ancilla(), d_B = family.dim_central();
  CMatrix u = CMatrix::Zero(family.composite_dim(), family.composite_dim());
  for (int m = 1; m <= d_A; ++m) u.block((m - 1) * d_B, (m - 1) * d_B, d_B, d_B) = family.rep(m);
  return u;
}

// A Hermitian coefficient matrix realized over the family has the ancilla
// spectrum with multiplicity d_B: realize(h) = U (h (x) I) U^dag for the
// block-diagonal U above. Verifies the spectrum, eigenpair residuals and the
// conjugation identity.
inline SpectrumReport lemma1_verify(const Family& family, const CMatrix& h, double tol = 1e-8) {
  const int d_A = family.dim_ancilla(), d_B = family.dim_central();
  if (h.rows() != d_A || h.cols() != d_A)
    throw std::invalid_argument("lemma1_verify: coefficient matrix must be d_A x d_A");
  if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm()))
    throw std::invalid_argument("lemma1_verify: coefficient matrix must be Hermitian");

  SpectrumReport report;
  const CMatrix big = realize(family, h);
  const CMatrix u = dressing_unitary(family);
  report.conjugation_residual =
      (big - u * kron(h, CMatrix::Identity(d_B, d_B)) * u.adjoint()).norm();

  Eigen::SelfAdjointEigenSolver<CMatrix> small(h);
  std::vector<double> expected;
  for (int i = 0; i < d_A; ++i)
    expected.insert(expected.end(), d_B, small.eigenvalues()(i));
  std::sort(expected.begin(), expected.end());

  const EigResult full = eig(big);
  std::vector<double> got;
  for (Eigen::Index j = 0; j < full.values.size(); ++j) {
    got.push_back(full.values(j).real());
    report.max_value_gap = std::max(report.max_value_gap, std::abs(full.values(j).imag()));
    const double res =
        (big * full.vectors.col(j) - full.values(j) * full.vectors.col(j)).norm();
    report.max_pair_residual = std::max(report.max_pair_residual, res);
  }
  std::sort(got.begin(), got.end());
  for (std::size_t i = 0; i < got.size(); ++i)
    report.max_value_gap = std::max(report.max_value_gap, std::abs(got[i] - expected[i]));
  report.spectrum_ok = report.max_value_gap <= tol;
  return report;
}

} // namespace picheck
