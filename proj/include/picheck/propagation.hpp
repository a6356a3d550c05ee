#pragma once
// Closed-system propagation over a family: ancilla-conditioned rotating
// frames, propagators generated by realized coefficient matrices, and the
// correspondence between composite propagators and the d_A x d_A coefficient
// flow (a propagator generated inside the algebra stays inside it, with
// coefficients exp(-i t h)).

#include "picheck/algebra.hpp"
#include "picheck/numerics.hpp"

namespace picheck {

// The coefficient-space -> composite-space isomorphism (inverse of the
// membership coefficients). Alias of realize, named for call sites that lift
// an ancilla operator into the algebra.
inline CMatrix lift(const Family& family, const CMatrix& ancilla_op) {
  return realize(family, ancilla_op);
}

// Ancilla-conditioned frame R(t) = sum_m |m><m| (x) R_m(t) with each R_m
// generated by a piecewise-constant Hermitian schedule H_m(t). Segment k
// covers [node_{k-1}, node_k); times past the last node extend the final
// segment.
class DiagonalFrame {
 public:
  // `nodes` are the segment right-endpoints (strictly increasing, > 0);
  // `hams[k][m-1]` is the level-m Hamiltonian on segment k.
  DiagonalFrame(int d_A, int d_B, std::vector<double> nodes,
                std::vector<std::vector<CMatrix>> hams)
      : d_A_(d_A), d_B_(d_B), nodes_(std::move(nodes)), hams_(std::move(hams)) {
    if (d_A < 1 || d_B < 1) throw std::invalid_argument("DiagonalFrame: bad dimensions");
    if (nodes_.empty() || hams_.size() != nodes_.size())
      throw std::invalid_argument("DiagonalFrame: need one Hamiltonian set per segment");
    double prev = 0.0;
    for (double t : nodes_) {
      if (!(t > prev)) throw std::invalid_argument("DiagonalFrame: nodes must increase from 0");
      prev = t;
    }
    for (const auto& seg : hams_) {
      if (static_cast<int>(seg.size()) != d_A)
        throw std::invalid_argument("DiagonalFrame: need one Hamiltonian per ancilla level");
      for (const CMatrix& h : seg) {
        if (h.rows() != d_B || h.cols() != d_B)
          throw std::invalid_argument("DiagonalFrame: Hamiltonian has wrong shape");
        require_finite(h, "DiagonalFrame");
        if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm()))
          throw std::invalid_argument("DiagonalFrame: Hamiltonian not Hermitian");
      }
    }
  }

  static DiagonalFrame constant(std::vector<CMatrix> level_hams, double horizon) {
    if (level_hams.empty()) throw std::invalid_argument("DiagonalFrame: no levels");
    const int d_A = static_cast<int>(level_hams.size());
    const int d_B = static_cast<int>(level_hams.front().rows());
    return DiagonalFrame(d_A, d_B, {horizon}, {std::move(level_hams)});
  }

  int dim_ancilla() const { return d_A_; }
  int dim_central() const { return d_B_; }
  double horizon() const { return nodes_.back(); }
  bool is_constant() const { return hams_.size() == 1; }

  const CMatrix& hamiltonian(int m, double t) const {
    check_level(m);
    return hams_[segment(t)][m - 1];
  }

  // R_m(t): time-ordered product of segment exponentials.
  CMatrix rotor(int m, double t) const {
    check_level(m);
    if (t < 0.0) throw std::invalid_argument("DiagonalFrame: negative time");
    CMatrix r = CMatrix::Identity(d_B_, d_B_);
    double left = 0.0;
    for (std::size_t k = 0; k < nodes_.size() && left < t; ++k) {
      const double right = (k + 1 == nodes_.size()) ? t : std::min(nodes_[k], t);
      if (right > left) r = expm(hams_[k][m - 1], complex(0, -(right - left))) * r;
      left = nodes_[k];
    }
    return r;
  }

  // Block-diagonal frame unitary sum_m |m><m| (x) R_m(t).
  CMatrix frame_unitary(double t) const {
    CMatrix u = CMatrix::Zero(d_A_ * d_B_, d_A_ * d_B_);
    for (int m = 1; m <= d_A_; ++m)
      u.block((m - 1) * d_B_, (m - 1) * d_B_, d_B_, d_B_) = rotor(m, t);
    return u;
  }

 private:
  std::size_t segment(double t) const {
    if (t < 0.0) throw std::invalid_argument("DiagonalFrame: negative time");
    for (std::size_t k = 0; k < nodes_.size(); ++k)
      if (t < nodes_[k]) return k;
    return nodes_.size() - 1;
  }

  void check_level(int m) const {
    if (m < 1 || m > d_A_) throw std::invalid_argument("DiagonalFrame: level out of range");
  }

  int d_A_, d_B_;
  std::vector<double> nodes_;
  std::vector<std::vector<CMatrix>> hams_;
};

// A dissipative channel: a composite-space jump operator, optionally
// conjugated by the ancilla-conditioned frame, K(t) = R(t)^dag K R(t). The
// conjugated form is what a lab-frame-constant jump looks like in the
// interaction picture.
struct Jump {
  CMatrix op;
  bool frame_conjugated = false;
};

inline CMatrix jump_at(const Jump& jump, const DiagonalFrame* frame, double t) {
  if (!jump.frame_conjugated) return jump.op;
  if (frame == nullptr)
    throw std::invalid_argument("jump_at: frame-conjugated jump without a frame");
  const CMatrix r = frame->frame_unitary(t);
  return r.adjoint() * jump.op * r;
}

// W(t) = exp(-i t realize(h)) for a Hermitian coefficient matrix h.
inline CMatrix pi_propagator(const Family& family, const CMatrix& h, double t) {
  if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm()))
    throw std::invalid_argument("pi_propagator: coefficient matrix must be Hermitian");
  return expm(lift(family, h), complex(0, -t));
}

struct XiReport {
  bool pass = false;
  double membership_residual = 0.0; // distance of W(t) from the algebra span
  double max_coeff_error = 0.0;     // worst |xi_mn(t) - exp(-i t h)_mn|
};

// The composite propagator stays in the algebra and its coefficient matrix is
// the ancilla-space propagator exp(-i t h).
inline XiReport xi_correspondence_check(const Family& family, const CMatrix& h, double t,
                                        double tol = eq_tol) {
  const CMatrix w = pi_propagator(family, h, t);
  const MembershipReport mem = membership(family, w, full_graph(family.dim_ancilla()), tol);
  const CMatrix xi = expm(h, complex(0, -t));
  XiReport report;
  report.membership_residual = mem.residual;
  report.max_coeff_error = (mem.coefficients - xi).cwiseAbs().maxCoeff();
  report.pass = mem.member && report.max_coeff_error <= tol;
  return report;
}

struct ProjectedBlock {
  CMatrix block;          // <r| w |i> central-space block, d_B x d_B
  ProportionalityFit fit; // fit of the block against U(r, i)
};

// Central-system block of a composite propagator for the ancilla transition
// i -> r, fitted against the family unitary U(r, i).
inline ProjectedBlock projected_block(const CMatrix& w, const Family& family, int i, int r,
                                      double tol = zero_tol) {
  const int d_B = family.dim_central();
  if (w.rows() != family.composite_dim() || w.cols() != family.composite_dim())
    throw std::invalid_argument("projected_block: propagator has wrong shape");
  ProjectedBlock out;
  out.block = w.block((r - 1) * d_B, (i - 1) * d_B, d_B, d_B);
  out.fit = proportionality_fit(out.block, family.unitary(r, i), tol);
  return out;
}

// Lab-frame propagator: prepend the frame rotation to an interaction-picture
// propagator.
inline CMatrix schrodinger_dress(const DiagonalFrame& frame, const CMatrix& w, double t) {
  if (w.rows() != frame.dim_ancilla() * frame.dim_central() || w.rows() != w.cols())
    throw std::invalid_argument("schrodinger_dress: propagator has wrong shape");
  return frame.frame_unitary(t) * w;
}

struct TransitionReport {
  bool trivially_zero = false; // transition amplitude below the zero floor
  double sine = 0.0;           // sin of the angle between the block and U(r,i)
};

// How far the induced i -> r transition is from acting as the family unitary:
// the sine of the principal angle between the propagator block and U(r, i).
inline TransitionReport induced_transition_check(const CMatrix& w, const Family& family, int i,
                                                 int r, double tol = zero_tol) {
  const ProjectedBlock pb = projected_block(w, family, i, r, tol);
  TransitionReport report;
  if (pb.fit.trivially_zero) {
    report.trivially_zero = true;
    return report;
  }
  report.sine = pb.fit.residual / pb.block.norm();
  return report;
}

} // namespace picheck
