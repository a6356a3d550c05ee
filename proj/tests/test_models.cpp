#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include <picheck/dyson.hpp>
#include <picheck/models.hpp>
#include <picheck/superop.hpp>

using namespace picheck;

namespace {

const DiagonalFrame* frame_ptr(const Model& m) { return m.frame ? &*m.frame : nullptr; }

CMatrix half_number_op(int d) {
  CMatrix h = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) h(j, j) = 0.5 * j;
  return h;
}

} // namespace

TEST_CASE("transparency condition classifies identity shifts", "[models]") {
  const CMatrix h1 = half_number_op(2);
  const CMatrix eye = CMatrix::Identity(2, 2);
  CMatrix tilt = CMatrix::Zero(2, 2);
  tilt(1, 1) = 1.0;

  const auto entries = et_condition_check({h1, h1 - 0.7 * eye, h1 + 0.4 * tilt});
  REQUIRE(entries.size() == 2);
  REQUIRE(entries[0].level == 2);
  REQUIRE(entries[0].transparent);
  REQUIRE(entries[0].lambda == Catch::Approx(0.7).margin(1e-14));
  REQUIRE(entries[0].deviation <= 1e-14);
  REQUIRE(entries[1].level == 3);
  REQUIRE_FALSE(entries[1].transparent);
  // trace(-0.4*diag(0,1))/2, and the traceless remainder has norm 0.4/sqrt(2)
  REQUIRE(entries[1].lambda == Catch::Approx(-0.2).margin(1e-14));
  REQUIRE(entries[1].deviation == Catch::Approx(0.4 / std::sqrt(2.0)).margin(1e-13));

  const CMatrix g1 = half_number_op(3);
  CMatrix mid = CMatrix::Zero(3, 3);
  mid(1, 1) = 1.0;
  const auto wide = et_condition_check({g1, g1 + 0.9 * mid});
  REQUIRE(wide[0].deviation == Catch::Approx(0.9 * std::sqrt(6.0) / 3.0).margin(1e-13));

  REQUIRE_THROWS_AS(et_condition_check({}), std::invalid_argument);
  CMatrix skew = CMatrix::Zero(2, 2);
  skew(0, 1) = 1.0;
  REQUIRE_THROWS_AS(et_condition_check({h1, skew}), std::invalid_argument);
  REQUIRE_THROWS_AS(et_condition_check({h1, half_number_op(3)}), std::invalid_argument);
}

TEST_CASE("noiseless subspaces partition by identity shifts", "[models]") {
  const CMatrix h1 = half_number_op(2);
  const CMatrix zero = CMatrix::Zero(2, 2);
  const CMatrix eye = CMatrix::Identity(2, 2);

  const NasReport snap_like = nas_check({h1, zero, zero, zero});
  REQUIRE(snap_like.classes == std::vector<std::vector<int>>{{1}, {2, 3, 4}});
  REQUIRE(snap_like.worst_in_class <= 1e-14);

  REQUIRE(nas_check({h1, h1, h1}).classes == std::vector<std::vector<int>>{{1, 2, 3}});

  // Identity shifts chain transitively; a genuinely tilted level stays alone.
  CMatrix tilt = CMatrix::Zero(2, 2);
  tilt(1, 1) = 4.5;
  REQUIRE(nas_check({h1, h1 + eye, h1 + 2.0 * eye, h1 + tilt}).classes ==
          std::vector<std::vector<int>>{{1, 2, 3}, {4}});

  REQUIRE(nas_check({h1, h1 + tilt, h1 + 2.0 * tilt}).classes ==
          std::vector<std::vector<int>>{{1}, {2}, {3}});
}

TEST_CASE("transparent error model is exactly path independent", "[models]") {
  const Model m = et_model();
  REQUIRE(m.family.dim_ancilla() == 3);
  REQUIRE(m.jumps.size() == 2);
  REQUIRE_FALSE(m.jumps[0].frame_conjugated);
  REQUIRE_FALSE(m.jumps[1].frame_conjugated);
  REQUIRE(m.graph.count({3, 1}) == 1);

  const auto entries = et_condition_check(et_default_level_hams(3, 2));
  REQUIRE(entries[0].transparent);
  REQUIRE(entries[1].transparent);
  REQUIRE(entries[1].lambda == Catch::Approx(0.25).margin(1e-14));

  const Theorem1Report thm =
      theorem1_check(m.family, m.graph, m.h_int, m.jumps, frame_ptr(m), m.horizon);
  REQUIRE(thm.exact_pi);
  REQUIRE(thm.witnesses.empty());
  REQUIRE(thm.spot_check_ok);

  const DysonSplit s = split(m.h_int, m.jumps, m.frame, m.horizon);
  REQUIRE(s.s_constant);
  const auto times = generic_times(m.horizon, 2, 7, 1);
  REQUIRE(pi_order(s, m.family, 1, 2, times, 3, 1e-7, 1e-4).verdict == PiVerdict::exact);
  REQUIRE(pi_order(s, m.family, 1, 3, times, 3, 1e-7, 1e-4).verdict == PiVerdict::exact);
  REQUIRE(pi_order(s, m.family, 2, 2, times, 3, 1e-7, 1e-4).verdict == PiVerdict::exact);
  REQUIRE(pi_order(s, m.family, 2, 3, times, 3, 1e-7, 1e-4).verdict ==
          PiVerdict::unreachable);

  EtSpec quiet;
  quiet.gammas = {0.0, 0.0};
  const Model mq = et_model(quiet);
  REQUIRE(mq.jumps.empty());
  REQUIRE(theorem1_check(mq.family, mq.graph, mq.h_int, mq.jumps, frame_ptr(mq), mq.horizon)
              .exact_pi);
}

TEST_CASE("broken transparency is caught and ranked", "[models]") {
  EtSpec spec;
  spec.level_hams = et_default_level_hams(3, 2);
  CMatrix tilt = CMatrix::Zero(2, 2);
  tilt(1, 1) = 1.0;
  spec.level_hams[2] = spec.level_hams[0] + 0.4 * tilt;
  const Model m = et_model(spec);

  const auto entries = et_condition_check(spec.level_hams);
  REQUIRE(entries[0].transparent);
  REQUIRE_FALSE(entries[1].transparent);
  REQUIRE_FALSE(m.jumps[0].frame_conjugated);
  REQUIRE(m.jumps[1].frame_conjugated);

  const Theorem1Report thm =
      theorem1_check(m.family, m.graph, m.h_int, m.jumps, frame_ptr(m), m.horizon);
  REQUIRE_FALSE(thm.exact_pi);
  REQUIRE_FALSE(thm.witnesses.empty());
  REQUIRE(thm.witnesses.front().label.find("jump") != std::string::npos);
  REQUIRE(thm.witnesses.front().time > 0.0);

  const DysonSplit s = split(m.h_int, m.jumps, m.frame, m.horizon);
  REQUIRE_FALSE(s.s_constant);
  const auto times = generic_times(m.horizon, 2, 7, 2);
  const PiOrderReport broken = pi_order(s, m.family, 1, 3, times, 2, 1e-7, 1e-4, 600);
  REQUIRE(broken.verdict == PiVerdict::order);
  REQUIRE(broken.order == 0);
  REQUIRE(pi_order(s, m.family, 1, 2, times, 2, 1e-7, 1e-4, 600).verdict ==
          PiVerdict::exact);
}

TEST_CASE("snap model assembles the documented pieces", "[models]") {
  const Model m = snap_model();
  const CMatrix u = snap_unitary({0.0, std::numbers::pi / 2.0});
  REQUIRE(m.family.dim_ancilla() == 4);
  REQUIRE(m.family.dim_central() == 2);
  REQUIRE((m.family.unitary(1, 4) - u).norm() <= 1e-14);
  REQUIRE((m.family.unitary(3, 2) - CMatrix::Identity(2, 2)).norm() <= 1e-14);
  REQUIRE(m.horizon == Catch::Approx(std::numbers::pi / 2.0));

  const CMatrix expected_drive = level_transfer(4, 2, 1, 4, u) + level_transfer(4, 2, 4, 1, u.adjoint());
  REQUIRE((m.h_int - expected_drive).norm() <= 1e-14);

  REQUIRE(m.graph.count({1, 4}) == 1);
  REQUIRE(m.graph.count({3, 2}) == 1);
  REQUIRE(m.graph.count({4, 3}) == 1);
  REQUIRE(m.graph.count({1, 2}) == 0);
  REQUIRE(m.graph.count({1, 3}) == 0);
  REQUIRE(m.graph.size() == 10);

  REQUIRE(m.jumps.size() == 7);
  int conjugated = 0;
  for (const Jump& jump : m.jumps) conjugated += jump.frame_conjugated ? 1 : 0;
  REQUIRE(conjugated == 1);
  const CMatrix bad = std::sqrt(0.02) * level_transfer(4, 2, 1, 2, CMatrix::Identity(2, 2));
  bool found_bad = false;
  for (const Jump& jump : m.jumps)
    if (jump.frame_conjugated) found_bad = (jump.op - bad).norm() <= 1e-14;
  REQUIRE(found_bad);

  REQUIRE(m.frame.has_value());
  const NasReport nas = nas_check({m.frame->hamiltonian(1, 0.0), m.frame->hamiltonian(2, 0.0),
                                   m.frame->hamiltonian(3, 0.0), m.frame->hamiltonian(4, 0.0)});
  REQUIRE(nas.classes == std::vector<std::vector<int>>{{1}, {2, 3, 4}});

  const Theorem1Report thm =
      theorem1_check(m.family, m.graph, m.h_int, m.jumps, frame_ptr(m), m.horizon);
  REQUIRE_FALSE(thm.exact_pi);
  REQUIRE_FALSE(thm.witnesses.empty());

  SnapSpec no_bad;
  no_bad.relax = {0.0, 0.02, 0.02};
  const Model mb = snap_model(no_bad);
  const DysonSplit sb = split(mb.h_int, mb.jumps, mb.frame, mb.horizon);
  REQUIRE(sb.s_constant);
  const Theorem1Report thmb =
      theorem1_check(mb.family, mb.graph, mb.h_int, mb.jumps, frame_ptr(mb), mb.horizon);
  REQUIRE(thmb.exact_pi);
  REQUIRE(thmb.spot_check_ok);
  REQUIRE(pi_order(sb, mb.family, 1, 4, {0.8 * mb.horizon}, 3, 1e-7, 1e-4).verdict ==
          PiVerdict::exact);

  SnapSpec bad_spec;
  bad_spec.d_A = 1;
  REQUIRE_THROWS_AS(snap_model(bad_spec), std::invalid_argument);
  SnapSpec short_phases;
  short_phases.phases = {0.0};
  REQUIRE_THROWS_AS(snap_model(short_phases), std::invalid_argument);
  SnapSpec negative;
  negative.relax = {-0.1, 0.0, 0.0};
  REQUIRE_THROWS_AS(snap_model(negative), std::invalid_argument);
}

TEST_CASE("snap gate is path independent to the documented orders", "[models]") {
  const Model m = snap_model();
  const DysonSplit s = split(m.h_int, m.jumps, m.frame, m.horizon);
  REQUIRE_FALSE(s.s_constant);

  const auto times = generic_times(m.horizon, 3, 2026, 5);
  const PiOrderReport top = pi_order(s, m.family, 1, 4, times, 3, 1e-7, 1e-4);
  REQUIRE(top.verdict == PiVerdict::order);
  REQUIRE(top.order == 2);

  const std::vector<double> one{times[0]};
  const PiOrderReport mid = pi_order(s, m.family, 1, 3, one, 4, 1e-7, 1e-4);
  REQUIRE(mid.verdict == PiVerdict::order);
  REQUIRE(mid.order == 3);
  const PiOrderReport low = pi_order(s, m.family, 1, 2, one, 5, 1e-7, 1e-4);
  REQUIRE(low.verdict == PiVerdict::order);
  REQUIRE(low.order == 4);

  // Orders are structural: doubling every relaxation rate moves residual
  // magnitudes but not the first failing term.
  SnapSpec doubled;
  doubled.relax = {0.04, 0.04, 0.04};
  const Model md = snap_model(doubled);
  const DysonSplit sd = split(md.h_int, md.jumps, md.frame, md.horizon);
  const PiOrderReport topd = pi_order(sd, md.family, 1, 4, one, 3, 1e-7, 1e-4);
  REQUIRE(topd.verdict == PiVerdict::order);
  REQUIRE(topd.order == 2);

  SnapSpec pure_dephasing;
  pure_dephasing.relax = {0.0, 0.0, 0.0};
  const Model mp = snap_model(pure_dephasing);
  const DysonSplit sp = split(mp.h_int, mp.jumps, mp.frame, mp.horizon);
  REQUIRE(sp.s_constant);
  REQUIRE(pi_order(sp, mp.family, 1, 4, times, 3, 1e-7, 1e-4).verdict == PiVerdict::exact);
  REQUIRE(theorem1_check(mp.family, mp.graph, mp.h_int, mp.jumps, frame_ptr(mp), mp.horizon)
              .exact_pi);
}

TEST_CASE("two-level reduction stays exact", "[models]") {
  SnapSpec relaxing;
  relaxing.d_A = 2;
  relaxing.phases = {0.0, 0.0};
  relaxing.h2 = half_number_op(2); // matches the level-1 default: shared frame
  relaxing.dephase = {0.0, 0.0};
  relaxing.relax = {0.02};
  const Model mr = snap_model(relaxing);
  REQUIRE(theorem1_check(mr.family, mr.graph, mr.h_int, mr.jumps, frame_ptr(mr), mr.horizon)
              .exact_pi);
  const DysonSplit sr = split(mr.h_int, mr.jumps, mr.frame, mr.horizon);
  REQUIRE(sr.s_constant);
  const auto times = generic_times(mr.horizon, 2, 11, 3);
  REQUIRE(pi_order(sr, mr.family, 1, 2, times, 4, 1e-7, 1e-4).verdict == PiVerdict::exact);

  SnapSpec dephasing;
  dephasing.d_A = 2;
  dephasing.relax = {0.0};
  const Model md = snap_model(dephasing);
  REQUIRE(theorem1_check(md.family, md.graph, md.h_int, md.jumps, frame_ptr(md), md.horizon)
              .exact_pi);
  const DysonSplit sd = split(md.h_int, md.jumps, md.frame, md.horizon);
  REQUIRE(pi_order(sd, md.family, 1, 2, times, 4, 1e-7, 1e-4).verdict == PiVerdict::exact);
}
