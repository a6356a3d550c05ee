#pragma once

// Executes a normalized RunConfig: builds the model, runs the configured
// checks in declared order, and renders the results as a text report plus
// machine-readable CSVs (17 significant digits for lossless double
// round-trips). Runs are deterministic for a fixed config + seed; per-check
// wall-clock seconds are the only non-reproducible output fields.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "picheck/config.hpp"
#include "picheck/dyson.hpp"
#include "picheck/superop.hpp"
#include "picheck/version.hpp"

namespace picheck {

inline constexpr double block_unitarity_tol = 1e-8;

inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt3(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct PiOrderRow {
  int path_i = 0;
  int path_r = 0;
  int k = 0;
  double residual = 0.0; // envelope: max over evaluation times at this k
  complex c{0.0, 0.0};   // fitted constant at the last evaluation time
  std::string verdict;   // per-path combined verdict, e.g. ORDER_2 / EXACT
};

struct CheckResult {
  std::string name;
  std::string verdict = "FAIL"; // PASS / FAIL / GRAY_ZONE
  double worst_residual = 0.0;
  double seconds = 0.0;
  std::vector<std::string> lines; // human-readable detail
  std::vector<PiOrderRow> rows;   // pi_order checks only
};

struct RunReport {
  std::string version;
  std::uint64_t seed = 0;
  std::string model_line;
  std::vector<CheckResult> checks;
  bool aborted = false;
  std::string abort_message;
  std::string config_echo;

  int exit_code() const {
    bool fail = false, gray = false;
    for (const CheckResult& c : checks) {
      fail = fail || c.verdict == "FAIL";
      gray = gray || c.verdict == "GRAY_ZONE";
    }
    return fail ? 1 : gray ? 3 : 0;
  }
};

namespace rundetail {

// Shared lazily-built artifacts: the coefficient matrix of the interaction
// Hamiltonian, the Dyson split, and the transparency status of the frame.
struct Ctx {
  const Json& doc;
  BuiltModel built;
  std::uint64_t seed = 0;
  std::optional<CMatrix> eta_cache;
  std::optional<DysonSplit> split_cache;
  std::optional<bool> broken_cache;

  Model& model() { return built.model; }
  const DiagonalFrame* frame_ptr() {
    return built.model.frame ? &*built.model.frame : nullptr;
  }
  double tol() const { return doc.at("numerics").at("eq_tol").get<double>(); }

  std::vector<CMatrix> level_hams() {
    const DiagonalFrame& f = *built.model.frame;
    std::vector<CMatrix> hams;
    for (int m = 1; m <= f.dim_ancilla(); ++m) hams.push_back(f.hamiltonian(m, 0.0));
    return hams;
  }

  const CMatrix& eta() {
    if (!eta_cache) {
      const Family& family = model().family;
      const MembershipReport mem =
          membership(family, model().h_int, full_graph(family.dim_ancilla()), tol());
      if (!mem.member)
        throw std::runtime_error(
            "interaction Hamiltonian lies outside the family span (residual " +
            fmt3(mem.residual) + ")");
      eta_cache = (0.5 * (mem.coefficients + mem.coefficients.adjoint())).eval();
    }
    return *eta_cache;
  }

  const DysonSplit& dyson() {
    if (!split_cache)
      split_cache = split(model().h_int, model().jumps, model().frame, model().horizon);
    return *split_cache;
  }

  bool broken_transparency() {
    if (!broken_cache) {
      bool any = false;
      if (model().frame)
        for (const EtConditionEntry& e : et_condition_check(level_hams(), tol()))
          any = any || !e.transparent;
      broken_cache = any;
    }
    return *broken_cache;
  }
};

inline void run_cocycle(Ctx& c, CheckResult& r) {
  const Family& family = c.model().family;
  std::map<Edge, CMatrix> edges;
  for (const Edge& e : full_graph(family.dim_ancilla()))
    edges[e] = family.unitary(e.first, e.second);
  const CocycleReport rep = verify_cocycle(edges, c.tol());
  r.worst_residual = rep.worst_residual;
  r.verdict = rep.ok ? "PASS" : "FAIL";
  std::string line = "full edge set, worst residual " + fmt3(rep.worst_residual);
  if (!rep.worst_condition.empty()) line += " (" + rep.worst_condition + ")";
  r.lines.push_back(line);
}

inline void run_closure(Ctx& c, CheckResult& r) {
  const int d_A = c.model().family.dim_ancilla();
  const Graph& g = c.model().graph;
  const ClosureReport design = closure_check(d_A, g);
  const Graph ext = self_adjoint_extension(d_A, g);
  const ClosureReport extended = closure_check(d_A, ext);
  const bool superset = std::includes(ext.begin(), ext.end(), g.begin(), g.end());
  r.verdict = (extended.closed && extended.self_adjoint && superset) ? "PASS" : "FAIL";
  r.lines.push_back("design graph: " + std::to_string(g.size()) + " edges, closed=" +
                    (design.closed ? "yes" : "no") + ", self_adjoint=" +
                    (design.self_adjoint ? "yes" : "no"));
  r.lines.push_back("self-adjoint extension: " + std::to_string(ext.size()) +
                    " edges, closed=" + (extended.closed ? "yes" : "no") +
                    ", self_adjoint=" + (extended.self_adjoint ? "yes" : "no"));
}

inline void run_lemma1(Ctx& c, CheckResult& r, const Json& chk, std::size_t index) {
  const Family& family = c.model().family;
  const int draws = chk.at("draws").get<int>();
  bool ok = true;
  const auto score = [&](const SpectrumReport& rep) {
    ok = ok && rep.ok(c.tol());
    r.worst_residual = std::max({r.worst_residual, rep.max_value_gap, rep.max_pair_residual,
                                 rep.conjugation_residual});
  };
  score(lemma1_verify(family, c.eta()));
  Rng rng = substream(c.seed, 0x1e5a100 + index);
  for (int d = 0; d < draws; ++d) score(lemma1_verify(family, rng.random_hermitian(family.dim_ancilla())));
  r.verdict = ok ? "PASS" : "FAIL";
  r.lines.push_back("model coefficients + " + std::to_string(draws) +
                    " random draws, worst residual " + fmt3(r.worst_residual));
}

inline void run_lemma3(Ctx& c, CheckResult& r, const Json& chk, std::size_t index) {
  const Family& family = c.model().family;
  const int d_A = family.dim_ancilla();
  const int draws = chk.at("draws").get<int>();
  bool ok = true;
  double scale = 1.0;
  const auto score = [&](const Lemma3Report& rep, bool check_multiplicity) {
    const double conj_rel = rep.conjugation_residual / scale;
    ok = ok && conj_rel <= c.tol() && (!check_multiplicity || rep.multiplicity_ok);
    r.worst_residual = std::max(r.worst_residual, conj_rel);
    if (check_multiplicity) r.worst_residual = std::max(r.worst_residual, rep.max_value_gap);
  };
  // Superoperator-level coefficient of K (x) conj(K) with K realized from the
  // model's interaction coefficients. Its spectrum is typically degenerate, so
  // only the conjugation identity is scored; the multiplicity statement needs
  // separated eigenvalues and is exercised by the random draws.
  const CMatrix model_coeff = kron(c.eta(), c.eta().conjugate());
  scale = std::max(1.0, model_coeff.norm());
  score(lemma3_verify(family, model_coeff), false);
  Rng rng = substream(c.seed, 0x1e5a300 + index);
  for (int d = 0; d < draws; ++d) {
    const CMatrix draw = rng.gaussian_matrix(d_A * d_A, d_A * d_A);
    scale = std::max(1.0, draw.norm());
    score(lemma3_verify(family, draw), true);
  }
  r.verdict = ok ? "PASS" : "FAIL";
  r.lines.push_back("model-derived coefficients (conjugation identity) + " +
                    std::to_string(draws) + " random spectral draws, worst residual " +
                    fmt3(r.worst_residual));
}

inline void run_xi(Ctx& c, CheckResult& r, const Json& chk) {
  const Family& family = c.model().family;
  const int d_A = family.dim_ancilla();
  const int samples = chk.at("samples").get<int>();
  const double horizon = c.model().horizon;
  bool ok = true;
  double worst_unitarity = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double t = horizon * s / (samples - 1);
    const XiReport xi = xi_correspondence_check(family, c.eta(), t, c.tol());
    ok = ok && xi.pass;
    r.worst_residual =
        std::max({r.worst_residual, xi.membership_residual, xi.max_coeff_error});
    const CMatrix w = pi_propagator(family, c.eta(), t);
    for (int i = 1; i <= d_A; ++i)
      for (int rr = 1; rr <= d_A; ++rr) {
        const ProjectedBlock pb = projected_block(w, family, i, rr);
        if (pb.fit.trivially_zero) continue;
        const double rel = pb.fit.residual / pb.block.norm();
        ok = ok && rel <= c.tol();
        r.worst_residual = std::max(r.worst_residual, rel);
        const CMatrix q = pb.block / pb.fit.constant;
        const double unitarity =
            (q * q.adjoint() - CMatrix::Identity(q.rows(), q.cols())).norm();
        ok = ok && unitarity <= block_unitarity_tol;
        worst_unitarity = std::max(worst_unitarity, unitarity);
      }
  }
  r.verdict = ok ? "PASS" : "FAIL";
  r.lines.push_back(std::to_string(samples) + " sample times across [0, horizon]");
  r.lines.push_back("worst correspondence/block residual " + fmt3(r.worst_residual) +
                    ", worst block unitarity " + fmt3(worst_unitarity));
}

inline void run_theorem1(Ctx& c, CheckResult& r, const Json& chk, std::size_t index) {
  const bool expect_exact = chk.at("expect_exact").get<bool>();
  Model& m = c.model();
  const Theorem1Report rep =
      theorem1_check(m.family, m.graph, m.h_int, m.jumps, c.frame_ptr(), m.horizon,
                     c.seed + static_cast<std::uint64_t>(index), c.tol());
  const bool pass = rep.exact_pi == expect_exact && (!rep.exact_pi || rep.spot_check_ok);
  r.verdict = pass ? "PASS" : "FAIL";
  r.lines.push_back(std::string("exact PI: ") + (rep.exact_pi ? "yes" : "no") +
                    " (expected " + (expect_exact ? "yes" : "no") + ")");
  r.lines.push_back("tested against a self-adjoint extension with " +
                    std::to_string(rep.extended.size()) + " edges");
  if (rep.exact_pi) {
    r.worst_residual = rep.spot_check_worst;
    r.lines.push_back("gate-condition spot check worst residual " +
                      fmt3(rep.spot_check_worst));
  } else {
    for (std::size_t w = 0; w < rep.witnesses.size() && w < 8; ++w) {
      const Witness& wit = rep.witnesses[w];
      r.worst_residual = std::max(r.worst_residual, wit.residual);
      r.lines.push_back("witness: " + wit.label + " residual " + fmt3(wit.residual) +
                        " at t=" + fmt3(wit.time));
    }
  }
}

inline void run_et_condition(Ctx& c, CheckResult& r, const Json& chk) {
  const std::vector<EtConditionEntry> entries = et_condition_check(c.level_hams(), c.tol());
  bool all_transparent = true;
  for (const EtConditionEntry& e : entries) {
    all_transparent = all_transparent && e.transparent;
    if (e.transparent) {
      r.worst_residual = std::max(r.worst_residual, e.deviation);
      r.lines.push_back("level " + std::to_string(e.level) + ": transparent (shift " +
                        fmt3(e.lambda) + ", deviation " + fmt3(e.deviation) + ")");
    } else {
      r.lines.push_back("level " + std::to_string(e.level) + ": NOT transparent (deviation " +
                        fmt3(e.deviation) + ")");
    }
  }
  if (chk.contains("expect_all_transparent"))
    r.verdict =
        (all_transparent == chk.at("expect_all_transparent").get<bool>()) ? "PASS" : "FAIL";
  else
    r.verdict = "PASS";
}

inline std::string class_string(const std::vector<std::vector<int>>& classes) {
  std::string out;
  for (const auto& cls : classes) {
    out += "{";
    for (std::size_t i = 0; i < cls.size(); ++i)
      out += (i ? "," : "") + std::to_string(cls[i]);
    out += "} ";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

inline void run_nas(Ctx& c, CheckResult& r, const Json& chk) {
  const NasReport rep = nas_check(c.level_hams(), c.tol());
  r.worst_residual = rep.worst_in_class;
  r.lines.push_back("classes: " + class_string(rep.classes) + " (worst in-class deviation " +
                    fmt3(rep.worst_in_class) + ")");
  r.verdict = "PASS";
  if (chk.contains("expect_classes")) {
    std::vector<std::vector<int>> expected;
    for (const Json& cls : chk.at("expect_classes")) {
      expected.push_back(cls.get<std::vector<int>>());
      std::sort(expected.back().begin(), expected.back().end());
    }
    std::sort(expected.begin(), expected.end());
    std::vector<std::vector<int>> got = rep.classes;
    std::sort(got.begin(), got.end());
    if (got != expected) {
      r.verdict = "FAIL";
      r.lines.push_back("expected classes: " + class_string(expected));
    }
  }
}

inline std::string path_verdict_string(const PiOrderReport& rep) {
  if (rep.verdict == PiVerdict::order) return "ORDER_" + std::to_string(rep.order);
  return to_string(rep.verdict);
}

inline std::string expect_string(const Json& e) {
  if (e.is_string()) return e.get<std::string>() == "exact" ? "EXACT" : "UNREACHABLE";
  return "ORDER_" + std::to_string(e.get<int>());
}

inline void run_pi_order(Ctx& c, CheckResult& r, const Json& chk, std::size_t index) {
  const Json& numerics = c.doc.at("numerics");
  const double pass_tol = chk.contains("pass_tol") ? chk.at("pass_tol").get<double>()
                                                   : numerics.at("pass_tol").get<double>();
  const double fail_tol = chk.contains("fail_tol") ? chk.at("fail_tol").get<double>()
                                                   : numerics.at("fail_tol").get<double>();
  const int pmax =
      chk.contains("pmax") ? chk.at("pmax").get<int>() : numerics.at("pmax").get<int>();
  const int steps =
      chk.contains("steps") ? chk.at("steps").get<int>() : numerics.at("steps").get<int>();
  std::vector<double> times;
  if (chk.contains("times"))
    times = chk.at("times").get<std::vector<double>>();
  else if (!numerics.at("times").empty())
    times = numerics.at("times").get<std::vector<double>>();
  else
    times = generic_times(c.model().horizon, numerics.at("time_count").get<int>(), c.seed,
                          index + 1);

  std::string times_line = "times:";
  for (double t : times) times_line += " " + fmt3(t);
  r.lines.push_back(times_line + ", pmax " + std::to_string(pmax) + ", pass_tol " +
                    fmt3(pass_tol) + ", fail_tol " + fmt3(fail_tol));

  const DysonSplit& s = c.dyson();
  const Family& family = c.model().family;
  bool all_ok = true, any_gray = false;
  for (std::size_t p = 0; p < chk.at("paths").size(); ++p) {
    const int i = chk.at("paths")[p][0].get<int>();
    const int rr = chk.at("paths")[p][1].get<int>();
    const PiOrderReport rep =
        pi_order(s, family, i, rr, times, pmax, pass_tol, fail_tol, steps);
    const std::string vstr = path_verdict_string(rep);

    for (int k = 0; k <= pmax; ++k) {
      PiOrderRow row;
      row.path_i = i;
      row.path_r = rr;
      row.k = k;
      for (const PiOrderEntry& e : rep.entries)
        if (k < static_cast<int>(e.residuals.size()))
          row.residual = std::max(row.residual, e.residuals[k]);
      const PiOrderEntry& last = rep.entries.back();
      if (k < static_cast<int>(last.constants.size())) row.c = last.constants[k];
      row.verdict = vstr;
      r.rows.push_back(std::move(row));
    }

    for (const PiOrderEntry& e : rep.entries)
      for (double res : e.residuals)
        if (res <= pass_tol) r.worst_residual = std::max(r.worst_residual, res);

    bool matched;
    std::string expect_note;
    if (chk.contains("expect")) {
      const Json& e = chk.at("expect")[p];
      const std::string want = expect_string(e);
      matched = want == vstr;
      expect_note = " (expected " + want + (matched ? ", match)" : ", MISMATCH)");
    } else {
      matched = rep.verdict != PiVerdict::gray_zone;
    }
    any_gray = any_gray || rep.verdict == PiVerdict::gray_zone;
    all_ok = all_ok && matched;
    r.lines.push_back("path " + std::to_string(i) + "->" + std::to_string(rr) + ": " + vstr +
                      expect_note);
    if (!rep.note.empty()) r.lines.push_back("  note: " + rep.note);
    for (const PiOrderEntry& e : rep.entries)
      if (!e.note.empty())
        r.lines.push_back("  t=" + fmt3(e.time) + ": " + e.note);
  }
  r.lines.push_back(
      "note: orders are derived from the Dyson hierarchy (order k means terms 0..k are all "
      "proportional to the target; k+1 is the first misfit)");
  if (c.broken_transparency())
    r.lines.push_back(
        "note: quoted orders for broken-transparency models vary by bookkeeping convention; "
        "the derived numbers above are authoritative");
  r.verdict = any_gray ? "GRAY_ZONE" : all_ok ? "PASS" : "FAIL";
}

inline std::string describe_model(const BuiltModel& built) {
  const Model& m = built.model;
  std::string kind = built.builtin.empty() ? "explicit" : "builtin " + built.builtin;
  return kind + " (d_A=" + std::to_string(m.family.dim_ancilla()) +
         ", d_B=" + std::to_string(m.family.dim_central()) +
         ", horizon=" + fmt3(m.horizon) + ", jumps=" + std::to_string(m.jumps.size()) + ")";
}

} // namespace rundetail

inline RunReport run(const RunConfig& config,
                     std::optional<std::uint64_t> seed_override = {}) {
  const Json& doc = config.doc;
  RunReport report;
  report.version = std::string(version);
  report.seed =
      seed_override ? *seed_override : doc.at("output").at("seed").get<std::uint64_t>();
  report.config_echo = config.echo();
  rundetail::Ctx ctx{doc, build_model(config), report.seed};
  report.model_line = rundetail::describe_model(ctx.built);

  const Json& checks = doc.at("checks");
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const Json& chk = checks[k];
    CheckResult r;
    r.name = chk.at("check").get<std::string>();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (r.name == "cocycle")
        rundetail::run_cocycle(ctx, r);
      else if (r.name == "closure")
        rundetail::run_closure(ctx, r);
      else if (r.name == "lemma1")
        rundetail::run_lemma1(ctx, r, chk, k);
      else if (r.name == "lemma3")
        rundetail::run_lemma3(ctx, r, chk, k);
      else if (r.name == "xi")
        rundetail::run_xi(ctx, r, chk);
      else if (r.name == "theorem1")
        rundetail::run_theorem1(ctx, r, chk, k);
      else if (r.name == "et_condition")
        rundetail::run_et_condition(ctx, r, chk);
      else if (r.name == "nas")
        rundetail::run_nas(ctx, r, chk);
      else
        rundetail::run_pi_order(ctx, r, chk, k);
    } catch (const std::exception& e) {
      r.verdict = "FAIL";
      r.lines.push_back(std::string("error: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.checks.push_back(std::move(r));
    if (report.checks.back().verdict == "GRAY_ZONE") {
      report.aborted = true;
      report.abort_message =
          "check " + std::to_string(k + 1) + " (" + report.checks.back().name +
          ") hit a numerical gray zone: a residual landed between pass_tol and fail_tol, or "
          "verdicts disagreed across evaluation times; remaining checks were skipped. Try "
          "other evaluation times, more integration steps, or a wider pass_tol/fail_tol "
          "separation.";
      break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string pi_order_csv(const CheckResult& result) {
  std::string out = "path_i,path_r,k,residual,c_real,c_imag,verdict\n";
  for (const PiOrderRow& row : result.rows)
    out += std::to_string(row.path_i) + "," + std::to_string(row.path_r) + "," +
           std::to_string(row.k) + "," + fmt17(row.residual) + "," + fmt17(row.c.real()) +
           "," + fmt17(row.c.imag()) + "," + row.verdict + "\n";
  return out;
}

inline std::string summary_csv(const RunReport& report) {
  std::string out = "check,verdict,worst_residual,seconds\n";
  for (const CheckResult& c : report.checks) {
    char seconds[32];
    std::snprintf(seconds, sizeof seconds, "%.3f", c.seconds);
    out += c.name + "," + c.verdict + "," + fmt17(c.worst_residual) + "," + seconds + "\n";
  }
  return out;
}

inline std::string report_text(const RunReport& report) {
  std::string out = "picheck " + report.version + "\n";
  out += "seed: " + std::to_string(report.seed) + "\n";
  out += "model: " + report.model_line + "\n\n";
  for (std::size_t k = 0; k < report.checks.size(); ++k) {
    const CheckResult& c = report.checks[k];
    char seconds[32];
    std::snprintf(seconds, sizeof seconds, "%.3f", c.seconds);
    out += "[" + std::to_string(k + 1) + "] " + c.name + ": " + c.verdict + "  (worst residual " +
           fmt3(c.worst_residual) + ", " + seconds + " s)\n";
    for (const std::string& line : c.lines) out += "    " + line + "\n";
  }
  if (report.aborted) out += "\nABORTED: " + report.abort_message + "\n";
  out += "\nexit code: " + std::to_string(report.exit_code()) + "\n";
  out += "\nconfig echo:\n" + report.config_echo;
  return out;
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Writes report + summary CSV + one CSV per pi_order check; returns the paths.
inline std::vector<std::string> write_outputs(const RunReport& report, const RunConfig& config,
                                              const std::string& out_dir) {
  const Json& output = config.doc.at("output");
  const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;

  const std::filesystem::path report_path = dir / output.at("report").get<std::string>();
  write_text_atomic(report_path, report_text(report));
  written.push_back(report_path.string());

  const std::string prefix = output.at("csv_prefix").get<std::string>();
  const std::filesystem::path summary_path = dir / (prefix + "_summary.csv");
  write_text_atomic(summary_path, summary_csv(report));
  written.push_back(summary_path.string());

  for (std::size_t k = 0; k < report.checks.size(); ++k) {
    if (report.checks[k].name != "pi_order") continue;
    const std::filesystem::path csv_path =
        dir / (prefix + "_check" + std::to_string(k + 1) + "_pi_order.csv");
    write_text_atomic(csv_path, pi_order_csv(report.checks[k]));
    written.push_back(csv_path.string());
  }
  return written;
}

} // namespace picheck
