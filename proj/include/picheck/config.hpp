#pragma once

// Declarative run configuration. A config is a strict JSON document with four
// sections (model, checks, numerics, output). Loading materializes every
// default, so a normalized config serializes canonically (sorted keys,
// two-space indent) and round-trips byte-identically through load + echo.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "picheck/models.hpp"

namespace picheck {

using Json = nlohmann::json;

// Configuration problems carry the offending field (or file:line:column for
// parse errors) in the message; the CLI maps them to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string canonical_dump(const Json& doc) { return doc.dump(2) + "\n"; }

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = e.byte > 0 ? e.byte - 1 : 0;
    for (std::size_t i = 0; i < stop && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": " + e.what());
  }
}

inline Json parse_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str(), path);
}

// Complex matrices are nested arrays of [re, im] pairs: bit-exact doubles,
// no locale ambiguity.
inline Json cmatrix_to_json(const CMatrix& a) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      row.push_back(Json::array({a(r, c).real(), a(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix json_to_cmatrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(where + ": expected a non-empty array of matrix rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(where + ": expected non-empty rows");
  CMatrix a(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError(where + ": ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      const Json& cell = j[r][c];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() || !cell[1].is_number())
        throw ConfigError(where + ": matrix entries must be [re, im] number pairs");
      a(r, c) = complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return a;
}

namespace cfgdetail {

inline void check_keys(const Json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed, bool strict,
                       std::vector<std::string>* warnings) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* key) { return it.key() == key; });
    if (known) continue;
    const std::string msg = where + ": unknown key \"" + it.key() + "\"";
    if (strict) throw ConfigError(msg);
    if (warnings) warnings->push_back(msg);
  }
}

inline double get_number(const Json& obj, const std::string& where, const char* key) {
  if (!obj.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

inline int get_int(const Json& obj, const std::string& where, const char* key) {
  if (!obj.at(key).is_number_integer())
    throw ConfigError(where + "." + key + ": expected an integer");
  return obj.at(key).get<int>();
}

inline bool get_bool(const Json& obj, const std::string& where, const char* key) {
  if (!obj.at(key).is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
  return obj.at(key).get<bool>();
}

inline std::string get_string(const Json& obj, const std::string& where, const char* key) {
  if (!obj.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return obj.at(key).get<std::string>();
}

inline std::vector<double> get_rates(const Json& obj, const std::string& where, const char* key,
                                     std::size_t count, const char* what) {
  const Json& arr = obj.at(key);
  if (!arr.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  if (arr.size() != count)
    throw ConfigError(where + "." + key + ": expected " + std::to_string(count) + " " + what);
  std::vector<double> out;
  for (const Json& v : arr) {
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline void require_nonneg(const std::vector<double>& v, const std::string& where,
                           const char* key) {
  for (double x : v)
    if (!(x >= 0.0)) throw ConfigError(where + "." + key + ": rates must be >= 0");
}

inline Json default_h1(int n) {
  CMatrix h = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) h(j, j) = 0.5 * j;
  return cmatrix_to_json(h);
}

inline void validate_matrix_shape(const Json& obj, const std::string& where, const char* key,
                                  int dim) {
  const CMatrix m = json_to_cmatrix(obj.at(key), where + "." + key);
  if (m.rows() != dim || m.cols() != dim)
    throw ConfigError(where + "." + key + ": expected a " + std::to_string(dim) + "x" +
                      std::to_string(dim) + " matrix");
}

inline void normalize_snap_params(Json& p, bool strict, std::vector<std::string>* warnings) {
  const std::string where = "model.params";
  check_keys(p, where,
             {"d_A", "cavity_dim", "phases", "omega", "h1", "h2", "dephase", "relax",
              "horizon"},
             strict, warnings);
  if (!p.contains("d_A")) p["d_A"] = 4;
  const int d_A = get_int(p, where, "d_A");
  if (d_A < 2) throw ConfigError(where + ".d_A: must be >= 2");
  if (!p.contains("cavity_dim")) p["cavity_dim"] = 2;
  const int n = get_int(p, where, "cavity_dim");
  if (n < 1) throw ConfigError(where + ".cavity_dim: must be >= 1");
  if (!p.contains("omega")) p["omega"] = 1.0;
  if (!(get_number(p, where, "omega") > 0)) throw ConfigError(where + ".omega: must be > 0");
  if (!p.contains("phases")) {
    Json phases = Json::array();
    for (int k = 0; k < n; ++k) phases.push_back(k * std::numbers::pi / 2.0);
    p["phases"] = std::move(phases);
  }
  get_rates(p, where, "phases", static_cast<std::size_t>(n), "phases (one per cavity level)");
  if (!p.contains("h1")) p["h1"] = default_h1(n);
  if (!p.contains("h2")) p["h2"] = cmatrix_to_json(CMatrix::Zero(n, n));
  validate_matrix_shape(p, where, "h1", n);
  validate_matrix_shape(p, where, "h2", n);
  if (!p.contains("dephase")) p["dephase"] = std::vector<double>(d_A, 0.02);
  require_nonneg(get_rates(p, where, "dephase", d_A, "rates (one per level)"), where, "dephase");
  if (!p.contains("relax")) p["relax"] = std::vector<double>(d_A - 1, 0.02);
  require_nonneg(get_rates(p, where, "relax", d_A - 1, "rates (levels 2..d_A)"), where,
                 "relax");
  if (!p.contains("horizon")) p["horizon"] = std::numbers::pi / (2.0 * p["omega"].get<double>());
  if (!(get_number(p, where, "horizon") > 0)) throw ConfigError(where + ".horizon: must be > 0");
}

inline void normalize_et_params(Json& p, bool strict, std::vector<std::string>* warnings) {
  const std::string where = "model.params";
  check_keys(p, where, {"d_A", "d_B", "level_hams", "gammas", "horizon"}, strict, warnings);
  if (!p.contains("d_A")) p["d_A"] = 3;
  const int d_A = get_int(p, where, "d_A");
  if (d_A < 2) throw ConfigError(where + ".d_A: must be >= 2");
  if (!p.contains("d_B")) p["d_B"] = 2;
  const int d_B = get_int(p, where, "d_B");
  if (d_B < 1) throw ConfigError(where + ".d_B: must be >= 1");
  if (!p.contains("level_hams")) {
    Json hams = Json::array();
    for (const CMatrix& h : et_default_level_hams(d_A, d_B)) hams.push_back(cmatrix_to_json(h));
    p["level_hams"] = std::move(hams);
  }
  const Json& hams = p.at("level_hams");
  if (!hams.is_array() || static_cast<int>(hams.size()) != d_A)
    throw ConfigError(where + ".level_hams: expected one matrix per ancilla level");
  for (int m = 0; m < d_A; ++m) {
    const CMatrix h = json_to_cmatrix(hams[m], where + ".level_hams[" + std::to_string(m) + "]");
    if (h.rows() != d_B || h.cols() != d_B)
      throw ConfigError(where + ".level_hams[" + std::to_string(m) + "]: expected d_B x d_B");
  }
  if (!p.contains("gammas")) p["gammas"] = std::vector<double>(d_A - 1, 0.02);
  require_nonneg(get_rates(p, where, "gammas", d_A - 1, "rates (levels 2..d_A)"), where,
                 "gammas");
  if (!p.contains("horizon")) p["horizon"] = std::numbers::pi;
  if (!(get_number(p, where, "horizon") > 0)) throw ConfigError(where + ".horizon: must be > 0");
}

inline void normalize_explicit_model(Json& e, bool strict, std::vector<std::string>* warnings) {
  const std::string where = "model.explicit";
  check_keys(e, where,
             {"d_A", "d_B", "reps", "anchor", "graph", "h_int", "jumps", "level_hams",
              "horizon"},
             strict, warnings);
  for (const char* key : {"d_A", "d_B", "reps", "horizon"})
    if (!e.contains(key)) throw ConfigError(where + "." + key + ": required");
  const int d_A = get_int(e, where, "d_A");
  const int d_B = get_int(e, where, "d_B");
  if (d_A < 2) throw ConfigError(where + ".d_A: must be >= 2");
  if (d_B < 1) throw ConfigError(where + ".d_B: must be >= 1");
  if (!(get_number(e, where, "horizon") > 0)) throw ConfigError(where + ".horizon: must be > 0");
  if (!e.contains("anchor")) e["anchor"] = 1;
  const int anchor = get_int(e, where, "anchor");
  if (anchor < 1 || anchor > d_A) throw ConfigError(where + ".anchor: out of range");
  const Json& reps = e.at("reps");
  if (!reps.is_array() || static_cast<int>(reps.size()) != d_A)
    throw ConfigError(where + ".reps: expected one representative per ancilla level");
  for (int m = 0; m < d_A; ++m) {
    const CMatrix v = json_to_cmatrix(reps[m], where + ".reps[" + std::to_string(m) + "]");
    if (v.rows() != d_B || v.cols() != d_B)
      throw ConfigError(where + ".reps[" + std::to_string(m) + "]: expected d_B x d_B");
  }
  if (!e.contains("graph")) {
    Json edges = Json::array();
    for (const Edge& edge : full_graph(d_A)) edges.push_back(Json::array({edge.first, edge.second}));
    e["graph"] = std::move(edges);
  }
  for (const Json& edge : e.at("graph")) {
    if (!edge.is_array() || edge.size() != 2 || !edge[0].is_number_integer() ||
        !edge[1].is_number_integer())
      throw ConfigError(where + ".graph: edges must be [m, n] integer pairs");
    const int m = edge[0].get<int>(), n = edge[1].get<int>();
    if (m < 1 || m > d_A || n < 1 || n > d_A)
      throw ConfigError(where + ".graph: edge out of range");
  }
  if (!e.contains("h_int")) e["h_int"] = cmatrix_to_json(CMatrix::Zero(d_A * d_B, d_A * d_B));
  validate_matrix_shape(e, where, "h_int", d_A * d_B);
  if (!e.contains("jumps")) e["jumps"] = Json::array();
  Json& jumps = e.at("jumps");
  if (!jumps.is_array()) throw ConfigError(where + ".jumps: expected an array");
  bool any_conjugated = false;
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    Json& jump = jumps[k];
    const std::string jwhere = where + ".jumps[" + std::to_string(k) + "]";
    if (!jump.is_object()) throw ConfigError(jwhere + ": expected an object");
    check_keys(jump, jwhere, {"op", "frame_conjugated"}, strict, warnings);
    if (!jump.contains("op")) throw ConfigError(jwhere + ".op: required");
    const CMatrix op = json_to_cmatrix(jump.at("op"), jwhere + ".op");
    if (op.rows() != d_A * d_B || op.cols() != d_A * d_B)
      throw ConfigError(jwhere + ".op: expected a composite-dimension matrix");
    if (!jump.contains("frame_conjugated")) jump["frame_conjugated"] = false;
    any_conjugated = any_conjugated || get_bool(jump, jwhere, "frame_conjugated");
  }
  if (e.contains("level_hams")) {
    const Json& hams = e.at("level_hams");
    if (!hams.is_array() || static_cast<int>(hams.size()) != d_A)
      throw ConfigError(where + ".level_hams: expected one matrix per ancilla level");
    for (int m = 0; m < d_A; ++m) {
      const CMatrix h =
          json_to_cmatrix(hams[m], where + ".level_hams[" + std::to_string(m) + "]");
      if (h.rows() != d_B || h.cols() != d_B)
        throw ConfigError(where + ".level_hams[" + std::to_string(m) + "]: expected d_B x d_B");
    }
  } else if (any_conjugated) {
    throw ConfigError(where + ".jumps: frame_conjugated jumps require level_hams");
  }
}

inline void normalize_model(Json& model, bool strict, std::vector<std::string>* warnings) {
  if (!model.is_object()) throw ConfigError("model: expected an object");
  check_keys(model, "model", {"builtin", "params", "explicit"}, strict, warnings);
  const bool has_builtin = model.contains("builtin");
  const bool has_explicit = model.contains("explicit");
  if (has_builtin == has_explicit)
    throw ConfigError("model: give exactly one of \"builtin\" or \"explicit\"");
  if (has_builtin) {
    const std::string name = get_string(model, "model", "builtin");
    if (!model.contains("params")) model["params"] = Json::object();
    if (!model.at("params").is_object()) throw ConfigError("model.params: expected an object");
    if (name == "snap")
      normalize_snap_params(model["params"], strict, warnings);
    else if (name == "error_transparent")
      normalize_et_params(model["params"], strict, warnings);
    else
      throw ConfigError("model.builtin: unknown builtin \"" + name +
                        "\" (choose snap or error_transparent)");
  } else {
    if (model.contains("params"))
      throw ConfigError("model.params: only valid with a builtin model");
    if (!model.at("explicit").is_object())
      throw ConfigError("model.explicit: expected an object");
    normalize_explicit_model(model["explicit"], strict, warnings);
  }
}

inline int model_d_A(const Json& model) {
  return model.contains("builtin") ? model.at("params").at("d_A").get<int>()
                                   : model.at("explicit").at("d_A").get<int>();
}

inline bool model_has_level_hams(const Json& model) {
  return model.contains("builtin") || model.at("explicit").contains("level_hams");
}

inline void normalize_numerics(Json& numerics, bool strict,
                               std::vector<std::string>* warnings) {
  if (!numerics.is_object()) throw ConfigError("numerics: expected an object");
  const std::string where = "numerics";
  check_keys(numerics, where,
             {"eq_tol", "pass_tol", "fail_tol", "pmax", "steps", "times", "time_count"},
             strict, warnings);
  if (!numerics.contains("eq_tol")) numerics["eq_tol"] = eq_tol;
  if (!numerics.contains("pass_tol")) numerics["pass_tol"] = 1e-7;
  if (!numerics.contains("fail_tol")) numerics["fail_tol"] = 1e-4;
  if (!numerics.contains("pmax")) numerics["pmax"] = 6;
  if (!numerics.contains("steps")) numerics["steps"] = 2000;
  if (!numerics.contains("times")) numerics["times"] = Json::array();
  if (!numerics.contains("time_count")) numerics["time_count"] = 3;
  for (const char* key : {"eq_tol", "pass_tol", "fail_tol"})
    if (!(get_number(numerics, where, key) > 0))
      throw ConfigError(where + "." + key + ": must be > 0");
  if (!(numerics["pass_tol"].get<double>() < numerics["fail_tol"].get<double>()))
    throw ConfigError(where + ": pass_tol must be < fail_tol");
  if (get_int(numerics, where, "pmax") < 1) throw ConfigError(where + ".pmax: must be >= 1");
  if (get_int(numerics, where, "steps") < 10) throw ConfigError(where + ".steps: must be >= 10");
  if (get_int(numerics, where, "time_count") < 1)
    throw ConfigError(where + ".time_count: must be >= 1");
  if (!numerics.at("times").is_array()) throw ConfigError(where + ".times: expected an array");
  for (const Json& t : numerics.at("times"))
    if (!t.is_number() || !(t.get<double>() > 0))
      throw ConfigError(where + ".times: times must be positive numbers");
}

inline void normalize_output(Json& output, bool strict, std::vector<std::string>* warnings) {
  if (!output.is_object()) throw ConfigError("output: expected an object");
  check_keys(output, "output", {"report", "csv_prefix", "seed"}, strict, warnings);
  if (!output.contains("report")) output["report"] = "report.txt";
  if (!output.contains("csv_prefix")) output["csv_prefix"] = "picheck";
  if (!output.contains("seed")) output["seed"] = std::uint64_t{0};
  if (get_string(output, "output", "report").empty())
    throw ConfigError("output.report: must be non-empty");
  if (get_string(output, "output", "csv_prefix").empty())
    throw ConfigError("output.csv_prefix: must be non-empty");
  const Json& seed = output.at("seed");
  if (!seed.is_number_unsigned() &&
      !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
    throw ConfigError("output.seed: expected a non-negative integer");
  output["seed"] = seed.get<std::uint64_t>();
}

inline void normalize_check(Json& chk, std::size_t index, const Json& model, bool strict,
                            std::vector<std::string>* warnings) {
  const std::string where = "checks[" + std::to_string(index) + "]";
  if (!chk.is_object()) throw ConfigError(where + ": expected an object");
  if (!chk.contains("check") || !chk.at("check").is_string())
    throw ConfigError(where + ".check: required string");
  const std::string name = chk.at("check").get<std::string>();
  const int d_A = model_d_A(model);

  if (name == "cocycle" || name == "closure") {
    check_keys(chk, where, {"check"}, strict, warnings);
  } else if (name == "lemma1" || name == "lemma3") {
    check_keys(chk, where, {"check", "draws"}, strict, warnings);
    if (!chk.contains("draws")) chk["draws"] = 5;
    if (get_int(chk, where, "draws") < 0) throw ConfigError(where + ".draws: must be >= 0");
  } else if (name == "xi") {
    check_keys(chk, where, {"check", "samples"}, strict, warnings);
    if (!chk.contains("samples")) chk["samples"] = 5;
    if (get_int(chk, where, "samples") < 2) throw ConfigError(where + ".samples: must be >= 2");
  } else if (name == "theorem1") {
    check_keys(chk, where, {"check", "expect_exact"}, strict, warnings);
    if (!chk.contains("expect_exact")) chk["expect_exact"] = true;
    get_bool(chk, where, "expect_exact");
  } else if (name == "et_condition") {
    check_keys(chk, where, {"check", "expect_all_transparent"}, strict, warnings);
    if (chk.contains("expect_all_transparent")) get_bool(chk, where, "expect_all_transparent");
    if (!model_has_level_hams(model))
      throw ConfigError(where + " (et_condition): model has no level Hamiltonians");
  } else if (name == "nas") {
    check_keys(chk, where, {"check", "expect_classes"}, strict, warnings);
    if (!model_has_level_hams(model))
      throw ConfigError(where + " (nas): model has no level Hamiltonians");
    if (chk.contains("expect_classes")) {
      const Json& classes = chk.at("expect_classes");
      if (!classes.is_array()) throw ConfigError(where + ".expect_classes: expected an array");
      for (const Json& cls : classes) {
        if (!cls.is_array() || cls.empty())
          throw ConfigError(where + ".expect_classes: classes must be non-empty arrays");
        for (const Json& lvl : cls)
          if (!lvl.is_number_integer() || lvl.get<int>() < 1 || lvl.get<int>() > d_A)
            throw ConfigError(where + ".expect_classes: level out of range");
      }
    }
  } else if (name == "pi_order") {
    check_keys(chk, where,
               {"check", "paths", "expect", "pmax", "pass_tol", "fail_tol", "times", "steps"},
               strict, warnings);
    if (!chk.contains("paths") || !chk.at("paths").is_array() || chk.at("paths").empty())
      throw ConfigError(where + ".paths: required non-empty array of [i, r] pairs");
    for (const Json& path : chk.at("paths")) {
      if (!path.is_array() || path.size() != 2 || !path[0].is_number_integer() ||
          !path[1].is_number_integer())
        throw ConfigError(where + ".paths: paths must be [i, r] integer pairs");
      const int i = path[0].get<int>(), r = path[1].get<int>();
      if (i < 1 || i > d_A || r < 1 || r > d_A)
        throw ConfigError(where + ".paths: path level out of range [1, d_A]");
    }
    if (chk.contains("expect")) {
      const Json& expect = chk.at("expect");
      if (!expect.is_array() || expect.size() != chk.at("paths").size())
        throw ConfigError(where + ".expect: expected one entry per path");
      for (const Json& e : expect) {
        const bool ok_int = e.is_number_integer() && e.get<int>() >= 0;
        const bool ok_str = e.is_string() && (e.get<std::string>() == "exact" ||
                                              e.get<std::string>() == "unreachable");
        if (!ok_int && !ok_str)
          throw ConfigError(where +
                            ".expect: entries are non-negative integers, \"exact\", or "
                            "\"unreachable\"");
      }
    }
    if (chk.contains("pmax") && get_int(chk, where, "pmax") < 1)
      throw ConfigError(where + ".pmax: must be >= 1");
    if (chk.contains("steps") && get_int(chk, where, "steps") < 10)
      throw ConfigError(where + ".steps: must be >= 10");
    for (const char* key : {"pass_tol", "fail_tol"})
      if (chk.contains(key) && !(get_number(chk, where, key) > 0))
        throw ConfigError(where + "." + key + ": must be > 0");
    if (chk.contains("times")) {
      if (!chk.at("times").is_array() || chk.at("times").empty())
        throw ConfigError(where + ".times: expected a non-empty array");
      for (const Json& t : chk.at("times"))
        if (!t.is_number() || !(t.get<double>() > 0))
          throw ConfigError(where + ".times: times must be positive numbers");
    }
  } else {
    throw ConfigError(where + ".check: unknown check \"" + name + "\"");
  }
}

} // namespace cfgdetail

inline Json normalize_config(Json doc, bool strict = true,
                             std::vector<std::string>* warnings = nullptr) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  cfgdetail::check_keys(doc, "config", {"model", "checks", "numerics", "output"}, strict,
                        warnings);
  if (!doc.contains("model")) throw ConfigError("model: required");
  cfgdetail::normalize_model(doc["model"], strict, warnings);
  if (!doc.contains("numerics")) doc["numerics"] = Json::object();
  cfgdetail::normalize_numerics(doc["numerics"], strict, warnings);
  if (!doc.contains("output")) doc["output"] = Json::object();
  cfgdetail::normalize_output(doc["output"], strict, warnings);
  if (!doc.contains("checks")) doc["checks"] = Json::array();
  if (!doc.at("checks").is_array()) throw ConfigError("checks: expected an array");
  Json& checks = doc["checks"];
  // Per-check pass/fail overrides still have to leave a usable window.
  for (std::size_t k = 0; k < checks.size(); ++k) {
    cfgdetail::normalize_check(checks[k], k, doc.at("model"), strict, warnings);
    if (checks[k].at("check") == "pi_order") {
      const double pass = checks[k].contains("pass_tol")
                              ? checks[k].at("pass_tol").get<double>()
                              : doc.at("numerics").at("pass_tol").get<double>();
      const double fail = checks[k].contains("fail_tol")
                              ? checks[k].at("fail_tol").get<double>()
                              : doc.at("numerics").at("fail_tol").get<double>();
      if (!(pass < fail))
        throw ConfigError("checks[" + std::to_string(k) +
                          "]: pass_tol must be < fail_tol after overrides");
    }
  }
  return doc;
}

struct RunConfig {
  Json doc; // normalized: every default materialized
  std::string echo() const { return canonical_dump(doc); }
};

inline RunConfig load_config(const std::string& path, bool strict = true,
                             std::vector<std::string>* warnings = nullptr) {
  return RunConfig{normalize_config(parse_json_file(path), strict, warnings)};
}

// ---------------------------------------------------------------------------
// Config -> Model

struct BuiltModel {
  Model model;
  std::string builtin; // "snap", "error_transparent", or "" for explicit models
};

inline BuiltModel build_model(const RunConfig& config) {
  const Json& model = config.doc.at("model");
  try {
    if (model.contains("builtin")) {
      const std::string name = model.at("builtin").get<std::string>();
      const Json& p = model.at("params");
      if (name == "snap") {
        SnapSpec spec;
        spec.d_A = p.at("d_A").get<int>();
        spec.cavity_dim = p.at("cavity_dim").get<int>();
        spec.phases = p.at("phases").get<std::vector<double>>();
        spec.omega = p.at("omega").get<double>();
        spec.h1 = json_to_cmatrix(p.at("h1"), "model.params.h1");
        spec.h2 = json_to_cmatrix(p.at("h2"), "model.params.h2");
        spec.dephase = p.at("dephase").get<std::vector<double>>();
        spec.relax = p.at("relax").get<std::vector<double>>();
        spec.horizon = p.at("horizon").get<double>();
        return {snap_model(spec), name};
      }
      EtSpec spec;
      spec.d_A = p.at("d_A").get<int>();
      spec.d_B = p.at("d_B").get<int>();
      for (std::size_t m = 0; m < p.at("level_hams").size(); ++m)
        spec.level_hams.push_back(
            json_to_cmatrix(p.at("level_hams")[m], "model.params.level_hams"));
      spec.gammas = p.at("gammas").get<std::vector<double>>();
      spec.horizon = p.at("horizon").get<double>();
      return {et_model(spec), name};
    }

    const Json& e = model.at("explicit");
    const int d_A = e.at("d_A").get<int>();
    const int d_B = e.at("d_B").get<int>();
    std::vector<CMatrix> reps;
    for (std::size_t m = 0; m < e.at("reps").size(); ++m)
      reps.push_back(json_to_cmatrix(e.at("reps")[m], "model.explicit.reps"));
    Family family(d_A, d_B, std::move(reps), e.at("anchor").get<int>());
    Graph graph;
    for (const Json& edge : e.at("graph"))
      graph.insert({edge[0].get<int>(), edge[1].get<int>()});
    const CMatrix h_int = json_to_cmatrix(e.at("h_int"), "model.explicit.h_int");
    std::vector<Jump> jumps;
    for (const Json& jump : e.at("jumps"))
      jumps.push_back({json_to_cmatrix(jump.at("op"), "model.explicit.jumps.op"),
                       jump.at("frame_conjugated").get<bool>()});
    std::optional<DiagonalFrame> frame;
    const double horizon = e.at("horizon").get<double>();
    if (e.contains("level_hams")) {
      std::vector<CMatrix> hams;
      for (std::size_t m = 0; m < e.at("level_hams").size(); ++m)
        hams.push_back(json_to_cmatrix(e.at("level_hams")[m], "model.explicit.level_hams"));
      frame = DiagonalFrame::constant(std::move(hams), horizon);
    }
    return {Model{std::move(family), std::move(graph), h_int, std::move(jumps),
                  std::move(frame), horizon},
            ""};
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

// Ready-to-edit default configs for the shipped builtins, fully normalized.
inline Json builtin_config(const std::string& name) {
  Json doc;
  if (name == "snap") {
    doc["model"] = Json{{"builtin", "snap"}, {"params", Json::object()}};
    doc["checks"] = Json::array({
        Json{{"check", "cocycle"}},
        Json{{"check", "closure"}},
        Json{{"check", "lemma1"}},
        Json{{"check", "lemma3"}},
        Json{{"check", "xi"}},
        Json{{"check", "nas"},
             {"expect_classes", Json::array({Json::array({1}), Json::array({2, 3, 4})})}},
        Json{{"check", "theorem1"}, {"expect_exact", false}},
        Json{{"check", "pi_order"},
             {"paths",
              Json::array({Json::array({1, 4}), Json::array({1, 3}), Json::array({1, 2})})},
             {"expect", Json::array({2, 3, 4})}},
    });
  } else if (name == "error_transparent") {
    doc["model"] = Json{{"builtin", "error_transparent"}, {"params", Json::object()}};
    doc["checks"] = Json::array({
        Json{{"check", "cocycle"}},
        Json{{"check", "closure"}},
        Json{{"check", "lemma1"}},
        Json{{"check", "lemma3"}},
        Json{{"check", "xi"}},
        Json{{"check", "et_condition"}, {"expect_all_transparent", true}},
        Json{{"check", "nas"}, {"expect_classes", Json::array({Json::array({1, 2, 3})})}},
        Json{{"check", "theorem1"}, {"expect_exact", true}},
        Json{{"check", "pi_order"},
             {"paths", Json::array({Json::array({1, 2}), Json::array({1, 3})})},
             {"expect", Json::array({"exact", "exact"})},
             {"pmax", 3}},
    });
  } else {
    throw ConfigError("unknown builtin \"" + name + "\" (choose snap or error_transparent)");
  }
  return normalize_config(std::move(doc), true, nullptr);
}

} // namespace picheck
