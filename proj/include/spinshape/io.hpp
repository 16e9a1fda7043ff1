#pragma once

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "spinshape/goals.hpp"
#include "spinshape/optimizer.hpp"

namespace spinshape {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Spectrometer-style shape files.
//
// Format (v1): comment-prefixed header, then one line per step with the
// amplitude as a percentage of A_max and the phase in degrees wrapped to
// [0, 360), both with six decimals:
//
//   # spinshape shape v1
//   # points 1000
//   # duration_us 500.000000
//   # amax_hz 10000.000000
//   0.000000 0.000000
//   ...
// ---------------------------------------------------------------------------

namespace detail {

inline double wrap_degrees(double rad) {
  double deg = std::fmod(rad * 180.0 / M_PI, 360.0);
  if (deg < 0.0) deg += 360.0;
  // values that would round to 360.000000 wrap to zero
  deg = std::round(deg * 1e6) / 1e6;
  if (deg >= 360.0) deg = 0.0;
  return deg;
}

inline std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

inline std::string export_shape(const SampledPulse& pulse, double max_amp) {
  if (max_amp <= 0.0) throw std::invalid_argument("max amplitude must be positive");
  const std::size_t m = pulse.amp.size();
  std::ostringstream out;
  out << "# spinshape shape v1\n";
  out << "# points " << m << "\n";
  out << "# duration_us " << detail::format_fixed6(m * pulse.dt * 1e6) << "\n";
  out << "# amax_hz " << detail::format_fixed6(max_amp / kTwoPi) << "\n";
  for (std::size_t k = 0; k < m; ++k) {
    out << detail::format_fixed6(100.0 * pulse.amp[k] / max_amp) << " "
        << detail::format_fixed6(detail::wrap_degrees(pulse.phase[k])) << "\n";
  }
  return out.str();
}

struct ShapeFile {
  double duration_us = 0.0;
  double amax_hz = 0.0;
  SampledPulse pulse;  // amplitudes in rad/s, phases in rad wrapped to [0, 2pi)
};

inline ShapeFile import_shape(std::istream& in) {
  ShapeFile shape;
  long points = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key == "points") hs >> points;
      else if (key == "duration_us") hs >> shape.duration_us;
      else if (key == "amax_hz") hs >> shape.amax_hz;
      continue;
    }
    std::istringstream ls(line);
    double amp_pct, phase_deg;
    if (!(ls >> amp_pct >> phase_deg))
      throw std::invalid_argument("shape file: malformed data line '" + line + "'");
    shape.pulse.amp.push_back(amp_pct / 100.0 * shape.amax_hz * kTwoPi);
    shape.pulse.phase.push_back(phase_deg * M_PI / 180.0);
  }
  if (points < 0 || shape.amax_hz <= 0.0 || shape.duration_us <= 0.0)
    throw std::invalid_argument("shape file: missing or invalid header");
  if (points != static_cast<long>(shape.pulse.amp.size()))
    throw std::invalid_argument("shape file: point count does not match data lines");
  shape.pulse.dt = shape.duration_us * 1e-6 / points;
  return shape;
}

// ---------------------------------------------------------------------------
// Parameter documents.
// ---------------------------------------------------------------------------

inline json params_to_json(const FourierParams& p) {
  json doc;
  doc["version"] = 1;
  doc["s_amp"] = p.amp_terms.size();
  doc["s_phase"] = p.phase_terms.size();
  auto terms = [](const std::vector<SineTerm>& ts) {
    json arr = json::array();
    for (const auto& t : ts) arr.push_back({t.amp, t.freq, t.phase});
    return arr;
  };
  doc["amp_terms"] = terms(p.amp_terms);
  doc["phase_terms"] = terms(p.phase_terms);
  return doc;
}

inline FourierParams params_from_json(const json& doc) {
  FourierParams p;
  auto terms = [](const json& arr) {
    std::vector<SineTerm> ts;
    for (const auto& t : arr) {
      if (!t.is_array() || t.size() != 3)
        throw std::invalid_argument("parameter document: terms must be [amp, freq, phase]");
      ts.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
    }
    return ts;
  };
  p.amp_terms = terms(doc.at("amp_terms"));
  p.phase_terms = terms(doc.at("phase_terms"));
  if (p.amp_terms.empty() || p.phase_terms.empty())
    throw std::invalid_argument("parameter document: needs at least one term per series");
  return p;
}

// ---------------------------------------------------------------------------
// Pulse config: duration_us, max_amp_hz, s_amp, s_phase, optional zeta1,
// zeta2 (default 2) and dt_us (default 0.5; annealing schedules override it
// during optimization).
// ---------------------------------------------------------------------------

struct PulseConfig {
  PulseSpec spec;
  int s_amp = 0;
  int s_phase = 0;
};

inline PulseConfig parse_pulse_config(const json& doc) {
  for (const char* key : {"duration_us", "max_amp_hz", "s_amp", "s_phase"})
    if (!doc.contains(key))
      throw std::invalid_argument(std::string("pulse config missing field '") + key + "'");
  PulseConfig cfg;
  cfg.spec.duration = doc.at("duration_us").get<double>() * 1e-6;
  cfg.spec.max_amp = doc.at("max_amp_hz").get<double>() * kTwoPi;
  cfg.spec.zeta1 = doc.value("zeta1", 2.0);
  cfg.spec.zeta2 = doc.value("zeta2", 2.0);
  cfg.spec.dt = doc.value("dt_us", 0.5) * 1e-6;
  cfg.s_amp = doc.at("s_amp").get<int>();
  cfg.s_phase = doc.at("s_phase").get<int>();
  param_count(cfg.s_amp, cfg.s_phase);
  validate_spec(cfg.spec);
  return cfg;
}

// ---------------------------------------------------------------------------
// Optimizer config.
// ---------------------------------------------------------------------------

struct OptConfig {
  std::uint64_t seed = 1;
  int n_starts = 3;
  AnnealSchedule schedule;  // seconds
  SimplexConfig simplex;
  Robustness robustness;
  Method method = Method::Fast;
};

inline Method parse_method(const std::string& name) {
  if (name == "fast") return Method::Fast;
  if (name == "exact") return Method::Exact;
  throw std::invalid_argument("unknown method '" + name + "' (expected fast or exact)");
}

inline Robustness parse_robustness(const json& doc) {
  Robustness rob;
  const std::string kind = doc.value("kind", "none");
  if (kind == "none") rob.kind = Robustness::Kind::None;
  else if (kind == "amplitude") rob.kind = Robustness::Kind::Amplitude;
  else if (kind == "frequency") rob.kind = Robustness::Kind::Frequency;
  else throw std::invalid_argument("unknown robustness kind '" + kind + "'");
  rob.eps = doc.value("eps", 0.05);
  if (doc.contains("alpha")) {
    const auto a = doc.at("alpha").get<std::vector<double>>();
    if (a.size() != 3) throw std::invalid_argument("robustness alpha must have 3 weights");
    rob.alpha = {a[0], a[1], a[2]};
  }
  if (rob.kind != Robustness::Kind::None) validate_weights(rob.alpha);
  return rob;
}

inline OptConfig parse_opt_config(const json& doc) {
  OptConfig cfg;
  cfg.seed = doc.value("seed", 1ull);
  cfg.n_starts = doc.value("n_starts", 3);
  if (doc.contains("schedule_us"))
    for (double us : doc.at("schedule_us").get<std::vector<double>>())
      cfg.schedule.push_back(us * 1e-6);
  else
    cfg.schedule = {5e-6, 2.5e-6, 1.25e-6, 0.625e-6};
  cfg.simplex.max_evals = doc.value("max_evals", 10000l);
  cfg.simplex.f_tol = doc.value("f_tol", 1e-10);
  cfg.simplex.target = doc.value("target", 0.0);
  cfg.simplex.initial_step = doc.value("initial_step", 0.25);
  cfg.method = parse_method(doc.value("method", "fast"));
  if (doc.contains("robustness")) cfg.robustness = parse_robustness(doc.at("robustness"));
  return cfg;
}

// ---------------------------------------------------------------------------
// Goal configs. JSON documents support:
//   {"type": "rotation", "axis": "x"|"y"|"z", "angle_deg": 90,
//    "targets": [1, 2, ...],        // 1-based, optional: defaults to all spins
//    "subgroups": [[1,2],[3,4]]}    // optional: per-subgroup goals
//   {"type": "odd_rotation", "axis": "x", "angle_deg": 90,
//    "subgroups": [[...]]} or {"tiling": {"rows": R, "cols": C}}
//   {"type": "matrix", "dim": N, "entries": [[re, im], ...]}  // row-major
// A non-JSON goal file is read as a goal matrix document: dimension header,
// then dim^2 whitespace-separated (re, im) pairs.
// ---------------------------------------------------------------------------

inline RotationAxis parse_axis(const json& doc) {
  if (doc.contains("axis_deg")) return RotationAxis::in_plane(doc.at("axis_deg").get<double>() * M_PI / 180.0);
  const std::string axis = doc.value("axis", "x");
  if (axis == "x") return RotationAxis::x();
  if (axis == "y") return RotationAxis::y();
  if (axis == "z") return RotationAxis::z();
  throw std::invalid_argument("unknown rotation axis '" + axis + "'");
}

inline std::vector<Subgroup> parse_subgroups(const json& arr, int n_spins) {
  std::vector<Subgroup> subs;
  for (const auto& entry : arr) {
    Subgroup sub;
    for (const auto& idx : entry) sub.push_back(idx.get<int>() - 1);
    validate_subgroup(sub, n_spins);
    subs.push_back(sub);
  }
  if (subs.empty()) throw std::invalid_argument("goal config: empty subgroup list");
  return subs;
}

inline std::vector<std::pair<Subgroup, CMat>> build_goals(const json& doc,
                                                          const SpinSystem& sys) {
  const int n = sys.n_spins();
  const std::string type = doc.value("type", "");
  std::vector<std::pair<Subgroup, CMat>> goals;

  if (type == "rotation") {
    const double angle = doc.at("angle_deg").get<double>() * M_PI / 180.0;
    const RotationAxis axis = parse_axis(doc);
    std::vector<int> targets;
    if (doc.contains("targets"))
      for (const auto& t : doc.at("targets")) targets.push_back(t.get<int>() - 1);
    else
      for (int k = 0; k < n; ++k) targets.push_back(k);

    std::vector<Subgroup> subs;
    if (doc.contains("subgroups")) {
      subs = parse_subgroups(doc.at("subgroups"), n);
    } else {
      Subgroup all(n);
      std::iota(all.begin(), all.end(), 0);
      subs.push_back(all);
    }
    const std::set<int> target_set(targets.begin(), targets.end());
    for (const auto& sub : subs) {
      RotationGoal g;
      g.axis = axis;
      g.angle = angle;
      for (std::size_t local = 0; local < sub.size(); ++local)
        if (target_set.count(sub[local])) g.targets.push_back(static_cast<int>(local));
      const int q = static_cast<int>(sub.size());
      goals.emplace_back(sub, g.targets.empty() ? identity_goal(q) : rotation_goal(q, g));
    }
  } else if (type == "odd_rotation") {
    const double angle = doc.at("angle_deg").get<double>() * M_PI / 180.0;
    const RotationAxis axis = parse_axis(doc);
    std::vector<Subgroup> subs;
    if (doc.contains("subgroups"))
      subs = parse_subgroups(doc.at("subgroups"), n);
    else if (doc.contains("tiling"))
      subs = default_subgroup_tiling(doc.at("tiling").at("rows").get<int>(),
                                     doc.at("tiling").at("cols").get<int>());
    else
      throw std::invalid_argument("odd_rotation goal needs 'subgroups' or 'tiling'");
    const auto mats = odd_spin_rotation_goals(subs, angle, axis);
    for (std::size_t i = 0; i < subs.size(); ++i) goals.emplace_back(subs[i], mats[i]);
  } else if (type == "matrix") {
    const int dim = doc.at("dim").get<int>();
    if (dim != (1 << n))
      throw std::invalid_argument("goal matrix dimension does not match the system");
    std::ostringstream text;
    text << dim << "\n";
    for (const auto& e : doc.at("entries")) {
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("goal matrix entries must be [re, im] pairs");
      text << e[0].get<double>() << " " << e[1].get<double>() << "\n";
    }
    std::istringstream in(text.str());
    Subgroup all(n);
    std::iota(all.begin(), all.end(), 0);
    goals.emplace_back(all, goal_from_stream(in));
  } else {
    throw std::invalid_argument("goal config: unknown type '" + type + "'");
  }
  return goals;
}

// ---------------------------------------------------------------------------
// Run records.
// ---------------------------------------------------------------------------

inline json run_to_json(const OptimizationRun& run) {
  json doc;
  doc["seed"] = run.seed;
  doc["s_amp"] = run.s_amp;
  doc["s_phase"] = run.s_phase;
  doc["best_infidelity"] = run.best_infidelity;
  doc["best_params"] = params_to_json(run.best_params);
  doc["total_evals"] = run.total_evals;
  doc["seconds"] = run.seconds;
  json starts = json::array();
  for (const auto& s : run.starts) {
    json stages = json::array();
    for (const auto& st : s.stages)
      stages.push_back({{"dt_us", st.dt * 1e6},
                        {"evals", st.evals},
                        {"initial", st.initial},
                        {"best", st.best},
                        {"seconds", st.seconds}});
    starts.push_back({{"seed", s.seed}, {"best", s.best}, {"stages", stages}});
  }
  doc["starts"] = starts;
  return doc;
}

/// Self-contained record of one optimization run: verbatim copies of every
/// input config, the seed and schedule, per-stage traces, final infidelities
/// and the artifact paths written next to it.
struct RunRecord {
  json system_config;
  json goal_config;
  json pulse_config;
  json opt_config;
  std::uint64_t seed = 0;
  std::vector<double> schedule_us;
  json optimization;  // run_to_json output
  double final_infidelity_plain = 0.0;
  double final_infidelity_robust = -1.0;  // -1 when robustness is off
  std::string params_path;
  std::string shape_path;
  std::string timestamp;
  bool target_reached = false;
};

inline json record_to_json(const RunRecord& r) {
  json doc;
  doc["version"] = 1;
  doc["system_config"] = r.system_config;
  doc["goal_config"] = r.goal_config;
  doc["pulse_config"] = r.pulse_config;
  doc["opt_config"] = r.opt_config;
  doc["seed"] = r.seed;
  doc["schedule_us"] = r.schedule_us;
  doc["optimization"] = r.optimization;
  doc["final_infidelity_plain"] = r.final_infidelity_plain;
  doc["final_infidelity_robust"] = r.final_infidelity_robust;
  doc["params_path"] = r.params_path;
  doc["shape_path"] = r.shape_path;
  doc["timestamp"] = r.timestamp;
  doc["target_reached"] = r.target_reached;
  return doc;
}

inline RunRecord record_from_json(const json& doc) {
  RunRecord r;
  r.system_config = doc.at("system_config");
  r.goal_config = doc.at("goal_config");
  r.pulse_config = doc.at("pulse_config");
  r.opt_config = doc.at("opt_config");
  r.seed = doc.at("seed").get<std::uint64_t>();
  r.schedule_us = doc.at("schedule_us").get<std::vector<double>>();
  r.optimization = doc.at("optimization");
  r.final_infidelity_plain = doc.at("final_infidelity_plain").get<double>();
  r.final_infidelity_robust = doc.at("final_infidelity_robust").get<double>();
  r.params_path = doc.at("params_path").get<std::string>();
  r.shape_path = doc.at("shape_path").get<std::string>();
  r.timestamp = doc.at("timestamp").get<std::string>();
  r.target_reached = doc.at("target_reached").get<bool>();
  return r;
}

inline std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// ---------------------------------------------------------------------------
// Small file helpers.
// ---------------------------------------------------------------------------

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json doc;
  in >> doc;
  return doc;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace spinshape
