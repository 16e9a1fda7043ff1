// spinshape command-line front end: optimize shaped pulses, simulate and
// verify them, export spectrometer shape files and generate lattice configs.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "spinshape/io.hpp"

namespace fs = std::filesystem;
using namespace spinshape;

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitError = 1;
constexpr int kExitTargetMissed = 2;

struct CommonInputs {
  std::string system_path, goal_path, pulse_path, params_path;
};

SpinSystem load_system(const std::string& path) {
  return parse_system_config(load_json(path));
}

// JSON goal configs need the system for subgroup resolution; a non-JSON
// goal file is read as a plain goal-matrix document over the whole system.
std::vector<std::pair<Subgroup, CMat>> load_goals(const std::string& path,
                                                  const SpinSystem& sys) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  char first = 0;
  in >> first;
  in.seekg(0);
  if (first == '{') {
    json doc;
    in >> doc;
    return build_goals(doc, sys);
  }
  Subgroup all(sys.n_spins());
  std::iota(all.begin(), all.end(), 0);
  const CMat goal = goal_from_stream(in);
  if (goal.rows() != (1 << sys.n_spins()))
    throw std::invalid_argument("goal matrix dimension does not match the system");
  return {{all, goal}};
}

int run_optimize(const std::string& system_path, const std::string& goal_path,
                 const std::string& pulse_path, const std::string& opt_path,
                 const std::string& out_dir) {
  const json system_doc = load_json(system_path);
  const json goal_doc = load_json(goal_path);
  const json pulse_doc = load_json(pulse_path);
  const json opt_doc = load_json(opt_path);

  const SpinSystem sys = parse_system_config(system_doc);
  const PulseConfig pulse_cfg = parse_pulse_config(pulse_doc);
  const OptConfig opt_cfg = parse_opt_config(opt_doc);

  Objective obj;
  obj.goals = build_goals(goal_doc, sys);
  obj.robustness = opt_cfg.robustness;
  obj.method = opt_cfg.method;

  std::cerr << "optimizing " << param_count(pulse_cfg.s_amp, pulse_cfg.s_phase)
            << " parameters over " << obj.goals.size() << " subgroup goal(s), "
            << opt_cfg.n_starts << " start(s)\n";

  const OptimizationRun run =
      optimize_pulse(sys, obj, pulse_cfg.spec, pulse_cfg.s_amp, pulse_cfg.s_phase,
                     opt_cfg.schedule, opt_cfg.simplex, opt_cfg.n_starts, opt_cfg.seed);

  // Final report at the finest schedule step, with and without robustness.
  const PulseSpec final_spec = pulse_cfg.spec.with_dt(opt_cfg.schedule.back());
  Objective plain = obj;
  plain.robustness.kind = Robustness::Kind::None;
  const double final_plain = evaluate(plain, sys, run.best_params, final_spec);
  const bool robust_on = obj.robustness.kind != Robustness::Kind::None;
  const double final_robust =
      robust_on ? evaluate(obj, sys, run.best_params, final_spec) : -1.0;

  fs::create_directories(out_dir);
  RunRecord record;
  record.system_config = system_doc;
  record.goal_config = goal_doc;
  record.pulse_config = pulse_doc;
  record.opt_config = opt_doc;
  record.seed = opt_cfg.seed;
  for (double dt : opt_cfg.schedule) record.schedule_us.push_back(dt * 1e6);
  record.optimization = run_to_json(run);
  record.final_infidelity_plain = final_plain;
  record.final_infidelity_robust = final_robust;
  record.params_path = (fs::path(out_dir) / "best_params.json").string();
  record.shape_path = (fs::path(out_dir) / "pulse.shape").string();
  record.timestamp = iso_timestamp();
  record.target_reached =
      opt_cfg.simplex.target <= 0.0 || run.best_infidelity <= opt_cfg.simplex.target;

  write_text(record.params_path, params_to_json(run.best_params).dump(2) + "\n");
  write_text(record.shape_path,
             export_shape(sample_pulse(run.best_params, final_spec), final_spec.max_amp));
  write_text((fs::path(out_dir) / "run_record.json").string(),
             record_to_json(record).dump(2) + "\n");

  std::cout << "best objective infidelity: " << run.best_infidelity << "\n";
  std::cout << "final plain infidelity:    " << final_plain << "\n";
  if (robust_on) std::cout << "final robust infidelity:   " << final_robust << "\n";
  std::cout << "evaluations: " << run.total_evals << ", wall seconds: " << run.seconds
            << "\n";
  return record.target_reached ? kExitSuccess : kExitTargetMissed;
}

int run_simulate(const std::string& system_path, const std::string& goal_path,
                 const std::string& pulse_path, const std::string& params_path,
                 const std::string& method) {
  const SpinSystem sys = load_system(system_path);
  const PulseConfig pulse_cfg = parse_pulse_config(load_json(pulse_path));
  const FourierParams params = params_from_json(load_json(params_path));

  Objective obj;
  obj.goals = load_goals(goal_path, sys);

  std::vector<Method> methods;
  if (method == "fast" || method == "both") methods.push_back(Method::Fast);
  if (method == "exact" || method == "both") methods.push_back(Method::Exact);
  if (methods.empty()) throw std::invalid_argument("method must be fast, exact or both");

  for (Method m : methods) {
    obj.method = m;
    const double f = evaluate(obj, sys, params, pulse_cfg.spec);
    std::cout << (m == Method::Fast ? "fast" : "exact") << " infidelity: " << f << "\n";
  }
  return kExitSuccess;
}

int run_verify(const std::string& system_path, const std::string& goal_path,
               const std::string& pulse_path, const std::string& params_path,
               double amp_min, double amp_max, int amp_steps, double freq_min,
               double freq_max, int freq_steps, const std::string& out_path) {
  const SpinSystem sys = load_system(system_path);
  const PulseConfig pulse_cfg = parse_pulse_config(load_json(pulse_path));
  const FourierParams params = params_from_json(load_json(params_path));

  Objective obj;
  obj.goals = load_goals(goal_path, sys);
  const SampledPulse pulse = sample_pulse(params, pulse_cfg.spec);

  std::ostringstream out;
  if (amp_steps > 0) {
    out << "# amplitude-scale sweep: scale infidelity\n";
    for (int i = 0; i < amp_steps; ++i) {
      const double scale =
          amp_steps == 1 ? amp_min
                         : amp_min + (amp_max - amp_min) * i / (amp_steps - 1);
      SampledPulse scaled = pulse;
      for (double& a : scaled.amp) a *= scale;
      out << detail::format_fixed6(scale) << " " << evaluate(obj, sys, scaled) << "\n";
    }
  }
  if (freq_steps > 0) {
    out << "# frequency-offset sweep: offset_hz infidelity\n";
    for (int i = 0; i < freq_steps; ++i) {
      const double off_hz =
          freq_steps == 1 ? freq_min
                          : freq_min + (freq_max - freq_min) * i / (freq_steps - 1);
      SpinSystem shifted = sys;
      for (double& w : shifted.freq) w += kTwoPi * off_hz;
      out << detail::format_fixed6(off_hz) << " " << evaluate(obj, shifted, pulse) << "\n";
    }
  }
  if (out_path.empty()) std::cout << out.str();
  else write_text(out_path, out.str());
  return kExitSuccess;
}

int run_export_shape(const std::string& pulse_path, const std::string& params_path,
                     const std::string& out_path) {
  const PulseConfig pulse_cfg = parse_pulse_config(load_json(pulse_path));
  const FourierParams params = params_from_json(load_json(params_path));
  const std::string text =
      export_shape(sample_pulse(params, pulse_cfg.spec), pulse_cfg.spec.max_amp);
  if (out_path.empty()) std::cout << text;
  else write_text(out_path, text);
  return kExitSuccess;
}

int run_lattice_gen(int rows, int cols, double j_hz, double base_hz, double spacing_hz,
                    const std::vector<std::string>& species, const std::string& out_path) {
  SpinSystem sys;
  if (species.empty()) {
    sys = build_square_lattice(rows, cols, j_hz, base_hz, spacing_hz);
  } else {
    std::vector<SpeciesBlock> plan;
    for (const auto& entry : species) {
      SpeciesBlock block;
      const auto c1 = entry.find(':');
      const auto c2 = entry.find(':', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("species block must be label:count:base_hz");
      block.label = entry.substr(0, c1);
      block.count = std::stoi(entry.substr(c1 + 1, c2 - c1 - 1));
      block.base_hz = std::stod(entry.substr(c2 + 1));
      plan.push_back(block);
    }
    sys = build_square_lattice(rows, cols, j_hz, spacing_hz, plan);
  }
  const std::string text = system_to_config(sys).dump(2) + "\n";
  if (out_path.empty()) std::cout << text;
  else write_text(out_path, text);
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shaped-pulse synthesis for coupled spin systems"};
  app.require_subcommand(1);

  int size_cap = kDefaultSpinCap;
  app.add_option("--size-cap", size_cap, "explicit-state spin cap override");

  // optimize
  auto* opt = app.add_subcommand("optimize", "optimize pulse parameters for a goal");
  std::string system_path, goal_path, pulse_path, opt_path, params_path;
  std::string out_dir = ".", out_path, method = "fast";
  opt->add_option("--system", system_path, "system config JSON")->required();
  opt->add_option("--goal", goal_path, "goal config")->required();
  opt->add_option("--pulse", pulse_path, "pulse config JSON")->required();
  opt->add_option("--opt", opt_path, "optimizer config JSON")->required();
  opt->add_option("--out", out_dir, "output directory");

  // simulate
  auto* sim = app.add_subcommand("simulate", "report infidelity of stored parameters");
  sim->add_option("--system", system_path, "system config JSON")->required();
  sim->add_option("--goal", goal_path, "goal config")->required();
  sim->add_option("--pulse", pulse_path, "pulse config JSON")->required();
  sim->add_option("--params", params_path, "parameter document")->required();
  sim->add_option("--method", method, "fast, exact or both");

  // verify
  auto* ver = app.add_subcommand("verify", "sweep calibration errors and emit plot data");
  double amp_min = 0.9, amp_max = 1.1, freq_min = 0.0, freq_max = 0.0;
  int amp_steps = 21, freq_steps = 0;
  ver->add_option("--system", system_path, "system config JSON")->required();
  ver->add_option("--goal", goal_path, "goal config")->required();
  ver->add_option("--pulse", pulse_path, "pulse config JSON")->required();
  ver->add_option("--params", params_path, "parameter document")->required();
  ver->add_option("--amp-min", amp_min, "amplitude scale sweep start");
  ver->add_option("--amp-max", amp_max, "amplitude scale sweep end");
  ver->add_option("--amp-steps", amp_steps, "amplitude sweep points (0 disables)");
  ver->add_option("--freq-min", freq_min, "frequency offset sweep start (Hz)");
  ver->add_option("--freq-max", freq_max, "frequency offset sweep end (Hz)");
  ver->add_option("--freq-steps", freq_steps, "frequency sweep points (0 disables)");
  ver->add_option("--out", out_path, "output file (default stdout)");

  // export-shape
  auto* exp = app.add_subcommand("export-shape", "write a spectrometer shape file");
  exp->add_option("--pulse", pulse_path, "pulse config JSON")->required();
  exp->add_option("--params", params_path, "parameter document")->required();
  exp->add_option("--out", out_path, "output file (default stdout)");

  // lattice-gen
  auto* lat = app.add_subcommand("lattice-gen", "emit a square-lattice system config");
  int rows = 4, cols = 4;
  double j_hz = 50.0, base_hz = 700e6, spacing_hz = 2000.0;
  std::vector<std::string> species;
  lat->add_option("--rows", rows, "lattice rows")->required();
  lat->add_option("--cols", cols, "lattice columns")->required();
  lat->add_option("--j-hz", j_hz, "nearest-neighbour coupling (Hz)");
  lat->add_option("--base-hz", base_hz, "base frequency (Hz, single channel)");
  lat->add_option("--spacing-hz", spacing_hz, "per-spin frequency spacing (Hz)");
  lat->add_option("--species", species,
                  "species blocks label:count:base_hz (repeatable, overrides --base-hz)");
  lat->add_option("--out", out_path, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    set_spin_cap(size_cap);
    if (app.got_subcommand(opt))
      return run_optimize(system_path, goal_path, pulse_path, opt_path, out_dir);
    if (app.got_subcommand(sim))
      return run_simulate(system_path, goal_path, pulse_path, params_path, method);
    if (app.got_subcommand(ver))
      return run_verify(system_path, goal_path, pulse_path, params_path, amp_min, amp_max,
                        amp_steps, freq_min, freq_max, freq_steps, out_path);
    if (app.got_subcommand(exp)) return run_export_shape(pulse_path, params_path, out_path);
    if (app.got_subcommand(lat))
      return run_lattice_gen(rows, cols, j_hz, base_hz, spacing_hz, species, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
