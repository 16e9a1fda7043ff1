#include "catch_amalgamated.hpp"

#include <sstream>

#include "spinshape/io.hpp"

using namespace spinshape;
using Catch::Approx;

TEST_CASE("shape export converts amplitude percent and wrapped degrees") {
  SampledPulse pulse;
  pulse.dt = 1e-6;
  const double amax = kTwoPi * 10000.0;
  pulse.amp = {0.0, amax};
  pulse.phase = {0.0, M_PI};
  const std::string text = export_shape(pulse, amax);
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "# spinshape shape v1");
  CHECK(lines[1] == "# points 2");
  CHECK(lines[2] == "# duration_us 2.000000");
  CHECK(lines[3] == "# amax_hz 10000.000000");
  CHECK(lines[4] == "0.000000 0.000000");
  CHECK(lines[5] == "100.000000 180.000000");
}

TEST_CASE("all-zero pulse exports zero lines") {
  SampledPulse pulse;
  pulse.dt = 1e-6;
  pulse.amp.assign(4, 0.0);
  pulse.phase.assign(4, 0.0);
  std::istringstream in(export_shape(pulse, kTwoPi * 1000.0));
  std::string line;
  int data = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') {
      CHECK(line == "0.000000 0.000000");
      ++data;
    }
  CHECK(data == 4);
}

TEST_CASE("negative phases wrap into [0, 360)") {
  SampledPulse pulse;
  pulse.dt = 1e-6;
  pulse.amp = {0.0};
  pulse.phase = {-M_PI / 2};
  const std::string text = export_shape(pulse, 1.0);
  CHECK(text.find("0.000000 270.000000") != std::string::npos);
}

TEST_CASE("phases rounding to a full turn wrap to zero") {
  SampledPulse pulse;
  pulse.dt = 1e-6;
  pulse.amp = {0.0};
  pulse.phase = {kTwoPi - 1e-10};
  const std::string text = export_shape(pulse, 1.0);
  CHECK(text.find("0.000000 0.000000") != std::string::npos);
}

TEST_CASE("shape files survive an export-import round trip") {
  SampledPulse pulse;
  pulse.dt = 0.5e-6;
  const double amax = kTwoPi * 10000.0;
  for (int k = 0; k < 8; ++k) {
    pulse.amp.push_back(amax * k / 7.0);
    pulse.phase.push_back(0.7 * k);
  }
  std::istringstream in(export_shape(pulse, amax));
  const ShapeFile shape = import_shape(in);
  CHECK(shape.amax_hz == Approx(10000.0));
  CHECK(shape.duration_us == Approx(4.0));
  REQUIRE(shape.pulse.amp.size() == 8);
  CHECK(shape.pulse.dt == Approx(0.5e-6));
  for (int k = 0; k < 8; ++k) {
    CHECK(shape.pulse.amp[k] == Approx(pulse.amp[k]).margin(amax * 1e-6));
    const double d = std::fmod(shape.pulse.phase[k] - pulse.phase[k] + 3 * kTwoPi, kTwoPi);
    CHECK(std::min(d, kTwoPi - d) == Approx(0.0).margin(1e-6));
  }
}

TEST_CASE("import rejects inconsistent headers") {
  std::istringstream in("# spinshape shape v1\n# points 3\n# duration_us 1.0\n# amax_hz 1.0\n0 0\n");
  CHECK_THROWS_AS(import_shape(in), std::invalid_argument);
}

TEST_CASE("golden shape file for a deterministic pulse") {
  FourierParams p;
  p.amp_terms = {{kTwoPi * 5000.0, kTwoPi / 4e-6, 0.0}};
  p.phase_terms = {{M_PI / 2, 0.0, M_PI / 2}};
  PulseSpec spec{4e-6, kTwoPi * 10000.0, 2.0, 2.0, 1e-6};
  const std::string text = export_shape(sample_pulse(p, spec), spec.max_amp);
  const std::string golden =
      "# spinshape shape v1\n"
      "# points 4\n"
      "# duration_us 4.000000\n"
      "# amax_hz 10000.000000\n"
      "16.303085 90.000000\n"
      "38.097956 90.000000\n"
      "0.000000 90.000000\n"
      "0.000000 90.000000\n";
  CHECK(text == golden);
}

TEST_CASE("parameter documents round trip through json") {
  FourierParams p;
  p.amp_terms = {{1.5, 2.5, 3.5}, {-0.25, 0.125, 9.0}};
  p.phase_terms = {{0.5, 1.25, -2.0}};
  const FourierParams back = params_from_json(params_to_json(p));
  CHECK((pack(back) - pack(p)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pulse config parsing applies defaults") {
  const json doc = {{"duration_us", 500.0}, {"max_amp_hz", 10000.0}, {"s_amp", 7}, {"s_phase", 14}};
  const PulseConfig cfg = parse_pulse_config(doc);
  CHECK(cfg.spec.duration == Approx(500e-6));
  CHECK(cfg.spec.max_amp == Approx(kTwoPi * 10000.0));
  CHECK(cfg.spec.zeta1 == 2.0);
  CHECK(cfg.spec.zeta2 == 2.0);
  CHECK(cfg.spec.dt == Approx(0.5e-6));
  CHECK(cfg.s_amp == 7);
  CHECK(cfg.s_phase == 14);
  CHECK_THROWS_AS(parse_pulse_config(json{{"duration_us", 500.0}}), std::invalid_argument);
}

TEST_CASE("optimizer config parsing applies defaults") {
  const OptConfig cfg = parse_opt_config(json::object());
  CHECK(cfg.seed == 1);
  CHECK(cfg.n_starts == 3);
  REQUIRE(cfg.schedule.size() == 4);
  CHECK(cfg.schedule[0] == Approx(5e-6));
  CHECK(cfg.schedule[3] == Approx(0.625e-6));
  CHECK(cfg.simplex.max_evals == 10000);
  CHECK(cfg.robustness.kind == Robustness::Kind::None);
  CHECK(cfg.method == Method::Fast);
}

TEST_CASE("robustness block parses kind, eps and weights") {
  const json doc = {{"robustness", {{"kind", "amplitude"}, {"eps", 0.07}, {"alpha", {0.2, 0.6, 0.2}}}}};
  const OptConfig cfg = parse_opt_config(doc);
  CHECK(cfg.robustness.kind == Robustness::Kind::Amplitude);
  CHECK(cfg.robustness.eps == 0.07);
  CHECK(cfg.robustness.alpha[1] == 0.6);
  CHECK_THROWS_AS(parse_robustness(json{{"kind", "sideways"}}), std::invalid_argument);
}

TEST_CASE("rotation goal config builds per-subgroup goals") {
  const SpinSystem sys = build_square_lattice(2, 2, 50.0, 700e6, 2000.0);
  const json doc = {{"type", "rotation"},
                    {"axis", "x"},
                    {"angle_deg", 90.0},
                    {"targets", {1, 3}},
                    {"subgroups", {{1, 2}, {3, 4}}}};
  const auto goals = build_goals(doc, sys);
  REQUIRE(goals.size() == 2);
  CHECK(goals[0].first == Subgroup{0, 1});
  RotationGoal expect;
  expect.targets = {0};
  expect.axis = RotationAxis::x();
  expect.angle = M_PI / 2;
  CHECK((goals[0].second - rotation_goal(2, expect)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((goals[1].second - rotation_goal(2, expect)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("odd rotation goal config accepts a tiling") {
  const SpinSystem sys = build_square_lattice(4, 4, 50.0, 700e6, 2000.0);
  const json doc = {{"type", "odd_rotation"},
                    {"axis", "x"},
                    {"angle_deg", 90.0},
                    {"tiling", {{"rows", 4}, {"cols", 4}}}};
  const auto goals = build_goals(doc, sys);
  CHECK(goals.size() == 4);
}

TEST_CASE("matrix goal config parses row-major complex entries") {
  SpinSystem sys;
  sys.freq = {0.0};
  sys.species = {"ch"};
  sys.frame_freq["ch"] = 0.0;
  sys.couplings_hz = Eigen::MatrixXd::Zero(1, 1);
  const json doc = {{"type", "matrix"},
                    {"dim", 2},
                    {"entries", {{0.0, 0.0}, {0.0, -1.0}, {0.0, -1.0}, {0.0, 0.0}}}};
  const auto goals = build_goals(doc, sys);
  REQUIRE(goals.size() == 1);
  CHECK(std::abs(goals[0].second(0, 1) - Complex(0.0, -1.0)) < 1e-14);
}

TEST_CASE("run records survive a serialization round trip") {
  RunRecord r;
  r.system_config = {{"n_spins", 1}};
  r.goal_config = {{"type", "rotation"}};
  r.pulse_config = {{"duration_us", 100.0}};
  r.opt_config = {{"seed", 9}};
  r.seed = 9;
  r.schedule_us = {5.0, 2.5};
  r.optimization = {{"best_infidelity", 0.25}};
  r.final_infidelity_plain = 0.125;
  r.final_infidelity_robust = -1.0;
  r.params_path = "a/b.json";
  r.shape_path = "a/b.shape";
  r.timestamp = "2026-01-01T00:00:00Z";
  r.target_reached = true;
  const RunRecord back = record_from_json(record_to_json(r));
  CHECK(back.system_config == r.system_config);
  CHECK(back.seed == r.seed);
  CHECK(back.schedule_us == r.schedule_us);
  CHECK(back.final_infidelity_plain == r.final_infidelity_plain);
  CHECK(back.params_path == r.params_path);
  CHECK(back.timestamp == r.timestamp);
  CHECK(back.target_reached == r.target_reached);
}
