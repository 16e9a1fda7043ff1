#include "catch_amalgamated.hpp"

#include <random>

#include "spinshape/pulse.hpp"

using namespace spinshape;
using Catch::Approx;

TEST_CASE("parameter count identities") {
  CHECK(param_count(7, 14) == 63);
  CHECK(param_count(5, 8) == 39);
  CHECK(param_count(10, 16) == 78);
  CHECK_THROWS_AS(param_count(0, 5), std::invalid_argument);
}

TEST_CASE("amplitude shift maps a full sine period onto [0, 2]") {
  FourierParams p;
  const double tau = 1e-3;
  p.amp_terms = {{1.0, kTwoPi / tau, 0.0}};
  PulseSpec spec{tau, 2.0, 2.0, 2.0, tau / 1000};
  const auto w = amplitude_waveform(p, midpoint_grid(spec), spec.max_amp);
  const double lo = *std::min_element(w.begin(), w.end());
  const double hi = *std::max_element(w.begin(), w.end());
  CHECK(lo == Approx(0.0).margin(1e-12));
  CHECK(hi == Approx(2.0).epsilon(1e-4));
}

TEST_CASE("amplitude rescale halves the waveform when the ceiling is 1") {
  FourierParams p;
  const double tau = 1e-3;
  p.amp_terms = {{1.0, kTwoPi / tau, 0.0}};
  PulseSpec spec{tau, 1.0, 2.0, 2.0, tau / 1000};
  const auto w = amplitude_waveform(p, midpoint_grid(spec), spec.max_amp);
  const double hi = *std::max_element(w.begin(), w.end());
  CHECK(hi == Approx(1.0));
}

TEST_CASE("all-zero amplitude coefficients give the zero waveform") {
  FourierParams p;
  p.amp_terms = {{0.0, 1.0, 0.5}, {0.0, 2.0, 0.1}};
  PulseSpec spec{1e-3, 1.0, 2.0, 2.0, 1e-5};
  for (double v : amplitude_waveform(p, midpoint_grid(spec), spec.max_amp))
    CHECK(v == 0.0);
}

TEST_CASE("constant amplitude term collapses to zero under the shift") {
  FourierParams p;
  p.amp_terms = {{3.0, 0.0, 1.0}};  // sin is constant when the frequency is 0
  PulseSpec spec{1e-3, 10.0, 2.0, 2.0, 1e-5};
  for (double v : amplitude_waveform(p, midpoint_grid(spec), spec.max_amp))
    CHECK(v == Approx(0.0).margin(1e-15));
}

TEST_CASE("phase waveform oracles") {
  FourierParams p;
  PulseSpec spec{1e-3, 1.0, 2.0, 2.0, 1e-5};
  SECTION("all-zero depth") {
    p.phase_terms = {{0.0, 5.0, 0.3}};
    for (double v : phase_waveform(p, midpoint_grid(spec))) CHECK(v == 0.0);
  }
  SECTION("single constant term") {
    p.phase_terms = {{M_PI, 0.0, M_PI / 2}};
    for (double v : phase_waveform(p, midpoint_grid(spec))) CHECK(v == Approx(M_PI));
  }
  SECTION("two terms evaluated at one point") {
    p.phase_terms = {{0.7, 3.0, 0.2}, {1.1, 5.0, 1.4}};
    const auto w = phase_waveform(p, {0.0});
    CHECK(w[0] == Approx(0.7 * std::sin(0.2) + 1.1 * std::sin(1.4)));
  }
}

TEST_CASE("edge envelope zeros and midpoint value") {
  const double tau = 5e-4;
  CHECK(edge_envelope(0.0, tau, 2.0, 2.0) == Approx(0.0).margin(1e-15));
  CHECK(edge_envelope(tau, tau, 2.0, 2.0) == Approx(0.0).margin(1e-15));
  const double mid = edge_envelope(tau / 2, tau, 2.0, 2.0);
  CHECK(mid == Approx(std::tanh(1.0) * std::tanh(1.0)));
  CHECK(mid == Approx(0.580).margin(5e-4));
  CHECK_THROWS_AS(edge_envelope(-1e-9, tau, 2.0, 2.0), std::invalid_argument);
}

TEST_CASE("sampling zero parameters yields zero waveforms on the full grid") {
  FourierParams p;
  p.amp_terms = {{0.0, 0.0, 0.0}};
  p.phase_terms = {{0.0, 0.0, 0.0}};
  PulseSpec spec{5e-4, kTwoPi * 1e4, 2.0, 2.0, 5e-7};
  const SampledPulse pulse = sample_pulse(p, spec);
  REQUIRE(pulse.amp.size() == 1000);
  for (std::size_t k = 0; k < pulse.amp.size(); ++k) {
    CHECK(pulse.amp[k] == 0.0);
    CHECK(pulse.phase[k] == 0.0);
  }
}

TEST_CASE("500 us pulse at 0.5 us resolution has 1000 steps") {
  PulseSpec spec{500e-6, 1.0, 2.0, 2.0, 0.5e-6};
  CHECK(spec.steps() == 1000);
}

TEST_CASE("non-integral step counts are rejected") {
  PulseSpec spec{500e-6, 1.0, 2.0, 2.0, 0.7e-6};
  CHECK_THROWS_AS(spec.steps(), std::invalid_argument);
}

TEST_CASE("pack and unpack are inverse on length-63 vectors") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  Eigen::VectorXd x(63);
  for (int i = 0; i < 63; ++i) x[i] = u(rng);
  const Eigen::VectorXd y = pack(unpack(x, 7, 14));
  for (int i = 0; i < 63; ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("unpack rejects wrong-length vectors") {
  CHECK_THROWS_AS(unpack(Eigen::VectorXd::Zero(62), 7, 14), std::invalid_argument);
}

TEST_CASE("pack orders the minimal parameter set as (a,b,c,d,f,g)") {
  FourierParams p;
  p.amp_terms = {{1.0, 2.0, 3.0}};
  p.phase_terms = {{4.0, 5.0, 6.0}};
  const Eigen::VectorXd x = pack(p);
  REQUIRE(x.size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(x[i] == i + 1.0);
}

TEST_CASE("sampled amplitudes respect [0, A_max] for random parameters") {
  PulseSpec spec{500e-6, kTwoPi * 1e4, 2.0, 2.0, 2.5e-6};
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> amp(-3.0 * spec.max_amp, 3.0 * spec.max_amp);
  std::uniform_real_distribution<double> freq(0.0, 40.0 * M_PI / spec.duration);
  std::uniform_real_distribution<double> ph(0.0, kTwoPi);
  for (int seed = 0; seed < 100; ++seed) {
    FourierParams p;
    for (int k = 0; k < 7; ++k) p.amp_terms.push_back({amp(rng), freq(rng), ph(rng)});
    for (int k = 0; k < 14; ++k) p.phase_terms.push_back({ph(rng), freq(rng), ph(rng)});
    const SampledPulse pulse = sample_pulse(p, spec);
    for (double a : pulse.amp) {
      CHECK(a >= 0.0);
      CHECK(a <= spec.max_amp * (1.0 + 1e-12));
    }
  }
}
