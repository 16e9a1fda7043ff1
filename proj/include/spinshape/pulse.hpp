#pragma once

#include <algorithm>
#include <vector>

#include "spinshape/common.hpp"

namespace spinshape {

/// One term of a sine series: amp * sin(freq * t + phase).
struct SineTerm {
  double amp = 0.0;
  double freq = 0.0;
  double phase = 0.0;
};

/// Sine-series coefficients for the amplitude and phase envelopes.
/// Total free-parameter count is 3 * (s_A + s_P).
struct FourierParams {
  std::vector<SineTerm> amp_terms;    // amp in rad/s, freq in rad/s, phase in rad
  std::vector<SineTerm> phase_terms;  // amp in rad, freq in rad/s, phase in rad
};

inline int param_count(int s_amp, int s_phase) {
  if (s_amp < 1 || s_phase < 1)
    throw std::invalid_argument("sine-series term counts must be >= 1");
  return 3 * (s_amp + s_phase);
}

/// Fixed shape of one pulse: duration, amplitude ceiling, edge-envelope
/// steepness and time step. duration/dt must be an integer step count.
struct PulseSpec {
  double duration = 0.0;  // seconds
  double max_amp = 0.0;   // rad/s
  double zeta1 = 2.0;
  double zeta2 = 2.0;
  double dt = 0.0;        // seconds

  int steps() const {
    const double ratio = duration / dt;
    const int m = static_cast<int>(std::llround(ratio));
    if (m < 1 || std::abs(ratio - m) > 1e-6 * ratio)
      throw std::invalid_argument("duration/dt must be a positive integer step count");
    return m;
  }

  PulseSpec with_dt(double new_dt) const {
    PulseSpec s = *this;
    s.dt = new_dt;
    return s;
  }
};

inline void validate_spec(const PulseSpec& spec) {
  if (spec.duration <= 0) throw std::invalid_argument("pulse duration must be positive");
  if (spec.max_amp <= 0) throw std::invalid_argument("max amplitude must be positive");
  if (spec.dt <= 0) throw std::invalid_argument("time step must be positive");
  spec.steps();
}

/// Pulse sampled onto a time grid: per-step amplitude (rad/s, clipped to
/// [0, max_amp] and envelope-forced to ~0 at the edges) and phase (rad,
/// unwrapped).
struct SampledPulse {
  double dt = 0.0;
  std::vector<double> amp;
  std::vector<double> phase;
};

/// tanh edge window: zero at both pulse ends, strictly positive inside,
/// bounded above by 1.
inline double edge_envelope(double t, double duration, double zeta1, double zeta2) {
  if (t < 0 || t > duration)
    throw std::invalid_argument("edge_envelope time outside [0, duration]");
  return -std::tanh(zeta1 * t / duration) * std::tanh(zeta2 * (t - duration) / duration);
}

/// Raw amplitude series on the grid, shifted so its minimum over the grid is
/// exactly 0, then rescaled by max_amp/max only when the shifted maximum
/// exceeds max_amp. A constant series (all freq = 0) collapses to zero under
/// the shift.
inline std::vector<double> amplitude_waveform(const FourierParams& params,
                                              const std::vector<double>& grid,
                                              double max_amp) {
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (const auto& term : params.amp_terms)
      w[i] += term.amp * std::sin(term.freq * grid[i] + term.phase);
  if (w.empty()) return w;
  const double lo = *std::min_element(w.begin(), w.end());
  for (double& v : w) v -= lo;
  const double hi = *std::max_element(w.begin(), w.end());
  if (hi > max_amp) {
    const double scale = max_amp / hi;
    for (double& v : w) v *= scale;
  }
  return w;
}

inline std::vector<double> phase_waveform(const FourierParams& params,
                                          const std::vector<double>& grid) {
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (const auto& term : params.phase_terms)
      w[i] += term.amp * std::sin(term.freq * grid[i] + term.phase);
  return w;
}

/// Midpoint grid: sample k sits at (k + 1/2) * dt.
inline std::vector<double> midpoint_grid(const PulseSpec& spec) {
  const int m = spec.steps();
  std::vector<double> grid(m);
  for (int k = 0; k < m; ++k) grid[k] = (k + 0.5) * spec.dt;
  return grid;
}

/// Evaluate the parameterization on the midpoint grid. The shift/rescale
/// clipping runs first; the edge envelope multiplies afterwards, so the
/// [0, max_amp] bound is preserved and both pulse ends are forced near zero.
inline SampledPulse sample_pulse(const FourierParams& params, const PulseSpec& spec) {
  validate_spec(spec);
  const auto grid = midpoint_grid(spec);
  SampledPulse p;
  p.dt = spec.dt;
  p.amp = amplitude_waveform(params, grid, spec.max_amp);
  p.phase = phase_waveform(params, grid);
  for (std::size_t k = 0; k < grid.size(); ++k)
    p.amp[k] *= edge_envelope(grid[k], spec.duration, spec.zeta1, spec.zeta2);
  return p;
}

// Flat-vector layout: all amplitude triples (a, b, c) in order, then all
// phase triples (d, f, g).
inline Eigen::VectorXd pack(const FourierParams& params) {
  Eigen::VectorXd x(3 * (params.amp_terms.size() + params.phase_terms.size()));
  int i = 0;
  for (const auto& t : params.amp_terms) {
    x[i++] = t.amp;
    x[i++] = t.freq;
    x[i++] = t.phase;
  }
  for (const auto& t : params.phase_terms) {
    x[i++] = t.amp;
    x[i++] = t.freq;
    x[i++] = t.phase;
  }
  return x;
}

inline FourierParams unpack(const Eigen::VectorXd& x, int s_amp, int s_phase) {
  if (x.size() != param_count(s_amp, s_phase))
    throw std::invalid_argument("parameter vector length " + std::to_string(x.size()) +
                                " does not match 3*(s_A+s_P) = " +
                                std::to_string(3 * (s_amp + s_phase)));
  FourierParams params;
  params.amp_terms.resize(s_amp);
  params.phase_terms.resize(s_phase);
  int i = 0;
  for (auto& t : params.amp_terms) {
    t.amp = x[i++];
    t.freq = x[i++];
    t.phase = x[i++];
  }
  for (auto& t : params.phase_terms) {
    t.amp = x[i++];
    t.freq = x[i++];
    t.phase = x[i++];
  }
  return params;
}

}  // namespace spinshape
