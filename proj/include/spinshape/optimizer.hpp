#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "spinshape/fidelity.hpp"

namespace spinshape {

/// Nelder-Mead settings. Coefficients default to the standard
/// (1, 2, 0.5, 0.5) set.
struct SimplexConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  long max_evals = 10000;       // per nelder_mead call
  double f_tol = 1e-10;         // absolute spread across the simplex
  double target = 0.0;          // stop as soon as a value <= target is seen
  double initial_step = 0.25;   // relative perturbation building the initial simplex
};

inline void validate_simplex_config(const SimplexConfig& c) {
  if (c.reflection <= 0.0) throw std::invalid_argument("reflection coefficient must be > 0");
  if (c.expansion <= c.reflection)
    throw std::invalid_argument("expansion coefficient must exceed reflection");
  if (c.contraction <= 0.0 || c.contraction >= 1.0)
    throw std::invalid_argument("contraction coefficient must lie in (0, 1)");
  if (c.shrink <= 0.0 || c.shrink >= 1.0)
    throw std::invalid_argument("shrink coefficient must lie in (0, 1)");
  if (c.max_evals < 1) throw std::invalid_argument("max_evals must be >= 1");
}

struct NelderMeadResult {
  Eigen::VectorXd x;               // best point ever evaluated
  double f = 0.0;
  long evals = 0;                  // exact objective invocation count
  std::vector<double> best_trace;  // best-so-far after each evaluation
  std::string stop_reason;
};

/// Derivative-free simplex search. Ties between equal values are broken by
/// the lower vertex index. Returns the best point ever evaluated, which may
/// be a rejected trial rather than a simplex vertex.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                                    const Eigen::VectorXd& x0,
                                    const Eigen::VectorXd& scales, const SimplexConfig& cfg) {
  validate_simplex_config(cfg);
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw std::invalid_argument("nelder_mead needs at least one variable");
  if (scales.size() != n) throw std::invalid_argument("scale vector length mismatch");

  NelderMeadResult res;
  res.x = x0;
  res.f = std::numeric_limits<double>::infinity();
  res.stop_reason = "max_evals";

  auto eval = [&](const Eigen::VectorXd& x) {
    const double f = fn(x);
    if (!std::isfinite(f))
      throw std::runtime_error("objective returned a non-finite value after " +
                               std::to_string(res.evals) + " evaluations");
    ++res.evals;
    if (f < res.f) {
      res.f = f;
      res.x = x;
    }
    res.best_trace.push_back(res.f);
    return f;
  };

  std::vector<Eigen::VectorXd> v(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int i = 1; i <= n; ++i)
    v[i][i - 1] += cfg.initial_step * std::max(std::abs(x0[i - 1]), scales[i - 1]);
  for (int i = 0; i <= n; ++i) {
    if (res.evals >= cfg.max_evals) return res;
    fv[i] = eval(v[i]);
    if (res.f <= cfg.target) {
      res.stop_reason = "target";
      return res;
    }
  }

  std::vector<int> order(n + 1);
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = order[0], second_worst = order[n - 1], worst = order[n];

    if (fv[worst] - fv[best] <= cfg.f_tol) {
      res.stop_reason = "f_tol";
      return res;
    }
    if (res.f <= cfg.target) {
      res.stop_reason = "target";
      return res;
    }
    if (res.evals >= cfg.max_evals) {
      res.stop_reason = "max_evals";
      return res;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += v[i];
    centroid /= n;

    const Eigen::VectorXd xr = centroid + cfg.reflection * (centroid - v[worst]);
    const double fr = eval(xr);
    if (res.evals >= cfg.max_evals) return res;

    if (fr < fv[best]) {
      const Eigen::VectorXd xe = centroid + cfg.expansion * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second_worst]) {
      v[worst] = xr;
      fv[worst] = fr;
    } else {
      bool shrink = false;
      if (fr < fv[worst]) {
        if (res.evals >= cfg.max_evals) return res;
        const Eigen::VectorXd xc = centroid + cfg.contraction * (xr - centroid);
        const double fc = eval(xc);
        if (fc <= fr) {
          v[worst] = xc;
          fv[worst] = fc;
        } else {
          shrink = true;
        }
      } else {
        if (res.evals >= cfg.max_evals) return res;
        const Eigen::VectorXd xc = centroid - cfg.contraction * (centroid - v[worst]);
        const double fc = eval(xc);
        if (fc < fv[worst]) {
          v[worst] = xc;
          fv[worst] = fc;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (int i = 1; i <= n; ++i) {
          const int idx = order[i];
          v[idx] = v[order[0]] + cfg.shrink * (v[idx] - v[order[0]]);
          if (res.evals >= cfg.max_evals) return res;
          fv[idx] = eval(v[idx]);
        }
      }
    }
  }
}

/// Seeded random starting point. Amplitude coefficients stay below
/// max_amp/s_A each; modulation frequencies cover up to ten oscillations
/// across the pulse; phases are uniform on their natural ranges.
inline FourierParams random_init(int s_amp, int s_phase, const PulseSpec& spec,
                                 std::uint64_t seed) {
  param_count(s_amp, s_phase);
  validate_spec(spec);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp_dist(0.0, spec.max_amp / s_amp);
  std::uniform_real_distribution<double> freq_dist(0.0, 20.0 * M_PI / spec.duration);
  std::uniform_real_distribution<double> circle_dist(0.0, kTwoPi);
  std::uniform_real_distribution<double> depth_dist(0.0, M_PI);

  FourierParams p;
  p.amp_terms.resize(s_amp);
  p.phase_terms.resize(s_phase);
  for (auto& t : p.amp_terms) {
    t.amp = amp_dist(rng);
    t.freq = freq_dist(rng);
    t.phase = circle_dist(rng);
  }
  for (auto& t : p.phase_terms) {
    t.amp = depth_dist(rng);
    t.freq = freq_dist(rng);
    t.phase = circle_dist(rng);
  }
  return p;
}

/// Strictly decreasing list of time steps, coarse to fine.
using AnnealSchedule = std::vector<double>;

inline void validate_schedule(const AnnealSchedule& schedule, const PulseSpec& spec) {
  if (schedule.empty()) throw std::invalid_argument("annealing schedule must be non-empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0 && schedule[i] >= schedule[i - 1])
      throw std::invalid_argument("annealing schedule must be strictly decreasing");
    spec.with_dt(schedule[i]).steps();  // throws unless duration/dt is integral
  }
}

struct StageRecord {
  double dt = 0.0;
  long evals = 0;
  double initial = 0.0;  // objective at the stage's warm-start point
  double best = 0.0;
  double seconds = 0.0;
};

struct StartRecord {
  std::uint64_t seed = 0;
  double best = 0.0;
  std::vector<StageRecord> stages;
};

struct OptimizationRun {
  std::uint64_t seed = 0;
  int s_amp = 0;
  int s_phase = 0;
  FourierParams best_params;
  double best_infidelity = 0.0;
  long total_evals = 0;
  double seconds = 0.0;
  std::vector<StartRecord> starts;
};

/// Multi-start annealed search: each start draws a random initial guess,
/// then runs one Nelder-Mead pass per schedule stage, warm-starting every
/// stage from the previous stage's best point. Starts after the first are
/// skipped once the target has been reached. Deterministic for a fixed seed.
inline OptimizationRun optimize_pulse(const SpinSystem& sys, const Objective& obj,
                                      const PulseSpec& spec, int s_amp, int s_phase,
                                      const AnnealSchedule& schedule,
                                      const SimplexConfig& cfg, int n_starts,
                                      std::uint64_t seed) {
  if (n_starts < 1) throw std::invalid_argument("n_starts must be >= 1");
  validate_schedule(schedule, spec);
  validate_simplex_config(cfg);
  validate_objective(obj, sys);

  // Per-coordinate scales for the initial simplex; the packed coordinates
  // mix rad/s amplitudes, rad/s frequencies and rad phases.
  const int n = param_count(s_amp, s_phase);
  Eigen::VectorXd scales(n);
  {
    int i = 0;
    for (int k = 0; k < s_amp; ++k) {
      scales[i++] = spec.max_amp / s_amp;
      scales[i++] = kTwoPi / spec.duration;
      scales[i++] = 1.0;
    }
    for (int k = 0; k < s_phase; ++k) {
      scales[i++] = 1.0;
      scales[i++] = kTwoPi / spec.duration;
      scales[i++] = 1.0;
    }
  }

  using Clock = std::chrono::steady_clock;
  const auto run_begin = Clock::now();

  OptimizationRun run;
  run.seed = seed;
  run.s_amp = s_amp;
  run.s_phase = s_phase;
  run.best_infidelity = std::numeric_limits<double>::infinity();

  for (int start = 0; start < n_starts; ++start) {
    StartRecord record;
    record.seed = seed + static_cast<std::uint64_t>(start);
    Eigen::VectorXd x = pack(random_init(s_amp, s_phase, spec, record.seed));
    double start_best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd start_best_x = x;

    for (double dt : schedule) {
      const PulseSpec stage_spec = spec.with_dt(dt);
      auto fn = [&](const Eigen::VectorXd& p) {
        return evaluate(obj, sys, unpack(p, s_amp, s_phase), stage_spec);
      };
      const auto t0 = Clock::now();
      const NelderMeadResult nm = nelder_mead(fn, x, scales, cfg);
      const auto t1 = Clock::now();

      StageRecord stage;
      stage.dt = dt;
      stage.evals = nm.evals;
      stage.initial = nm.best_trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : nm.best_trace.front();
      stage.best = nm.f;
      stage.seconds = std::chrono::duration<double>(t1 - t0).count();
      record.stages.push_back(stage);
      run.total_evals += nm.evals;

      x = nm.x;
      if (nm.f < start_best) {
        start_best = nm.f;
        start_best_x = nm.x;
      }
    }

    record.best = start_best;
    run.starts.push_back(record);
    if (start_best < run.best_infidelity) {
      run.best_infidelity = start_best;
      run.best_params = unpack(start_best_x, s_amp, s_phase);
    }
    if (run.best_infidelity <= cfg.target && cfg.target > 0.0) break;
  }

  run.seconds = std::chrono::duration<double>(Clock::now() - run_begin).count();
  return run;
}

}  // namespace spinshape
