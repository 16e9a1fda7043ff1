#pragma once

#include <array>
#include <numeric>
#include <utility>
#include <vector>

#include "spinshape/propagator.hpp"

namespace spinshape {

/// Trace infidelity 1 - |Tr(goal^dag U)| / N. Invariant under a global
/// phase of either argument.
inline double gate_infidelity(const CMat& u, const CMat& goal) {
  if (u.rows() != goal.rows() || u.cols() != goal.cols() || u.rows() != u.cols())
    throw std::invalid_argument("gate_infidelity dimension mismatch");
  const Complex tr = goal.conjugate().cwiseProduct(u).sum();
  return 1.0 - std::abs(tr) / static_cast<double>(u.rows());
}

inline void validate_weights(const std::array<double, 3>& alpha) {
  double sum = 0.0;
  for (double a : alpha) {
    if (a < 0.0) throw std::invalid_argument("robustness weights must be non-negative");
    sum += a;
  }
  if (sum <= 0.0) throw std::invalid_argument("robustness weights must not all be zero");
}

/// Weighted mean (a1 F- + a2 F + a3 F+) / (a1 + a2 + a3).
inline double robust_infidelity(const std::array<double, 3>& f,
                                const std::array<double, 3>& alpha) {
  validate_weights(alpha);
  const double wsum = alpha[0] + alpha[1] + alpha[2];
  return (alpha[0] * f[0] + alpha[1] * f[1] + alpha[2] * f[2]) / wsum;
}

/// Unweighted mean of per-subgroup infidelities.
inline double subsystem_infidelity(const std::vector<double>& per_subgroup) {
  if (per_subgroup.empty())
    throw std::invalid_argument("subsystem infidelity of an empty subgroup list");
  return std::accumulate(per_subgroup.begin(), per_subgroup.end(), 0.0) /
         static_cast<double>(per_subgroup.size());
}

/// Calibration-robustness settings. Defaults follow the reference operating
/// point: eps = 0.05, weights (0.3, 0.4, 0.3).
struct Robustness {
  enum class Kind { None, Amplitude, Frequency };
  Kind kind = Kind::None;
  double eps = 0.05;
  std::array<double, 3> alpha{0.3, 0.4, 0.3};
};

/// What to optimize: per-subgroup goal unitaries, robustness flavor and the
/// propagation method.
struct Objective {
  std::vector<std::pair<Subgroup, CMat>> goals;
  Robustness robustness;
  Method method = Method::Fast;
};

inline void validate_objective(const Objective& obj, const SpinSystem& sys) {
  if (obj.goals.empty()) throw std::invalid_argument("objective has no goals");
  if (obj.robustness.kind != Robustness::Kind::None) validate_weights(obj.robustness.alpha);
  for (const auto& [sub, goal] : obj.goals) {
    validate_subgroup(sub, sys.n_spins());
    const long dim = 1l << sub.size();
    if (goal.rows() != dim || goal.cols() != dim)
      throw std::invalid_argument("goal unitary dimension does not match its subgroup");
  }
}

namespace detail {

// Per-lane trace infidelities by column streaming: identity columns are
// propagated in chunks and overlapped with the goal columns, so the total
// unitary is never stored. Lanes of an amplitude triple share one context.
inline std::vector<double> fast_trace_infidelities(const SpinSystem& sys,
                                                   const SampledPulse& pulse, const CMat& goal,
                                                   const Robustness& rob) {
  const int q = sys.n_spins();
  const int dim = 1 << q;

  std::vector<double> amp_scales{1.0};
  std::vector<FastStepContext> ctxs;
  if (rob.kind == Robustness::Kind::Amplitude) {
    amp_scales = {1.0 - rob.eps, 1.0, 1.0 + rob.eps};
    ctxs.push_back(build_fast_context(sys, pulse.dt));
  } else if (rob.kind == Robustness::Kind::Frequency) {
    for (double s : {1.0 - rob.eps, 1.0, 1.0 + rob.eps}) {
      SpinSystem scaled = sys;
      for (int k = 0; k < q; ++k) {
        const double frame = sys.frame_freq.at(sys.species[k]);
        scaled.freq[k] = frame + s * (sys.freq[k] - frame);
      }
      ctxs.push_back(build_fast_context(scaled, pulse.dt));
    }
    amp_scales = {1.0, 1.0, 1.0};
  } else {
    ctxs.push_back(build_fast_context(sys, pulse.dt));
  }
  const int n_lanes = static_cast<int>(amp_scales.size());

  // Chunk size keeps lane blocks around a few MB regardless of dimension.
  const int chunk = std::max(1, std::min(dim, (1 << 18) / dim));
  std::vector<Complex> traces(n_lanes, Complex(0.0, 0.0));
  std::vector<CMat> blocks(n_lanes);

  for (int c0 = 0; c0 < dim; c0 += chunk) {
    const int cols = std::min(chunk, dim - c0);
    std::vector<Lane> lanes;
    for (int i = 0; i < n_lanes; ++i) {
      blocks[i] = CMat::Zero(dim, cols);
      for (int j = 0; j < cols; ++j) blocks[i](c0 + j, j) = 1.0;
      const FastStepContext* ctx = (ctxs.size() == 1) ? &ctxs[0] : &ctxs[i];
      lanes.push_back({ctx, amp_scales[i], &blocks[i]});
    }
    propagate_lanes(lanes, pulse);
    for (int i = 0; i < n_lanes; ++i)
      for (int j = 0; j < cols; ++j)
        traces[i] += goal.col(c0 + j).dot(blocks[i].col(j));  // conjugates goal
  }

  std::vector<double> out(n_lanes);
  for (int i = 0; i < n_lanes; ++i)
    out[i] = 1.0 - std::abs(traces[i]) / static_cast<double>(dim);
  return out;
}

inline double subgroup_infidelity(const SpinSystem& restricted, const SampledPulse& pulse,
                                  const CMat& goal, const Robustness& rob, Method method) {
  if (method == Method::Fast) {
    const auto f = fast_trace_infidelities(restricted, pulse, goal, rob);
    if (rob.kind == Robustness::Kind::None) return f[0];
    return robust_infidelity({f[0], f[1], f[2]}, rob.alpha);
  }
  if (rob.kind == Robustness::Kind::None)
    return gate_infidelity(total_propagator(restricted, pulse, Method::Exact), goal);
  const auto triple = (rob.kind == Robustness::Kind::Amplitude)
                          ? scaled_triple(restricted, pulse, rob.eps, Method::Exact)
                          : frequency_scaled_propagator(restricted, pulse, rob.eps,
                                                        Method::Exact);
  return robust_infidelity({gate_infidelity(triple[0], goal), gate_infidelity(triple[1], goal),
                            gate_infidelity(triple[2], goal)},
                           rob.alpha);
}

}  // namespace detail

/// Full objective value: sample the pulse once, evaluate every subgroup's
/// (robust) infidelity with the selected method, return the subsystem mean.
/// Deterministic for fixed inputs.
inline double evaluate(const Objective& obj, const SpinSystem& sys, const SampledPulse& pulse) {
  validate_objective(obj, sys);
  std::vector<double> per_subgroup;
  per_subgroup.reserve(obj.goals.size());
  for (const auto& [sub, goal] : obj.goals) {
    const SpinSystem restricted = restrict_to_subgroup(sys, sub);
    per_subgroup.push_back(
        detail::subgroup_infidelity(restricted, pulse, goal, obj.robustness, obj.method));
  }
  return subsystem_infidelity(per_subgroup);
}

inline double evaluate(const Objective& obj, const SpinSystem& sys, const FourierParams& params,
                       const PulseSpec& spec) {
  return evaluate(obj, sys, sample_pulse(params, spec));
}

}  // namespace spinshape
