#pragma once

#include <array>
#include <bit>
#include <vector>

#include "spinshape/pulse.hpp"
#include "spinshape/spin_system.hpp"

namespace spinshape {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

enum class Method { Exact, Fast };

/// Normalized fast Walsh-Hadamard butterfly, in place. Applying it twice
/// returns the input (H^2 = I with the 1/sqrt(2)-per-qubit convention).
inline void fwht(Complex* v, int n) {
  for (int h = 1; h < n; h <<= 1)
    for (int i = 0; i < n; i += h << 1)
      for (int j = i; j < i + h; ++j) {
        const Complex x = v[j];
        const Complex y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) v[i] *= norm;
}

inline void fwht(CVec& v) { fwht(v.data(), static_cast<int>(v.size())); }

inline void fwht_columns(Eigen::Ref<CMat> block) {
  const int n = static_cast<int>(block.rows());
  for (int c = 0; c < block.cols(); ++c) fwht(block.col(c).data(), n);
}

/// Precomputed per-step diagonals of the fast split: Gamma = sum sigma_z/2
/// and the half-step drift phases exp(-i H0 dt/2). Immutable and shareable.
struct FastStepContext {
  int q = 0;
  double dt = 0.0;
  Eigen::VectorXd gamma;       // diagonal of Gamma, length 2^q
  CVec w_half;                 // exp(-i * drift * dt / 2)
  CVec w_full;                 // w_half squared, used when adjacent steps merge
  std::vector<int> popcount;   // set-bit count per basis state; gamma = (q - 2*pop)/2
};

inline FastStepContext build_fast_context(const SpinSystem& sys, double dt) {
  const int q = sys.n_spins();
  check_spin_cap(q);
  const auto drift = drift_diagonal(sys);
  const int dim = 1 << q;

  FastStepContext ctx;
  ctx.q = q;
  ctx.dt = dt;
  ctx.gamma.resize(dim);
  ctx.w_half.resize(dim);
  ctx.w_full.resize(dim);
  ctx.popcount.resize(dim);
  for (int s = 0; s < dim; ++s) {
    const int pop = std::popcount(static_cast<unsigned>(s));
    ctx.popcount[s] = pop;
    ctx.gamma[s] = 0.5 * (q - 2 * pop);
    ctx.w_half[s] = std::polar(1.0, -0.5 * drift[s] * dt);
    ctx.w_full[s] = ctx.w_half[s] * ctx.w_half[s];
  }
  return ctx;
}

namespace detail {

// Phase table over the q+1 distinct Gamma values, indexed by popcount:
// table[p] = exp(i * angle * (q - 2p) / 2).
inline void gamma_phase_table(int q, double angle, Complex* table) {
  for (int p = 0; p <= q; ++p) table[p] = std::polar(1.0, angle * 0.5 * (q - 2 * p));
}

inline void apply_gamma_phase(const FastStepContext& ctx, double angle,
                              Eigen::Ref<CMat> block) {
  std::array<Complex, kMaxSupportedSpins + 1> table;
  gamma_phase_table(ctx.q, angle, table.data());
  const int n = static_cast<int>(block.rows());
  for (int c = 0; c < block.cols(); ++c) {
    Complex* col = block.col(c).data();
    for (int s = 0; s < n; ++s) col[s] *= table[ctx.popcount[s]];
  }
}

inline void apply_diag(const CVec& d, Eigen::Ref<CMat> block) {
  const int n = static_cast<int>(block.rows());
  for (int c = 0; c < block.cols(); ++c) {
    Complex* col = block.col(c).data();
    const Complex* dd = d.data();
    for (int s = 0; s < n; ++s) col[s] *= dd[s];
  }
}

}  // namespace detail

/// One fast step applied to a block of state vectors:
///   U_k ~ exp(-i phi Gamma) W1 exp(-i Omega Gamma dt) W2 exp(i phi Gamma)
/// with W1 = exp(-i H0 dt/2) H_q and W2 = H_q exp(-i H0 dt/2). Diagonal
/// factors act elementwise; H_q acts through the Walsh-Hadamard butterfly.
inline void fast_step_apply(const FastStepContext& ctx, double omega, double phi,
                            Eigen::Ref<CMat> block) {
  if (block.rows() != ctx.gamma.size())
    throw std::invalid_argument("state block dimension does not match context");
  detail::apply_gamma_phase(ctx, phi, block);
  detail::apply_diag(ctx.w_half, block);
  fwht_columns(block);
  detail::apply_gamma_phase(ctx, -omega * ctx.dt, block);
  fwht_columns(block);
  detail::apply_diag(ctx.w_half, block);
  detail::apply_gamma_phase(ctx, -phi, block);
}

namespace detail {

// One propagation lane of a shared-work evaluation: its own state block and
// amplitude scale, with drift diagonals from `ctx`. Lanes of an
// amplitude-scaled triple share one context; frequency-scaled lanes carry
// their own.
struct Lane {
  const FastStepContext* ctx = nullptr;
  double amp_scale = 1.0;
  CMat* block = nullptr;
};

// Apply the full step product of `pulse` to every lane in one pass.
// Adjacent-step diagonals are merged: the trailing exp(-i phi Gamma) W-half
// of step k and the leading W-half exp(i phi Gamma) of step k+1 collapse
// into a single elementwise factor. The phase tables depend only on the
// shared Gamma spectrum and are computed once per step for all lanes.
inline void propagate_lanes(std::vector<Lane>& lanes, const SampledPulse& pulse) {
  if (lanes.empty()) return;
  const int m = static_cast<int>(pulse.amp.size());
  if (m == 0) return;
  const FastStepContext& c0 = *lanes.front().ctx;
  const int q = c0.q;
  const int n = static_cast<int>(c0.gamma.size());
  const double dt = c0.dt;

  for (auto& lane : lanes) {
    if (lane.ctx->q != q || lane.ctx->dt != dt)
      throw std::invalid_argument("propagation lanes must share dimension and time step");
    if (lane.block->rows() != n)
      throw std::invalid_argument("state block dimension does not match context");
  }

  std::array<Complex, kMaxSupportedSpins + 1> phase_tab;
  std::array<Complex, kMaxSupportedSpins + 1> amp_tab;
  CVec merged(n);

  // Leading half step: W2 * exp(i phi_0 Gamma) folded into one diagonal.
  gamma_phase_table(q, pulse.phase[0], phase_tab.data());
  for (auto& lane : lanes) {
    for (int c = 0; c < lane.block->cols(); ++c) {
      Complex* col = lane.block->col(c).data();
      const Complex* wh = lane.ctx->w_half.data();
      for (int s = 0; s < n; ++s) col[s] *= wh[s] * phase_tab[c0.popcount[s]];
    }
  }

  for (int k = 0; k < m; ++k) {
    for (auto& lane : lanes) {
      fwht_columns(*lane.block);
      gamma_phase_table(q, -lane.amp_scale * pulse.amp[k] * dt, amp_tab.data());
      for (int c = 0; c < lane.block->cols(); ++c) {
        Complex* col = lane.block->col(c).data();
        for (int s = 0; s < n; ++s) col[s] *= amp_tab[c0.popcount[s]];
      }
      fwht_columns(*lane.block);
    }

    const bool last = (k == m - 1);
    const double dphi = last ? -pulse.phase[k] : pulse.phase[k + 1] - pulse.phase[k];
    gamma_phase_table(q, dphi, phase_tab.data());
    const CVec* prev_w = nullptr;
    for (auto& lane : lanes) {
      const CVec& w = last ? lane.ctx->w_half : lane.ctx->w_full;
      if (&w != prev_w) {  // lanes sharing a context reuse the merged diagonal
        for (int s = 0; s < n; ++s) merged[s] = w[s] * phase_tab[c0.popcount[s]];
        prev_w = &w;
      }
      apply_diag(merged, *lane.block);
    }
  }
}

inline CMat exact_total(const SpinSystem& sys, const SampledPulse& pulse, double amp_scale);

}  // namespace detail

/// Exact one-step unitary exp(-i (H0 + H_C) dt) via Hermitian
/// eigendecomposition. Serves as the oracle for the fast split.
inline CMat exact_step(const SpinSystem& sys, double omega, double phi, double dt) {
  const int q = sys.n_spins();
  check_spin_cap(q);
  const int dim = 1 << q;
  const auto drift = drift_diagonal(sys);

  CMat h = CMat::Zero(dim, dim);
  for (int s = 0; s < dim; ++s) h(s, s) = drift[s];
  const Complex half_drive = 0.5 * omega * std::polar(1.0, phi);
  for (int s = 0; s < dim; ++s)
    for (int k = 0; k < q; ++k) {
      const int bit = 1 << (q - 1 - k);
      if (!(s & bit)) {
        // raising from |0> to |1> on spin k picks up exp(+i phi)
        h(s | bit, s) += half_drive;
        h(s, s | bit) += std::conj(half_drive);
      }
    }

  Eigen::SelfAdjointEigenSolver<CMat> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition of step Hamiltonian failed");
  const auto& vecs = solver.eigenvectors();
  CVec phases(dim);
  for (int i = 0; i < dim; ++i) phases[i] = std::polar(1.0, -solver.eigenvalues()[i] * dt);
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

/// Ordered product over all pulse steps, U_m ... U_2 U_1.
inline CMat total_propagator(const SpinSystem& sys, const SampledPulse& pulse, Method method) {
  const int dim = 1 << sys.n_spins();
  if (method == Method::Exact) return detail::exact_total(sys, pulse, 1.0);

  const FastStepContext ctx = build_fast_context(sys, pulse.dt);
  CMat u = CMat::Identity(dim, dim);
  std::vector<detail::Lane> lanes{{&ctx, 1.0, &u}};
  detail::propagate_lanes(lanes, pulse);
  return u;
}

namespace detail {

inline CMat exact_total(const SpinSystem& sys, const SampledPulse& pulse, double amp_scale) {
  const int dim = 1 << sys.n_spins();
  CMat u = CMat::Identity(dim, dim);
  for (std::size_t k = 0; k < pulse.amp.size(); ++k)
    u = exact_step(sys, amp_scale * pulse.amp[k], pulse.phase[k], pulse.dt) * u;
  return u;
}

}  // namespace detail

/// Total propagators at amplitudes (1-eps), 1 and (1+eps) times the pulse.
/// The fast path shares the drift diagonals and per-step phase tables
/// between the three lanes; only the amplitude-dependent factor differs.
inline std::array<CMat, 3> scaled_triple(const SpinSystem& sys, const SampledPulse& pulse,
                                         double eps, Method method = Method::Fast) {
  if (eps < 0.0 || eps >= 1.0)
    throw std::invalid_argument("amplitude error eps must lie in [0, 1)");
  const int dim = 1 << sys.n_spins();
  const std::array<double, 3> scales{1.0 - eps, 1.0, 1.0 + eps};

  if (method == Method::Exact) {
    std::array<CMat, 3> out;
    for (int i = 0; i < 3; ++i) out[i] = detail::exact_total(sys, pulse, scales[i]);
    return out;
  }

  const FastStepContext ctx = build_fast_context(sys, pulse.dt);
  std::array<CMat, 3> out;
  std::vector<detail::Lane> lanes;
  for (int i = 0; i < 3; ++i) {
    out[i] = CMat::Identity(dim, dim);
    lanes.push_back({&ctx, scales[i], &out[i]});
  }
  detail::propagate_lanes(lanes, pulse);
  return out;
}

/// Triple with the spin resonance frequencies scaled by (1-eps), 1 and
/// (1+eps) instead of the amplitude. Only the drift diagonals differ.
inline std::array<CMat, 3> frequency_scaled_propagator(const SpinSystem& sys,
                                                       const SampledPulse& pulse, double eps,
                                                       Method method = Method::Fast) {
  if (eps < 0.0 || eps >= 1.0)
    throw std::invalid_argument("frequency error eps must lie in [0, 1)");
  const int dim = 1 << sys.n_spins();
  const std::array<double, 3> scales{1.0 - eps, 1.0, 1.0 + eps};

  // Scaling acts on the frame-relative offsets, not the lab frequencies.
  std::array<SpinSystem, 3> scaled;
  for (int i = 0; i < 3; ++i) {
    scaled[i] = sys;
    for (int k = 0; k < sys.n_spins(); ++k) {
      const double frame = sys.frame_freq.at(sys.species[k]);
      scaled[i].freq[k] = frame + scales[i] * (sys.freq[k] - frame);
    }
  }

  if (method == Method::Exact) {
    std::array<CMat, 3> out;
    for (int i = 0; i < 3; ++i) out[i] = detail::exact_total(scaled[i], pulse, 1.0);
    return out;
  }

  std::array<FastStepContext, 3> ctx;
  std::array<CMat, 3> out;
  std::vector<detail::Lane> lanes;
  for (int i = 0; i < 3; ++i) {
    ctx[i] = build_fast_context(scaled[i], pulse.dt);
    out[i] = CMat::Identity(dim, dim);
    lanes.push_back({&ctx[i], 1.0, &out[i]});
  }
  detail::propagate_lanes(lanes, pulse);
  return out;
}

}  // namespace spinshape
