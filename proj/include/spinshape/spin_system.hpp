#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinshape/common.hpp"

namespace spinshape {

/// Coupled spin-1/2 system in one or more rotating frames.
///
/// Frequencies are stored in rad/s internally; all config I/O is in Hz.
/// Couplings are scalar (J) couplings in Hz, symmetric with zero diagonal.
struct SpinSystem {
  std::vector<double> freq;                  // per-spin resonance frequency, rad/s
  Eigen::MatrixXd couplings_hz;              // symmetric n x n, zero diagonal
  std::vector<std::string> species;          // per-spin channel label
  std::map<std::string, double> frame_freq;  // channel label -> rotating-frame freq, rad/s

  int n_spins() const { return static_cast<int>(freq.size()); }
};

inline void validate_system(const SpinSystem& sys) {
  const int n = sys.n_spins();
  if (n < 1) throw std::invalid_argument("spin system must contain at least one spin");
  if (sys.couplings_hz.rows() != n || sys.couplings_hz.cols() != n)
    throw std::invalid_argument("coupling table dimension does not match spin count");
  if (static_cast<int>(sys.species.size()) != n)
    throw std::invalid_argument("species list length does not match spin count");
  for (int i = 0; i < n; ++i) {
    if (sys.couplings_hz(i, i) != 0.0)
      throw std::invalid_argument("coupling table has nonzero diagonal");
    for (int j = 0; j < i; ++j)
      if (sys.couplings_hz(i, j) != sys.couplings_hz(j, i))
        throw std::invalid_argument("coupling table is not symmetric");
    if (!sys.frame_freq.count(sys.species[i]))
      throw std::invalid_argument("spin species '" + sys.species[i] +
                                  "' has no rotating-frame frequency");
  }
}

/// Ordered list of distinct 0-based spin indices into a parent system.
using Subgroup = std::vector<int>;

inline void validate_subgroup(const Subgroup& sub, int n_spins) {
  if (sub.empty()) throw std::invalid_argument("subgroup must be non-empty");
  std::set<int> seen;
  for (int idx : sub) {
    if (idx < 0 || idx >= n_spins)
      throw std::invalid_argument("subgroup index " + std::to_string(idx + 1) + " out of range");
    if (!seen.insert(idx).second)
      throw std::invalid_argument("subgroup contains duplicate index");
  }
}

/// Per-spin offset from the rotating frame of its channel, rad/s.
inline std::vector<double> frame_offsets(const SpinSystem& sys) {
  std::vector<double> off(sys.freq.size());
  for (int k = 0; k < sys.n_spins(); ++k)
    off[k] = sys.freq[k] - sys.frame_freq.at(sys.species[k]);
  return off;
}

// Basis convention: spin k corresponds to bit (n-1-k) of the state index,
// so spin 0 is the leftmost factor of the tensor product. sigma_z eigenvalue
// is +1 when the bit is 0.
inline double spin_z(std::uint64_t state, int k, int n) {
  return ((state >> (n - 1 - k)) & 1u) ? -1.0 : 1.0;
}

/// Diagonal of the drift Hamiltonian H0/hbar in rad/s: per-spin offset terms
/// plus pi*J/4 sigma_z sigma_z coupling terms, length 2^n.
inline Eigen::VectorXd drift_diagonal(const SpinSystem& sys) {
  const int n = sys.n_spins();
  check_spin_cap(n);
  const auto off = frame_offsets(sys);
  const std::uint64_t dim = 1ull << n;

  // Collect the nonzero couplings once; lattice tables are sparse.
  struct Pair { int k, l; double j_hz; };
  std::vector<Pair> pairs;
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l)
      if (sys.couplings_hz(k, l) != 0.0) pairs.push_back({k, l, sys.couplings_hz(k, l)});

  Eigen::VectorXd d(dim);
  for (std::uint64_t s = 0; s < dim; ++s) {
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += 0.5 * off[k] * spin_z(s, k, n);
    for (const auto& p : pairs)
      v += 0.25 * M_PI * p.j_hz * spin_z(s, p.k, n) * spin_z(s, p.l, n);
    d[s] = v;
  }
  return d;
}

/// New system over only the subgroup spins. Intra-subgroup couplings are
/// kept; couplings crossing the subgroup boundary are dropped.
inline SpinSystem restrict_to_subgroup(const SpinSystem& sys, const Subgroup& sub) {
  validate_subgroup(sub, sys.n_spins());
  const int m = static_cast<int>(sub.size());
  SpinSystem out;
  out.freq.resize(m);
  out.species.resize(m);
  out.couplings_hz = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    out.freq[a] = sys.freq[sub[a]];
    out.species[a] = sys.species[sub[a]];
    for (int b = 0; b < m; ++b)
      if (a != b) out.couplings_hz(a, b) = sys.couplings_hz(sub[a], sub[b]);
  }
  for (const auto& sp : out.species) out.frame_freq[sp] = sys.frame_freq.at(sp);
  return out;
}

/// One contiguous block of a multi-channel lattice: `count` spins of the
/// given species whose frequencies start at base_hz and step by the lattice
/// spacing.
struct SpeciesBlock {
  std::string label;
  int count = 0;
  double base_hz = 0.0;
};

/// Square lattice with equal nearest-neighbour couplings, row-major spin
/// order. Spin k of a species block has frequency 2*pi*[b + s*(k-1)] with k
/// counted from 1 inside the block; each channel's frame sits at the mean of
/// its first and last spin frequency.
inline SpinSystem build_square_lattice(int rows, int cols, double j_hz, double spacing_hz,
                                       const std::vector<SpeciesBlock>& plan) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("lattice dimensions must be >= 1");
  const int n = rows * cols;
  int planned = 0;
  for (const auto& b : plan) planned += b.count;
  if (planned != n)
    throw std::invalid_argument("species block sizes sum to " + std::to_string(planned) +
                                ", expected " + std::to_string(n));

  SpinSystem sys;
  sys.freq.reserve(n);
  sys.species.reserve(n);
  for (const auto& b : plan) {
    if (b.count < 1) throw std::invalid_argument("species block must contain at least one spin");
    for (int k = 0; k < b.count; ++k) {
      sys.freq.push_back(kTwoPi * (b.base_hz + spacing_hz * k));
      sys.species.push_back(b.label);
    }
    const double first = kTwoPi * b.base_hz;
    const double last = kTwoPi * (b.base_hz + spacing_hz * (b.count - 1));
    sys.frame_freq[b.label] = 0.5 * (first + last);
  }

  sys.couplings_hz = Eigen::MatrixXd::Zero(n, n);
  auto idx = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) {
        sys.couplings_hz(idx(r, c), idx(r, c + 1)) = j_hz;
        sys.couplings_hz(idx(r, c + 1), idx(r, c)) = j_hz;
      }
      if (r + 1 < rows) {
        sys.couplings_hz(idx(r, c), idx(r + 1, c)) = j_hz;
        sys.couplings_hz(idx(r + 1, c), idx(r, c)) = j_hz;
      }
    }
  validate_system(sys);
  return sys;
}

inline SpinSystem build_square_lattice(int rows, int cols, double j_hz, double base_hz,
                                       double spacing_hz) {
  return build_square_lattice(rows, cols, j_hz, spacing_hz,
                              {{"ch", rows * cols, base_hz}});
}

/// Default subgroup tiling for a rows x cols lattice: non-overlapping 2x2
/// blocks, with pair (or single) fill-ins along odd edges.
inline std::vector<Subgroup> default_subgroup_tiling(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("lattice dimensions must be >= 1");
  auto idx = [cols](int r, int c) { return r * cols + c; };
  std::vector<Subgroup> tiles;
  const int r2 = rows - rows % 2;
  const int c2 = cols - cols % 2;
  for (int r = 0; r < r2; r += 2)
    for (int c = 0; c < c2; c += 2)
      tiles.push_back({idx(r, c), idx(r, c + 1), idx(r + 1, c), idx(r + 1, c + 1)});
  if (cols % 2)
    for (int r = 0; r < r2; r += 2) tiles.push_back({idx(r, cols - 1), idx(r + 1, cols - 1)});
  if (rows % 2)
    for (int c = 0; c < c2; c += 2) tiles.push_back({idx(rows - 1, c), idx(rows - 1, c + 1)});
  if (rows % 2 && cols % 2) tiles.push_back({idx(rows - 1, cols - 1)});
  return tiles;
}

// ---------------------------------------------------------------------------
// Config document I/O (schema v1, all frequencies in Hz):
//   n_spins          integer
//   frequencies_hz   list of n per-spin frequencies
//   couplings_hz     list of [i, j, J] triples, 1-based indices
//   species          optional list of n channel labels
//   frame_hz         optional map label -> frame frequency
// Missing species default to a single channel whose frame sits at the mean
// of the minimum and maximum spin frequency.
// ---------------------------------------------------------------------------

inline SpinSystem parse_system_config(const nlohmann::json& doc) {
  for (const char* key : {"n_spins", "frequencies_hz"})
    if (!doc.contains(key))
      throw std::invalid_argument(std::string("system config missing field '") + key + "'");

  const int n = doc.at("n_spins").get<int>();
  if (n < 1) throw std::invalid_argument("n_spins must be >= 1");
  const auto freqs = doc.at("frequencies_hz").get<std::vector<double>>();
  if (static_cast<int>(freqs.size()) != n)
    throw std::invalid_argument("frequencies_hz length does not match n_spins");

  SpinSystem sys;
  sys.freq.resize(n);
  for (int k = 0; k < n; ++k) sys.freq[k] = kTwoPi * freqs[k];

  sys.couplings_hz = Eigen::MatrixXd::Zero(n, n);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> set_flag(n, n);
  set_flag.setConstant(false);
  if (doc.contains("couplings_hz")) {
    for (const auto& triple : doc.at("couplings_hz")) {
      if (!triple.is_array() || triple.size() != 3)
        throw std::invalid_argument("couplings_hz entries must be [i, j, J] triples");
      const int i = triple[0].get<int>() - 1;
      const int j = triple[1].get<int>() - 1;
      const double j_hz = triple[2].get<double>();
      if (i < 0 || i >= n || j < 0 || j >= n || i == j)
        throw std::invalid_argument("coupling indices out of range");
      if ((set_flag(i, j) || set_flag(j, i)) && sys.couplings_hz(i, j) != j_hz)
        throw std::invalid_argument("coupling table is not symmetric: J(" +
                                    std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                    ") given twice with different values");
      sys.couplings_hz(i, j) = j_hz;
      sys.couplings_hz(j, i) = j_hz;
      set_flag(i, j) = set_flag(j, i) = true;
    }
  }

  if (doc.contains("species")) {
    sys.species = doc.at("species").get<std::vector<std::string>>();
    if (static_cast<int>(sys.species.size()) != n)
      throw std::invalid_argument("species length does not match n_spins");
  } else {
    sys.species.assign(n, "ch");
  }

  if (doc.contains("frame_hz")) {
    const std::set<std::string> used(sys.species.begin(), sys.species.end());
    const auto& frames = doc.at("frame_hz");
    if (frames.is_number()) {
      // Scalar shorthand: one frame shared by every channel.
      for (const auto& label : used) sys.frame_freq[label] = kTwoPi * frames.get<double>();
    } else {
      for (const auto& [label, hz] : frames.items()) {
        if (!used.count(label))
          throw std::invalid_argument("frame_hz references unknown species '" + label + "'");
        sys.frame_freq[label] = kTwoPi * hz.get<double>();
      }
    }
  }
  // Channels without an explicit frame default to the mean of the channel's
  // extreme frequencies.
  for (int k = 0; k < n; ++k) {
    const auto& sp = sys.species[k];
    if (sys.frame_freq.count(sp)) continue;
    double lo = sys.freq[k], hi = sys.freq[k];
    for (int l = 0; l < n; ++l)
      if (sys.species[l] == sp) {
        lo = std::min(lo, sys.freq[l]);
        hi = std::max(hi, sys.freq[l]);
      }
    sys.frame_freq[sp] = 0.5 * (lo + hi);
  }

  validate_system(sys);
  return sys;
}

inline nlohmann::json system_to_config(const SpinSystem& sys) {
  nlohmann::json doc;
  const int n = sys.n_spins();
  doc["version"] = 1;
  doc["n_spins"] = n;
  std::vector<double> freqs(n);
  for (int k = 0; k < n; ++k) freqs[k] = sys.freq[k] / kTwoPi;
  doc["frequencies_hz"] = freqs;
  auto couplings = nlohmann::json::array();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (sys.couplings_hz(i, j) != 0.0)
        couplings.push_back({i + 1, j + 1, sys.couplings_hz(i, j)});
  doc["couplings_hz"] = couplings;
  doc["species"] = sys.species;
  nlohmann::json frames;
  for (const auto& [label, w] : sys.frame_freq) frames[label] = w / kTwoPi;
  doc["frame_hz"] = frames;
  return doc;
}

}  // namespace spinshape
