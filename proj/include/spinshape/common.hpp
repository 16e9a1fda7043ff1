#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace spinshape {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Explicit-state operations refuse systems above the cap; larger systems
// must be handled through subgroup restriction. The cap can be overridden
// at runtime (CLI --size-cap) up to a hard ceiling.
inline constexpr int kDefaultSpinCap = 14;
inline constexpr int kMaxSupportedSpins = 24;

inline int& spin_cap() {
  static int cap = kDefaultSpinCap;
  return cap;
}

inline void set_spin_cap(int cap) {
  if (cap < 1 || cap > kMaxSupportedSpins)
    throw std::invalid_argument("size cap must lie in [1, " +
                                std::to_string(kMaxSupportedSpins) + "]");
  spin_cap() = cap;
}

inline void check_spin_cap(int n_spins) {
  if (n_spins > spin_cap())
    throw std::invalid_argument(
        "system of " + std::to_string(n_spins) + " spins exceeds the explicit-state cap of " +
        std::to_string(spin_cap()) + "; restrict to subgroups instead");
}

}  // namespace spinshape
