#pragma once

#include <istream>
#include <vector>

#include "spinshape/propagator.hpp"

namespace spinshape {

/// Rotation axis: x, y, z, or an arbitrary in-plane axis at `angle` rad
/// from x towards y.
struct RotationAxis {
  enum class Kind { X, Y, Z, InPlane };
  Kind kind = Kind::X;
  double in_plane_angle = 0.0;

  static RotationAxis x() { return {Kind::X, 0.0}; }
  static RotationAxis y() { return {Kind::Y, 0.0}; }
  static RotationAxis z() { return {Kind::Z, 0.0}; }
  static RotationAxis in_plane(double angle) { return {Kind::InPlane, angle}; }
};

/// Simultaneous single-qubit rotation by `angle` on `targets` (0-based),
/// identity elsewhere.
struct RotationGoal {
  std::vector<int> targets;
  RotationAxis axis;
  double angle = 0.0;
};

namespace detail {

inline Eigen::Matrix2cd single_qubit_rotation(const RotationAxis& axis, double angle) {
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd sigma;
  switch (axis.kind) {
    case RotationAxis::Kind::X: sigma << 0, 1, 1, 0; break;
    case RotationAxis::Kind::Y: sigma << 0, -i, i, 0; break;
    case RotationAxis::Kind::Z: sigma << 1, 0, 0, -1; break;
    case RotationAxis::Kind::InPlane: {
      const double a = axis.in_plane_angle;
      sigma << 0, std::cos(a) - i * std::sin(a), std::cos(a) + i * std::sin(a), 0;
      break;
    }
  }
  return std::cos(0.5 * angle) * Eigen::Matrix2cd::Identity() -
         i * std::sin(0.5 * angle) * sigma;
}

}  // namespace detail

/// Tensor product of exp(-i angle sigma_axis / 2) on targets and identity
/// elsewhere, over q qubits.
inline CMat rotation_goal(int q, const RotationGoal& goal) {
  check_spin_cap(q);
  if (goal.targets.empty()) throw std::invalid_argument("rotation goal has no targets");
  std::vector<bool> is_target(q, false);
  for (int t : goal.targets) {
    if (t < 0 || t >= q)
      throw std::invalid_argument("rotation target " + std::to_string(t + 1) + " out of range");
    if (is_target[t]) throw std::invalid_argument("duplicate rotation target");
    is_target[t] = true;
  }
  const Eigen::Matrix2cd r = detail::single_qubit_rotation(goal.axis, goal.angle);

  CMat u = CMat::Ones(1, 1);
  for (int k = 0; k < q; ++k) {
    const Eigen::Matrix2cd f = is_target[k] ? r : Eigen::Matrix2cd::Identity();
    CMat next(u.rows() * 2, u.cols() * 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) next.block(a * u.rows(), b * u.cols(), u.rows(), u.cols()) =
          f(a, b) * u;
    u = std::move(next);
  }
  return u;
}

/// Identity goal over q qubits (a rotation goal with no rotated spins).
inline CMat identity_goal(int q) {
  check_spin_cap(q);
  return CMat::Identity(1 << q, 1 << q);
}

/// Per-subgroup goals implementing a rotation on every spin whose global
/// 1-based lattice index is odd; subgroup members with even index get the
/// identity.
inline std::vector<CMat> odd_spin_rotation_goals(const std::vector<Subgroup>& subgroups,
                                                 double angle, const RotationAxis& axis) {
  std::vector<CMat> goals;
  goals.reserve(subgroups.size());
  for (const auto& sub : subgroups) {
    RotationGoal g;
    g.axis = axis;
    g.angle = angle;
    for (std::size_t local = 0; local < sub.size(); ++local)
      if (sub[local] % 2 == 0) g.targets.push_back(static_cast<int>(local));  // 0-based even = 1-based odd
    const int q = static_cast<int>(sub.size());
    goals.push_back(g.targets.empty() ? identity_goal(q) : rotation_goal(q, g));
  }
  return goals;
}

/// Parse a goal matrix document: dimension on the first line, then dim^2
/// complex entries as "re im" pairs, row-major. The matrix must be unitary
/// within 1e-6.
inline CMat goal_from_stream(std::istream& in) {
  int dim = 0;
  if (!(in >> dim) || dim < 1) throw std::invalid_argument("goal file: bad dimension header");
  CMat u(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      double re, im;
      if (!(in >> re >> im))
        throw std::invalid_argument("goal file: expected " + std::to_string(dim * dim) +
                                    " (re, im) entries");
      u(r, c) = Complex(re, im);
    }
  const double dev = (u.adjoint() * u - CMat::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (dev > 1e-6)
    throw std::invalid_argument("goal file: matrix is not unitary (deviation " +
                                std::to_string(dev) + ")");
  return u;
}

}  // namespace spinshape
