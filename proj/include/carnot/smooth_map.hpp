#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "carnot/group_law.hpp"
#include "carnot/linalg.hpp"

namespace carnot {

/// Axis-aligned box.
struct Box {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const double* x) const;
  bool contains(const std::vector<double>& x) const { return contains(x.data()); }
  double length(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;

  static Box cube(int n, double radius);
  static Box centered(const std::vector<double>& radii);
};

/// Smooth map between group charts. eval is mandatory; jac (row-major
/// dst.dim x src.dim) and jac_det fall back to finite differences when absent.
struct SmoothMap {
  const Group* src = nullptr;
  const Group* dst = nullptr;
  Box domain;
  std::string id;
  std::function<void(const double*, double*)> eval;
  std::function<void(const double*, Matrix&)> jac;
  std::function<double(const double*)> jac_det;
  std::shared_ptr<SmoothMap> inv;

  std::vector<double> operator()(const std::vector<double>& x) const;
};

/// Registered map factory. Supported specs:
///   identity                        any pair of equal-dimension groups
///   left_translation(a1,...,an)     src == dst, law-based
///   dilation(r)                     src == dst, r > 0
///   contact_shear                   heisenberg chart: (p,q,t) -> (p, q+p^2, t+p^3/6)
///   coord_swap                      heisenberg chart: (p,q,t) -> (p, t, q)
///   heis_to_abelian_identity        heisenberg source, abelian(1,1,2) target
/// Groups must outlive the returned map.
SmoothMap make_map(const Group& src, const Group& dst, const std::string& spec);

/// Jacobian matrix of the map at x: analytic when provided, otherwise central
/// finite differences with one Richardson step.
Matrix map_jacobian(const SmoothMap& map, const double* x);

/// Finite-difference Jacobian, always; for testing the analytic entries.
Matrix map_jacobian_fd(const SmoothMap& map, const double* x);

/// phi after psi; composes eval, jac, jac_det and inverse when available.
SmoothMap compose(const SmoothMap& phi, const SmoothMap& psi);

} // namespace carnot
