#pragma once

#include <Eigen/Dense>

#include "bundlesight/polyhedron.hpp"

namespace bundlesight {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;        // meaningful when status == kOptimal
  double objective = 0.0;
};

// max c.x  s.t.  A x = b, x >= 0. Dense two-phase simplex with Bland's rule;
// intended for the tiny instances this library produces (tens of rows).
LpResult solve_lp_standard(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c);

struct ChebyshevResult {
  Eigen::VectorXd center;
  double inradius = 0.0;  // normalized slack of the returned point
  bool capped = false;    // true when the uncapped inradius LP was unbounded
};

// Chebyshev center of {v : normals.v >= offsets}: maximize r subject to
// a_k.v - |a_k| r >= b_k. When that LP is unbounded (cones, translates of
// half-spaces) it is re-solved with r capped at 1, returning a feasible point
// with unit normalized slack. Throws EmptyRegionError when infeasible.
ChebyshevResult chebyshev_center(const Polyhedron& poly);

}  // namespace bundlesight
