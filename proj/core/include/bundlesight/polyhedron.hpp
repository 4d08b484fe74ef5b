#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bundlesight/types.hpp"

namespace bundlesight {

// Closed convex polyhedron {v : normals.row(k) . v >= offsets[k] for all k}.
// Zero rows means the whole space.
struct Polyhedron {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      normals;              // m x I
  Eigen::VectorXd offsets;  // m

  int dimension() const { return static_cast<int>(normals.cols()); }
  int halfspace_count() const { return static_cast<int>(normals.rows()); }

  static Polyhedron whole_space(int dimension);
  // Append {normal . v >= offset}.
  void add_halfspace(const Eigen::VectorXd& normal, double offset);
};

// Closed membership (all inequalities >=, exact comparisons).
bool contains(const Polyhedron& poly, const Eigen::VectorXd& v);
// Strict membership (all inequalities >): the polyhedron's interior for the
// full-dimensional regions used here.
bool contains_strict(const Polyhedron& poly, const Eigen::VectorXd& v);

// The region of valuations under which `choice` is surplus-maximizing for
// `menu` (0 = no purchase). For choice j >= 1 this is
//   { v : a_j.v - p_j >= a_k.v - p_k  for all k != j,  a_j.v - p_j >= 0 }
// and for choice 0
//   { v : a_k.v - p_k <= 0 for all k }.
Polyhedron build_ic_polyhedron(const PriceMenu& menu, int choice,
                               int product_count);

// All J+1 regions of one menu, indexed by choice.
std::vector<Polyhedron> build_choice_partition(const PriceMenu& menu,
                                               int product_count);

// Checks that the probes witness a partition: every probe lies in at least
// one closed region, and in at most one region strictly.
bool partition_check(const std::vector<Polyhedron>& regions,
                     const std::vector<Eigen::VectorXd>& probes);
bool partition_check(const PriceMenu& menu, int product_count,
                     const std::vector<Eigen::VectorXd>& probes);

}  // namespace bundlesight
