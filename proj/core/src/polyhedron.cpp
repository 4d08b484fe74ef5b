#include "bundlesight/polyhedron.hpp"

#include <string>

#include "bundlesight/errors.hpp"

namespace bundlesight {

Polyhedron Polyhedron::whole_space(int dimension) {
  Polyhedron p;
  p.normals.resize(0, dimension);
  p.offsets.resize(0);
  return p;
}

void Polyhedron::add_halfspace(const Eigen::VectorXd& normal, double offset) {
  if (halfspace_count() > 0 && normal.size() != normals.cols())
    throw InvalidInputError("halfspace dimension mismatch");
  const int m = halfspace_count();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> grown(
      m + 1, normal.size());
  grown.topRows(m) = normals;
  grown.row(m) = normal.transpose();
  normals.swap(grown);
  offsets.conservativeResize(m + 1);
  offsets[m] = offset;
}

bool contains(const Polyhedron& poly, const Eigen::VectorXd& v) {
  const int m = poly.halfspace_count();
  for (int k = 0; k < m; ++k) {
    if (poly.normals.row(k).dot(v) < poly.offsets[k]) return false;
  }
  return true;
}

bool contains_strict(const Polyhedron& poly, const Eigen::VectorXd& v) {
  const int m = poly.halfspace_count();
  for (int k = 0; k < m; ++k) {
    if (poly.normals.row(k).dot(v) <= poly.offsets[k]) return false;
  }
  return true;
}

static Eigen::VectorXd bundle_vector(const Bundle& b, int product_count) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(product_count);
  for (int i = 0; i < product_count; ++i)
    if (b.mask[static_cast<std::size_t>(i)]) a[i] = 1.0;
  return a;
}

Polyhedron build_ic_polyhedron(const PriceMenu& menu, int choice,
                               int product_count) {
  validate(menu, product_count, "build_ic_polyhedron.menu");
  const int J = menu.size();
  if (choice < 0 || choice > J)
    throw InvalidInputError("build_ic_polyhedron: choice " +
                            std::to_string(choice) + " out of range [0, " +
                            std::to_string(J) + "]");
  Polyhedron poly = Polyhedron::whole_space(product_count);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(
      J, product_count);
  Eigen::VectorXd offs(J);
  if (choice == 0) {
    // a_k . v <= p_k for every alternative k.
    for (int k = 0; k < J; ++k) {
      const auto& e = menu.entries[static_cast<std::size_t>(k)];
      rows.row(k) = -bundle_vector(e.bundle, product_count).transpose();
      offs[k] = -e.price;
    }
  } else {
    const auto& chosen = menu.entries[static_cast<std::size_t>(choice - 1)];
    const Eigen::VectorXd a_j = bundle_vector(chosen.bundle, product_count);
    int r = 0;
    for (int k = 0; k < J; ++k) {
      if (k == choice - 1) continue;
      const auto& e = menu.entries[static_cast<std::size_t>(k)];
      rows.row(r) =
          (a_j - bundle_vector(e.bundle, product_count)).transpose();
      offs[r] = chosen.price - e.price;
      ++r;
    }
    // Participation: surplus of the chosen entry is non-negative.
    rows.row(r) = a_j.transpose();
    offs[r] = chosen.price;
  }
  poly.normals = rows;
  poly.offsets = offs;
  return poly;
}

std::vector<Polyhedron> build_choice_partition(const PriceMenu& menu,
                                               int product_count) {
  std::vector<Polyhedron> regions;
  regions.reserve(static_cast<std::size_t>(menu.size()) + 1);
  for (int c = 0; c <= menu.size(); ++c)
    regions.push_back(build_ic_polyhedron(menu, c, product_count));
  return regions;
}

bool partition_check(const std::vector<Polyhedron>& regions,
                     const std::vector<Eigen::VectorXd>& probes) {
  for (const auto& v : probes) {
    int closed_hits = 0;
    int strict_hits = 0;
    for (const auto& region : regions) {
      if (contains(region, v)) ++closed_hits;
      if (contains_strict(region, v)) ++strict_hits;
    }
    if (closed_hits < 1 || strict_hits > 1) return false;
  }
  return true;
}

bool partition_check(const PriceMenu& menu, int product_count,
                     const std::vector<Eigen::VectorXd>& probes) {
  return partition_check(build_choice_partition(menu, product_count), probes);
}

}  // namespace bundlesight
