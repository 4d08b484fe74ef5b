#include "bundlesight/lp.hpp"

#include <cmath>
#include <vector>

#include "bundlesight/errors.hpp"

namespace bundlesight {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr int kMaxPivots = 20000;

// Tableau rows: [B^-1 A | B^-1 b]. `basis[i]` is the column basic in row i.
struct Tableau {
  Eigen::MatrixXd body;  // m x n
  Eigen::VectorXd rhs;   // m
  std::vector<int> basis;
};

// Runs simplex maximizing c over the columns marked allowed. Returns false
// when the objective is unbounded above.
bool run_simplex(Tableau& t, const Eigen::VectorXd& c,
                 const std::vector<bool>& allowed) {
  const int m = static_cast<int>(t.rhs.size());
  const int n = static_cast<int>(t.body.cols());
  for (int pivots = 0; pivots < kMaxPivots; ++pivots) {
    // Reduced costs d_j = c_j - c_B . column_j.
    Eigen::VectorXd c_b(m);
    for (int i = 0; i < m; ++i) c_b[i] = c[t.basis[static_cast<std::size_t>(i)]];
    int entering = -1;
    for (int j = 0; j < n; ++j) {
      if (!allowed[static_cast<std::size_t>(j)]) continue;
      const double d = c[j] - c_b.dot(t.body.col(j));
      if (d > kPivotTol) {  // Bland: first improving column
        entering = j;
        break;
      }
    }
    if (entering < 0) return true;  // optimal
    int leaving = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = t.body(i, entering);
      if (a > kPivotTol) {
        const double ratio = t.rhs[i] / a;
        if (leaving < 0 || ratio < best_ratio - kPivotTol ||
            (std::abs(ratio - best_ratio) <= kPivotTol &&
             t.basis[static_cast<std::size_t>(i)] <
                 t.basis[static_cast<std::size_t>(leaving)])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
    }
    if (leaving < 0) return false;  // unbounded
    // Pivot on (leaving, entering).
    const double p = t.body(leaving, entering);
    t.body.row(leaving) /= p;
    t.rhs[leaving] /= p;
    for (int i = 0; i < m; ++i) {
      if (i == leaving) continue;
      const double f = t.body(i, entering);
      if (f != 0.0) {
        t.body.row(i) -= f * t.body.row(leaving);
        t.rhs[i] -= f * t.rhs[leaving];
      }
    }
    t.basis[static_cast<std::size_t>(leaving)] = entering;
  }
  throw NumericFailureError("simplex exceeded its pivot budget");
}

}  // namespace

LpResult solve_lp_standard(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n)
    throw InvalidInputError("solve_lp_standard: inconsistent dimensions");

  // Phase 1 with one artificial per row; flip rows so rhs >= 0.
  Tableau t;
  t.body.resize(m, n + m);
  t.rhs.resize(m);
  t.basis.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    t.body.block(i, 0, 1, n) = sign * A.row(i);
    t.rhs[i] = sign * b[i];
    t.body.block(i, n, 1, m).setZero();
    t.body(i, n + i) = 1.0;
    t.basis[static_cast<std::size_t>(i)] = n + i;
  }
  Eigen::VectorXd phase1_c = Eigen::VectorXd::Zero(n + m);
  phase1_c.tail(m).setConstant(-1.0);  // max -(sum of artificials)
  std::vector<bool> allow_all(static_cast<std::size_t>(n + m), true);
  run_simplex(t, phase1_c, allow_all);  // never unbounded (objective <= 0)

  double art_sum = 0.0;
  for (int i = 0; i < m; ++i)
    if (t.basis[static_cast<std::size_t>(i)] >= n) art_sum += t.rhs[i];
  if (art_sum > 1e-7) return {LpStatus::kInfeasible, {}, 0.0};

  // Pivot any zero-level artificials out of the basis when possible.
  for (int i = 0; i < m; ++i) {
    if (t.basis[static_cast<std::size_t>(i)] < n) continue;
    int replacement = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(t.body(i, j)) > kPivotTol) {
        replacement = j;
        break;
      }
    }
    if (replacement < 0) continue;  // redundant row; harmless to keep
    const double p = t.body(i, replacement);
    t.body.row(i) /= p;
    t.rhs[i] /= p;
    for (int r = 0; r < m; ++r) {
      if (r == i) continue;
      const double f = t.body(r, replacement);
      if (f != 0.0) {
        t.body.row(r) -= f * t.body.row(i);
        t.rhs[r] -= f * t.rhs[i];
      }
    }
    t.basis[static_cast<std::size_t>(i)] = replacement;
  }

  // Phase 2: original objective, artificial columns barred.
  Eigen::VectorXd phase2_c = Eigen::VectorXd::Zero(n + m);
  phase2_c.head(n) = c;
  std::vector<bool> allowed(static_cast<std::size_t>(n + m), false);
  for (int j = 0; j < n; ++j) allowed[static_cast<std::size_t>(j)] = true;
  if (!run_simplex(t, phase2_c, allowed))
    return {LpStatus::kUnbounded, {}, 0.0};

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int j = t.basis[static_cast<std::size_t>(i)];
    if (j < n) x[j] = t.rhs[i];
  }
  return {LpStatus::kOptimal, x, c.dot(x)};
}

namespace {

// Builds the inradius LP over x = (v+, v-, r, slacks): for each half-space
//   a_k.(v+ - v-) - |a_k| r - s_k = b_k,
// optionally followed by the cap row r + s_cap = cap. Objective: max r.
LpResult solve_inradius(const Polyhedron& poly, bool capped, double cap) {
  const int dim = poly.dimension();
  const int m = poly.halfspace_count();
  const int rows = m + (capped ? 1 : 0);
  const int r_col = 2 * dim;
  const int cols = 2 * dim + 1 + rows;  // v+, v-, r, one slack per row
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd b(rows);
  for (int k = 0; k < m; ++k) {
    const Eigen::VectorXd a = poly.normals.row(k).transpose();
    A.block(k, 0, 1, dim) = a.transpose();
    A.block(k, dim, 1, dim) = -a.transpose();
    A(k, r_col) = -a.norm();
    A(k, r_col + 1 + k) = -1.0;
    b[k] = poly.offsets[k];
  }
  if (capped) {
    A(m, r_col) = 1.0;
    A(m, r_col + 1 + m) = 1.0;
    b[m] = cap;
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(cols);
  c[r_col] = 1.0;
  return solve_lp_standard(A, b, c);
}

}  // namespace

ChebyshevResult chebyshev_center(const Polyhedron& poly) {
  const int dim = poly.dimension();
  if (dim <= 0) throw InvalidInputError("chebyshev_center: empty dimension");
  if (poly.halfspace_count() == 0)
    return {Eigen::VectorXd::Zero(dim), 1.0, true};

  LpResult lp = solve_inradius(poly, /*capped=*/false, 0.0);
  bool capped = false;
  if (lp.status == LpStatus::kUnbounded) {
    lp = solve_inradius(poly, /*capped=*/true, 1.0);
    capped = true;
  }
  if (lp.status == LpStatus::kInfeasible)
    throw EmptyRegionError("chebyshev_center: polyhedron is empty");
  if (lp.status != LpStatus::kOptimal)
    throw NumericFailureError("chebyshev_center: LP did not solve");
  ChebyshevResult out;
  out.center = lp.x.head(dim) - lp.x.segment(dim, dim);
  out.inradius = lp.x[2 * dim];
  out.capped = capped;
  return out;
}

}  // namespace bundlesight
