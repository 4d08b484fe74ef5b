#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is coded from textbook identities and published reference
// algorithms, not from the library sources, so agreement is meaningful.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// Deterministic probe cloud for partition checks, spread wide enough to hit
// every region of the menus under test. Hash-free LCG so the oracle stays
// independent of the library's generator.
inline std::vector<Eigen::VectorXd> probe_cloud(int dim, int count,
                                                double scale,
                                                std::uint64_t seed = 99) {
  std::vector<Eigen::VectorXd> probes;
  probes.reserve(count);
  std::uint64_t state = seed * 2862933555777941757ull + 3037000493ull;
  auto next_unit = [&state]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  for (int n = 0; n < count; ++n) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = scale * (2.0 * next_unit() - 1.0);
    probes.push_back(v);
  }
  return probes;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// E[X | X >= a] for X ~ N(mu, sigma^2), via the inverse Mills ratio.
inline double truncated_mean_above(double mu, double sigma, double a) {
  const double z = (a - mu) / sigma;
  return mu + sigma * normal_pdf(z) / (1.0 - normal_cdf(z));
}

// E[X | X <= b] for X ~ N(mu, sigma^2).
inline double truncated_mean_below(double mu, double sigma, double b) {
  const double z = (b - mu) / sigma;
  return mu - sigma * normal_pdf(z) / normal_cdf(z);
}

// Reference splitmix64 (Vigna's published splitmix64.c).
inline std::uint64_t splitmix64_reference(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Binomial coefficient via a product loop (exact for the small arguments the
// tests use; no lgamma so it is an independent route).
inline double binomial(long n, long k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double result = 1.0;
  for (long i = 1; i <= k; ++i) {
    result *= static_cast<double>(n - k + i);
    result /= static_cast<double>(i);
  }
  return result;
}

// P(total = n | observed = k, censoring probability p0): negative-binomial
// posterior over the uncensored total, coded directly from the pmf.
inline double negbin_posterior_pmf(long n, long k, double p0) {
  if (n < k) return 0.0;
  return binomial(n, k) * std::pow(p0, static_cast<double>(n - k)) *
         std::pow(1.0 - p0, static_cast<double>(k + 1));
}

// Density of a bivariate normal at (x, y).
inline double bvn_pdf(double x, double y, double mx, double my, double sx,
                      double sy, double rho) {
  const double zx = (x - mx) / sx;
  const double zy = (y - my) / sy;
  const double q = (zx * zx - 2.0 * rho * zx * zy + zy * zy) / (1.0 - rho * rho);
  return std::exp(-0.5 * q) /
         (2.0 * M_PI * sx * sy * std::sqrt(1.0 - rho * rho));
}

// Midpoint-rule integral of f over [ax,bx] x [ay,by] with an n x n grid.
// Robust to indicator discontinuities (first-order accurate at the boundary),
// which is exactly what region-probability checks need.
inline double integrate2d(const std::function<double(double, double)>& f,
                          double ax, double bx, double ay, double by, int n) {
  const double hx = (bx - ax) / n;
  const double hy = (by - ay) / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = ax + (i + 0.5) * hx;
    for (int j = 0; j < n; ++j) {
      const double y = ay + (j + 0.5) * hy;
      total += f(x, y);
    }
  }
  return total * hx * hy;
}

// Independent re-statement of the discrete-choice rule: alternative j maximizes
// surplus v.dot(bundle_j) - p_j, ties broken toward the lowest index, and the
// outside option (0) wins unless the best surplus is >= 0.
struct MenuRow {
  std::vector<int> products;  // indices included in the bundle
  double price = 0.0;
};

inline int best_choice(const std::vector<MenuRow>& rows,
                       const Eigen::VectorXd& v) {
  int best = -1;
  double best_surplus = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    double value = 0.0;
    for (int idx : rows[j].products) value += v(idx);
    const double surplus = value - rows[j].price;
    if (best < 0 || surplus > best_surplus) {
      best = static_cast<int>(j);
      best_surplus = surplus;
    }
  }
  if (best < 0) return 0;
  return best_surplus >= 0.0 ? best + 1 : 0;
}

// Brute-force LP oracle for max c.x subject to A x = b, x >= 0: enumerate all
// basis column subsets, solve the square systems, keep the best feasible
// vertex. Only usable for tiny instances; exact up to linear-solve roundoff.
struct LpOracleResult {
  bool feasible = false;
  double objective = 0.0;
};

inline LpOracleResult lp_vertex_enumeration(const Eigen::MatrixXd& a,
                                            const Eigen::VectorXd& b,
                                            const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  LpOracleResult out;
  std::vector<int> cols(m);
  std::function<void(int, int)> visit = [&](int start, int depth) {
    if (depth == m) {
      Eigen::MatrixXd basis(m, m);
      for (int i = 0; i < m; ++i) basis.col(i) = a.col(cols[i]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd xb = lu.solve(b);
      if ((xb.array() < -1e-9).any()) return;
      double obj = 0.0;
      for (int i = 0; i < m; ++i) obj += c(cols[i]) * xb(i);
      if (!out.feasible || obj > out.objective) {
        out.feasible = true;
        out.objective = obj;
      }
    } else {
      for (int j = start; j <= n - (m - depth); ++j) {
        cols[depth] = j;
        visit(j + 1, depth + 1);
      }
    }
  };
  if (m > 0 && n >= m) visit(0, 0);
  return out;
}

// One exact step of the population EM map for the 1D split-at-zero partition:
// weights come from the truth (mu*, s*) and conditional means from (mu, s*).
inline double population_map_1d(double mu, double mu_star, double s_star) {
  const double p_up = 1.0 - normal_cdf((0.0 - mu_star) / s_star);
  const double e_up = truncated_mean_above(mu, s_star, 0.0);
  const double e_dn = truncated_mean_below(mu, s_star, 0.0);
  return p_up * e_up + (1.0 - p_up) * e_dn;
}

// Sample mean / covariance with the 1/n normalizer (matches an M-step pool).
inline Eigen::VectorXd sample_mean(const Eigen::MatrixXd& rows) {
  return rows.colwise().mean();
}

inline Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& rows,
                                  const Eigen::VectorXd& center) {
  Eigen::MatrixXd centered = rows.rowwise() - center.transpose();
  return (centered.transpose() * centered) / static_cast<double>(rows.rows());
}

}  // namespace oracle
