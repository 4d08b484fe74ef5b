#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bundlesight/em.hpp"
#include "bundlesight/polyhedron.hpp"
#include "bundlesight/types.hpp"

// Numerical experiments on the population-level behaviour of the estimator:
// the separation condition behind local convergence, the contraction of the
// idealized (infinite-data) EM map, and identifiability under separate
// selling. Everything here works with exact partitions and Monte-Carlo
// integration rather than finite datasets.
namespace bundlesight::lab {

struct PartitionSpec {
  std::vector<Polyhedron> regions;
};

// 2^d cells obtained by splitting each axis at its threshold.
PartitionSpec axis_split_partition(const Eigen::VectorXd& thresholds);

// The choice regions (outside option first) induced by one menu.
PartitionSpec menu_partition(const PriceMenu& menu, int product_count);

// How to whiten draws: Z = W^{-1}(X - mu*) with W from the Cholesky factor
// or the symmetric eigendecomposition of sigma*. The two differ by an
// orthogonal rotation, so the spectrum below is the same either way.
enum class WhitenMode { kCholesky, kEigen };

struct Assumption1Result {
  double lambda_min = 0.0;
  Eigen::MatrixXd conditional_mean_var;  // Var(E[Z | region]) over regions
  std::vector<double> region_mass;       // estimated mass per region
  long draws_used = 0;                   // draws landing in some region
  long draws_total = 0;
};

// Estimates the smallest eigenvalue of Var(E[Z | R']) where R' is the region
// of a random draw from the truth: the separation strength of a partition.
// A partition that pins down every direction has lambda_min bounded away
// from zero; the trivial whole-space partition gives ~0.
Assumption1Result assumption1_eigenvalue(const GaussianParams& truth,
                                         const PartitionSpec& partition,
                                         long mc, std::uint64_t seed,
                                         WhitenMode mode = WhitenMode::kCholesky);

struct PopulationStep {
  Eigen::VectorXd mu_next;
  double dropped_mass = 0.0;  // truth mass of regions with no conditional draws
};

// One idealized EM mean update with sigma* known and infinite data replaced
// by Monte Carlo: mu -> sum_k P(R_k | truth) E[X | R_k; mu, sigma*]. The
// same seed reuses the same draw pools, so the map is deterministic in mu.
PopulationStep population_em_step(const Eigen::VectorXd& mu,
                                  const GaussianParams& truth,
                                  const PartitionSpec& partition, long mc,
                                  std::uint64_t seed);

struct ContractionResult {
  double epsilon_hat = 0.0;  // estimated separation eigenvalue
  double bound = 0.0;        // 1 - epsilon_hat / 2
  Eigen::VectorXd mu0;
  std::vector<double> errors;  // whitened distance to mu*, steps + 1 entries
  std::vector<double> ratios;  // errors[t+1] / errors[t]
  std::vector<double> dropped_mass;
  std::vector<Eigen::VectorXd> trajectory;  // mu0, mu1, ..., mu_steps
};

// Iterates the population EM map from a start at the given whitened radius
// from mu* (direction drawn from the seed) and records the per-step error
// contraction against the 1 - epsilon/2 theory bound.
ContractionResult contraction_experiment(const GaussianParams& truth,
                                         const PartitionSpec& partition,
                                         double radius, int steps, long mc,
                                         std::uint64_t seed);

struct IdentifiabilityResult {
  GaussianParams truth;
  std::vector<PriceMenu> menus;
  FitReport fit;
  double l1_error = 0.0;
};

// Separate-selling identification check: every bundle is offered at the sum
// of its single prices, under one base price vector (each price a bit above
// the mean valuation) plus one per-product discounted variant. Fits the
// estimator on data generated from a random truth and reports the error.
IdentifiabilityResult identifiability_experiment(int product_count,
                                                 long n_transactions,
                                                 std::uint64_t seed,
                                                 const EmConfig& config);

}  // namespace bundlesight::lab
