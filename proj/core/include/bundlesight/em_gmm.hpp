#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bundlesight/em.hpp"
#include "bundlesight/types.hpp"

namespace bundlesight {

struct GmmComponent {
  double weight = 1.0;
  GaussianParams params;
};

struct GmmParams {
  std::vector<GmmComponent> components;

  int component_count() const { return static_cast<int>(components.size()); }
  int dimension() const {
    return components.empty() ? 0 : components.front().params.dimension();
  }
};

void validate(const GmmParams& params, const std::string& where = "gmm");

struct GmmConfig {
  EmConfig em;
  int components = 2;
  double weight_floor = 1e-6;
};

struct GmmFitReport {
  GmmParams params;
  int iterations = 0;
  std::vector<double> error_trace;  // l1 step over (weights, means, covs)
  bool converged = false;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  long fallback_batches = 0;
  long uniform_rows = 0;  // responsibility rows that fell back to uniform
  GmmConfig config;
};

// Posterior component memberships, one row per transaction, rows sum to 1:
// row(n)[k] proportional to P(region_n | component k) * weight_k, with region
// probabilities taken as pool fractions over the per-component shared pool of
// the given iteration. All-zero rows retry with importance-sampling
// probability estimates; rows that are still zero become uniform.
Eigen::MatrixXd responsibilities(const Dataset& dataset,
                                 const GmmParams& params,
                                 const EmConfig& config, int iteration);

// Mixture-of-Gaussians Monte-Carlo EM. components == 1 degenerates to the
// base fit (identical trajectory given the same config/seed). For K >= 2 the
// initializer fits the single-Gaussian model, then splits its mean by
// -0.5..+0.5 times the marginal standard deviations with equal weights.
GmmFitReport fit_gmm(const Dataset& dataset, const GmmConfig& config);

}  // namespace bundlesight
