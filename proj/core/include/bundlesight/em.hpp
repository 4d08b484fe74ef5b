#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "bundlesight/sampler.hpp"
#include "bundlesight/types.hpp"

namespace bundlesight {

struct EmConfig {
  int mc_samples = 200;        // L: draws kept per transaction per iteration
  double tolerance = 0.05;     // stop when |dmu|_1 + |dSigma|_1 <= tolerance
  int max_iterations = 100;
  int pool_size = 0;           // 0 -> max(100 * mc_samples, 100000)
  double acceptance_threshold = 0.01;  // rejection-budget floor, see below
  std::uint64_t seed = 0;
  int workers = 0;  // E-step threads; 0 -> worker_count() (results identical)
  // Manual initialization; leave empty to use default_init(dataset).
  Eigen::VectorXd init_mu;
  Eigen::MatrixXd init_sigma;

  int effective_pool_size() const;
  // Proposal budget for direct rejection sampling: count / acceptance_threshold.
  long rejection_budget(int count) const;
};

struct FitReport {
  GaussianParams params;
  int iterations = 0;
  std::vector<double> error_trace;  // l1 step norm after each iteration
  bool converged = false;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  long fallback_batches = 0;  // batches that needed the importance fallback
  EmConfig config;
};

// Called after every M-step with the 1-based iteration index and the new
// iterate; also once with (0, initial params) before the first iteration.
using IterationObserver =
    std::function<void(int iteration, const GaussianParams& params)>;

// Price-anchored starting point: mu_i is the mean observed single-product
// price of product i (falling back to the mean per-item bundle price, then
// to the overall per-item mean); sigma is s^2 I with s = the mean per-product
// price half-spread (singleton prices when a product has any, per-item bundle
// prices otherwise), corrected by (k + 1) / (k - 1) for k distinct price
// points and floored at 1 so degenerate spreads stay positive definite.
GaussianParams default_init(const Dataset& dataset);

// One E-step: for every transaction, a weighted batch of mc_samples draws
// from the current Gaussian truncated to that transaction's IC region. Region
// draws are filtered from one shared per-iteration pool; regions the pool
// cannot fill (acceptance below mc_samples / pool_size) switch to importance
// sampling with the proposal centered at find_interior_point and covariance
// equal to the current sigma. Batches depend only on (config.seed, iteration,
// transaction index), never on thread count.
std::vector<SampleBatch> e_step(const Dataset& dataset,
                                const GaussianParams& current,
                                const EmConfig& config, int iteration);

// Weighted maximum-likelihood update over all batches: every batch carries
// unit mass, so each transaction contributes equally. The covariance is taken
// about the updated mean and receives the diagonal jitter floor if needed.
GaussianParams m_step(const std::vector<SampleBatch>& batches);

// Monte-Carlo EM objective: sum over batches of the weighted mean log-density
// of the batch points under `candidate`.
double compute_q_hat(const std::vector<SampleBatch>& batches,
                     const GaussianParams& candidate);

FitReport fit(const Dataset& dataset, const EmConfig& config,
              const IterationObserver& observer = {});

// l1 distance between successive iterates: |dmu|_1 + |dSigma|_1.
double l1_step_norm(const GaussianParams& a, const GaussianParams& b);

}  // namespace bundlesight
