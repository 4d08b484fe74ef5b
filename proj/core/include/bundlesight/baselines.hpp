#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "bundlesight/types.hpp"

namespace bundlesight {

// --- multinomial logit -------------------------------------------------------

struct MnlConfig {
  int max_iterations = 500;
  double tolerance = 1e-6;  // sup-norm of the log-likelihood gradient
  double ridge = 1e-4;      // penalty strength for the fallback refit
};

struct MnlParams {
  std::vector<Bundle> alternatives;  // distinct bundles, first-seen order
  Eigen::VectorXd intercepts;        // one per alternative
  double price_coefficient = 0.0;    // shared price slope
  int iterations = 0;
  bool converged = false;
  bool ridged = false;  // true when the ridge-penalized refit was used
  double final_grad_norm = 0.0;
};

// Maximum-likelihood multinomial logit over the distinct bundles in the
// dataset. Utility of a menu entry is intercept(bundle) + beta * price; the
// outside option has utility 0. Fitted by gradient ascent with Armijo
// backtracking; when the unpenalized fit diverges (complete separation) or
// stalls, it restarts with a small ridge penalty on the original parameters.
MnlParams fit_mnl(const Dataset& dataset, const MnlConfig& config = {});

// Choice probabilities over {outside, entry 1, ..., entry J}. Bundles never
// seen during fitting get intercept 0.
Eigen::VectorXd predict_choice_probs(const PriceMenu& menu,
                                     const MnlParams& params);

// --- Monte-Carlo marginal likelihood -----------------------------------------

// log P(data | mu) with sigma held fixed. Each transaction's region
// probability is estimated over one shared pool of mc_count draws from
// N(0, sigma), prepared once at construction; evaluating at a new mu only
// shifts the halfspace thresholds, so every evaluation reuses the same
// randomness (common random numbers) and the map mu -> log-likelihood is
// deterministic. Probabilities are smoothed as (hits + 1/2) / (M + 1).
class MarginalLikelihood {
 public:
  MarginalLikelihood(const Dataset& dataset, const Eigen::MatrixXd& sigma,
                     int mc_count, std::uint64_t seed);

  double log_likelihood(const Eigen::VectorXd& mu) const;
  int mc_count() const { return mc_count_; }

 private:
  using RowMajorMatrix =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  RowMajorMatrix g_;      // stacked normals times the draw pool, rows x M
  Eigen::MatrixXd h_;     // stacked halfspace normals, rows x I
  Eigen::VectorXd b_;     // stacked halfspace offsets
  std::vector<std::pair<int, int>> ranges_;  // per-transaction row [begin, end)
  int mc_count_ = 0;
};

// --- random-walk Metropolis over mu ------------------------------------------

struct MhConfig {
  int iterations = 10000;
  double proposal_halfwidth = 0.5;
  int likelihood_mc = 1000;
  double burn_in_fraction = 0.5;
  Eigen::VectorXd prior_lo;  // empty: [min price - 10, max price + 10]
  Eigen::VectorXd prior_hi;
  std::uint64_t seed = 0;
};

struct MhReport {
  Eigen::VectorXd posterior_mean;
  Eigen::MatrixXd samples;  // post-burn-in chain states, one row per iteration
  double acceptance_rate = 0.0;
  double runtime_seconds = 0.0;
};

// Metropolis with a flat box prior and symmetric uniform proposals; sigma is
// held fixed at sigma_known. Returns the post-burn-in posterior mean.
MhReport run_mh(const Dataset& dataset, const Eigen::MatrixXd& sigma_known,
                const MhConfig& config);

// --- dense-grid posterior (reference for small problems) ---------------------

struct GridConfig {
  int nodes_per_dim = 41;
  int likelihood_mc = 1000;
  Eigen::VectorXd lo;  // empty: [min price - 10, max price + 10]
  Eigen::VectorXd hi;
  std::uint64_t seed = 0;
};

struct GridReport {
  Eigen::VectorXd posterior_mean;
  Eigen::VectorXd map_point;
  Eigen::MatrixXd nodes;    // one grid node per row
  Eigen::VectorXd weights;  // normalized posterior mass per node
  double max_log_likelihood = 0.0;
};

// Flat-prior posterior over mu evaluated on a tensor grid (at most 2e5
// nodes). Uses the same likelihood seed derivation as run_mh, so running
// both with one seed compares the chain against its own exact posterior.
GridReport run_grid(const Dataset& dataset, const Eigen::MatrixXd& sigma_known,
                    const GridConfig& config);

}  // namespace bundlesight
