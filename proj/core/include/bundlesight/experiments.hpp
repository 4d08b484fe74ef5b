#pragma once

#include <cstdint>
#include <vector>

#include "bundlesight/datagen.hpp"
#include "bundlesight/em.hpp"

// Canned synthetic experiments shared by the command-line `repro` commands
// and the acceptance suite, so both exercise exactly the same protocol.
namespace bundlesight::experiments {

struct Figure1Result {
  GaussianParams truth;
  FitReport fit;
  std::vector<double> truth_errors;  // normalized l1 error, index 0 = init
  int distinct_bundles = 0;
};

// 6 products, 2000 transactions, per-transaction random menus, Gaussian
// truth; tracks the error to the truth across EM iterations.
Figure1Result run_figure1(std::uint64_t seed);

struct ConsistencyResult {
  std::vector<int> sizes;      // {1000, 2000, 4000}
  std::vector<double> errors;  // final error per size, same generated data
};

// 4 products; one N=4000 dataset whose prefixes give the smaller samples.
ConsistencyResult run_consistency(std::uint64_t seed);

struct Figure2Result {
  double em_rmse = 0.0;
  double mnl_rmse = 0.0;
  double em_runtime_seconds = 0.0;
  bool mnl_converged = false;
};

// 4 products, 2000 transactions, 80/20 split; choice-probability RMSE of
// the the fitted model vs a multinomial logit on the held-out 20%.
Figure2Result run_figure2(TruthKind kind, std::uint64_t seed);

struct CensoredComparisonResult {
  double full_rmse = 0.0;      // fit on complete training transactions
  double censored_rmse = 0.0;  // fit on purchase-only aggregated counts
  double censor_rate = 0.0;    // no-purchase share of the training split
};

// 4 products, 3 fixed menus with 3 bundles each, instance redrawn until the
// training no-purchase share lands in the experiment's 5-15% band. Fits the
// complete data first, then runs the censored fit on the purchase-only view
// of the same instance warm-started from the complete estimates, and compares
// both on the same held-out transactions.
CensoredComparisonResult run_censored_comparison(std::uint64_t seed);

struct MhComparisonResult {
  double em_error = 0.0;  // full normalized l1 parameter error
  double mh_error = 0.0;  // mean-only error; sigma is handed to MH
  double em_runtime_seconds = 0.0;
  double mh_runtime_seconds = 0.0;
  double mh_acceptance_rate = 0.0;
};

// 2 products, mu* = (0.5, 0.5), sigma* = [[4,1],[1,5]], N = 1000: the
// estimator against a 10k-iteration random-walk Metropolis posterior mean.
MhComparisonResult run_mh_comparison(std::uint64_t seed);

}  // namespace bundlesight::experiments
