#pragma once

#include <cstdint>
#include <functional>

#include "bundlesight/em_gmm.hpp"
#include "bundlesight/types.hpp"

namespace bundlesight {

// Normalized l1 parameter error between an estimate and the truth:
// (|mu_hat - mu|_1 + |sigma_hat - sigma|_1) / (I^2 + I).
double l1_param_error(const GaussianParams& estimate,
                      const GaussianParams& truth);

struct SplitResult {
  Dataset train;
  Dataset test;
};

// Random split preserving original transaction order within each half.
// test_fraction in [0, 1); the test set gets round(fraction * N) rows.
SplitResult train_test_split(const Dataset& dataset, double test_fraction,
                             std::uint64_t seed);

// Choice probabilities over {outside, entry 1, ..., entry J} for one menu.
// Index 0 is the outside option. Estimated by drawing `count` valuations and
// counting the simulated chooser's picks.
Eigen::VectorXd predict_choice_probs(const PriceMenu& menu,
                                     const GaussianParams& params, int count,
                                     std::uint64_t seed);
Eigen::VectorXd predict_choice_probs(const PriceMenu& menu,
                                     const GmmParams& params, int count,
                                     std::uint64_t seed);

// Root-mean-square error of predicted choice probabilities against observed
// one-hot choices, averaged over every (transaction, alternative) cell
// including the outside option. `predictor` maps a menu to a probability
// vector of length J+1; its output is cached per distinct menu.
double rmse_choice_prediction(
    const Dataset& test,
    const std::function<Eigen::VectorXd(const PriceMenu&)>& predictor);

}  // namespace bundlesight
