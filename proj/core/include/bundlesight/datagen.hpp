#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bundlesight/em_censored.hpp"
#include "bundlesight/types.hpp"

namespace bundlesight {

enum class TruthKind { kGaussian, kGumbel };
enum class MenuMode { kRandomPerTransaction, kFixedMenus };

struct GenSpec {
  int product_count = 2;
  int n_transactions = 1000;
  TruthKind truth = TruthKind::kGaussian;
  MenuMode menu_mode = MenuMode::kRandomPerTransaction;

  // Random mode: each product enters the consideration set independently
  // (resampled until non-empty); the menu offers the considered singles plus
  // one random bundle per entry of bundle_sizes that fits.
  double consideration_prob = 0.5;
  std::vector<int> bundle_sizes = {2, 3};

  // Fixed mode: fixed_menu_count menus, each offering every single product
  // plus bundles_per_menu random distinct bundles (sizes from bundle_sizes);
  // transactions cycle through the menus round-robin.
  int fixed_menu_count = 3;
  int bundles_per_menu = 3;

  // Prices: single i ~ U[mu_i - price_halfwidth, mu_i + price_halfwidth];
  // bundle = sum of that menu's constituent single prices minus a
  // U[discount_lo, discount_hi] discount.
  double price_halfwidth = 3.0;
  double discount_lo = 0.0;
  double discount_hi = 5.0;

  // Drop no-purchase transactions and emit the per-menu count aggregation.
  // Requires fixed or explicit menus.
  bool censor = false;

  std::uint64_t seed = 0;

  // Overrides: when menus are given, menu_mode is ignored and transactions
  // cycle through them; when manual_truth is set, no truth is drawn.
  std::vector<PriceMenu> explicit_menus;
  Eigen::VectorXd manual_mu;
  Eigen::MatrixXd manual_sigma;
};

struct GroundTruth {
  GaussianParams gaussian;  // generating mu / sigma (sigma = A A^T)
  TruthKind kind = TruthKind::kGaussian;
  Eigen::VectorXd gumbel_scale;  // beta_i = sqrt(6 sigma_ii) / pi when Gumbel
};

struct GenResult {
  Dataset dataset;  // complete data, no-purchases included
  GroundTruth truth;
  // Populated when spec.censor is true:
  CensoredDataset censored;
  Dataset purchases_only;
  double censor_rate = 0.0;
};

// mu_i ~ U[10, 50]; sigma = A A^T with A_ij ~ U[1, 2]. Gumbel truths keep the
// same (mu, sigma) draw and add the variance-matching scales.
GroundTruth generate_ground_truth(int product_count, TruthKind kind,
                                  std::uint64_t seed);

GenResult generate_dataset(const GenSpec& spec);

// Groups transactions by identical menu and counts purchases per entry;
// no-purchase transactions are dropped. The building block behind
// GenSpec::censor, usable on any fixed-menu dataset slice.
CensoredDataset aggregate_censored(const std::vector<Transaction>& txns,
                                   int product_count);

// All 2^I - 1 nonempty bundles priced additively from per-product prices:
// the bundle-menu encoding of separate selling.
PriceMenu separate_selling_menu(const Eigen::VectorXd& prices);

}  // namespace bundlesight
