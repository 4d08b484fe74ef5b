#pragma once

#include <cstdint>
#include <vector>

#include "bundlesight/em.hpp"
#include "bundlesight/types.hpp"

namespace bundlesight {

// Aggregated sales under one posted menu when no-purchase visits leave no
// record: counts[j] customers bought entry j. The number of browsing
// customers who bought nothing is unknown.
struct CensoredMenuBlock {
  PriceMenu menu;
  std::vector<long> counts;  // size == menu.size()
};

struct CensoredDataset {
  int product_count = 0;
  std::vector<CensoredMenuBlock> menus;
};

void validate(const CensoredDataset& dataset,
              const std::string& where = "censored_dataset");

// P(total customers = n_total | n_observed purchases), the negative-binomial
// posterior under an improper uniform prior on the customer count:
//   C(n_total, n_observed) * p0^(n_total - n_observed) * (1-p0)^(n_observed+1)
// for n_total >= n_observed, else 0. p0 is the no-purchase probability.
double censored_posterior_pmf(long n_total, long n_observed, double p0);

struct CensoredConfig {
  EmConfig em;
  int mc_instances = 20;  // posterior draws of the customer count per menu
};

// Same heuristic as default_init(Dataset), over the distinct menus.
GaussianParams default_init(const CensoredDataset& dataset);

// Monte-Carlo EM under demand censoring. Each iteration, per menu: the
// no-purchase probability p0 is estimated on the shared pool; mc_instances
// posterior draws of the unobserved customer total are taken (independently
// per menu); purchase regions receive counts[j] draws per instance and the
// no-purchase region the drawn shortfall; the M-step pools all points with
// the total simulated count as normalizer. Throws DegenerateCensoringError
// when p0 reaches 1 - 1e-9.
//
// When the initial parameters imply p0 ~ 0 the augmentation contributes
// nothing and the run reduces to the base fit on the observed purchases.
// The isotropic default init does exactly that beyond a few products (an
// independent-coordinates model rarely leaves every surplus negative), so
// pass an anchor through em.init_mu / em.init_sigma — e.g. a complete-data
// fit or domain knowledge of the no-purchase share — when one is available.
FitReport fit_censored(const CensoredDataset& dataset,
                       const CensoredConfig& config,
                       const IterationObserver& observer = {});

}  // namespace bundlesight
