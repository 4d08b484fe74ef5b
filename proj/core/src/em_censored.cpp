#include "bundlesight/em_censored.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "bundlesight/errors.hpp"
#include "bundlesight/polyhedron.hpp"
#include "em_internal.hpp"

namespace bundlesight {

void validate(const CensoredDataset& dataset, const std::string& where) {
  if (dataset.product_count <= 0)
    throw InvalidInputError(where + ": product_count must be positive");
  if (dataset.menus.empty())
    throw InvalidInputError(where + ": no menus");
  for (std::size_t m = 0; m < dataset.menus.size(); ++m) {
    const auto& block = dataset.menus[m];
    const std::string at = where + ".menus[" + std::to_string(m) + "]";
    validate(block.menu, dataset.product_count, at + ".menu");
    if (block.menu.size() == 0)
      throw InvalidInputError(at + ": menu must offer at least one entry");
    if (static_cast<int>(block.counts.size()) != block.menu.size())
      throw InvalidInputError(at + ": counts length " +
                              std::to_string(block.counts.size()) +
                              " != menu size " +
                              std::to_string(block.menu.size()));
    for (std::size_t j = 0; j < block.counts.size(); ++j)
      if (block.counts[j] < 0)
        throw InvalidInputError(at + ".counts[" + std::to_string(j) +
                                "]: negative count");
  }
}

double censored_posterior_pmf(long n_total, long n_observed, double p0) {
  if (n_observed < 0)
    throw InvalidInputError("censored_posterior_pmf: negative n_observed");
  if (!(p0 >= 0.0) || p0 >= 1.0)
    throw InvalidInputError(
        "censored_posterior_pmf: p0 must lie in [0, 1)");
  if (n_total < n_observed) return 0.0;
  if (p0 == 0.0) return n_total == n_observed ? 1.0 : 0.0;
  const double n = static_cast<double>(n_total);
  const double k = static_cast<double>(n_observed);
  const double log_choose =
      std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_choose + (n - k) * std::log(p0) +
                  (k + 1.0) * std::log1p(-p0));
}

GaussianParams default_init(const CensoredDataset& dataset) {
  validate(dataset);
  Dataset proxy;
  proxy.product_count = dataset.product_count;
  proxy.transactions.reserve(dataset.menus.size());
  for (const auto& block : dataset.menus) {
    Transaction txn;
    txn.menu = block.menu;
    txn.choice = 0;
    proxy.transactions.push_back(std::move(txn));
  }
  return default_init(proxy);
}

FitReport fit_censored(const CensoredDataset& dataset,
                       const CensoredConfig& config,
                       const IterationObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  validate(dataset);
  if (config.mc_instances < 1)
    throw InvalidInputError("fit_censored: mc_instances must be >= 1");
  const EmConfig& em = config.em;

  GaussianParams params;
  if (em.init_mu.size() > 0) {
    if (em.init_mu.size() != dataset.product_count)
      throw InvalidInputError("fit_censored: init_mu dimension mismatch");
    params.mu = em.init_mu;
    params.sigma = em.init_sigma;
    apply_jitter_floor(params.sigma);
    validate(params, "fit_censored.init");
  } else {
    params = default_init(dataset);
  }

  std::vector<std::vector<Polyhedron>> partitions;
  partitions.reserve(dataset.menus.size());
  for (const auto& block : dataset.menus)
    partitions.push_back(
        build_choice_partition(block.menu, dataset.product_count));

  FitReport report;
  report.seed = em.seed;
  report.config = em;
  if (observer) observer(0, params);
  const int L = config.mc_instances;
  for (int t = 1; t <= em.max_iterations; ++t) {
    const SharedPool pool(
        params, em.effective_pool_size(),
        derive_seed(em.seed, StreamTag::kPool, static_cast<std::uint64_t>(t),
                    0));
    std::vector<SampleBatch> batches;
    std::vector<double> masses;
    for (std::size_t m = 0; m < dataset.menus.size(); ++m) {
      const auto& block = dataset.menus[m];
      const auto& regions = partitions[m];
      const double p0 = pool.fraction_inside(regions[0]);
      long n_menu = 0;
      for (long c : block.counts) n_menu += c;
      // Posterior draws of the unobserved customer total, one per instance.
      long shortfall = 0;
      for (int l = 0; l < L; ++l) {
        RngStream count_rng(derive_seed(em.seed, StreamTag::kCensorCount,
                                        static_cast<std::uint64_t>(t), m,
                                        static_cast<std::uint64_t>(l)));
        shortfall +=
            sample_negative_binomial_total(n_menu, p0, count_rng) - n_menu;
      }
      for (int j = 0; j <= block.menu.size(); ++j) {
        const long need =
            j == 0 ? shortfall
                   : block.counts[static_cast<std::size_t>(j - 1)] * L;
        if (need == 0) continue;
        bool fb = false;
        const std::uint64_t index =
            (static_cast<std::uint64_t>(m) << 20) |
            static_cast<std::uint64_t>(j);
        batches.push_back(detail::sample_region_batch(
            pool, regions[static_cast<std::size_t>(j)], params, em, t, index,
            /*component=*/0, static_cast<int>(need), &fb));
        masses.push_back(static_cast<double>(need));
        report.fallback_batches += fb;
      }
    }
    GaussianParams next = detail::weighted_m_step(batches, masses);
    const double err = l1_step_norm(params, next);
    params = std::move(next);
    report.error_trace.push_back(err);
    report.iterations = t;
    if (observer) observer(t, params);
    if (err <= em.tolerance) {
      report.converged = true;
      break;
    }
  }
  report.params = params;
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace bundlesight
