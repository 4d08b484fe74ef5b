#include "bundlesight/em_gmm.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <map>
#include <string>

#include "bundlesight/errors.hpp"
#include "bundlesight/parallel.hpp"
#include "bundlesight/polyhedron.hpp"
#include "em_internal.hpp"

namespace bundlesight {

void validate(const GmmParams& params, const std::string& where) {
  if (params.components.empty())
    throw InvalidInputError(where + ": mixture has no components");
  const int d = params.dimension();
  double total = 0.0;
  for (std::size_t k = 0; k < params.components.size(); ++k) {
    const auto& c = params.components[k];
    const std::string at = where + ".components[" + std::to_string(k) + "]";
    if (!(c.weight > 0.0))
      throw InvalidInputError(at + ": weight must be positive");
    total += c.weight;
    if (c.params.dimension() != d)
      throw InvalidInputError(at + ": dimension mismatch");
    validate(c.params, at);
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidInputError(where + ": weights sum to " +
                            std::to_string(total) + ", expected 1");
}

namespace {

// Canonical byte key so identical regions share one probability estimate.
std::string region_key(const Polyhedron& poly) {
  std::string key;
  const int m = poly.halfspace_count();
  const int d = poly.dimension();
  key.reserve(sizeof(int) * 2 + sizeof(double) * (m * d + m));
  key.append(reinterpret_cast<const char*>(&m), sizeof(m));
  key.append(reinterpret_cast<const char*>(&d), sizeof(d));
  if (m > 0) {
    key.append(reinterpret_cast<const char*>(poly.normals.data()),
               sizeof(double) * static_cast<std::size_t>(m) *
                   static_cast<std::size_t>(d));
    key.append(reinterpret_cast<const char*>(poly.offsets.data()),
               sizeof(double) * static_cast<std::size_t>(m));
  }
  return key;
}

Eigen::MatrixXd responsibilities_with_pools(
    const std::vector<Polyhedron>& regions, const GmmParams& params,
    const EmConfig& config, int iteration,
    const std::vector<SharedPool>& pools, long* uniform_rows) {
  const int K = params.component_count();
  const std::size_t N = regions.size();

  std::map<std::string, int> index_of;
  std::vector<int> region_id(N);
  std::vector<const Polyhedron*> distinct;
  for (std::size_t n = 0; n < N; ++n) {
    auto [it, inserted] = index_of.try_emplace(
        region_key(regions[n]), static_cast<int>(distinct.size()));
    if (inserted) distinct.push_back(&regions[n]);
    region_id[n] = it->second;
  }

  Eigen::MatrixXd fracs(static_cast<int>(distinct.size()), K);
  for (std::size_t r = 0; r < distinct.size(); ++r)
    for (int k = 0; k < K; ++k)
      fracs(static_cast<int>(r), k) =
          pools[static_cast<std::size_t>(k)].fraction_inside(*distinct[r]);

  const int imp_count = std::max(1000, config.mc_samples);
  Eigen::MatrixXd R(static_cast<int>(N), K);
  long uniform = 0;
  for (std::size_t n = 0; n < N; ++n) {
    Eigen::VectorXd w(K);
    for (int k = 0; k < K; ++k)
      w[k] = fracs(region_id[n], k) *
             params.components[static_cast<std::size_t>(k)].weight;
    if (w.sum() == 0.0) {
      // Pool missed the region entirely; retry with importance estimates.
      for (int k = 0; k < K; ++k) {
        const auto& comp = params.components[static_cast<std::size_t>(k)];
        try {
          ProposalParams proposal;
          proposal.mu = find_interior_point(regions[n]);
          proposal.sigma = comp.params.sigma;
          w[k] = comp.weight *
                 region_probability_importance(
                     regions[n], comp.params, proposal, imp_count,
                     derive_seed(config.seed, StreamTag::kGeneric,
                                 static_cast<std::uint64_t>(iteration), n,
                                 static_cast<std::uint64_t>(k)));
        } catch (const EmptyRegionError&) {
          w[k] = 0.0;
        }
      }
    }
    const double total = w.sum();
    if (total > 0.0 && std::isfinite(total)) {
      R.row(static_cast<int>(n)) = (w / total).transpose();
    } else {
      R.row(static_cast<int>(n)).setConstant(1.0 / K);
      ++uniform;
    }
  }
  if (uniform_rows) *uniform_rows += uniform;
  return R;
}

std::vector<Polyhedron> transaction_regions(const Dataset& dataset) {
  std::vector<Polyhedron> regions;
  regions.reserve(dataset.transactions.size());
  for (const auto& txn : dataset.transactions)
    regions.push_back(
        build_ic_polyhedron(txn.menu, txn.choice, dataset.product_count));
  return regions;
}

}  // namespace

Eigen::MatrixXd responsibilities(const Dataset& dataset,
                                 const GmmParams& params,
                                 const EmConfig& config, int iteration) {
  validate(dataset);
  validate(params, "responsibilities.params");
  const auto regions = transaction_regions(dataset);
  std::vector<SharedPool> pools;
  pools.reserve(static_cast<std::size_t>(params.component_count()));
  for (int k = 0; k < params.component_count(); ++k)
    pools.emplace_back(
        params.components[static_cast<std::size_t>(k)].params,
        config.effective_pool_size(),
        derive_seed(config.seed, StreamTag::kPool,
                    static_cast<std::uint64_t>(iteration),
                    static_cast<std::uint64_t>(k)));
  return responsibilities_with_pools(regions, params, config, iteration, pools,
                                     nullptr);
}

GmmFitReport fit_gmm(const Dataset& dataset, const GmmConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  validate(dataset);
  if (config.components < 1)
    throw InvalidInputError("fit_gmm: components must be >= 1");
  if (!(config.weight_floor >= 0.0) || config.weight_floor >= 1.0)
    throw InvalidInputError("fit_gmm: weight_floor must lie in [0, 1)");
  const EmConfig& em = config.em;
  const int K = config.components;

  GmmParams params;
  if (K == 1) {
    GmmComponent c;
    c.weight = 1.0;
    if (em.init_mu.size() > 0) {
      c.params.mu = em.init_mu;
      c.params.sigma = em.init_sigma;
      apply_jitter_floor(c.params.sigma);
    } else {
      c.params = default_init(dataset);
    }
    params.components.push_back(std::move(c));
  } else {
    // Seed the mixture from the single-Gaussian solution, means split along
    // the marginal standard deviations.
    const FitReport base = fit(dataset, em);
    const Eigen::VectorXd spread =
        base.params.sigma.diagonal().cwiseSqrt();
    for (int k = 0; k < K; ++k) {
      const double c_k = -0.5 + static_cast<double>(k) / (K - 1);
      GmmComponent c;
      c.weight = 1.0 / K;
      c.params.mu = base.params.mu + c_k * spread;
      c.params.sigma = base.params.sigma;
      params.components.push_back(std::move(c));
    }
  }

  const auto regions = transaction_regions(dataset);
  const std::size_t N = regions.size();
  if (N == 0) throw InvalidInputError("fit_gmm: dataset has no transactions");

  GmmFitReport report;
  report.seed = em.seed;
  report.config = config;
  for (int t = 1; t <= em.max_iterations; ++t) {
    std::vector<SharedPool> pools;
    pools.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
      pools.emplace_back(params.components[static_cast<std::size_t>(k)].params,
                         em.effective_pool_size(),
                         derive_seed(em.seed, StreamTag::kPool,
                                     static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(k)));
    const Eigen::MatrixXd R = responsibilities_with_pools(
        regions, params, em, t, pools, &report.uniform_rows);

    GmmParams next = params;
    double err = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto& comp = params.components[static_cast<std::size_t>(k)];
      std::vector<SampleBatch> batches(N);
      std::vector<double> masses(N);
      std::vector<std::uint8_t> fell(N, 0);
      parallel_for(
          N,
          [&](std::size_t n) {
            masses[n] = R(static_cast<int>(n), k);
            if (masses[n] == 0.0) return;
            bool fb = false;
            batches[n] = detail::sample_region_batch(
                pools[static_cast<std::size_t>(k)], regions[n], comp.params,
                em, t, n, k, em.mc_samples, &fb);
            fell[n] = fb ? 1 : 0;
          },
          em.workers);
      for (auto f : fell) report.fallback_batches += f;
      auto& nk = next.components[static_cast<std::size_t>(k)];
      nk.params = detail::weighted_m_step(batches, masses);
      nk.weight = R.col(k).sum() / static_cast<double>(N);
    }
    // Weight floor, then renormalize.
    double wsum = 0.0;
    for (auto& c : next.components) {
      c.weight = std::max(c.weight, config.weight_floor);
      wsum += c.weight;
    }
    for (auto& c : next.components) c.weight /= wsum;

    for (int k = 0; k < K; ++k) {
      const auto& a = params.components[static_cast<std::size_t>(k)];
      const auto& b = next.components[static_cast<std::size_t>(k)];
      err += std::abs(a.weight - b.weight) + l1_step_norm(a.params, b.params);
    }
    params = std::move(next);
    report.error_trace.push_back(err);
    report.iterations = t;
    if (err <= em.tolerance) {
      report.converged = true;
      break;
    }
  }
  if (report.uniform_rows > 0)
    std::cerr << "fit_gmm: " << report.uniform_rows
              << " responsibility rows fell back to uniform\n";
  report.params = params;
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace bundlesight
