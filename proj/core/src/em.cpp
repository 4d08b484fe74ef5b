#include "bundlesight/em.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "bundlesight/errors.hpp"
#include "bundlesight/parallel.hpp"
#include "bundlesight/polyhedron.hpp"
#include "em_internal.hpp"

namespace bundlesight {

int EmConfig::effective_pool_size() const {
  if (pool_size > 0) return pool_size;
  return std::max(100 * mc_samples, 100000);
}

long EmConfig::rejection_budget(int count) const {
  const double t = acceptance_threshold > 0 ? acceptance_threshold : 0.01;
  return static_cast<long>(std::ceil(count / t));
}

static void validate_config(const EmConfig& cfg) {
  if (cfg.mc_samples < 1)
    throw InvalidInputError("EmConfig: mc_samples must be >= 1");
  if (!(cfg.tolerance > 0))
    throw InvalidInputError("EmConfig: tolerance must be positive");
  if (cfg.max_iterations < 1)
    throw InvalidInputError("EmConfig: max_iterations must be >= 1");
  if (cfg.init_mu.size() > 0 &&
      (cfg.init_sigma.rows() != cfg.init_mu.size() ||
       cfg.init_sigma.cols() != cfg.init_mu.size()))
    throw InvalidInputError(
        "EmConfig: init_sigma must match init_mu when manual init is used");
}

GaussianParams default_init(const Dataset& dataset) {
  validate(dataset);
  const int d = dataset.product_count;
  Eigen::VectorXd single_sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd single_cnt = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd item_sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd item_cnt = Eigen::VectorXd::Zero(d);
  double all_sum = 0.0;
  long all_cnt = 0;
  // Per-product price points; singleton prices when available, per-item
  // bundle prices otherwise. Their spread sets the initial sigma scale: the
  // global price range mixes level differences across products into the
  // dispersion estimate and starts sigma orders of magnitude too wide.
  std::vector<std::vector<double>> single_prices(static_cast<std::size_t>(d));
  std::vector<std::vector<double>> item_prices(static_cast<std::size_t>(d));
  for (const auto& txn : dataset.transactions) {
    for (const auto& e : txn.menu.entries) {
      const int sz = e.bundle.size();
      const double per_item = e.price / sz;
      for (int i = 0; i < d; ++i) {
        if (!e.bundle.mask[static_cast<std::size_t>(i)]) continue;
        if (sz == 1) {
          single_prices[static_cast<std::size_t>(i)].push_back(e.price);
          single_sum[i] += e.price;
          single_cnt[i] += 1.0;
        }
        item_prices[static_cast<std::size_t>(i)].push_back(per_item);
        item_sum[i] += per_item;
        item_cnt[i] += 1.0;
      }
      all_sum += per_item;
      ++all_cnt;
    }
  }
  const double overall = all_cnt > 0 ? all_sum / all_cnt : 0.0;
  GaussianParams init;
  init.mu.resize(d);
  for (int i = 0; i < d; ++i) {
    if (single_cnt[i] > 0)
      init.mu[i] = single_sum[i] / single_cnt[i];
    else if (item_cnt[i] > 0)
      init.mu[i] = item_sum[i] / item_cnt[i];
    else
      init.mu[i] = overall;
  }
  // Half the per-product spread, corrected for the number of DISTINCT price
  // points: the range of k values drawn from a band understates its width by
  // (k - 1) / (k + 1), which matters when fixed menus repeat a few prices.
  const auto half_width = [](std::vector<double>& prices) {
    std::sort(prices.begin(), prices.end());
    int distinct = 1;
    for (std::size_t j = 1; j < prices.size(); ++j)
      if (prices[j] - prices[j - 1] > 1e-9 * (1.0 + std::abs(prices[j])))
        ++distinct;
    if (distinct < 2) return 0.0;
    const double spread = prices.back() - prices.front();
    return spread / 2.0 * (distinct + 1) / (distinct - 1);
  };
  double spread_sum = 0.0;
  int spread_cnt = 0;
  for (int i = 0; i < d; ++i) {
    auto& singles = single_prices[static_cast<std::size_t>(i)];
    auto& items = item_prices[static_cast<std::size_t>(i)];
    if (!singles.empty()) {
      spread_sum += half_width(singles);
      ++spread_cnt;
    } else if (!items.empty()) {
      spread_sum += half_width(items);
      ++spread_cnt;
    }
  }
  const double s =
      spread_cnt > 0 ? std::max(spread_sum / spread_cnt, 1.0) : 1.0;
  init.sigma = s * s * Eigen::MatrixXd::Identity(d, d);
  return init;
}

namespace detail {

SampleBatch sample_region_batch(const SharedPool& pool, const Polyhedron& poly,
                                const GaussianParams& current,
                                const EmConfig& config, int iteration,
                                std::uint64_t index, int component, int count,
                                bool* used_fallback) {
  const std::uint64_t it = static_cast<std::uint64_t>(iteration);
  const std::uint64_t comp = static_cast<std::uint64_t>(component);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pts;
  const std::uint64_t offset =
      derive_seed(config.seed, StreamTag::kOffset, it, index, comp);
  const int found = pool.collect(poly, count, offset, pts);
  if (found >= count) {
    if (used_fallback) *used_fallback = false;
    SampleBatch batch;
    batch.points = std::move(pts);
    batch.weights = Eigen::VectorXd::Constant(count, 1.0 / count);
    return batch;
  }
  if (used_fallback) *used_fallback = true;
  ProposalParams proposal;
  proposal.mu = find_interior_point(poly);
  proposal.sigma = current.sigma;
  return sample_truncated_importance(
      poly, current, proposal, count,
      derive_seed(config.seed, StreamTag::kFallback, it, index, comp),
      config.rejection_budget(count));
}

GaussianParams weighted_m_step(const std::vector<SampleBatch>& batches,
                               const std::vector<double>& masses) {
  if (batches.empty())
    throw InvalidInputError("m_step: no batches");
  if (!masses.empty() && masses.size() != batches.size())
    throw InvalidInputError("m_step: masses/batches length mismatch");
  const int d = static_cast<int>(batches.front().points.cols());
  double total = 0.0;
  Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const double mass = masses.empty() ? 1.0 : masses[b];
    if (mass == 0.0) continue;
    first.noalias() += mass * batches[b].weighted_mean();
    total += mass;
  }
  if (!(total > 0.0))
    throw NumericFailureError("m_step: total batch mass is zero");
  const Eigen::VectorXd mu = first / total;
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const double mass = masses.empty() ? 1.0 : masses[b];
    if (mass == 0.0) continue;
    scatter.noalias() += mass * batches[b].weighted_scatter(mu);
  }
  GaussianParams out;
  out.mu = mu;
  out.sigma = scatter / total;
  if (!out.mu.allFinite() || !out.sigma.allFinite())
    throw NumericFailureError("m_step: non-finite moments");
  apply_jitter_floor(out.sigma);
  return out;
}

}  // namespace detail

static std::vector<SampleBatch> e_step_cached(
    const std::vector<Polyhedron>& regions, const GaussianParams& current,
    const EmConfig& config, int iteration, long* fallback_count) {
  const SharedPool pool(
      current, config.effective_pool_size(),
      derive_seed(config.seed, StreamTag::kPool,
                  static_cast<std::uint64_t>(iteration), 0));
  std::vector<SampleBatch> batches(regions.size());
  std::vector<std::uint8_t> fell(regions.size(), 0);
  parallel_for(
      regions.size(),
      [&](std::size_t n) {
        bool fb = false;
        batches[n] = detail::sample_region_batch(pool, regions[n], current,
                                                 config, iteration, n,
                                                 /*component=*/0,
                                                 config.mc_samples, &fb);
        fell[n] = fb ? 1 : 0;
      },
      config.workers);
  if (fallback_count)
    for (auto f : fell) *fallback_count += f;
  return batches;
}

std::vector<SampleBatch> e_step(const Dataset& dataset,
                                const GaussianParams& current,
                                const EmConfig& config, int iteration) {
  validate(dataset);
  validate(current, "e_step.params");
  validate_config(config);
  std::vector<Polyhedron> regions;
  regions.reserve(dataset.transactions.size());
  for (const auto& txn : dataset.transactions)
    regions.push_back(build_ic_polyhedron(txn.menu, txn.choice,
                                          dataset.product_count));
  return e_step_cached(regions, current, config, iteration, nullptr);
}

GaussianParams m_step(const std::vector<SampleBatch>& batches) {
  return detail::weighted_m_step(batches, {});
}

double compute_q_hat(const std::vector<SampleBatch>& batches,
                     const GaussianParams& candidate) {
  validate(candidate, "compute_q_hat.params");
  const CachedGaussian g(candidate);
  double q = 0.0;
  Eigen::VectorXd x(candidate.dimension());
  for (const auto& batch : batches) {
    for (int l = 0; l < batch.size(); ++l) {
      x = batch.points.row(l).transpose();
      q += batch.weights[l] * g.log_pdf(x);
    }
  }
  return q;
}

double l1_step_norm(const GaussianParams& a, const GaussianParams& b) {
  return (a.mu - b.mu).cwiseAbs().sum() +
         (a.sigma - b.sigma).cwiseAbs().sum();
}

FitReport fit(const Dataset& dataset, const EmConfig& config,
              const IterationObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  validate(dataset);
  validate_config(config);
  if (dataset.transactions.empty())
    throw InvalidInputError("fit: dataset has no transactions");

  GaussianParams params;
  if (config.init_mu.size() > 0) {
    if (config.init_mu.size() != dataset.product_count)
      throw InvalidInputError("fit: init_mu dimension != product_count");
    params.mu = config.init_mu;
    params.sigma = config.init_sigma;
    apply_jitter_floor(params.sigma);
    validate(params, "fit.init");
  } else {
    params = default_init(dataset);
  }

  std::vector<Polyhedron> regions;
  regions.reserve(dataset.transactions.size());
  for (const auto& txn : dataset.transactions)
    regions.push_back(build_ic_polyhedron(txn.menu, txn.choice,
                                          dataset.product_count));

  FitReport report;
  report.seed = config.seed;
  report.config = config;
  if (observer) observer(0, params);
  for (int t = 1; t <= config.max_iterations; ++t) {
    const auto batches =
        e_step_cached(regions, params, config, t, &report.fallback_batches);
    GaussianParams next = m_step(batches);
    const double err = l1_step_norm(params, next);
    params = std::move(next);
    report.error_trace.push_back(err);
    report.iterations = t;
    if (observer) observer(t, params);
    if (err <= config.tolerance) {
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
