#include "bundlesight/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include "bundlesight/errors.hpp"
#include "bundlesight/rng.hpp"
#include "bundlesight/sampler.hpp"

namespace bundlesight {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_spec(const GenSpec& spec) {
  if (spec.product_count < 1)
    throw InvalidInputError("GenSpec: product_count must be >= 1");
  if (spec.n_transactions < 1)
    throw InvalidInputError("GenSpec: n_transactions must be >= 1");
  if (!(spec.consideration_prob > 0.0) || spec.consideration_prob > 1.0)
    throw InvalidInputError("GenSpec: consideration_prob must be in (0, 1]");
  for (int s : spec.bundle_sizes)
    if (s < 2)
      throw InvalidInputError("GenSpec: bundle sizes must be >= 2");
  if (spec.price_halfwidth < 0.0)
    throw InvalidInputError("GenSpec: price_halfwidth must be >= 0");
  if (spec.discount_lo > spec.discount_hi || spec.discount_lo < 0.0)
    throw InvalidInputError("GenSpec: invalid discount range");
  if (spec.explicit_menus.empty() &&
      spec.menu_mode == MenuMode::kFixedMenus) {
    if (spec.fixed_menu_count < 1)
      throw InvalidInputError("GenSpec: fixed_menu_count must be >= 1");
    if (spec.bundles_per_menu < 0)
      throw InvalidInputError("GenSpec: bundles_per_menu must be >= 0");
  }
  if (spec.censor && spec.explicit_menus.empty() &&
      spec.menu_mode != MenuMode::kFixedMenus)
    throw InvalidInputError(
        "GenSpec: censor requires fixed or explicit menus (per-transaction "
        "random menus cannot be aggregated)");
  if (spec.manual_mu.size() > 0 &&
      (spec.manual_mu.size() != spec.product_count ||
       spec.manual_sigma.rows() != spec.product_count ||
       spec.manual_sigma.cols() != spec.product_count))
    throw InvalidInputError("GenSpec: manual truth dimension mismatch");
}

// k distinct indices from `from`, uniformly, in ascending order.
std::vector<int> draw_subset(const std::vector<int>& from, int k,
                             RngStream& rng) {
  std::vector<int> pool = from;
  for (int t = 0; t < k; ++t) {
    const std::size_t j =
        static_cast<std::size_t>(t) +
        static_cast<std::size_t>(rng.uniform_index(pool.size() - t));
    std::swap(pool[static_cast<std::size_t>(t)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

Bundle subset_to_bundle(const std::vector<int>& subset, int product_count) {
  Bundle b;
  b.mask.assign(static_cast<std::size_t>(product_count), 0);
  for (int i : subset) b.mask[static_cast<std::size_t>(i)] = 1;
  return b;
}

// Menu from a considered-product list: singles first (product order), then
// one random bundle per configured size that fits, bundle prices additive
// minus the discount.
PriceMenu build_menu(const std::vector<int>& considered, const GenSpec& spec,
                     const GroundTruth& truth, RngStream& rng) {
  PriceMenu menu;
  Eigen::VectorXd single_price = Eigen::VectorXd::Zero(spec.product_count);
  for (int i : considered) {
    MenuEntry e;
    e.bundle = Bundle::single(i, spec.product_count);
    e.price = truth.gaussian.mu[i] +
              rng.uniform(-spec.price_halfwidth, spec.price_halfwidth);
    single_price[i] = e.price;
    menu.entries.push_back(std::move(e));
  }
  std::set<std::vector<std::uint8_t>> seen;
  for (const auto& e : menu.entries) seen.insert(e.bundle.mask);
  for (int size : spec.bundle_sizes) {
    if (size > static_cast<int>(considered.size())) continue;
    const auto subset = draw_subset(considered, size, rng);
    Bundle b = subset_to_bundle(subset, spec.product_count);
    const double discount = rng.uniform(spec.discount_lo, spec.discount_hi);
    if (!seen.insert(b.mask).second) continue;
    MenuEntry e;
    double sum = 0.0;
    for (int i : subset) sum += single_price[i];
    e.bundle = std::move(b);
    e.price = sum - discount;
    menu.entries.push_back(std::move(e));
  }
  return menu;
}

// Fixed menu: every single product, plus bundles_per_menu distinct random
// bundles with sizes cycling through bundle_sizes.
PriceMenu build_fixed_menu(const GenSpec& spec, const GroundTruth& truth,
                           RngStream& rng) {
  PriceMenu menu;
  Eigen::VectorXd single_price(spec.product_count);
  std::vector<int> all(static_cast<std::size_t>(spec.product_count));
  for (int i = 0; i < spec.product_count; ++i) {
    all[static_cast<std::size_t>(i)] = i;
    MenuEntry e;
    e.bundle = Bundle::single(i, spec.product_count);
    e.price = truth.gaussian.mu[i] +
              rng.uniform(-spec.price_halfwidth, spec.price_halfwidth);
    single_price[i] = e.price;
    menu.entries.push_back(std::move(e));
  }
  std::set<std::vector<std::uint8_t>> seen;
  int added = 0;
  int attempts = 0;
  while (added < spec.bundles_per_menu && attempts < 200) {
    ++attempts;
    if (spec.bundle_sizes.empty()) break;
    const int size = std::min(
        spec.bundle_sizes[static_cast<std::size_t>(added) %
                          spec.bundle_sizes.size()],
        spec.product_count);
    if (size < 2) break;
    const auto subset = draw_subset(all, size, rng);
    Bundle b = subset_to_bundle(subset, spec.product_count);
    const double discount = rng.uniform(spec.discount_lo, spec.discount_hi);
    if (!seen.insert(b.mask).second) continue;
    MenuEntry e;
    double sum = 0.0;
    for (int i : subset) sum += single_price[i];
    e.bundle = std::move(b);
    e.price = sum - discount;
    menu.entries.push_back(std::move(e));
    ++added;
  }
  return menu;
}

Eigen::VectorXd draw_valuation(const GroundTruth& truth,
                               const CachedGaussian* gaussian,
                               RngStream& rng) {
  const int d = truth.gaussian.dimension();
  if (truth.kind == TruthKind::kGaussian) return gaussian->sample(rng);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    v[i] = truth.gaussian.mu[i] -
           truth.gumbel_scale[i] * std::log(-std::log(u));
  }
  return v;
}

}  // namespace

GroundTruth generate_ground_truth(int product_count, TruthKind kind,
                                  std::uint64_t seed) {
  if (product_count < 1)
    throw InvalidInputError("generate_ground_truth: product_count must be >= 1");
  RngStream rng(derive_seed(seed, StreamTag::kTruth));
  GroundTruth truth;
  truth.kind = kind;
  truth.gaussian.mu.resize(product_count);
  for (int i = 0; i < product_count; ++i)
    truth.gaussian.mu[i] = rng.uniform(10.0, 50.0);
  Eigen::MatrixXd a(product_count, product_count);
  for (int i = 0; i < product_count; ++i)
    for (int j = 0; j < product_count; ++j) a(i, j) = rng.uniform(1.0, 2.0);
  truth.gaussian.sigma = a * a.transpose();
  if (kind == TruthKind::kGumbel) {
    truth.gumbel_scale.resize(product_count);
    for (int i = 0; i < product_count; ++i)
      truth.gumbel_scale[i] =
          std::sqrt(6.0 * truth.gaussian.sigma(i, i)) / kPi;
  }
  return truth;
}

GenResult generate_dataset(const GenSpec& spec) {
  validate_spec(spec);
  GenResult result;
  if (spec.manual_mu.size() > 0) {
    result.truth.kind = spec.truth;
    result.truth.gaussian.mu = spec.manual_mu;
    result.truth.gaussian.sigma = spec.manual_sigma;
    validate(result.truth.gaussian, "GenSpec.manual_truth");
    if (spec.truth == TruthKind::kGumbel) {
      result.truth.gumbel_scale.resize(spec.product_count);
      for (int i = 0; i < spec.product_count; ++i)
        result.truth.gumbel_scale[i] =
            std::sqrt(6.0 * result.truth.gaussian.sigma(i, i)) / kPi;
    }
  } else {
    result.truth =
        generate_ground_truth(spec.product_count, spec.truth, spec.seed);
  }

  // Menus.
  std::vector<PriceMenu> fixed = spec.explicit_menus;
  if (!fixed.empty()) {
    for (std::size_t m = 0; m < fixed.size(); ++m)
      validate(fixed[m], spec.product_count,
               "GenSpec.explicit_menus[" + std::to_string(m) + "]");
  } else if (spec.menu_mode == MenuMode::kFixedMenus) {
    for (int m = 0; m < spec.fixed_menu_count; ++m) {
      RngStream rng(derive_seed(spec.seed, StreamTag::kMenu,
                                static_cast<std::uint64_t>(m)));
      fixed.push_back(build_fixed_menu(spec, result.truth, rng));
    }
  }

  const CachedGaussian* gaussian_sampler = nullptr;
  CachedGaussian owned(result.truth.gaussian);
  if (result.truth.kind == TruthKind::kGaussian) gaussian_sampler = &owned;

  result.dataset.product_count = spec.product_count;
  result.dataset.transactions.reserve(
      static_cast<std::size_t>(spec.n_transactions));
  for (int n = 0; n < spec.n_transactions; ++n) {
    Transaction txn;
    if (!fixed.empty()) {
      txn.menu = fixed[static_cast<std::size_t>(n) % fixed.size()];
    } else {
      RngStream menu_rng(derive_seed(spec.seed, StreamTag::kMenu,
                                     static_cast<std::uint64_t>(n)));
      std::vector<int> considered;
      while (considered.empty()) {
        considered.clear();
        for (int i = 0; i < spec.product_count; ++i)
          if (menu_rng.bernoulli(spec.consideration_prob))
            considered.push_back(i);
      }
      txn.menu = build_menu(considered, spec, result.truth, menu_rng);
    }
    RngStream value_rng(derive_seed(spec.seed, StreamTag::kChoice,
                                    static_cast<std::uint64_t>(n)));
    const Eigen::VectorXd v =
        draw_valuation(result.truth, gaussian_sampler, value_rng);
    txn.choice = choose_alternative(txn.menu, v);
    result.dataset.transactions.push_back(std::move(txn));
  }

  if (spec.censor) {
    long dropped = 0;
    result.purchases_only.product_count = spec.product_count;
    for (const auto& txn : result.dataset.transactions) {
      if (txn.choice == 0)
        ++dropped;
      else
        result.purchases_only.transactions.push_back(txn);
    }
    result.censor_rate =
        static_cast<double>(dropped) / spec.n_transactions;
    result.censored =
        aggregate_censored(result.dataset.transactions, spec.product_count);
    if (result.censor_rate < 0.05 || result.censor_rate > 0.15)
      std::cerr << "generate_dataset: censor rate " << result.censor_rate
                << " outside the nominal [0.05, 0.15] band\n";
  }
  return result;
}

CensoredDataset aggregate_censored(const std::vector<Transaction>& txns,
                                   int product_count) {
  CensoredDataset out;
  out.product_count = product_count;
  std::map<std::string, std::size_t> index_of;
  for (const auto& txn : txns) {
    auto [it, inserted] =
        index_of.try_emplace(menu_byte_key(txn.menu), out.menus.size());
    if (inserted) {
      CensoredMenuBlock block;
      block.menu = txn.menu;
      block.counts.assign(static_cast<std::size_t>(txn.menu.size()), 0);
      out.menus.push_back(std::move(block));
    }
    if (txn.choice > 0)
      ++out.menus[it->second].counts[static_cast<std::size_t>(txn.choice - 1)];
  }
  return out;
}

PriceMenu separate_selling_menu(const Eigen::VectorXd& prices) {
  const int d = static_cast<int>(prices.size());
  if (d < 1 || d > 16)
    throw InvalidInputError(
        "separate_selling_menu: needs 1..16 products (menu has 2^I - 1 "
        "entries)");
  PriceMenu menu;
  for (unsigned mask = 1; mask < (1u << d); ++mask) {
    MenuEntry e;
    e.bundle.mask.assign(static_cast<std::size_t>(d), 0);
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
      if (mask & (1u << i)) {
        e.bundle.mask[static_cast<std::size_t>(i)] = 1;
        sum += prices[i];
      }
    }
    e.price = sum;
    menu.entries.push_back(std::move(e));
  }
  return menu;
}

}  // namespace bundlesight
