#include "bundlesight/metrics.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "bundlesight/errors.hpp"
#include "bundlesight/rng.hpp"
#include "bundlesight/sampler.hpp"

namespace bundlesight {

double l1_param_error(const GaussianParams& estimate,
                      const GaussianParams& truth) {
  const int d = truth.dimension();
  if (estimate.dimension() != d || estimate.sigma.rows() != d ||
      truth.sigma.rows() != d)
    throw InvalidInputError("l1_param_error: dimension mismatch");
  const double num = (estimate.mu - truth.mu).cwiseAbs().sum() +
                     (estimate.sigma - truth.sigma).cwiseAbs().sum();
  return num / (static_cast<double>(d) * d + d);
}

SplitResult train_test_split(const Dataset& dataset, double test_fraction,
                             std::uint64_t seed) {
  if (!(test_fraction >= 0.0) || test_fraction >= 1.0)
    throw InvalidInputError("train_test_split: fraction must be in [0, 1)");
  const std::size_t n = dataset.transactions.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  RngStream rng(derive_seed(seed, StreamTag::kSplit));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(order[i], order[j]);
  }
  const auto test_count = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  std::vector<std::uint8_t> in_test(n, 0);
  for (std::size_t i = 0; i < test_count && i < n; ++i) in_test[order[i]] = 1;
  SplitResult split;
  split.train.product_count = dataset.product_count;
  split.test.product_count = dataset.product_count;
  for (std::size_t i = 0; i < n; ++i)
    (in_test[i] ? split.test : split.train)
        .transactions.push_back(dataset.transactions[i]);
  return split;
}

Eigen::VectorXd predict_choice_probs(const PriceMenu& menu,
                                     const GaussianParams& params, int count,
                                     std::uint64_t seed) {
  if (count < 1) throw InvalidInputError("predict_choice_probs: count >= 1");
  CachedGaussian g(params);
  RngStream rng(derive_seed(seed, StreamTag::kPredict));
  Eigen::VectorXi hits = Eigen::VectorXi::Zero(menu.size() + 1);
  for (int s = 0; s < count; ++s)
    ++hits[choose_alternative(menu, g.sample(rng))];
  return hits.cast<double>() / static_cast<double>(count);
}

Eigen::VectorXd predict_choice_probs(const PriceMenu& menu,
                                     const GmmParams& params, int count,
                                     std::uint64_t seed) {
  if (count < 1) throw InvalidInputError("predict_choice_probs: count >= 1");
  validate(params);
  std::vector<CachedGaussian> gs;
  gs.reserve(params.components.size());
  for (const auto& c : params.components) gs.emplace_back(c.params);
  RngStream rng(derive_seed(seed, StreamTag::kPredict));
  Eigen::VectorXi hits = Eigen::VectorXi::Zero(menu.size() + 1);
  const std::size_t k_count = params.components.size();
  for (int s = 0; s < count; ++s) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t k = k_count - 1;
    for (std::size_t c = 0; c < k_count; ++c) {
      acc += params.components[c].weight;
      if (u < acc) {
        k = c;
        break;
      }
    }
    ++hits[choose_alternative(menu, gs[k].sample(rng))];
  }
  return hits.cast<double>() / static_cast<double>(count);
}

double rmse_choice_prediction(
    const Dataset& test,
    const std::function<Eigen::VectorXd(const PriceMenu&)>& predictor) {
  if (test.transactions.empty())
    throw InvalidInputError("rmse_choice_prediction: empty test set");
  std::map<std::string, Eigen::VectorXd> cache;
  double sq_sum = 0.0;
  long cells = 0;
  for (const auto& txn : test.transactions) {
    const std::string key = menu_byte_key(txn.menu);
    auto it = cache.find(key);
    if (it == cache.end()) {
      Eigen::VectorXd probs = predictor(txn.menu);
      if (static_cast<int>(probs.size()) != txn.menu.size() + 1)
        throw InvalidInputError(
            "rmse_choice_prediction: predictor returned " +
            std::to_string(probs.size()) + " probabilities for a menu of " +
            std::to_string(txn.menu.size()) + " entries");
      it = cache.emplace(key, std::move(probs)).first;
    }
    const Eigen::VectorXd& probs = it->second;
    for (int j = 0; j <= txn.menu.size(); ++j) {
      const double y = (txn.choice == j) ? 1.0 : 0.0;
      const double diff = probs[j] - y;
      sq_sum += diff * diff;
    }
    cells += txn.menu.size() + 1;
  }
  return std::sqrt(sq_sum / static_cast<double>(cells));
}

}  // namespace bundlesight
