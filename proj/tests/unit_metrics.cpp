#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <vector>

#include "bundlesight/datagen.hpp"
#include "bundlesight/em_gmm.hpp"
#include "bundlesight/errors.hpp"
#include "bundlesight/metrics.hpp"
#include "bundlesight/types.hpp"
#include "oracles.hpp"

using namespace bundlesight;

namespace {

PriceMenu one_product_menu(double price) {
  PriceMenu menu;
  menu.entries.push_back({Bundle::single(0, 1), price});
  return menu;
}

}  // namespace

TEST_CASE("l1 parameter error normalizes by d^2 + d") {
  GaussianParams a, b;
  a.mu = Eigen::VectorXd::Zero(2);
  a.sigma = Eigen::MatrixXd::Identity(2, 2);
  b = a;
  CHECK(l1_param_error(a, b) == 0.0);
  b.mu(0) = 3.0;        // |dmu|_1 = 3
  b.sigma(0, 1) = 0.5;  // |dSigma|_1 = 1 over both symmetric entries
  b.sigma(1, 0) = 0.5;
  CHECK(l1_param_error(a, b) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("train test split partitions the data deterministically") {
  GenSpec spec;
  spec.product_count = 2;
  spec.n_transactions = 100;
  spec.seed = 55;
  const Dataset data = generate_dataset(spec).dataset;

  const SplitResult split = train_test_split(data, 0.2, 7);
  CHECK(split.test.transactions.size() == 20);
  CHECK(split.train.transactions.size() == 80);
  CHECK(split.train.product_count == 2);
  CHECK(split.test.product_count == 2);

  const SplitResult again = train_test_split(data, 0.2, 7);
  CHECK(split.test.transactions.size() == again.test.transactions.size());
  for (std::size_t i = 0; i < split.test.transactions.size(); ++i)
    CHECK(menu_byte_key(split.test.transactions[i].menu) ==
          menu_byte_key(again.test.transactions[i].menu));

  // A different seed shuffles differently (overwhelmingly likely).
  const SplitResult other = train_test_split(data, 0.2, 8);
  bool same = true;
  for (std::size_t i = 0; i < split.test.transactions.size(); ++i)
    same = same && menu_byte_key(split.test.transactions[i].menu) ==
                       menu_byte_key(other.test.transactions[i].menu);
  CHECK_FALSE(same);

  // Fraction zero: everything trains.
  const SplitResult all = train_test_split(data, 0.0, 7);
  CHECK(all.test.transactions.empty());
  CHECK(all.train.transactions.size() == 100);

  CHECK_THROWS_AS(train_test_split(data, 1.0, 7), InvalidInputError);
  CHECK_THROWS_AS(train_test_split(data, -0.1, 7), InvalidInputError);
}

TEST_CASE("predicted gaussian choice probabilities match the normal tail") {
  GaussianParams params;
  params.mu = Eigen::VectorXd::Constant(1, 10.0);
  params.sigma = Eigen::MatrixXd::Identity(1, 1) * 4.0;
  const PriceMenu menu = one_product_menu(11.0);
  const Eigen::VectorXd probs = predict_choice_probs(menu, params, 200000, 3);
  REQUIRE(probs.size() == 2);
  CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
  const double want = 1.0 - oracle::normal_cdf(0.5);
  CHECK(std::abs(probs(1) - want) < 4.0 * std::sqrt(want * (1 - want) / 200000));

  // Determinism under a fixed seed.
  const Eigen::VectorXd again = predict_choice_probs(menu, params, 200000, 3);
  CHECK((again - probs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mixture probabilities reduce to the single component at K = 1") {
  GmmParams mixture;
  GmmComponent comp;
  comp.weight = 1.0;
  comp.params.mu = Eigen::VectorXd::Constant(1, 10.0);
  comp.params.sigma = Eigen::MatrixXd::Identity(1, 1) * 4.0;
  mixture.components = {comp};

  const PriceMenu menu = one_product_menu(11.0);
  const Eigen::VectorXd probs = predict_choice_probs(menu, mixture, 100000, 5);
  REQUIRE(probs.size() == 2);
  CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
  const double want = 1.0 - oracle::normal_cdf(0.5);
  CHECK(std::abs(probs(1) - want) < 0.01);

  // A far-apart second component shifts mass the right way: mixture tail
  // probability is the weight average of the component tails.
  GmmComponent rich = comp;
  rich.params.mu = Eigen::VectorXd::Constant(1, 20.0);  // always buys
  mixture.components[0].weight = 0.25;
  rich.weight = 0.75;
  mixture.components.push_back(rich);
  const Eigen::VectorXd mixed = predict_choice_probs(menu, mixture, 200000, 5);
  const double mix_want = 0.25 * want + 0.75 * 1.0;
  CHECK(std::abs(mixed(1) - mix_want) < 0.01);
}

TEST_CASE("rmse of a perfect and a uniform predictor") {
  // One transaction, menu of one alternative, chosen.
  Dataset data;
  data.product_count = 1;
  Transaction t;
  t.menu = one_product_menu(0.5);
  t.choice = 1;
  data.transactions = {t};

  const auto perfect = [](const PriceMenu& menu) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(menu.size() + 1);
    p(1) = 1.0;
    return p;
  };
  CHECK(rmse_choice_prediction(data, perfect) == 0.0);

  const auto uniform = [](const PriceMenu& menu) {
    return Eigen::VectorXd::Constant(menu.size() + 1,
                                     1.0 / (menu.size() + 1));
  };
  // Cells (0.5 - 0)^2 and (0.5 - 1)^2 average to 0.25 -> rmse 0.5.
  CHECK(rmse_choice_prediction(data, uniform) ==
        doctest::Approx(0.5).epsilon(1e-12));

  // A predictor of the wrong length is rejected.
  const auto broken = [](const PriceMenu&) {
    return Eigen::VectorXd::Zero(5);
  };
  CHECK_THROWS_AS(rmse_choice_prediction(data, broken), InvalidInputError);
}

TEST_CASE("rmse caches by menu so repeated menus cost one prediction") {
  Dataset data;
  data.product_count = 1;
  Transaction t;
  t.menu = one_product_menu(0.5);
  t.choice = 1;
  data.transactions.assign(50, t);
  Transaction other = t;
  other.menu = one_product_menu(0.75);
  data.transactions.push_back(other);

  int calls = 0;
  const auto counting = [&calls](const PriceMenu& menu) {
    ++calls;
    return Eigen::VectorXd::Constant(menu.size() + 1,
                                     1.0 / (menu.size() + 1));
  };
  rmse_choice_prediction(data, counting);
  CHECK(calls == 2);  // two distinct menus
}
