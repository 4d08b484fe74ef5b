#include <doctest.h>

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "bundlesight/errors.hpp"
#include "bundlesight/rng.hpp"
#include "bundlesight/types.hpp"
#include "oracles.hpp"

using namespace bundlesight;

namespace {

PriceMenu spec_menu() {
  // Two products: single 1 at 10, single 2 at 20, the pair at 25.
  PriceMenu menu;
  menu.entries.push_back({Bundle::single(0, 2), 10.0});
  menu.entries.push_back({Bundle::single(1, 2), 20.0});
  menu.entries.push_back({Bundle::from_bitstring("11"), 25.0});
  return menu;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("Bundle bitstring round trip and accessors") {
  const Bundle b = Bundle::from_bitstring("101");
  CHECK(b.product_count() == 3);
  CHECK(b.size() == 2);
  CHECK(b.contains(0));
  CHECK_FALSE(b.contains(1));
  CHECK(b.contains(2));
  CHECK(b.to_bitstring() == "101");
  CHECK(Bundle::from_bitstring(b.to_bitstring()) == b);

  const Bundle s = Bundle::single(1, 3);
  CHECK(s.to_bitstring() == "010");
  CHECK(s.size() == 1);
}

TEST_CASE("validate rejects malformed data with a path in the message") {
  Dataset data;
  data.product_count = 2;
  Transaction txn;
  txn.menu = spec_menu();
  txn.choice = 4;  // menu has 3 entries; valid choices are 0..3
  data.transactions.push_back(txn);
  CHECK_THROWS_AS(validate(data), InvalidInputError);
  try {
    validate(data);
  } catch (const InvalidInputError& e) {
    CHECK(std::string(e.what()).find("transactions[0]") != std::string::npos);
  }

  data.transactions[0].choice = 1;
  CHECK_NOTHROW(validate(data));

  // Empty bundle mask is invalid inside a menu.
  Dataset bad = data;
  bad.transactions[0].menu.entries[0].bundle = Bundle::from_bitstring("00");
  CHECK_THROWS_AS(validate(bad), InvalidInputError);

  // Mask length must match the dataset product count.
  Dataset wrong = data;
  wrong.product_count = 3;
  CHECK_THROWS_AS(validate(wrong), InvalidInputError);
}

TEST_CASE("gaussian params validation") {
  GaussianParams p;
  p.mu = vec2(1.0, 2.0);
  p.sigma = Eigen::MatrixXd::Identity(2, 2);
  CHECK_NOTHROW(validate(p));
  CHECK(p.dimension() == 2);

  GaussianParams bad = p;
  bad.sigma(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(validate(bad), InvalidInputError);

  GaussianParams mismatch = p;
  mismatch.mu = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(validate(mismatch), InvalidInputError);
}

TEST_CASE("surplus and choose_alternative basics") {
  const PriceMenu menu = spec_menu();

  // v = (6, 20): surpluses are -4, 0, 1 -> bundle (entry 3) wins.
  CHECK(choose_alternative(menu, vec2(6.0, 20.0)) == 3);
  // v = (5, 15): surpluses -5, -5, -5 -> all negative, outside option.
  CHECK(choose_alternative(menu, vec2(5.0, 15.0)) == 0);
  // Exactly zero best surplus purchases.
  CHECK(choose_alternative(menu, vec2(10.0, 0.0)) == 1);
  // Tie at the top goes to the lowest index: v=(12,22) gives 2, 2, 9 -> 3;
  // v=(12,22) with bundle at 34 would tie 2,2,0 -> entry 1.
  PriceMenu tie = menu;
  tie.entries[2].price = 34.0;
  CHECK(choose_alternative(tie, vec2(12.0, 22.0)) == 1);
  // Empty menu: only the outside option exists.
  PriceMenu empty;
  CHECK(choose_alternative(empty, vec2(100.0, 100.0)) == 0);
}

TEST_CASE("choose_alternative agrees with an independent argmax oracle") {
  const PriceMenu menu = spec_menu();
  std::vector<oracle::MenuRow> rows = {
      {{0}, 10.0}, {{1}, 20.0}, {{0, 1}, 25.0}};
  RngStream rng(404);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::VectorXd v = vec2(rng.uniform(-5, 35), rng.uniform(-5, 35));
    CHECK(choose_alternative(menu, v) == oracle::best_choice(rows, v));
  }
}

TEST_CASE("menu_byte_key separates menus exactly") {
  const PriceMenu a = spec_menu();
  PriceMenu b = spec_menu();
  CHECK(menu_byte_key(a) == menu_byte_key(b));
  b.entries[1].price += 1e-12;  // any bit difference must change the key
  CHECK(menu_byte_key(a) != menu_byte_key(b));
  PriceMenu c = spec_menu();
  c.entries[0].bundle = Bundle::single(1, 2);
  CHECK(menu_byte_key(a) != menu_byte_key(c));
}

TEST_CASE("is_positive_definite distinguishes PD from PSD and asymmetric") {
  Eigen::MatrixXd pd(2, 2);
  pd << 4.0, 1.0, 1.0, 5.0;
  CHECK(is_positive_definite(pd));

  Eigen::MatrixXd psd(2, 2);
  psd << 1.0, 1.0, 1.0, 1.0;  // rank 1
  CHECK_FALSE(is_positive_definite(psd));

  Eigen::MatrixXd asym(2, 2);
  asym << 4.0, 1.0, 0.0, 5.0;
  CHECK_FALSE(is_positive_definite(asym));
}

TEST_CASE("apply_jitter_floor leaves PD matrices alone and repairs PSD ones") {
  Eigen::MatrixXd pd(2, 2);
  pd << 4.0, 1.0, 1.0, 5.0;
  Eigen::MatrixXd work = pd;
  CHECK(apply_jitter_floor(work) == 0.0);
  CHECK(work == pd);

  Eigen::MatrixXd psd(2, 2);
  psd << 1.0, 1.0, 1.0, 1.0;
  const double jitter = apply_jitter_floor(psd);
  CHECK(jitter > 0.0);
  CHECK(is_positive_definite(psd));
  // Off-diagonals untouched, diagonal raised by the jitter.
  CHECK(psd(0, 1) == 1.0);
  CHECK(psd(0, 0) == doctest::Approx(1.0 + jitter).epsilon(1e-12));

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
  CHECK(apply_jitter_floor(zero) > 0.0);
  CHECK(is_positive_definite(zero));
}
