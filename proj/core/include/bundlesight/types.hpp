#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace bundlesight {

// A bundle is the set of products it contains, stored as a 0/1 mask over the
// product indices of the dataset it belongs to.
struct Bundle {
  std::vector<std::uint8_t> mask;

  int product_count() const { return static_cast<int>(mask.size()); }
  bool contains(int product) const { return mask[product] != 0; }
  int size() const;
  std::string to_bitstring() const;  // e.g. "0110"
  static Bundle from_bitstring(const std::string& bits);
  static Bundle single(int product, int product_count);
  bool operator==(const Bundle& other) const { return mask == other.mask; }
};

struct MenuEntry {
  Bundle bundle;
  double price = 0.0;
};

// The alternatives one customer faced, in a fixed order. Entry j of the menu
// is "choice j+1" in a Transaction; choice 0 is always the outside option.
struct PriceMenu {
  std::vector<MenuEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }
};

struct Transaction {
  PriceMenu menu;
  int choice = 0;  // 0 = no purchase, 1..J = menu entry (1-based)
};

struct Dataset {
  int product_count = 0;
  std::vector<Transaction> transactions;
};

// Multivariate Gaussian valuation model.
struct GaussianParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;

  int dimension() const { return static_cast<int>(mu.size()); }
};

// --- validation -------------------------------------------------------------

// Throw InvalidInputError on malformed values (mask length mismatches, empty
// bundles, out-of-range choices, non-finite prices, asymmetric or non-PD
// sigma). `where` prefixes the error message.
void validate(const Bundle& bundle, int product_count,
              const std::string& where = "bundle");
void validate(const PriceMenu& menu, int product_count,
              const std::string& where = "menu");
void validate(const Transaction& txn, int product_count,
              const std::string& where = "transaction");
void validate(const Dataset& dataset, const std::string& where = "dataset");
void validate(const GaussianParams& params,
              const std::string& where = "params");

// Opaque byte key identifying a menu (bundles, prices, and entry order).
// Equal menus produce equal keys; used to group transactions by menu.
std::string menu_byte_key(const PriceMenu& menu);

// Surplus of menu entry j (0-based) at valuation v: sum of v over the bundle
// minus the price.
double surplus(const MenuEntry& entry, const Eigen::VectorXd& v);

// The simulated chooser: argmax surplus over entries, lowest index wins ties,
// purchase wins over no-purchase at surplus exactly zero. Returns 0..J.
int choose_alternative(const PriceMenu& menu, const Eigen::VectorXd& v);

// --- numeric hygiene ---------------------------------------------------------

// Symmetrize sigma and, if its Cholesky fails, add an escalating diagonal
// jitter starting at 1e-8 * max(trace/I, 1). Returns the jitter applied
// (0 when none was needed). Throws NumericFailureError if even a large
// jitter cannot restore positive definiteness.
double apply_jitter_floor(Eigen::MatrixXd& sigma);

// True when sigma is symmetric and its smallest eigenvalue is positive.
bool is_positive_definite(const Eigen::MatrixXd& sigma);

}  // namespace bundlesight
