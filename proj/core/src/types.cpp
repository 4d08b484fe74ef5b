#include "bundlesight/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "bundlesight/errors.hpp"

namespace bundlesight {

int Bundle::size() const {
  int n = 0;
  for (auto b : mask) n += (b != 0);
  return n;
}

std::string Bundle::to_bitstring() const {
  std::string s(mask.size(), '0');
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) s[i] = '1';
  return s;
}

Bundle Bundle::from_bitstring(const std::string& bits) {
  Bundle b;
  b.mask.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1')
      throw InvalidInputError("bundle bitstring must contain only 0/1, got '" +
                              bits + "'");
    b.mask.push_back(c == '1' ? 1 : 0);
  }
  return b;
}

Bundle Bundle::single(int product, int product_count) {
  if (product < 0 || product >= product_count)
    throw InvalidInputError("single-product bundle index out of range");
  Bundle b;
  b.mask.assign(static_cast<std::size_t>(product_count), 0);
  b.mask[static_cast<std::size_t>(product)] = 1;
  return b;
}

void validate(const Bundle& bundle, int product_count,
              const std::string& where) {
  if (bundle.product_count() != product_count)
    throw InvalidInputError(where + ": mask length " +
                            std::to_string(bundle.product_count()) +
                            " != product_count " +
                            std::to_string(product_count));
  if (bundle.size() == 0)
    throw InvalidInputError(where + ": bundle must contain at least one product");
}

void validate(const PriceMenu& menu, int product_count,
              const std::string& where) {
  for (int j = 0; j < menu.size(); ++j) {
    const auto& e = menu.entries[static_cast<std::size_t>(j)];
    validate(e.bundle, product_count,
             where + ".entries[" + std::to_string(j) + "]");
    if (!std::isfinite(e.price))
      throw InvalidInputError(where + ".entries[" + std::to_string(j) +
                              "]: price must be finite");
  }
}

void validate(const Transaction& txn, int product_count,
              const std::string& where) {
  validate(txn.menu, product_count, where + ".menu");
  if (txn.choice < 0 || txn.choice > txn.menu.size())
    throw InvalidInputError(where + ": choice " + std::to_string(txn.choice) +
                            " out of range [0, " +
                            std::to_string(txn.menu.size()) + "]");
}

void validate(const Dataset& dataset, const std::string& where) {
  if (dataset.product_count <= 0)
    throw InvalidInputError(where + ": product_count must be positive");
  for (std::size_t n = 0; n < dataset.transactions.size(); ++n)
    validate(dataset.transactions[n], dataset.product_count,
             where + ".transactions[" + std::to_string(n) + "]");
}

void validate(const GaussianParams& params, const std::string& where) {
  const int d = params.dimension();
  if (d <= 0) throw InvalidInputError(where + ": empty mean vector");
  if (params.sigma.rows() != d || params.sigma.cols() != d)
    throw InvalidInputError(where + ": sigma must be " + std::to_string(d) +
                            "x" + std::to_string(d));
  if (!params.mu.allFinite() || !params.sigma.allFinite())
    throw InvalidInputError(where + ": parameters must be finite");
  const double scale = params.sigma.cwiseAbs().maxCoeff();
  const double asym = (params.sigma - params.sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(scale, 1.0))
    throw InvalidInputError(where + ": sigma is not symmetric");
  if (!is_positive_definite(params.sigma))
    throw InvalidInputError(where + ": sigma is not positive definite");
}

std::string menu_byte_key(const PriceMenu& menu) {
  std::string key;
  for (const auto& e : menu.entries) {
    key += e.bundle.to_bitstring();
    key += ':';
    key.append(reinterpret_cast<const char*>(&e.price), sizeof(double));
    key += ';';
  }
  return key;
}

double surplus(const MenuEntry& entry, const Eigen::VectorXd& v) {
  double s = -entry.price;
  for (int i = 0; i < static_cast<int>(entry.bundle.mask.size()); ++i)
    if (entry.bundle.mask[static_cast<std::size_t>(i)]) s += v[i];
  return s;
}

int choose_alternative(const PriceMenu& menu, const Eigen::VectorXd& v) {
  int best = -1;
  double best_surplus = 0.0;
  for (int j = 0; j < menu.size(); ++j) {
    const double s = surplus(menu.entries[static_cast<std::size_t>(j)], v);
    if (best < 0 || s > best_surplus) {
      best = j;
      best_surplus = s;
    }
  }
  if (best < 0) return 0;               // empty menu
  return best_surplus >= 0.0 ? best + 1 : 0;
}

bool is_positive_definite(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) return false;
  const double scale = sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(scale, 1.0))
    return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) return false;
  return es.eigenvalues().minCoeff() > 0.0;
}

double apply_jitter_floor(Eigen::MatrixXd& sigma) {
  sigma = ((sigma + sigma.transpose()) / 2.0).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return 0.0;
  const int d = static_cast<int>(sigma.rows());
  const double base =
      1e-8 * std::max(sigma.trace() / std::max(d, 1), 1.0);
  double jitter = base;
  for (int attempt = 0; attempt < 24; ++attempt) {
    Eigen::MatrixXd trial = sigma;
    trial.diagonal().array() += jitter;
    llt.compute(trial);
    if (llt.info() == Eigen::Success) {
      sigma = trial;
      return jitter;
    }
    jitter *= 10.0;
  }
  throw NumericFailureError(
      "covariance could not be made positive definite by diagonal jitter");
}

}  // namespace bundlesight
