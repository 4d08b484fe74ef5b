#include "bundlesight/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "bundlesight/em.hpp"
#include "bundlesight/errors.hpp"
#include "bundlesight/polyhedron.hpp"
#include "bundlesight/rng.hpp"
#include "bundlesight/sampler.hpp"

namespace bundlesight {

namespace {

// Flattened per-entry view of the dataset for the logit likelihood.
struct MnlDesign {
  std::vector<Bundle> alternatives;
  std::vector<int> alt_of_entry;       // alternative id per flattened entry
  std::vector<double> price_of_entry;  // standardized price per entry
  std::vector<int> txn_begin;          // flattened range per transaction
  std::vector<int> txn_choice;         // 0 = outside, j >= 1 = entry j
  double price_mean = 0.0;
  double price_scale = 1.0;

  int alternative_count() const {
    return static_cast<int>(alternatives.size());
  }
  int transaction_count() const {
    return static_cast<int>(txn_choice.size());
  }
};

MnlDesign build_design(const Dataset& dataset) {
  MnlDesign design;
  std::map<std::string, int> index_of;
  double sum = 0.0;
  double sq_sum = 0.0;
  long total = 0;
  for (const auto& txn : dataset.transactions) {
    design.txn_begin.push_back(static_cast<int>(design.alt_of_entry.size()));
    design.txn_choice.push_back(txn.choice);
    for (const auto& e : txn.menu.entries) {
      auto [it, inserted] = index_of.try_emplace(
          e.bundle.to_bitstring(), design.alternative_count());
      if (inserted) design.alternatives.push_back(e.bundle);
      design.alt_of_entry.push_back(it->second);
      design.price_of_entry.push_back(e.price);
      sum += e.price;
      ++total;
    }
  }
  design.txn_begin.push_back(static_cast<int>(design.alt_of_entry.size()));
  if (total == 0) throw InvalidInputError("fit_mnl: no menu entries");
  design.price_mean = sum / static_cast<double>(total);
  for (double p : design.price_of_entry) {
    const double c = p - design.price_mean;
    sq_sum += c * c;
  }
  design.price_scale = std::sqrt(sq_sum / static_cast<double>(total));
  if (design.price_scale < 1e-12) design.price_scale = 1.0;
  for (double& p : design.price_of_entry)
    p = (p - design.price_mean) / design.price_scale;
  return design;
}

// Log-likelihood, gradient, and Hessian in the standardized coordinates
// theta = (alpha', beta') with alpha' = alpha + beta * p_mean and
// beta' = beta * p_scale. With ridge > 0 the penalty (ridge/2) * |theta|^2
// is applied to the ORIGINAL parameters.
double mnl_objective(const MnlDesign& d, const Eigen::VectorXd& theta,
                     double ridge, Eigen::VectorXd* grad,
                     Eigen::MatrixXd* hess = nullptr) {
  const int a_count = d.alternative_count();
  const double beta_s = theta[a_count];
  if (grad) grad->setZero();
  if (hess) hess->setZero();
  double ll = 0.0;
  std::vector<double> u;
  Eigen::VectorXd m(a_count + 1);  // per-txn probability-weighted features
  for (int n = 0; n < d.transaction_count(); ++n) {
    const int begin = d.txn_begin[static_cast<std::size_t>(n)];
    const int end = d.txn_begin[static_cast<std::size_t>(n) + 1];
    u.assign(static_cast<std::size_t>(end - begin), 0.0);
    double u_max = 0.0;  // the outside option's utility
    for (int e = begin; e < end; ++e) {
      const double ue = theta[d.alt_of_entry[static_cast<std::size_t>(e)]] +
                        beta_s * d.price_of_entry[static_cast<std::size_t>(e)];
      u[static_cast<std::size_t>(e - begin)] = ue;
      u_max = std::max(u_max, ue);
    }
    double denom = std::exp(-u_max);
    for (double ue : u) denom += std::exp(ue - u_max);
    const double lse = u_max + std::log(denom);
    const int choice = d.txn_choice[static_cast<std::size_t>(n)];
    ll += (choice > 0 ? u[static_cast<std::size_t>(choice - 1)] : 0.0) - lse;
    if (grad || hess) {
      if (hess) m.setZero();
      for (int e = begin; e < end; ++e) {
        const int j = e - begin + 1;
        const int a = d.alt_of_entry[static_cast<std::size_t>(e)];
        const double z = d.price_of_entry[static_cast<std::size_t>(e)];
        const double prob = std::exp(u[static_cast<std::size_t>(e - begin)] - lse);
        if (grad) {
          const double resid = (choice == j ? 1.0 : 0.0) - prob;
          (*grad)[a] += resid;
          (*grad)[a_count] += resid * z;
        }
        if (hess) {
          (*hess)(a, a) -= prob;
          (*hess)(a, a_count) -= prob * z;
          (*hess)(a_count, a) -= prob * z;
          (*hess)(a_count, a_count) -= prob * z * z;
          m[a] += prob;
          m[a_count] += prob * z;
        }
      }
      if (hess) hess->noalias() += m * m.transpose();
    }
  }
  if (ridge > 0.0) {
    const double beta = beta_s / d.price_scale;
    const double c = d.price_mean / d.price_scale;
    double pen = beta * beta;
    double d_beta = beta;  // accumulates d(penalty/ridge)/d(beta)
    for (int a = 0; a < a_count; ++a) {
      const double alpha = theta[a] - beta * d.price_mean;
      pen += alpha * alpha;
      if (grad) {
        (*grad)[a] -= ridge * alpha;
        d_beta += alpha * (-d.price_mean);
      }
      if (hess) {
        (*hess)(a, a) -= ridge;
        (*hess)(a, a_count) += ridge * c;
        (*hess)(a_count, a) += ridge * c;
      }
    }
    ll -= 0.5 * ridge * pen;
    if (grad) (*grad)[a_count] -= ridge * d_beta / d.price_scale;
    if (hess)
      (*hess)(a_count, a_count) -=
          ridge * (a_count * c * c + 1.0 / (d.price_scale * d.price_scale));
  }
  return ll;
}

// Sup-norm of the gradient mapped back to the original coordinates.
double original_grad_norm(const MnlDesign& d, const Eigen::VectorXd& grad) {
  const int a_count = d.alternative_count();
  double norm = 0.0;
  double alpha_sum = 0.0;
  for (int a = 0; a < a_count; ++a) {
    norm = std::max(norm, std::abs(grad[a]));
    alpha_sum += grad[a];
  }
  const double d_beta =
      d.price_mean * alpha_sum + d.price_scale * grad[a_count];
  return std::max(norm, std::abs(d_beta));
}

// One damped-Newton ascent run; returns true if it converged to the
// tolerance without diverging. Standardized parameters past +-15 saturate
// the choice probabilities numerically, which on concave logit likelihoods
// only happens when the MLE is unbounded (separation) — treated as failure
// so the caller can engage the ridge refit.
bool mnl_ascend(const MnlDesign& d, double ridge, const MnlConfig& config,
                Eigen::VectorXd& theta, int& iterations, double& grad_norm) {
  const Eigen::Index dim = theta.size();
  Eigen::VectorXd grad(dim);
  Eigen::MatrixXd hess(dim, dim);
  Eigen::VectorXd dir(dim), trial_theta(dim);
  for (iterations = 0; iterations < config.max_iterations; ++iterations) {
    const double ll = mnl_objective(d, theta, ridge, &grad, &hess);
    grad_norm = original_grad_norm(d, grad);
    if (grad_norm <= config.tolerance) return true;
    if (theta.cwiseAbs().maxCoeff() > 15.0) return false;
    // Newton direction on the negated (positive semi-definite) Hessian,
    // jittered for the near-singular separation regime; gradient fallback
    // when the solve is unusable as an ascent direction.
    Eigen::MatrixXd a = -hess;
    a.diagonal().array() += 1e-10 * (1.0 + a.diagonal().maxCoeff());
    dir = Eigen::LDLT<Eigen::MatrixXd>(a).solve(grad);
    double slope = dir.dot(grad);
    if (!dir.allFinite() || slope <= 0.0) {
      dir = grad;
      slope = grad.squaredNorm();
    }
    // Below this decrement the attainable improvement (about slope / 2) is
    // too close to the floating-point resolution of ll for a line search to
    // certify ascent — every trial is an evaluation-noise coin flip. Take
    // the bare Newton step and let the gradient check decide.
    if (slope <= 1e-9 * (1.0 + std::abs(ll))) {
      theta += dir;
      continue;
    }
    double trial = 1.0;
    bool moved = false;
    for (int h = 0; h < 60; ++h) {
      trial_theta = theta + trial * dir;
      if (mnl_objective(d, trial_theta, ridge, nullptr) >=
          ll + 1e-4 * trial * slope) {
        moved = true;
        break;
      }
      trial *= 0.5;
    }
    if (!moved) return false;  // genuine stall away from the optimum
    theta = trial_theta;
  }
  mnl_objective(d, theta, ridge, &grad);
  grad_norm = original_grad_norm(d, grad);
  return grad_norm <= config.tolerance;
}

}  // namespace

MnlParams fit_mnl(const Dataset& dataset, const MnlConfig& config) {
  validate(dataset, "fit_mnl.dataset");
  const MnlDesign design = build_design(dataset);
  const int a_count = design.alternative_count();

  MnlParams out;
  out.alternatives = design.alternatives;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(a_count + 1);
  int iterations = 0;
  double grad_norm = 0.0;
  bool ok = mnl_ascend(design, 0.0, config, theta, iterations, grad_norm);
  out.iterations = iterations;
  if (!ok) {
    theta.setZero();
    ok = mnl_ascend(design, config.ridge, config, theta, iterations,
                    grad_norm);
    out.iterations += iterations;
    out.ridged = true;
  }
  out.converged = ok;
  out.final_grad_norm = grad_norm;
  out.price_coefficient = theta[a_count] / design.price_scale;
  out.intercepts.resize(a_count);
  for (int a = 0; a < a_count; ++a)
    out.intercepts[a] = theta[a] - out.price_coefficient * design.price_mean;
  return out;
}

Eigen::VectorXd predict_choice_probs(const PriceMenu& menu,
                                     const MnlParams& params) {
  const int j_count = menu.size();
  Eigen::VectorXd u(j_count);
  for (int j = 0; j < j_count; ++j) {
    const auto& entry = menu.entries[static_cast<std::size_t>(j)];
    double intercept = 0.0;
    for (std::size_t a = 0; a < params.alternatives.size(); ++a) {
      if (params.alternatives[a] == entry.bundle) {
        intercept = params.intercepts[static_cast<Eigen::Index>(a)];
        break;
      }
    }
    u[j] = intercept + params.price_coefficient * entry.price;
  }
  const double u_max = j_count > 0 ? std::max(0.0, u.maxCoeff()) : 0.0;
  double denom = std::exp(-u_max);
  for (int j = 0; j < j_count; ++j) denom += std::exp(u[j] - u_max);
  Eigen::VectorXd probs(j_count + 1);
  probs[0] = std::exp(-u_max) / denom;
  for (int j = 0; j < j_count; ++j)
    probs[j + 1] = std::exp(u[j] - u_max) / denom;
  return probs;
}

MarginalLikelihood::MarginalLikelihood(const Dataset& dataset,
                                       const Eigen::MatrixXd& sigma,
                                       int mc_count, std::uint64_t seed)
    : mc_count_(mc_count) {
  validate(dataset, "MarginalLikelihood.dataset");
  if (mc_count < 1)
    throw InvalidInputError("MarginalLikelihood: mc_count must be >= 1");
  const int d = dataset.product_count;
  GaussianParams centered;
  centered.mu = Eigen::VectorXd::Zero(d);
  centered.sigma = sigma;
  validate(centered, "MarginalLikelihood.sigma");

  long rows_total = 0;
  std::vector<Polyhedron> regions;
  regions.reserve(dataset.transactions.size());
  for (const auto& txn : dataset.transactions) {
    regions.push_back(build_ic_polyhedron(txn.menu, txn.choice, d));
    rows_total += regions.back().halfspace_count();
  }
  h_.resize(rows_total, d);
  b_.resize(rows_total);
  ranges_.reserve(regions.size());
  int row = 0;
  for (const auto& region : regions) {
    const int m = region.halfspace_count();
    ranges_.emplace_back(row, row + m);
    h_.middleRows(row, m) = region.normals;
    b_.segment(row, m) = region.offsets;
    row += m;
  }
  // Pool of mc_count draws from N(0, sigma); g_(r, m) = h_r . x_m.
  const auto pool = sample_mvn(centered, mc_count, seed);  // mc_count x d
  g_.noalias() = h_ * pool.transpose();
}

double MarginalLikelihood::log_likelihood(const Eigen::VectorXd& mu) const {
  if (mu.size() != h_.cols())
    throw InvalidInputError("MarginalLikelihood: mu dimension mismatch");
  const Eigen::VectorXd t = b_ - h_ * mu;
  const int m_count = mc_count_;
  std::vector<std::uint8_t> alive(static_cast<std::size_t>(m_count));
  double ll = 0.0;
  for (const auto& [begin, end] : ranges_) {
    std::fill(alive.begin(), alive.end(), std::uint8_t{1});
    for (int r = begin; r < end; ++r) {
      const double threshold = t[r];
      const double* row = g_.data() + static_cast<std::ptrdiff_t>(r) * m_count;
      for (int m = 0; m < m_count; ++m)
        alive[static_cast<std::size_t>(m)] &=
            static_cast<std::uint8_t>(row[m] >= threshold);
    }
    long hits = 0;
    for (std::uint8_t a : alive) hits += a;
    ll += std::log((static_cast<double>(hits) + 0.5) /
                   (static_cast<double>(m_count) + 1.0));
  }
  return ll;
}

namespace {

// Flat prior box: explicit bounds when given, otherwise the observed price
// range widened by 10 on each side (same interval in every dimension).
void resolve_box(const Dataset& dataset, const Eigen::VectorXd& lo_in,
                 const Eigen::VectorXd& hi_in, int d, Eigen::VectorXd& lo,
                 Eigen::VectorXd& hi) {
  if (lo_in.size() > 0 || hi_in.size() > 0) {
    if (lo_in.size() != d || hi_in.size() != d)
      throw InvalidInputError("prior box dimension mismatch");
    if (((hi_in - lo_in).array() <= 0.0).any())
      throw InvalidInputError("prior box must have positive volume");
    lo = lo_in;
    hi = hi_in;
    return;
  }
  double p_min = std::numeric_limits<double>::infinity();
  double p_max = -std::numeric_limits<double>::infinity();
  for (const auto& txn : dataset.transactions)
    for (const auto& e : txn.menu.entries) {
      p_min = std::min(p_min, e.price);
      p_max = std::max(p_max, e.price);
    }
  if (!std::isfinite(p_min))
    throw InvalidInputError("prior box: dataset has no menu entries");
  lo = Eigen::VectorXd::Constant(d, p_min - 10.0);
  hi = Eigen::VectorXd::Constant(d, p_max + 10.0);
}

}  // namespace

MhReport run_mh(const Dataset& dataset, const Eigen::MatrixXd& sigma_known,
                const MhConfig& config) {
  const auto start_time = std::chrono::steady_clock::now();
  if (config.iterations < 2)
    throw InvalidInputError("run_mh: iterations must be >= 2");
  if (!(config.burn_in_fraction >= 0.0) || config.burn_in_fraction >= 1.0)
    throw InvalidInputError("run_mh: burn_in_fraction must be in [0, 1)");
  const int d = dataset.product_count;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  resolve_box(dataset, config.prior_lo, config.prior_hi, d, lo, hi);

  const MarginalLikelihood ml(
      dataset, sigma_known, config.likelihood_mc,
      derive_seed(config.seed, StreamTag::kLikelihood));
  Eigen::VectorXd mu = default_init(dataset).mu.cwiseMax(lo).cwiseMin(hi);
  double ll = ml.log_likelihood(mu);
  RngStream chain(derive_seed(config.seed, StreamTag::kChain));

  const int burn =
      static_cast<int>(config.burn_in_fraction * config.iterations);
  MhReport report;
  report.samples.resize(config.iterations - burn, d);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd proposal(d);
  long accepted = 0;
  int kept = 0;
  for (int it = 0; it < config.iterations; ++it) {
    for (int i = 0; i < d; ++i)
      proposal[i] = mu[i] + chain.uniform(-config.proposal_halfwidth,
                                          config.proposal_halfwidth);
    const bool inside = (proposal.array() >= lo.array()).all() &&
                        (proposal.array() <= hi.array()).all();
    if (inside) {
      const double ll_prop = ml.log_likelihood(proposal);
      if (std::log(chain.uniform()) < ll_prop - ll) {
        mu = proposal;
        ll = ll_prop;
        ++accepted;
      }
    }
    if (it >= burn) {
      report.samples.row(kept++) = mu;
      sum += mu;
    }
  }
  report.posterior_mean = sum / static_cast<double>(kept);
  report.acceptance_rate =
      static_cast<double>(accepted) / config.iterations;
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    start_time)
          .count();
  return report;
}

GridReport run_grid(const Dataset& dataset,
                    const Eigen::MatrixXd& sigma_known,
                    const GridConfig& config) {
  if (config.nodes_per_dim < 2)
    throw InvalidInputError("run_grid: nodes_per_dim must be >= 2");
  const int d = dataset.product_count;
  double total_d = 1.0;
  for (int i = 0; i < d; ++i) total_d *= config.nodes_per_dim;
  if (total_d > 2e5)
    throw InvalidInputError(
        "run_grid: grid would have " + std::to_string(total_d) +
        " nodes; reduce nodes_per_dim or the product count");
  const long total = static_cast<long>(total_d);
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  resolve_box(dataset, config.lo, config.hi, d, lo, hi);

  const MarginalLikelihood ml(
      dataset, sigma_known, config.likelihood_mc,
      derive_seed(config.seed, StreamTag::kLikelihood));

  GridReport report;
  report.nodes.resize(total, d);
  Eigen::VectorXd lls(total);
  std::vector<int> index(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd node(d);
  for (long n = 0; n < total; ++n) {
    for (int i = 0; i < d; ++i)
      node[i] = lo[i] + (hi[i] - lo[i]) * index[static_cast<std::size_t>(i)] /
                            (config.nodes_per_dim - 1);
    report.nodes.row(n) = node;
    lls[n] = ml.log_likelihood(node);
    for (int i = d - 1; i >= 0; --i) {
      if (++index[static_cast<std::size_t>(i)] < config.nodes_per_dim) break;
      index[static_cast<std::size_t>(i)] = 0;
    }
  }
  Eigen::Index argmax = 0;
  report.max_log_likelihood = lls.maxCoeff(&argmax);
  report.map_point = report.nodes.row(argmax);
  report.weights = (lls.array() - report.max_log_likelihood).exp();
  report.weights /= report.weights.sum();
  report.posterior_mean = report.nodes.transpose() * report.weights;
  return report;
}

}  // namespace bundlesight
