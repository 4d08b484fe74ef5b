#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "bundlesight/polyhedron.hpp"
#include "bundlesight/rng.hpp"
#include "bundlesight/types.hpp"

namespace bundlesight {

// A weighted Monte-Carlo representation of one truncated distribution:
// points.row(l) is a draw, weights[l] its normalized weight (sum == 1).
// Rejection batches carry uniform weights; importance batches carry
// self-normalized density ratios.
struct SampleBatch {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      points;               // L x I
  Eigen::VectorXd weights;  // L, sums to 1

  int size() const { return static_cast<int>(points.rows()); }
  Eigen::VectorXd weighted_mean() const;
  // Weighted second moment about `center`.
  Eigen::MatrixXd weighted_scatter(const Eigen::VectorXd& center) const;
};

struct ProposalParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

// log N(v; mu, sigma). One-shot convenience; hot paths should hold a
// CachedGaussian instead.
double gaussian_log_pdf(const Eigen::VectorXd& v, const GaussianParams& params);

// Gaussian with its Cholesky factor and log-normalizer precomputed.
class CachedGaussian {
 public:
  explicit CachedGaussian(const GaussianParams& params);
  CachedGaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);

  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  double log_pdf(const Eigen::VectorXd& v) const;
  // mu + chol * z for z ~ N(0, I) drawn from rng.
  Eigen::VectorXd sample(RngStream& rng) const;
  void sample_into(RngStream& rng, double* out) const;

 private:
  void init(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);
  Eigen::VectorXd mu_;
  Eigen::MatrixXd chol_;  // lower triangular
  double log_norm_ = 0.0;
};

// count i.i.d. draws from N(mu, sigma), one per row.
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
sample_mvn(const GaussianParams& params, int count, std::uint64_t seed);

// Acceptance-rejection sampling of N(mu, sigma) truncated to poly: draw from
// the untruncated Gaussian until `count` draws land inside. Throws
// LowAcceptanceError (carrying the observed rate) once max_attempts proposals
// have been spent. max_attempts <= 0 means 1000 * count.
SampleBatch sample_truncated_rejection(const Polyhedron& poly,
                                       const GaussianParams& params, int count,
                                       std::uint64_t seed,
                                       long max_attempts = 0);

// Strictly feasible point of poly: the Chebyshev center when the inradius LP
// is bounded, otherwise the unit-slack point of the capped LP. Throws
// EmptyRegionError when poly is empty.
Eigen::VectorXd find_interior_point(const Polyhedron& poly);

// Self-normalized importance sampling for the same truncated target, drawing
// from N(proposal.mu, proposal.sigma) restricted to poly by rejection.
// Weight of draw x: f(x | target) / f(x | proposal), normalized over the
// batch. Throws LowAcceptanceError when the proposal itself cannot reach the
// region within max_attempts, NumericFailureError when every weight
// underflows to zero.
SampleBatch sample_truncated_importance(const Polyhedron& poly,
                                        const GaussianParams& target,
                                        const ProposalParams& proposal,
                                        int count, std::uint64_t seed,
                                        long max_attempts = 0);

// Plain Monte-Carlo P(v in poly) under N(mu, sigma) with `count` draws.
// A polyhedron with no half-spaces yields exactly 1.0.
double region_probability(const Polyhedron& poly, const GaussianParams& params,
                          int count, std::uint64_t seed);

// Importance estimate of the same probability: draws from the proposal and
// averages the density ratio over draws that land inside. Unbiased; useful
// when the target gives the region vanishing mass.
double region_probability_importance(const Polyhedron& poly,
                                     const GaussianParams& target,
                                     const ProposalParams& proposal, int count,
                                     std::uint64_t seed);

// Posterior draw of the total customer count behind `n_observed` purchases
// when no-purchases (probability p_censored) are unrecorded: n_observed plus
// the failures before the (n_observed + 1)-th success in Bernoulli(1 -
// p_censored) trials. Throws DegenerateCensoringError when p_censored is not
// in [0, 1 - 1e-9].
long sample_negative_binomial_total(long n_observed, double p_censored,
                                    RngStream& rng);

// One iteration's shared draw pool: pool_size draws from N(mu, sigma) that
// every region of the iteration filters for its accepted samples.
class SharedPool {
 public:
  SharedPool(const GaussianParams& params, int pool_size, std::uint64_t seed);

  int size() const { return static_cast<int>(points_.rows()); }
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>&
  points() const {
    return points_;
  }

  // Scans the pool circularly starting at start % size, copying up to `count`
  // member rows of poly into out (resized to the number found). Returns the
  // number found; *scanned (if given) receives how many pool rows were
  // examined.
  int collect(const Polyhedron& poly, int count, std::uint64_t start,
              Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::RowMajor>& out,
              long* scanned = nullptr) const;

  // Fraction of the pool inside poly (full scan, vectorized).
  double fraction_inside(const Polyhedron& poly) const;

 private:
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      points_;
};

}  // namespace bundlesight
