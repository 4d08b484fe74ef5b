#include "bundlesight/sampler.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "bundlesight/errors.hpp"
#include "bundlesight/lp.hpp"

namespace bundlesight {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Membership test on a raw row pointer; avoids Eigen temporaries in the
// pool-scanning hot path.
inline bool contains_raw(const Polyhedron& poly, const double* v) {
  const int m = poly.halfspace_count();
  const int d = poly.dimension();
  const double* a = poly.normals.data();
  for (int k = 0; k < m; ++k, a += d) {
    double dot = 0.0;
    for (int i = 0; i < d; ++i) dot += a[i] * v[i];
    if (dot < poly.offsets[k]) return false;
  }
  return true;
}

}  // namespace

Eigen::VectorXd SampleBatch::weighted_mean() const {
  return points.transpose() * weights;
}

Eigen::MatrixXd SampleBatch::weighted_scatter(
    const Eigen::VectorXd& center) const {
  const int d = static_cast<int>(points.cols());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd diff(d);
  for (int l = 0; l < size(); ++l) {
    diff = points.row(l).transpose() - center;
    s.noalias() += weights[l] * diff * diff.transpose();
  }
  return s;
}

void CachedGaussian::init(const Eigen::VectorXd& mu,
                          const Eigen::MatrixXd& sigma) {
  mu_ = mu;
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw NumericFailureError(
        "CachedGaussian: covariance is not positive definite");
  chol_ = llt.matrixL();
  double log_det = 0.0;
  for (int i = 0; i < chol_.rows(); ++i) log_det += std::log(chol_(i, i));
  log_det *= 2.0;
  log_norm_ = -0.5 * (static_cast<double>(mu.size()) * kLog2Pi + log_det);
}

CachedGaussian::CachedGaussian(const GaussianParams& params) {
  init(params.mu, params.sigma);
}

CachedGaussian::CachedGaussian(const Eigen::VectorXd& mu,
                               const Eigen::MatrixXd& sigma) {
  init(mu, sigma);
}

double CachedGaussian::log_pdf(const Eigen::VectorXd& v) const {
  const Eigen::VectorXd y =
      chol_.triangularView<Eigen::Lower>().solve(v - mu_);
  return log_norm_ - 0.5 * y.squaredNorm();
}

Eigen::VectorXd CachedGaussian::sample(RngStream& rng) const {
  Eigen::VectorXd z(mu_.size());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mu_ + chol_ * z;
}

void CachedGaussian::sample_into(RngStream& rng, double* out) const {
  const int d = static_cast<int>(mu_.size());
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  Eigen::Map<Eigen::VectorXd>(out, d) = mu_ + chol_ * z;
}

double gaussian_log_pdf(const Eigen::VectorXd& v,
                        const GaussianParams& params) {
  if (v.size() != params.mu.size())
    throw InvalidInputError("gaussian_log_pdf: dimension mismatch");
  return CachedGaussian(params).log_pdf(v);
}

Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
sample_mvn(const GaussianParams& params, int count, std::uint64_t seed) {
  if (count < 0) throw InvalidInputError("sample_mvn: negative count");
  const CachedGaussian g(params);
  RngStream rng(seed);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(
      count, params.dimension());
  for (int r = 0; r < count; ++r) g.sample_into(rng, out.row(r).data());
  return out;
}

SampleBatch sample_truncated_rejection(const Polyhedron& poly,
                                       const GaussianParams& params, int count,
                                       std::uint64_t seed, long max_attempts) {
  if (count <= 0)
    throw InvalidInputError("sample_truncated_rejection: count must be > 0");
  if (poly.dimension() != params.dimension())
    throw InvalidInputError("sample_truncated_rejection: dimension mismatch");
  if (max_attempts <= 0) max_attempts = 1000L * count;
  const CachedGaussian g(params);
  RngStream rng(seed);
  SampleBatch batch;
  batch.points.resize(count, params.dimension());
  batch.weights = Eigen::VectorXd::Constant(count, 1.0 / count);
  int accepted = 0;
  long attempts = 0;
  Eigen::VectorXd draw(params.dimension());
  while (accepted < count) {
    if (attempts >= max_attempts) {
      const double rate =
          attempts > 0 ? static_cast<double>(accepted) / attempts : 0.0;
      throw LowAcceptanceError(
          "rejection sampler exhausted " + std::to_string(max_attempts) +
              " attempts at acceptance rate " + std::to_string(rate),
          rate);
    }
    g.sample_into(rng, draw.data());
    ++attempts;
    if (contains_raw(poly, draw.data())) {
      batch.points.row(accepted) = draw.transpose();
      ++accepted;
    }
  }
  return batch;
}

Eigen::VectorXd find_interior_point(const Polyhedron& poly) {
  return chebyshev_center(poly).center;
}

SampleBatch sample_truncated_importance(const Polyhedron& poly,
                                        const GaussianParams& target,
                                        const ProposalParams& proposal,
                                        int count, std::uint64_t seed,
                                        long max_attempts) {
  if (count <= 0)
    throw InvalidInputError("sample_truncated_importance: count must be > 0");
  if (poly.dimension() != target.dimension() ||
      proposal.mu.size() != target.mu.size())
    throw InvalidInputError("sample_truncated_importance: dimension mismatch");
  if (max_attempts <= 0) max_attempts = 1000L * count;
  const CachedGaussian target_g(target);
  const CachedGaussian proposal_g(proposal.mu, proposal.sigma);
  RngStream rng(seed);
  SampleBatch batch;
  batch.points.resize(count, target.dimension());
  Eigen::VectorXd log_w(count);
  int accepted = 0;
  long attempts = 0;
  Eigen::VectorXd draw(target.dimension());
  while (accepted < count) {
    if (attempts >= max_attempts) {
      const double rate =
          attempts > 0 ? static_cast<double>(accepted) / attempts : 0.0;
      throw LowAcceptanceError(
          "importance proposal exhausted " + std::to_string(max_attempts) +
              " attempts at acceptance rate " + std::to_string(rate),
          rate);
    }
    proposal_g.sample_into(rng, draw.data());
    ++attempts;
    if (!contains_raw(poly, draw.data())) continue;
    batch.points.row(accepted) = draw.transpose();
    log_w[accepted] = target_g.log_pdf(draw) - proposal_g.log_pdf(draw);
    ++accepted;
  }
  const double m = log_w.maxCoeff();
  if (!std::isfinite(m))
    throw NumericFailureError(
        "importance weights are not finite (target/proposal mismatch)");
  batch.weights = (log_w.array() - m).exp().matrix();
  const double total = batch.weights.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericFailureError("importance weights collapsed to zero");
  batch.weights /= total;
  return batch;
}

double region_probability(const Polyhedron& poly, const GaussianParams& params,
                          int count, std::uint64_t seed) {
  if (count <= 0)
    throw InvalidInputError("region_probability: count must be > 0");
  if (poly.halfspace_count() == 0) return 1.0;
  const CachedGaussian g(params);
  RngStream rng(seed);
  Eigen::VectorXd draw(params.dimension());
  long hits = 0;
  for (int i = 0; i < count; ++i) {
    g.sample_into(rng, draw.data());
    if (contains_raw(poly, draw.data())) ++hits;
  }
  return static_cast<double>(hits) / count;
}

double region_probability_importance(const Polyhedron& poly,
                                     const GaussianParams& target,
                                     const ProposalParams& proposal, int count,
                                     std::uint64_t seed) {
  if (count <= 0)
    throw InvalidInputError("region_probability_importance: count must be > 0");
  const CachedGaussian target_g(target);
  const CachedGaussian proposal_g(proposal.mu, proposal.sigma);
  RngStream rng(seed);
  Eigen::VectorXd draw(target.dimension());
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    proposal_g.sample_into(rng, draw.data());
    if (!contains_raw(poly, draw.data())) continue;
    total += std::exp(target_g.log_pdf(draw) - proposal_g.log_pdf(draw));
  }
  return total / count;
}

long sample_negative_binomial_total(long n_observed, double p_censored,
                                    RngStream& rng) {
  if (n_observed < 0)
    throw InvalidInputError("sample_negative_binomial_total: negative count");
  if (!(p_censored >= 0.0) || p_censored >= 1.0 - 1e-9)
    throw DegenerateCensoringError(
        "no-purchase probability " + std::to_string(p_censored) +
        " leaves the censored-count posterior degenerate");
  const double success = 1.0 - p_censored;
  long successes = 0;
  long failures = 0;
  while (successes < n_observed + 1) {
    if (rng.bernoulli(success))
      ++successes;
    else
      ++failures;
  }
  return n_observed + failures;
}

SharedPool::SharedPool(const GaussianParams& params, int pool_size,
                       std::uint64_t seed) {
  if (pool_size <= 0) throw InvalidInputError("SharedPool: empty pool");
  points_ = sample_mvn(params, pool_size, seed);
}

int SharedPool::collect(
    const Polyhedron& poly, int count, std::uint64_t start,
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>&
        out,
    long* scanned) const {
  const int n = size();
  const int d = static_cast<int>(points_.cols());
  out.resize(count, d);
  int found = 0;
  long examined = 0;
  const std::uint64_t offset = start % static_cast<std::uint64_t>(n);
  for (int step = 0; step < n && found < count; ++step) {
    const int idx =
        static_cast<int>((offset + static_cast<std::uint64_t>(step)) %
                         static_cast<std::uint64_t>(n));
    ++examined;
    const double* row = points_.data() + static_cast<std::ptrdiff_t>(idx) * d;
    if (contains_raw(poly, row)) {
      out.row(found) = points_.row(idx);
      ++found;
    }
  }
  if (scanned) *scanned = examined;
  out.conservativeResize(found, d);
  return found;
}

double SharedPool::fraction_inside(const Polyhedron& poly) const {
  const int n = size();
  if (poly.halfspace_count() == 0) return 1.0;
  // One GEMM, then column-wise threshold-and-AND.
  const Eigen::MatrixXd dots = points_ * poly.normals.transpose();  // n x m
  long hits = 0;
  for (int i = 0; i < n; ++i) {
    bool inside = true;
    for (int k = 0; k < poly.halfspace_count(); ++k) {
      if (dots(i, k) < poly.offsets[k]) {
        inside = false;
        break;
      }
    }
    hits += inside;
  }
  return static_cast<double>(hits) / n;
}

}  // namespace bundlesight
