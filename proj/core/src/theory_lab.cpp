#include "bundlesight/theory_lab.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "bundlesight/datagen.hpp"
#include "bundlesight/errors.hpp"
#include "bundlesight/metrics.hpp"
#include "bundlesight/rng.hpp"
#include "bundlesight/sampler.hpp"

namespace bundlesight::lab {

namespace {

Eigen::MatrixXd whiten_matrix(const Eigen::MatrixXd& sigma, WhitenMode mode) {
  if (mode == WhitenMode::kCholesky) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw NumericFailureError("whiten: sigma is not positive definite");
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw NumericFailureError("whiten: sigma is not positive definite");
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().asDiagonal().toDenseMatrix();
}

// Index of the first region containing the point, or -1.
int locate(const std::vector<Polyhedron>& regions, const Eigen::VectorXd& x) {
  for (std::size_t k = 0; k < regions.size(); ++k)
    if (contains(regions[k], x)) return static_cast<int>(k);
  return -1;
}

void check_partition(const PartitionSpec& partition, int dimension) {
  if (partition.regions.empty())
    throw InvalidInputError("lab: partition has no regions");
  for (const auto& region : partition.regions)
    if (region.dimension() != dimension)
      throw InvalidInputError("lab: partition dimension mismatch");
}

// Antithetic pool: half the draws come from N(mu, sigma), the other half are
// their reflections through mu. Sample statistics that vanish by symmetry
// (odd moments about mu, sign imbalances of symmetric partitions) are then
// exactly zero instead of O(1/sqrt(mc)), which pins the empirical population
// map's fixed point at the truth for symmetric partitions.
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
antithetic_pool(const GaussianParams& params, long mc, std::uint64_t seed) {
  const long half = std::max(1L, mc / 2);
  const auto base = sample_mvn(params, static_cast<int>(half), seed);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pool(
      2 * half, params.dimension());
  pool.topRows(half) = base;
  pool.bottomRows(half) =
      (-base).rowwise() + 2.0 * params.mu.transpose();
  return pool;
}

}  // namespace

PartitionSpec axis_split_partition(const Eigen::VectorXd& thresholds) {
  const int d = static_cast<int>(thresholds.size());
  if (d < 1 || d > 20)
    throw InvalidInputError("axis_split_partition: needs 1..20 dimensions");
  PartitionSpec spec;
  for (unsigned cell = 0; cell < (1u << d); ++cell) {
    Polyhedron region;
    region.normals = Eigen::MatrixXd::Zero(d, d).eval();
    region.offsets.resize(d);
    for (int i = 0; i < d; ++i) {
      const double sign = (cell & (1u << i)) ? 1.0 : -1.0;
      region.normals(i, i) = sign;
      region.offsets[i] = sign * thresholds[i];
    }
    spec.regions.push_back(std::move(region));
  }
  return spec;
}

PartitionSpec menu_partition(const PriceMenu& menu, int product_count) {
  PartitionSpec spec;
  spec.regions = build_choice_partition(menu, product_count);
  return spec;
}

Assumption1Result assumption1_eigenvalue(const GaussianParams& truth,
                                         const PartitionSpec& partition,
                                         long mc, std::uint64_t seed,
                                         WhitenMode mode) {
  validate(truth, "assumption1.truth");
  const int d = truth.dimension();
  check_partition(partition, d);
  if (mc < 1) throw InvalidInputError("assumption1: mc must be >= 1");

  const Eigen::MatrixXd w = whiten_matrix(truth.sigma, mode);
  const auto solver = w.partialPivLu();
  const auto pool =
      antithetic_pool(truth, mc, derive_seed(seed, StreamTag::kWeights));

  const std::size_t k_count = partition.regions.size();
  std::vector<long> counts(k_count, 0);
  std::vector<Eigen::VectorXd> z_sums(k_count, Eigen::VectorXd::Zero(d));
  Eigen::VectorXd x(d);
  for (long n = 0; n < pool.rows(); ++n) {
    x = pool.row(n);
    const int k = locate(partition.regions, x);
    if (k < 0) continue;
    ++counts[static_cast<std::size_t>(k)];
    z_sums[static_cast<std::size_t>(k)] += solver.solve(x - truth.mu);
  }

  Assumption1Result result;
  result.draws_total = pool.rows();
  result.draws_used = 0;
  for (long c : counts) result.draws_used += c;
  if (result.draws_used == 0)
    throw NumericFailureError("assumption1: no draw landed in any region");
  result.region_mass.resize(k_count);
  result.conditional_mean_var = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t k = 0; k < k_count; ++k) {
    result.region_mass[k] = static_cast<double>(counts[k]) /
                            static_cast<double>(result.draws_used);
    if (counts[k] == 0) continue;
    const Eigen::VectorXd mean = z_sums[k] / static_cast<double>(counts[k]);
    result.conditional_mean_var +=
        result.region_mass[k] * mean * mean.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      result.conditional_mean_var);
  result.lambda_min = es.eigenvalues().minCoeff();
  return result;
}

PopulationStep population_em_step(const Eigen::VectorXd& mu,
                                  const GaussianParams& truth,
                                  const PartitionSpec& partition, long mc,
                                  std::uint64_t seed) {
  validate(truth, "population_em_step.truth");
  const int d = truth.dimension();
  if (mu.size() != d)
    throw InvalidInputError("population_em_step: mu dimension mismatch");
  check_partition(partition, d);
  if (mc < 1) throw InvalidInputError("population_em_step: mc must be >= 1");
  const std::size_t k_count = partition.regions.size();

  // Region weights under the truth.
  const auto truth_pool =
      antithetic_pool(truth, mc, derive_seed(seed, StreamTag::kWeights));
  std::vector<long> weight_counts(k_count, 0);
  long located = 0;
  Eigen::VectorXd x(d);
  for (long n = 0; n < truth_pool.rows(); ++n) {
    x = truth_pool.row(n);
    const int k = locate(partition.regions, x);
    if (k < 0) continue;
    ++weight_counts[static_cast<std::size_t>(k)];
    ++located;
  }
  if (located == 0)
    throw NumericFailureError("population_em_step: empty partition");

  // Conditional means under (mu, sigma*), one shared standard-normal pool so
  // repeated calls with the same seed evaluate the same deterministic map.
  GaussianParams candidate;
  candidate.mu = mu;
  candidate.sigma = truth.sigma;
  const auto cond_pool = antithetic_pool(
      candidate, mc, derive_seed(seed, StreamTag::kConditional));
  std::vector<long> cond_counts(k_count, 0);
  std::vector<Eigen::VectorXd> cond_sums(k_count, Eigen::VectorXd::Zero(d));
  for (long n = 0; n < cond_pool.rows(); ++n) {
    x = cond_pool.row(n);
    const int k = locate(partition.regions, x);
    if (k < 0) continue;
    ++cond_counts[static_cast<std::size_t>(k)];
    cond_sums[static_cast<std::size_t>(k)] += x;
  }

  PopulationStep step;
  step.mu_next = Eigen::VectorXd::Zero(d);
  double kept_mass = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double mass = static_cast<double>(weight_counts[k]) /
                        static_cast<double>(located);
    if (mass == 0.0) continue;
    if (cond_counts[k] == 0) {
      step.dropped_mass += mass;
      continue;
    }
    step.mu_next += mass * (cond_sums[k] / static_cast<double>(cond_counts[k]));
    kept_mass += mass;
  }
  if (kept_mass <= 0.0)
    throw NumericFailureError(
        "population_em_step: no region received conditional draws");
  step.mu_next /= kept_mass;
  return step;
}

ContractionResult contraction_experiment(const GaussianParams& truth,
                                         const PartitionSpec& partition,
                                         double radius, int steps, long mc,
                                         std::uint64_t seed) {
  if (radius <= 0.0)
    throw InvalidInputError("contraction_experiment: radius must be > 0");
  if (steps < 1)
    throw InvalidInputError("contraction_experiment: steps must be >= 1");
  const int d = truth.dimension();

  ContractionResult result;
  result.epsilon_hat =
      assumption1_eigenvalue(truth, partition, mc, seed).lambda_min;
  result.bound = 1.0 - result.epsilon_hat / 2.0;

  Eigen::LLT<Eigen::MatrixXd> llt(truth.sigma);
  if (llt.info() != Eigen::Success)
    throw NumericFailureError("contraction_experiment: sigma not PD");
  const Eigen::MatrixXd w = llt.matrixL();

  RngStream init_rng(derive_seed(seed, StreamTag::kInit));
  Eigen::VectorXd dir(d);
  for (int i = 0; i < d; ++i) dir[i] = init_rng.normal();
  dir /= dir.norm();
  result.mu0 = truth.mu + radius * (w * dir);

  const auto whitened_error = [&](const Eigen::VectorXd& mu) {
    return w.triangularView<Eigen::Lower>().solve(mu - truth.mu).norm();
  };

  Eigen::VectorXd mu = result.mu0;
  result.trajectory.push_back(mu);
  result.errors.push_back(whitened_error(mu));
  for (int t = 0; t < steps; ++t) {
    const PopulationStep step =
        population_em_step(mu, truth, partition, mc, seed);
    mu = step.mu_next;
    result.trajectory.push_back(mu);
    result.errors.push_back(whitened_error(mu));
    result.dropped_mass.push_back(step.dropped_mass);
    const double prev = result.errors[static_cast<std::size_t>(t)];
    result.ratios.push_back(
        prev > 1e-12 ? result.errors[static_cast<std::size_t>(t) + 1] / prev
                     : 0.0);
  }
  return result;
}

IdentifiabilityResult identifiability_experiment(int product_count,
                                                 long n_transactions,
                                                 std::uint64_t seed,
                                                 const EmConfig& config) {
  if (product_count < 1 || product_count > 8)
    throw InvalidInputError(
        "identifiability_experiment: product_count must be 1..8");
  IdentifiabilityResult result;
  const GroundTruth truth =
      generate_ground_truth(product_count, TruthKind::kGaussian, seed);
  result.truth = truth.gaussian;

  Eigen::VectorXd base(product_count);
  for (int i = 0; i < product_count; ++i)
    base[i] = truth.gaussian.mu[i] + 0.3 * std::sqrt(truth.gaussian.sigma(i, i));
  result.menus.push_back(separate_selling_menu(base));
  for (int i = 0; i < product_count; ++i) {
    Eigen::VectorXd prices = base;
    prices[i] =
        truth.gaussian.mu[i] - 0.3 * std::sqrt(truth.gaussian.sigma(i, i));
    result.menus.push_back(separate_selling_menu(prices));
  }

  GenSpec spec;
  spec.product_count = product_count;
  spec.n_transactions = static_cast<int>(n_transactions);
  spec.truth = TruthKind::kGaussian;
  spec.manual_mu = truth.gaussian.mu;
  spec.manual_sigma = truth.gaussian.sigma;
  spec.explicit_menus = result.menus;
  spec.seed = seed;
  const GenResult gen = generate_dataset(spec);

  result.fit = fit(gen.dataset, config);
  result.l1_error = l1_param_error(result.fit.params, result.truth);
  return result;
}

}  // namespace bundlesight::lab
